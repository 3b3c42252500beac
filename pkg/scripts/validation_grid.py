"""Run the Monte Carlo cross-checks on the default 9-point grid and summarise.

    python3 scripts/validation_grid.py [--samples 200000] [--seed 0] [--out report.json]
"""

import argparse

from skc import cli, experiments as ex


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tol-sigma", type=float, default=3.0)
    ap.add_argument("--out")
    args = ap.parse_args()
    reports = ex.validate_grid(ex.validation_grid(), args.samples, args.seed, args.tol_sigma)
    for (snr, rho), rep in zip(ex.DEFAULT_VALIDATION_GRID, reports):
        bad = [f"{c.name} ({c.distance:+.1f} sd)" for c in rep.checks if not c.passed]
        print(f"SNR {snr:4.0f} dB  rho {rho:.1f}  {'pass' if not bad else 'FAIL: ' + ', '.join(bad)}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(cli.render_json({"reports": [r.as_dict() for r in reports]}))
    return 0 if all(r.passed for r in reports) else 1


if __name__ == "__main__":
    raise SystemExit(main())
