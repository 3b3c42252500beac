"""Recompute the reference figures and report the largest deltas per column.

    python3 scripts/reproduce_figures.py --out-dir results/ [--tol 1e-3]
"""

import argparse
import math
import pathlib
import time

from skc import cli, experiments as ex


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--tol", type=float, default=1e-3)
    ap.add_argument("--figures", nargs="+", default=["fig2", "fig4", "fig5"])
    args = ap.parse_args()
    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    modes = ("csi", "rss", "high_snr")
    for name in args.figures:
        t0 = time.perf_counter()
        results = ex.figure(name, modes=modes, tol=args.tol)
        rows = [r["row"] for r in results]
        cols = ex.figure_columns(name, modes)
        (out / f"{name}.csv").write_text(cli.render_csv(rows, cols))
        print(f"{name}: {len(rows)} rows in {time.perf_counter() - t0:.1f}s -> {out / (name + '.csv')}")
        for c in (c for c in cols if c.startswith("delta_")):
            worst = max(abs(r[c]) for r in rows if not math.isnan(r[c]))
            print(f"   max |{c}| = {worst:.2e}")


if __name__ == "__main__":
    main()
