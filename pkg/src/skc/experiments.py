"""Single points, parameter sweeps, reference figures and validation grids.

Everything here returns plain rows (dicts keyed by the CSV column names) so
the CLI only has to serialise them.
"""

from __future__ import annotations

import csv
import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import csi, oracle, rss
from .channel import ChannelParams, noise_from_snr_db
from .errors import ModelError, NumericalError

AXES = ("snr_db", "rho", "snr_alice_db", "snr_eve_db")
MODES = ("csi", "rss", "high_snr", "oracle")

BASE_COLUMNS = [
    "p", "sigma_a2", "sigma_b2", "sigma_e2", "rho_abs",
    "csi_mi_ab", "csi_mi_ae", "csi_mi_be", "csi_cond_mi", "csi_lb", "csi_ub",
    "rss_mi_ab", "rss_mi_ae", "rss_mi_be", "rss_cond_mi", "rss_lb", "rss_ub", "rss_tol",
]
HIGH_SNR_COLUMNS = [
    "csi_mi_ab_asym", "csi_lb_asym", "csi_capacity_asym",
    "rss_mi_ab_asym", "rss_mi_ae_asym", "rss_mi_be_asym", "rss_lb_asym",
]
ORACLE_COLUMNS = ["oracle_passed", "oracle_failed_checks"]


@dataclass(frozen=True)
class SweepSpec:
    """One swept axis over a linear grid; everything else held fixed.

    SNRs are ``p / sigma^2`` in dB. ``snr_db`` moves all three SNRs together,
    ``snr_alice_db`` and ``snr_eve_db`` move one party, ``rho`` moves ``|rho|``
    (the phase of ``rho`` is kept).
    """

    axis: str
    start: float
    stop: float
    count: int
    p: float = 1.0
    snr_a_db: float = 0.0
    snr_b_db: float | None = None
    snr_e_db: float | None = None
    rho: complex = 0j
    modes: tuple = ("csi", "rss")
    tol: float = rss.DEFAULT_TOL_3D
    seed: int = 0
    samples: int = 200_000
    max_evals: int = 1 << 27

    def __post_init__(self):
        if self.axis not in AXES:
            raise ModelError(f"axis must be one of {AXES}, got {self.axis!r}")
        if self.count < 1:
            raise ModelError("grid count must be >= 1")
        if self.start > self.stop:
            raise ModelError("grid start must not exceed stop")
        bad = set(self.modes) - set(MODES)
        if bad:
            raise ModelError(f"unknown modes {sorted(bad)}; choose from {MODES}")
        if not self.tol > 0:
            raise ModelError("tol must be positive")

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)

    def base_params(self) -> ChannelParams:
        return ChannelParams.from_snr_db(self.snr_a_db, self.snr_b_db, self.snr_e_db, self.rho, self.p)

    def params_at(self, value: float) -> ChannelParams:
        base = self.base_params()
        if self.axis == "snr_db":
            s = noise_from_snr_db(self.p, value)
            return base.replace(sigma_a2=s, sigma_b2=s, sigma_e2=s)
        if self.axis == "snr_alice_db":
            return base.replace(sigma_a2=noise_from_snr_db(self.p, value))
        if self.axis == "snr_eve_db":
            return base.replace(sigma_e2=noise_from_snr_db(self.p, value))
        phase = self.rho / abs(self.rho) if abs(self.rho) > 0 else 1.0
        return base.replace(rho=complex(value * phase))


def columns(modes) -> list:
    cols = list(BASE_COLUMNS)
    if "high_snr" in modes:
        cols += HIGH_SNR_COLUMNS
    if "oracle" in modes:
        cols += ORACLE_COLUMNS
    return cols


def _clamp(v, on):
    return max(v, 0.0) if on and isinstance(v, float) and not math.isnan(v) else v


def _error_text(group: str, exc: Exception) -> str:
    return f"{group}: {type(exc).__name__}: {exc}"


def point(params: ChannelParams, tol: float = rss.DEFAULT_TOL_3D, *, modes=("csi", "rss", "high_snr"),
          clamp: bool = False, seed: int = 0, samples: int = 200_000, max_evals: int = 1 << 27) -> dict:
    """Every requested quantity at one parameter point.

    A failing group (for example a degenerate envelope density) leaves its
    columns as nan and records the reason under ``errors``; the kind of the
    first failure is kept under ``failure`` (``"model"`` or ``"numerical"``).
    """
    row = {
        "p": params.p, "sigma_a2": params.sigma_a2, "sigma_b2": params.sigma_b2,
        "sigma_e2": params.sigma_e2, "rho_abs": params.rho_abs,
    }
    errors: list = []
    failure = None
    out = {"row": row, "errors": errors, "csi": None, "rss": None, "high_snr": None, "oracle": None}

    def guard(group, fn):
        nonlocal failure
        try:
            return fn()
        except (ModelError, NumericalError, ZeroDivisionError, ValueError) as exc:
            errors.append(_error_text(group, exc))
            if failure is None:
                failure = "numerical" if isinstance(exc, (NumericalError, ZeroDivisionError)) else "model"
            return None

    if "csi" in modes:
        rep = guard("csi", lambda: csi.bounds(params))
        out["csi"] = rep
        vals = (rep.mi_ab, rep.mi_ae, rep.mi_be, rep.cond_mi_ab_given_e, rep.lower_bound, rep.upper_bound) if rep else (math.nan,) * 6
        for name, v in zip(("csi_mi_ab", "csi_mi_ae", "csi_mi_be", "csi_cond_mi", "csi_lb", "csi_ub"), vals):
            row[name] = v
        row["csi_lb"] = _clamp(row["csi_lb"], clamp)
    if "rss" in modes:
        rep = guard("rss", lambda: rss.bounds(params, tol, max_evals=max_evals))
        out["rss"] = rep
        vals = (rep.mi_ab, rep.mi_ae, rep.mi_be, rep.cond_mi_ab_given_e, rep.lower_bound, rep.upper_bound) if rep else (math.nan,) * 6
        for name, v in zip(("rss_mi_ab", "rss_mi_ae", "rss_mi_be", "rss_cond_mi", "rss_lb", "rss_ub"), vals):
            row[name] = v
        row["rss_lb"] = _clamp(row["rss_lb"], clamp)
        row["rss_tol"] = tol
    if "high_snr" in modes:
        c = guard("csi_high_snr", lambda: csi.high_snr(params))
        r = guard("rss_high_snr", lambda: rss.high_snr(params))
        out["high_snr"] = {"csi": c, "rss": r}
        row["csi_mi_ab_asym"] = c.mi_ab_asym if c else math.nan
        row["csi_lb_asym"] = c.lb_asym if c else math.nan
        row["csi_capacity_asym"] = c.capacity_asym if c else math.nan
        for name in ("mi_ab_asym", "mi_ae_asym", "mi_be_asym", "lb_asym"):
            row["rss_" + name] = getattr(r, name) if r else math.nan
    if "oracle" in modes:
        rep = guard("oracle", lambda: oracle.validate_point(params, samples, seed, tol_3d=tol))
        out["oracle"] = rep
        row["oracle_passed"] = "" if rep is None else str(rep.passed).lower()
        row["oracle_failed_checks"] = "" if rep is None else ";".join(c.name for c in rep.checks if not c.passed)
    row["error"] = " | ".join(errors)
    out["failure"] = failure
    return out


def _run_rows(jobs, axis, threads, *, seed, **kw) -> list:
    """``jobs`` holds ``(row_index, params, axis_value)``; seeds follow the row index."""
    def one(job):
        i, params, value = job
        res = point(params, seed=seed + i, **kw)
        res["row"] = {axis: float(value), **res["row"]}
        return res

    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, jobs))
    return [one(j) for j in jobs]


def sweep(spec: SweepSpec, *, clamp: bool = False, threads: int = 1) -> list:
    """Point results in ascending axis order; row ``i`` uses seed ``spec.seed + i``.

    An invalid grid point (for example ``|rho| > 1``) becomes a row whose
    ``error`` column explains the failure.
    """
    values = spec.grid()
    jobs, results = [], [None] * len(values)
    for i, v in enumerate(values):
        try:
            jobs.append((i, spec.params_at(float(v)), float(v)))
        except ModelError as exc:
            row = {spec.axis: float(v), **{c: math.nan for c in columns(spec.modes)}}
            row["error"] = _error_text("params", exc)
            results[i] = {"row": row, "errors": [row["error"]], "failure": "model"}
    computed = _run_rows(jobs, spec.axis, threads, seed=spec.seed, tol=spec.tol, modes=spec.modes,
                         clamp=clamp, samples=spec.samples, max_evals=spec.max_evals)
    for (i, _, _), res in zip(jobs, computed):
        results[i] = res
    return results


def to_json(res: dict) -> dict:
    """JSON-ready mirror of one :func:`point` result."""
    def plain(obj):
        return None if obj is None else obj.as_dict() if hasattr(obj, "as_dict") else dataclasses.asdict(obj)

    out = {"row": res["row"], "errors": res.get("errors", []), "failure": res.get("failure")}
    for key in ("csi", "rss", "oracle"):
        if res.get(key) is not None:
            out[key] = plain(res[key])
    hs = res.get("high_snr")
    if hs is not None:
        out["high_snr"] = {k: plain(v) for k, v in hs.items()}
    return out


# --------------------------------------------------------------------------
# reference figures

REFERENCE_COLUMNS = ("csi_mi_ab", "csi_lb", "csi_ub", "rss_mi_ab", "rss_lb", "rss_ub")


@dataclass(frozen=True)
class FigureSeries:
    label: str
    spec: SweepSpec


@dataclass(frozen=True)
class FigureDef:
    name: str
    axis_column: str
    series: tuple
    extra_reference: tuple = field(default=())


def figure_def(name: str, modes=("csi", "rss", "high_snr"), tol: float = rss.DEFAULT_TOL_3D,
               max_evals: int = 1 << 27) -> FigureDef:
    modes = tuple(modes)
    kw = dict(modes=modes, tol=tol, max_evals=max_evals)
    if name == "fig2":
        spec = SweepSpec("snr_db", 0.0, 30.0, 10, rho=0.9, **kw)
        return FigureDef(name, "snr_db", (FigureSeries("", spec),), ("csi_mi_ab_asym", "rss_mi_ab_asym"))
    if name == "fig4":
        return FigureDef(name, "snr_a_db", tuple(
            FigureSeries(str(s), SweepSpec("snr_alice_db", 0.0, 30.0, 6, snr_a_db=0.0, snr_b_db=s, snr_e_db=s,
                                           rho=0.6, **kw))
            for s in (5, 20)
        ))
    if name == "fig5":
        return FigureDef(name, "snr_e_db", tuple(
            FigureSeries(str(s), SweepSpec("snr_eve_db", 0.0, 30.0, 6, snr_a_db=s, snr_b_db=s, snr_e_db=0.0,
                                           rho=0.8, **kw))
            for s in (5, 20)
        ))
    raise ModelError(f"unknown figure {name!r}; choose fig2, fig4 or fig5")


def load_reference(name: str) -> list:
    """Rows of the shipped reference table for ``name`` as dicts of floats."""
    text = resources.files("skc").joinpath("data", f"{name}.csv").read_text()
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    return [{k: float(v) for k, v in r.items()} for r in csv.DictReader(lines)]


def figure(name: str, *, modes=("csi", "rss", "high_snr"), tol: float = rss.DEFAULT_TOL_3D,
           clamp: bool = False, threads: int = 1, max_evals: int = 1 << 27) -> list:
    """Recompute a reference figure and attach ``ref_*`` / ``delta_*`` columns."""
    fd = figure_def(name, modes, tol, max_evals)
    ref = load_reference(name)
    out = []
    for series in fd.series:
        rows = sweep(series.spec, clamp=clamp, threads=threads)
        if series.label:
            refs = [r for r in ref if r["set_db"] == float(series.label)]
        else:
            refs = ref
        for res, r in zip(rows, refs):
            row = res["row"]
            axis_value = row[series.spec.axis]
            if abs(r[fd.axis_column] - axis_value) > 1e-6:
                raise ModelError(f"reference grid mismatch at {axis_value}")
            extra = {"series": series.label}
            for c in REFERENCE_COLUMNS + fd.extra_reference:
                if c not in row:
                    continue
                extra[f"ref_{c}"] = r[c]
                extra[f"delta_{c}"] = row[c] - r[c]
            err = row.pop("error")
            row.update(extra)
            row["error"] = err
            out.append(res)
    return out


def figure_columns(name: str, modes) -> list:
    fd = figure_def(name, modes)
    base = columns(modes)
    refs = ["series"]
    for c in REFERENCE_COLUMNS + fd.extra_reference:
        needs = "high_snr" if c.endswith("_asym") else c.split("_", 1)[0]
        if needs in modes:
            refs += [f"ref_{c}", f"delta_{c}"]
    return [fd.series[0].spec.axis] + base + refs + ["error"]


# --------------------------------------------------------------------------
# validation grid

DEFAULT_VALIDATION_GRID = tuple((snr, rho) for snr in (0.0, 10.0, 20.0) for rho in (0.0, 0.6, 0.9))


def validation_grid(p: float = 1.0) -> list:
    return [ChannelParams.from_snr_db(snr, rho=rho, p=p) for snr, rho in DEFAULT_VALIDATION_GRID]


def validate_grid(params_list, n: int = 200_000, seed: int = 0, tol_sigma: float = 3.0,
                  tol: float = rss.DEFAULT_TOL_3D, threads: int = 1) -> list:
    """``validate_point`` on each entry with seed ``seed + index``."""
    def one(i):
        return oracle.validate_point(params_list[i], n, seed + i, tol_sigma, tol_3d=tol)

    if threads > 1 and len(params_list) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, range(len(params_list))))
    return [one(i) for i in range(len(params_list))]


VALIDATION_COLUMNS = ["row", "p", "sigma_a2", "sigma_b2", "sigma_e2", "rho_abs", "check", "kind",
                      "estimate", "reference", "sigma", "distance", "passed"]


def validation_rows(reports) -> list:
    rows = []
    for i, rep in enumerate(reports):
        pr = rep.params
        for c in rep.checks:
            rows.append({
                "row": i, "p": pr.p, "sigma_a2": pr.sigma_a2, "sigma_b2": pr.sigma_b2,
                "sigma_e2": pr.sigma_e2, "rho_abs": pr.rho_abs, "check": c.name, "kind": c.kind,
                "estimate": c.estimate, "reference": c.reference, "sigma": c.sigma,
                "distance": c.distance, "passed": str(c.passed).lower(),
            })
    return rows
