"""Monte Carlo oracle: seeded channel draws and nonparametric estimators.

The sampler is built on the Philox counter-based generator. Samples are
produced in fixed-size chunks and chunk ``j`` draws from counter block ``j``,
so sample ``i`` depends only on ``(seed, i)`` and chunks can be generated in
any order.

``mi_knn`` is the Kraskov-Stoegbauer-Grassberger estimator (first variant,
max-norm). Its standard error comes from disjoint batches: the estimator is
recomputed on ``batches`` equal slices and the spread of those values,
divided by ``sqrt(batches)``, estimates the spread of the full-sample value.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numba
import numpy as np
from scipy.spatial import cKDTree
from scipy.special import digamma

from . import csi, rss
from .channel import ChannelParams, validate
from .errors import NonFiniteLogDensity, TooFewSamples

CHUNK = 1 << 16
TWO_PI = 2.0 * math.pi
PARTIES = "ABE"


def _philox(seed: int, block: int) -> np.random.Generator:
    key = int(seed) & ((1 << 64) - 1)
    return np.random.Generator(np.random.Philox(key=key, counter=[0, 0, block, 0]))


def _complex_normals(gen: np.random.Generator, m: int, count: int) -> np.ndarray:
    """``count`` columns of unit-variance circular complex Gaussians."""
    z = gen.standard_normal((m, 2 * count))
    return (z[:, :count] + 1j * z[:, count:]) * math.sqrt(0.5)


@dataclass(frozen=True)
class SampleBatch:
    """``n`` draws of ``(H_A, H_B, H_E)`` with envelope and phase views."""

    params: ChannelParams
    n: int
    seed: int
    triples: np.ndarray = field(repr=False)

    @property
    def envelopes(self) -> np.ndarray:
        return np.abs(self.triples)

    @property
    def phases(self) -> np.ndarray:
        return np.mod(np.angle(self.triples), TWO_PI)

    def column(self, party: str) -> np.ndarray:
        return self.triples[:, PARTIES.index(party)]

    def complex_view(self, party: str) -> np.ndarray:
        """``(n, 2)`` real/imaginary view."""
        h = self.column(party)
        return np.column_stack([h.real, h.imag])

    def envelope(self, party: str) -> np.ndarray:
        return np.abs(self.column(party))

    def phase(self, party: str) -> np.ndarray:
        return np.mod(np.angle(self.column(party)), TWO_PI)


def sample(params: ChannelParams, n: int, seed: int) -> SampleBatch:
    """Draw ``n`` observation triples; identical inputs give identical output."""
    validate(params)
    if n < 1:
        raise ValueError("n must be >= 1")
    sp = math.sqrt(params.p)
    rho_c = np.conj(params.rho)
    root = math.sqrt(params.one_minus_rho2)
    noise_sd = np.sqrt([params.sigma_a2, params.sigma_b2, params.sigma_e2])
    out = np.empty((n, 3), dtype=complex)
    for block, start in enumerate(range(0, n, CHUNK)):
        m = min(CHUNK, n - start)
        z = _complex_normals(_philox(seed, block), m, 5)
        h = sp * z[:, 0]
        h_e = sp * (rho_c * z[:, 0] + root * z[:, 1])
        w = z[:, 2:] * noise_sd
        out[start:start + m, 0] = h + w[:, 0]
        out[start:start + m, 1] = h + w[:, 1]
        out[start:start + m, 2] = h_e + w[:, 2]
    return SampleBatch(params=params, n=n, seed=int(seed), triples=out)


# --------------------------------------------------------------------------
# KSG mutual information


@numba.njit(cache=True)
def _count_grid_2d(x, y, eps, h, x0, y0, nx, ny):
    """Number of other points within max-norm distance < eps[i] (2-D)."""
    n = x.size
    cell = np.empty(n, dtype=np.int64)
    for i in range(n):
        cx = min(int((x[i] - x0) / h), nx - 1)
        cy = min(int((y[i] - y0) / h), ny - 1)
        cell[i] = cx * ny + cy
    order = np.argsort(cell, kind="mergesort")
    start = np.zeros(nx * ny + 1, dtype=np.int64)
    for i in range(n):
        start[cell[i] + 1] += 1
    for c in range(nx * ny):
        start[c + 1] += start[c]
    counts = np.empty(n, dtype=np.int64)
    for i in range(n):
        e = eps[i]
        lo_x = max(int((x[i] - e - x0) / h), 0)
        hi_x = min(int((x[i] + e - x0) / h), nx - 1)
        lo_y = max(int((y[i] - e - y0) / h), 0)
        hi_y = min(int((y[i] + e - y0) / h), ny - 1)
        c = 0
        for gx in range(lo_x, hi_x + 1):
            for gy in range(lo_y, hi_y + 1):
                g = gx * ny + gy
                for q in range(start[g], start[g + 1]):
                    j = order[q]
                    if abs(x[j] - x[i]) < e and abs(y[j] - y[i]) < e:
                        c += 1
        counts[i] = c - 1
    return counts


def _count_1d(v: np.ndarray, eps: np.ndarray, periodic: bool) -> np.ndarray:
    s = np.sort(v)
    if periodic:
        s = np.concatenate([s - TWO_PI, s, s + TWO_PI])
        eps = np.minimum(eps, math.pi)
    lo = np.searchsorted(s, v - eps, side="right")
    hi = np.searchsorted(s, v + eps, side="left")
    return hi - lo - 1


def _count_marginal(m: np.ndarray, eps: np.ndarray, periodic: bool) -> np.ndarray:
    if m.shape[1] == 1:
        return _count_1d(m[:, 0], eps, periodic)
    if periodic:
        raise ValueError("periodic marginals must be one-dimensional")
    x, y = m[:, 0], m[:, 1]
    span = max(np.ptp(x), np.ptp(y), 1e-300)
    h = max(0.5 * float(np.median(eps)), span / 2048.0)
    nx = int(np.ptp(x) / h) + 1
    ny = int(np.ptp(y) / h) + 1
    return _count_grid_2d(x, y, eps, h, float(x.min()), float(y.min()), nx, ny)


def _joint_eps(xy: np.ndarray, k: int, periodic_dims: np.ndarray) -> np.ndarray:
    if periodic_dims.any():
        # toroidal tree; non-periodic axes get a box wide enough never to wrap
        shifted = xy - np.where(periodic_dims, 0.0, xy.min(axis=0))
        box = np.where(periodic_dims, TWO_PI, 3.0 * np.ptp(xy, axis=0) + 1.0)
        tree = cKDTree(np.mod(shifted, box), boxsize=box)
        d, _ = tree.query(np.mod(shifted, box), k + 1, p=np.inf)
    else:
        d, _ = cKDTree(xy).query(xy, k + 1, p=np.inf)
    return d[:, -1]


def _as_2d(v) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    return a[:, None] if a.ndim == 1 else a


def _ksg(x, y, k, px, py) -> float:
    n = x.shape[0]
    periodic = np.array([px] * x.shape[1] + [py] * y.shape[1])
    eps = _joint_eps(np.hstack([x, y]), k, periodic)
    nx = _count_marginal(x, eps, px)
    ny = _count_marginal(y, eps, py)
    nats = digamma(k) + digamma(n) - np.mean(digamma(nx + 1) + digamma(ny + 1))
    return float(nats / math.log(2.0))


@dataclass(frozen=True)
class Estimate:
    value: float
    standard_error: float
    n: int


def mi_knn(x, y, k: int = 4, *, periodic_x: bool = False, periodic_y: bool = False,
           batches: int = 20) -> Estimate:
    """KSG estimate of ``I(X; Y)`` in bits for 1-D or 2-D real views.

    ``periodic_*`` marks a 1-D variable living on ``[0, 2 pi)`` (a phase).
    """
    x, y = _as_2d(x), _as_2d(y)
    n = x.shape[0]
    if y.shape[0] != n:
        raise ValueError("x and y must hold the same number of samples")
    if n < 10 * k:
        raise TooFewSamples(f"need at least {10 * k} samples, got {n}")
    for arr, per in ((x, periodic_x), (y, periodic_y)):
        if arr.shape[1] not in (1, 2) or (per and arr.shape[1] != 1):
            raise ValueError("views must be 1-D or 2-D, periodic views 1-D")
    value = _ksg(x, y, k, periodic_x, periodic_y)
    batches = min(batches, n // (10 * k))
    if batches < 2:
        return Estimate(value, math.nan, n)
    size = n // batches
    parts = [
        _ksg(x[b * size:(b + 1) * size], y[b * size:(b + 1) * size], k, periodic_x, periodic_y)
        for b in range(batches)
    ]
    se = float(np.std(parts, ddof=1) / math.sqrt(batches))
    return Estimate(value, se, n)


def entropy_resub(log_pdf_values) -> Estimate:
    """Resubstitution entropy ``-mean(log2 f)`` from log-density values at samples."""
    lf = np.asarray(log_pdf_values, dtype=float).ravel()
    if not np.all(np.isfinite(lf)):
        raise NonFiniteLogDensity("log density is not finite at every sample")
    bits = -lf / math.log(2.0)
    return Estimate(float(bits.mean()), float(bits.std(ddof=1) / math.sqrt(bits.size)), bits.size)


# --------------------------------------------------------------------------
# validation bundle


@dataclass(frozen=True)
class Check:
    name: str
    kind: str  # "equal" or "geq"
    estimate: float
    reference: float
    sigma: float
    passed: bool

    @property
    def distance(self) -> float:
        """Signed distance in standard errors."""
        return (self.estimate - self.reference) / self.sigma if self.sigma > 0 else math.inf


@dataclass
class ValidationReport:
    params: ChannelParams
    n: int
    seed: int
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def by_name(self, name: str) -> Check:
        return next(c for c in self.checks if c.name == name)

    def as_dict(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "n": self.n,
            "seed": self.seed,
            "passed": self.passed,
            "checks": [dict(asdict(c), distance=c.distance) for c in self.checks],
        }


def _equal(name, est, ref, sigma, tol_sigma):
    return Check(name, "equal", est, ref, sigma, abs(est - ref) <= tol_sigma * sigma)


def _geq(name, est, ref, sigma, tol_sigma):
    return Check(name, "geq", est, ref, sigma, est - ref >= -tol_sigma * sigma)


def validate_point(params: ChannelParams, n: int = 200_000, seed: int = 0, tol_sigma: float = 3.0,
                   *, k: int = 4, tol_3d: float = rss.DEFAULT_TOL_3D) -> ValidationReport:
    """Cross-check closed forms and quadrature against Monte Carlo at one point."""
    validate(params)
    batch = sample(params, n, seed)
    report = ValidationReport(params=params, n=n, seed=int(seed))
    add = report.checks.append

    # closed-form complex MIs against KSG on real/imaginary views
    closed = {"AB": csi.mi_ab(params), "AE": csi.mi_with_eve(params, "A"), "BE": csi.mi_with_eve(params, "B")}
    knn_c = {w: mi_knn(batch.complex_view(w[0]), batch.complex_view(w[1]), k) for w in closed}
    for w, ref in closed.items():
        add(_equal(f"csi_mi_{w.lower()}", knn_c[w].value, ref, knn_c[w].standard_error, tol_sigma))

    # quadrature entropies against resubstitution with the analytic densities
    env = batch.envelopes
    for i, q in enumerate(PARTIES):
        total = params.p + params.noise(q)
        est = entropy_resub(rss.log_rayleigh_pdf(total, env[:, i]))
        add(_equal(f"h_r{q.lower()}", est.value, rss.rayleigh_entropy(total), est.standard_error, tol_sigma))
    for w in ("AB", "AE", "BE"):
        i, j = PARTIES.index(w[0]), PARTIES.index(w[1])
        est = entropy_resub(rss.log_pdf2(params, w, env[:, i], env[:, j]))
        quad = rss.joint_entropy(params, w)
        add(_equal(f"h_{w.lower()}", est.value, quad.value, math.hypot(est.standard_error, quad.error_estimate), tol_sigma))
    est = entropy_resub(rss.log_pdf3(params, env[:, 0], env[:, 1], env[:, 2]))
    quad = rss.joint_entropy(params, "ABE", tol_3d)
    add(_equal("h_abe", est.value, quad.value, math.hypot(est.standard_error, quad.error_estimate), tol_sigma))

    # envelope sufficiency: Bob / Eve lose nothing by keeping only the envelope
    knn_r = {w: mi_knn(batch.envelope(w[0]), batch.envelope(w[1]), k) for w in ("AB", "AE", "BE")}
    for a, other in (("A", "B"), ("A", "E"), ("B", "E")):
        full = mi_knn(batch.envelope(a), batch.complex_view(other), k)
        env_only = knn_r[a + other]
        add(_equal(f"envelope_sufficiency_r{a.lower()}_h{other.lower()}", full.value, env_only.value,
                   math.hypot(full.standard_error, env_only.standard_error), tol_sigma))

    # splitting into envelope and phase loses information
    for w in ("AB", "AE"):
        ph = mi_knn(batch.phase(w[0]), batch.phase(w[1]), k, periodic_x=True, periodic_y=True)
        parts = knn_r[w].value + ph.value
        sigma = math.sqrt(knn_c[w].standard_error**2 + knn_r[w].standard_error**2 + ph.standard_error**2)
        add(_geq(f"polar_split_loss_{w.lower()}", knn_c[w].value, parts, sigma, tol_sigma))
    return report
