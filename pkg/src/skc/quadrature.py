"""Deterministic adaptive quadrature over boxes and periods.

``integrate_nd`` is a global adaptive tensor-product Gauss-Legendre scheme:
every box is integrated with an ``m``-point rule per axis and an embedded
lower-order rule that reuses the same nodes minus the centre node. Boxes
carrying the largest error are bisected along the axes whose one-axis error
indicator dominates, until the summed error estimate meets the tolerance.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import NonFiniteIntegrand, ToleranceNotReached

DEFAULT_ORDER = {1: 15, 2: 9, 3: 7}
DEFAULT_SPLITS = {1: 8, 2: 8, 3: 6}
CHUNK_POINTS = 1 << 19


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int
    converged: bool = True


@lru_cache(maxsize=None)
def _rules(m: int):
    """Nodes on [0, 1], Gauss weights and the embedded centre-free weights."""
    if m % 2 == 0 or m < 3:
        raise ValueError("rule order must be odd and >= 3")
    x, w = np.polynomial.legendre.leggauss(m)
    keep = np.ones(m, dtype=bool)
    keep[m // 2] = False
    xs = x[keep]
    # interpolatory weights on the reduced node set: solve the moment system
    k = np.arange(xs.size)
    vander = xs[None, :] ** k[:, None]
    moments = np.where(k % 2 == 0, 2.0 / (k + 1), 0.0)
    wl = np.zeros(m)
    wl[keep] = np.linalg.solve(vander, moments)
    return (x + 1.0) / 2.0, w / 2.0, wl / 2.0


def _contract(values: np.ndarray, weights: Sequence[np.ndarray]) -> np.ndarray:
    out = values
    for w in reversed(weights):
        out = out @ w
    return out


class _Integrator:
    def __init__(self, f, ndim, order):
        self.f = f
        self.ndim = ndim
        self.m = order
        u, self.w_hi, self.w_lo = _rules(order)
        grid = np.array(list(itertools.product(u, repeat=ndim)))
        self.unit_points = grid
        self.evaluations = 0

    def evaluate(self, lo: np.ndarray, hi: np.ndarray):
        """High estimate, low estimate and per-axis indicators for a batch of boxes."""
        nb, n, m = lo.shape[0], self.ndim, self.m
        width = hi - lo
        vals = np.empty((nb, m**n))
        per_chunk = max(1, CHUNK_POINTS // m**n)
        for start in range(0, nb, per_chunk):
            stop = min(nb, start + per_chunk)
            pts = lo[start:stop, None, :] + width[start:stop, None, :] * self.unit_points[None, :, :]
            pts = pts.reshape(-1, n)
            fv = np.asarray(self.f(*pts.T), dtype=float).reshape(stop - start, m**n)
            if not np.all(np.isfinite(fv)):
                raise NonFiniteIntegrand("integrand returned non-finite values")
            vals[start:stop] = fv
        self.evaluations += nb * m**n
        vol = np.prod(width, axis=1)
        cube = vals.reshape((nb,) + (m,) * n)
        hi_w = [self.w_hi] * n
        q_hi = _contract(cube, hi_w) * vol
        q_lo = _contract(cube, [self.w_lo] * n) * vol
        axis_err = np.empty((nb, n))
        for d in range(n):
            ws = list(hi_w)
            ws[d] = self.w_lo
            axis_err[:, d] = np.abs(q_hi - _contract(cube, ws) * vol)
        return q_hi, np.abs(q_hi - q_lo), axis_err


def _initial_boxes(lower, upper, splits):
    n = lower.size
    edges = [np.linspace(lower[d], upper[d], splits + 1) for d in range(n)]
    lo, hi = [], []
    for idx in itertools.product(range(splits), repeat=n):
        lo.append([edges[d][i] for d, i in enumerate(idx)])
        hi.append([edges[d][i + 1] for d, i in enumerate(idx)])
    return np.array(lo, dtype=float), np.array(hi, dtype=float)


def _split(lo, hi, axis_err):
    """Bisect every box along the axes whose indicator is within 4x of its largest."""
    n = lo.shape[1]
    axes = axis_err >= 0.25 * axis_err.max(axis=1, keepdims=True)
    out_lo, out_hi = [], []
    for mask in itertools.product((False, True), repeat=n):
        mask = np.array(mask)
        # boxes not split along an axis contribute only the lower half pattern
        valid = np.all(axes | ~mask, axis=1)
        if not valid.any():
            continue
        l, h = lo[valid].copy(), hi[valid].copy()
        mid = 0.5 * (l + h)
        split_axes = axes[valid]
        upper_half = split_axes & mask
        lower_half = split_axes & ~mask
        l = np.where(upper_half, mid, l)
        h = np.where(lower_half, mid, h)
        out_lo.append(l)
        out_hi.append(h)
    return np.concatenate(out_lo), np.concatenate(out_hi)


def integrate_nd(
    f: Callable[..., np.ndarray],
    lower: Sequence[float],
    upper: Sequence[float],
    tol: float = 1e-8,
    *,
    order: int | None = None,
    initial_splits: int | None = None,
    max_evals: int = 1 << 27,
    raise_on_failure: bool = True,
) -> QuadratureResult:
    """Integrate a vectorised ``f(x0, x1, ...)`` over the box ``[lower, upper]``.

    ``f`` receives one 1-D coordinate array per axis and must return an array
    of the same length. Stops once the summed embedded-rule error estimate is
    below ``tol`` (absolute). When ``max_evals`` is exhausted a
    :class:`ToleranceNotReached` carrying the best estimate is raised, unless
    ``raise_on_failure`` is false, in which case that estimate is returned
    with ``converged=False``.
    """
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    ndim = lower.size
    if ndim not in (1, 2, 3) or upper.size != ndim:
        raise ValueError("integrate_nd supports boxes in 1, 2 or 3 dimensions")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if np.any(upper <= lower):
        raise ValueError("upper bounds must exceed lower bounds")
    order = order or DEFAULT_ORDER[ndim]
    splits = initial_splits or DEFAULT_SPLITS[ndim]
    engine = _Integrator(f, ndim, order)

    lo, hi = _initial_boxes(lower, upper, splits)
    q, err, axis_err = engine.evaluate(lo, hi)
    # accepted boxes are folded into running sums
    done_q = 0.0
    done_err = 0.0
    per_box = order**ndim
    while True:
        total_q = done_q + q.sum()
        total_err = done_err + err.sum()
        if total_err <= tol:
            return QuadratureResult(float(total_q), float(total_err), engine.evaluations)
        # retire boxes whose error is negligible against the remaining budget
        negligible = err <= 1e-3 * tol / max(err.size, 1)
        if negligible.any() and not negligible.all():
            done_q += q[negligible].sum()
            done_err += err[negligible].sum()
            lo, hi, q, err, axis_err = (a[~negligible] for a in (lo, hi, q, err, axis_err))
        order_idx = np.argsort(-err, kind="stable")
        cum = np.cumsum(err[order_idx])
        excess = cum[-1] + done_err - 0.5 * tol
        count = int(np.searchsorted(cum, 0.5 * excess)) + 1
        pick = np.zeros(err.size, dtype=bool)
        pick[order_idx[:count]] = True
        n_children = (2 ** (axis_err[pick] >= 0.25 * axis_err[pick].max(axis=1, keepdims=True)).sum(axis=1)).sum()
        if engine.evaluations + n_children * per_box > max_evals:
            result = QuadratureResult(float(total_q), float(total_err), engine.evaluations, converged=False)
            if raise_on_failure:
                raise ToleranceNotReached(
                    f"error estimate {total_err:.3g} above tol {tol:.3g} after "
                    f"{engine.evaluations} evaluations",
                    result,
                )
            return result
        c_lo, c_hi = _split(lo[pick], hi[pick], axis_err[pick])
        c_q, c_err, c_axis = engine.evaluate(c_lo, c_hi)
        keep = ~pick
        lo = np.concatenate([lo[keep], c_lo])
        hi = np.concatenate([hi[keep], c_hi])
        q = np.concatenate([q[keep], c_q])
        err = np.concatenate([err[keep], c_err])
        axis_err = np.concatenate([axis_err[keep], c_axis])


def integrate_periodic(f: Callable[[np.ndarray], np.ndarray], tol: float = 1e-12, *, start_nodes: int = 8, max_nodes: int = 1 << 20) -> QuadratureResult:
    """Mean of a smooth ``2 pi``-periodic ``f`` by the trapezoid rule with node doubling.

    Returns ``(1 / 2 pi) * integral_0^{2 pi} f``; stops when two successive
    refinements differ by less than ``tol``.
    """
    n = start_nodes
    total = np.asarray(f(2.0 * np.pi * np.arange(n) / n), dtype=float).sum()
    evals = n
    prev = total / n
    while n < max_nodes:
        mids = 2.0 * np.pi * (np.arange(n) + 0.5) / n
        vals = np.asarray(f(mids), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise NonFiniteIntegrand("periodic integrand returned non-finite values")
        total += vals.sum()
        evals += n
        n *= 2
        cur = total / n
        if abs(cur - prev) < tol:
            return QuadratureResult(float(cur), float(abs(cur - prev)), evals)
        prev = cur
    result = QuadratureResult(float(prev), float("inf"), evals, converged=False)
    raise ToleranceNotReached("periodic trapezoid did not converge", result)
