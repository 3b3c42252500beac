"""Envelope (RSS) secret-key quantities.

Joint densities of the envelopes are evaluated in the log domain and their
entropies integrated numerically over the truncated positive orthant. The
Rayleigh marginals have closed-form entropies, so each mutual information
only needs one joint entropy.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import specfun
from .channel import ChannelParams, det_ab, det_abe, det_pair_eve, is_degenerate, validate
from .errors import DegeneratePdf, InfiniteMI, ModelError
from .quadrature import QuadratureResult, integrate_nd
from .specfun import CHI, EULER_GAMMA

LN2 = math.log(2.0)
LOG_UNDERFLOW = -745.0
TRUNCATION_SIGMAS = 7.0
DEFAULT_TOL_2D = 1e-5
DEFAULT_TOL_3D = 1e-3
PAIRS = ("AB", "AE", "BE")


def rayleigh_entropy(total_variance: float) -> float:
    """Differential entropy in bits of a Rayleigh envelope with ``E[R^2] = total_variance``."""
    if not total_variance > 0.0 or not math.isfinite(total_variance):
        raise ModelError(f"total variance must be positive and finite, got {total_variance}")
    return 0.5 * math.log2(total_variance / 4.0) + 0.5 * (2.0 + EULER_GAMMA) / LN2


def log_rayleigh_pdf(total_variance: float, r):
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        return np.log(2.0 * r / total_variance) - r * r / total_variance


def _pair_det(params: ChannelParams, pair: str) -> float:
    if pair == "AB":
        return det_ab(params)
    if pair in ("AE", "BE"):
        return det_pair_eve(params, pair[0])
    raise ValueError(f"pair must be one of {PAIRS}, got {pair!r}")


def _check_pair(params: ChannelParams, pair: str):
    """(first party, second party, det, kappa, c1, c2) of a bivariate density."""
    validate(params)
    d = _pair_det(params, pair)
    if is_degenerate(d, params.p, 2):
        raise DegeneratePdf(f"covariance of pair {pair} is singular; the envelope density is unbounded")
    p = params.p
    if pair == "AB":
        return "A", "B", d, 2.0 * p / d, p + params.sigma_b2, p + params.sigma_a2
    party = pair[0]
    return party, "E", d, 2.0 * p * params.rho_abs / d, p + params.sigma_e2, p + params.noise(party)


def _log_pdf2(parts, r1, r2):
    _, _, d, kappa, c1, c2 = parts
    with np.errstate(divide="ignore"):
        base = math.log(4.0 / d) + np.log(r1) + np.log(r2)
    return base + specfun._log_i0_ufunc(kappa * r1 * r2) - (c1 * r1 * r1 + c2 * r2 * r2) / d


def log_pdf2(params: ChannelParams, pair: str, r1, r2):
    """Natural log of the joint envelope density of ``pair`` (``AB``, ``AE`` or ``BE``).

    ``r1`` is the first party's envelope, ``r2`` the second's. Returns ``-inf``
    where either envelope is zero.
    """
    parts = _check_pair(params, pair)
    r1, r2 = np.broadcast_arrays(np.asarray(r1, dtype=float), np.asarray(r2, dtype=float))
    if np.any(r1 < 0) or np.any(r2 < 0):
        raise ModelError("envelopes must be non-negative")
    out = _log_pdf2(parts, r1, r2)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class _TripleParts:
    det3: float
    d_ab: float
    d_ae: float
    d_be: float
    k1: float
    k2: float
    k3: float


def _check_triple(params: ChannelParams) -> _TripleParts:
    validate(params)
    d3 = det_abe(params)
    if is_degenerate(d3, params.p, 3):
        raise DegeneratePdf("covariance of (A, B, E) is singular; the envelope density is unbounded")
    p, r = params.p, params.rho_abs
    return _TripleParts(
        det3=d3,
        d_ab=det_ab(params),
        d_ae=det_pair_eve(params, "A"),
        d_be=det_pair_eve(params, "B"),
        k1=2.0 * p * (p * params.one_minus_rho2 + params.sigma_e2) / d3,
        k2=2.0 * r * p * params.sigma_b2 / d3,
        k3=2.0 * r * p * params.sigma_a2 / d3,
    )


def _log_pdf3(t: _TripleParts, ra, rb, re, rtol=1e-10):
    with np.errstate(divide="ignore"):
        base = math.log(8.0 / t.det3) + np.log(ra) + np.log(rb) + np.log(re)
    lg = specfun.log_g_unchecked(t.k1 * ra * rb, t.k2 * ra * re, t.k3 * rb * re, rtol)
    quad = (ra * ra * t.d_be + rb * rb * t.d_ae + re * re * t.d_ab) / t.det3
    return base + lg - quad


def log_pdf3(params: ChannelParams, ra, rb, re):
    """Natural log of the trivariate envelope density of ``(R_A, R_B, R_E)``."""
    t = _check_triple(params)
    ra, rb, re = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (ra, rb, re)))
    if np.any(ra < 0) or np.any(rb < 0) or np.any(re < 0):
        raise ModelError("envelopes must be non-negative")
    out = _log_pdf3(t, ra, rb, re, rtol=1e-13)
    return float(out) if np.ndim(out) == 0 else out


def truncation_radius(params: ChannelParams, party: str) -> float:
    return TRUNCATION_SIGMAS * math.sqrt(params.p + params.noise(party))


def ridge(params: ChannelParams, which: str):
    """Slope ``c`` and relative width ``w`` of the ridge ``r1 = c r2`` of a
    density, or ``None`` when the mass is not concentrated near a line."""
    p = params.p
    if which in ("AB", "ABE"):
        return 1.0, math.sqrt(params.sigma_a2 + params.sigma_b2) / (2.0 * math.sqrt(p))
    c = params.rho_abs
    if c < 0.5:
        return None
    spread = p * params.one_minus_rho2 + params.noise(which[0]) + params.sigma_e2
    return c, math.sqrt(spread) / (2.0 * c * math.sqrt(p))


def _entropy_integrand(logf):
    out = np.zeros_like(logf)
    live = logf >= LOG_UNDERFLOW
    lf = logf[live]
    out[live] = -np.exp(lf) * lf / LN2
    return out


def _mass_integrand(logf):
    out = np.zeros_like(logf)
    live = logf >= LOG_UNDERFLOW
    out[live] = np.exp(logf[live])
    return out


def _log_density_callable(params: ChannelParams, which: str):
    if which == "ABE":
        t = _check_triple(params)
        return (lambda a, b, e: _log_pdf3(t, a, b, e)), ("A", "B", "E")
    parts = _check_pair(params, which)
    return (lambda x, y: _log_pdf2(parts, x, y)), (parts[0], parts[1])


def _integrate(params, which, transform, tol, max_evals):
    logf, parties = _log_density_callable(params, which)
    upper = [truncation_radius(params, q) for q in parties]
    shape = ridge(params, which)
    if shape is None:
        return integrate_nd(
            lambda *x: transform(logf(*x)), [0.0] * len(upper), upper, tol, max_evals=max_evals
        )
    # At high SNR the mass hugs the line r1 = c r2. Integrating over
    # r1 = c s (1 - t), r2 = s (1 + t) turns that ridge into a slab around
    # t = 0, and t = w sinh(u) stretches the slab to unit width in u so the
    # first quadrature pass already resolves it. The triangle
    # s <= (R1 / c + R2) / 2 contains the truncated rectangle.
    c, w = shape
    w = min(1.0, w)
    s_max = 0.5 * (upper[0] / c + upper[1])
    u_max = math.asinh(1.0 / w)

    def integrand(s, u, *rest):
        t = np.clip(w * np.sinh(u), -1.0, 1.0)
        lf = logf(c * s * (1.0 - t), s * (1.0 + t), *rest)
        return 2.0 * c * s * w * np.cosh(u) * transform(lf)

    return integrate_nd(integrand, [0.0, -u_max] + [0.0] * (len(upper) - 2),
                        [s_max, u_max] + upper[2:], tol, max_evals=max_evals)


def joint_entropy(params: ChannelParams, which: str, tol: float | None = None, *, max_evals: int = 1 << 27) -> QuadratureResult:
    """``-int f log2 f`` over the truncated orthant, for ``AB``, ``AE``, ``BE`` or ``ABE``."""
    if tol is None:
        tol = DEFAULT_TOL_3D if which == "ABE" else DEFAULT_TOL_2D
    return _integrate(params, which, _entropy_integrand, tol, max_evals)


def total_mass(params: ChannelParams, which: str, tol: float = 1e-8, *, max_evals: int = 1 << 27) -> QuadratureResult:
    """Integral of the density over the truncated orthant (should be one)."""
    return _integrate(params, which, _mass_integrand, tol, max_evals)


@dataclass(frozen=True)
class MiEstimate:
    value: float
    error_estimate: float
    evaluations: int


def mi2(params: ChannelParams, pair: str, tol: float = DEFAULT_TOL_2D) -> MiEstimate:
    """``I(R_1; R_2) = h(R_1) + h(R_2) - h(R_1, R_2)`` in bits."""
    q1, q2, *_ = _check_pair(params, pair)
    joint = joint_entropy(params, pair, tol)
    value = (
        rayleigh_entropy(params.p + params.noise(q1))
        + rayleigh_entropy(params.p + params.noise(q2))
        - joint.value
    )
    return MiEstimate(value, joint.error_estimate, joint.evaluations)


@dataclass(frozen=True)
class CondMiEstimate:
    value: float
    error_estimate: float
    h_ae: QuadratureResult
    h_be: QuadratureResult
    h_abe: QuadratureResult


def cond_mi(params: ChannelParams, tol: float = DEFAULT_TOL_3D, *, tol_2d: float = DEFAULT_TOL_2D,
            max_evals: int = 1 << 27, joint2: dict | None = None) -> CondMiEstimate:
    """``I(R_A; R_B | R_E) = h(AE) - h(E) + h(BE) - h(ABE)``; errors add in quadrature.

    ``joint2`` may carry already computed ``AE``/``BE`` entropies.
    """
    joint2 = joint2 or {}
    h_ae = joint2.get("AE") or joint_entropy(params, "AE", tol_2d)
    h_be = joint2.get("BE") or joint_entropy(params, "BE", tol_2d)
    h_abe = joint_entropy(params, "ABE", tol, max_evals=max_evals)
    h_e = rayleigh_entropy(params.p + params.sigma_e2)
    value = h_ae.value - h_e + h_be.value - h_abe.value
    err = math.sqrt(h_ae.error_estimate**2 + h_be.error_estimate**2 + h_abe.error_estimate**2)
    return CondMiEstimate(value, err, h_ae, h_be, h_abe)


@dataclass(frozen=True)
class RssCapacityReport:
    h_ra: float
    h_rb: float
    h_re: float
    mi_ab: float
    mi_ae: float
    mi_be: float
    cond_mi_ab_given_e: float
    lower_bound: float
    upper_bound: float
    lower_bound_clamped: float
    lower_bound_error: float
    upper_bound_error: float
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


def bounds(params: ChannelParams, tol: float = DEFAULT_TOL_3D, *, tol_2d: float = DEFAULT_TOL_2D,
           max_evals: int = 1 << 27) -> RssCapacityReport:
    """Envelope lower and upper bounds with root-sum-square error estimates."""
    validate(params)
    h = {q: rayleigh_entropy(params.p + params.noise(q)) for q in "ABE"}
    joint = {w: joint_entropy(params, w, tol_2d) for w in PAIRS}
    mi = {w: h[w[0]] + h[w[1]] - joint[w].value for w in PAIRS}
    err = {w: joint[w].error_estimate for w in PAIRS}
    cm = cond_mi(params, tol, tol_2d=tol_2d, max_evals=max_evals, joint2=joint)

    eve = "AE" if mi["AE"] <= mi["BE"] else "BE"
    lb = mi["AB"] - mi[eve]
    if mi["AB"] <= cm.value:
        ub, ub_err = mi["AB"], err["AB"]
    else:
        ub, ub_err = cm.value, cm.error_estimate
    diagnostics = {
        f"h_{w.lower()}": {"error_estimate": r.error_estimate, "evaluations": r.evaluations}
        for w, r in {**joint, "ABE": cm.h_abe}.items()
    }
    return RssCapacityReport(
        h_ra=h["A"],
        h_rb=h["B"],
        h_re=h["E"],
        mi_ab=mi["AB"],
        mi_ae=mi["AE"],
        mi_be=mi["BE"],
        cond_mi_ab_given_e=cm.value,
        lower_bound=lb,
        upper_bound=ub,
        lower_bound_clamped=max(lb, 0.0),
        lower_bound_error=math.hypot(err["AB"], err[eve]),
        upper_bound_error=ub_err,
        diagnostics=diagnostics,
    )


@dataclass(frozen=True)
class RssHighSnr:
    mi_ab_asym: float
    mi_ae_asym: float
    mi_be_asym: float
    lb_asym: float
    chi: float = CHI


def high_snr(params: ChannelParams) -> RssHighSnr:
    """High-SNR envelope values: pre-log one half and a constant ``CHI`` penalty."""
    validate(params)
    p, sa, sb, se = params.p, params.sigma_a2, params.sigma_b2, params.sigma_e2
    if sa + sb <= 0.0:
        raise InfiniteMI("asymptotic envelope MI needs sA + sB > 0")
    one_m = params.one_minus_rho2

    def eve_term(s):
        return 0.5 * math.log2(p / (p * one_m + s + se))

    half_ab = 0.5 * math.log2(p / (sa + sb))
    return RssHighSnr(
        mi_ab_asym=half_ab - CHI,
        mi_ae_asym=eve_term(sa) - CHI,
        mi_be_asym=eve_term(sb) - CHI,
        lb_asym=half_ab - eve_term(params.sigma_max2),
    )


def log_pdf2_high_snr(params: ChannelParams, pair: str, r1, r2):
    """Asymptotic (Rayleigh times Gaussian) form of the pair density."""
    validate(params)
    p = params.p
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    if pair == "AB":
        s = params.sigma_a2 + params.sigma_b2
        lead, follow, shift = r1, r2, 1.0
    elif pair in ("AE", "BE"):
        s = p * params.one_minus_rho2 + params.noise(pair[0]) + params.sigma_e2
        lead, follow, shift = r2, r1, params.rho_abs
    else:
        raise ValueError(f"pair must be one of {PAIRS}, got {pair!r}")
    if not s > 0.0:
        raise DegeneratePdf("the conditional normal of the asymptotic density has zero variance")
    with np.errstate(divide="ignore"):
        out = (
            np.log(2.0 * lead / p)
            - lead * lead / p
            - (follow - shift * lead) ** 2 / s
            - 0.5 * math.log(math.pi * s)
        )
    return float(out) if np.ndim(out) == 0 else out
