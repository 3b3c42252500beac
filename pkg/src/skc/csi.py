"""Closed-form secret-key quantities for complex channel-estimate sampling.

Every mutual information is in bits per observation. The lower bound is
``I(A;B) - min(I(A;E), I(B;E))`` and is reported raw (it may be negative);
the upper bound is ``min(I(A;B), I(A;B|E))``, which always equals the
conditional term for jointly Gaussian observations.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .channel import ChannelParams, covariance, det_abe, det_pair_eve, validate
from .errors import AsymptoticUndefined, DegenerateCovariance, InfiniteMI

LOG2E = 1.0 / math.log(2.0)


def _log2_1p(x: float) -> float:
    return math.log1p(x) * LOG2E


def mi_ab(params: ChannelParams) -> float:
    """``I(H_A; H_B) = log2(1 + p / (sA + sB + sA sB / p))``."""
    validate(params)
    p, sa, sb = params.p, params.sigma_a2, params.sigma_b2
    denom = sa + sb + sa * sb / p
    if denom <= 0.0:
        raise InfiniteMI("I(A;B) is infinite when both legitimate noises vanish")
    return _log2_1p(p / denom)


def mi_with_eve(params: ChannelParams, party: str = "A") -> float:
    """``I(H_party; H_E)`` for ``party`` in ``{"A", "B"}``."""
    if party not in ("A", "B"):
        raise ValueError(f"party must be 'A' or 'B', got {party!r}")
    validate(params)
    p, s, se = params.p, params.noise(party), params.sigma_e2
    r2 = params.rho_abs2
    if r2 == 0.0:
        return 0.0
    denom = p * params.one_minus_rho2 + s + se + s * se / p
    if denom <= 0.0:
        raise InfiniteMI("I(party;E) is infinite for |rho| = 1 without noise")
    return _log2_1p(p * r2 / denom)


def cond_mi(params: ChannelParams) -> float:
    """``I(H_A; H_B | H_E) = log2(|C_AE| |C_BE| / ((p + sE) |C_ABE|))``."""
    validate(params)
    d3 = det_abe(params)
    if not d3 > 0.0:
        raise DegenerateCovariance("|C_ABE| vanishes; the conditional MI is unbounded")
    if params.rho_abs2 == 0.0:
        return mi_ab(params)
    d_ae = det_pair_eve(params, "A")
    d_be = det_pair_eve(params, "B")
    ratio = d_ae * d_be / ((params.p + params.sigma_e2) * d3)
    return math.log2(ratio)


def cond_mi_from_matrices(params: ChannelParams) -> float:
    """Same quantity from numerically computed determinants (self-check path)."""
    dets = {w: float(np.linalg.det(covariance(params, w).matrix).real) for w in ("AE", "BE", "ABE")}
    return math.log2(dets["AE"] * dets["BE"] / ((params.p + params.sigma_e2) * dets["ABE"]))


def mi_ab_from_matrices(params: ChannelParams) -> float:
    c = covariance(params, "AB").matrix
    return math.log2((c[0, 0] * c[1, 1]).real / float(np.linalg.det(c).real))


@dataclass(frozen=True)
class CsiCapacityReport:
    mi_ab: float
    mi_ae: float
    mi_be: float
    cond_mi_ab_given_e: float
    lower_bound: float
    upper_bound: float
    lower_bound_clamped: float
    rho_zero: bool
    sigma_a_zero: bool
    sigma_b_zero: bool

    @property
    def tight(self) -> bool:
        """True in the three cases where LB and UB coincide analytically."""
        return self.rho_zero or self.sigma_a_zero or self.sigma_b_zero

    def as_dict(self) -> dict:
        return asdict(self)


def bounds(params: ChannelParams) -> CsiCapacityReport:
    i_ab = mi_ab(params)
    i_ae = mi_with_eve(params, "A")
    i_be = mi_with_eve(params, "B")
    i_cond = cond_mi(params)
    lb = i_ab - min(i_ae, i_be)
    return CsiCapacityReport(
        mi_ab=i_ab,
        mi_ae=i_ae,
        mi_be=i_be,
        cond_mi_ab_given_e=i_cond,
        lower_bound=lb,
        upper_bound=min(i_ab, i_cond),
        lower_bound_clamped=max(lb, 0.0),
        rho_zero=params.rho_abs2 == 0.0,
        sigma_a_zero=params.sigma_a2 == 0.0,
        sigma_b_zero=params.sigma_b2 == 0.0,
    )


@dataclass(frozen=True)
class Thresholds:
    sigma_e2_min: float
    rho_sq_max: float


def thresholds(params: ChannelParams) -> Thresholds:
    """Eve noise floor and correlation ceiling for a positive lower bound.

    The lower bound is positive iff ``sigma_e2 > sigma_e2_min``, equivalently
    ``|rho|^2 < rho_sq_max``.
    """
    validate(params)
    p, r2, smin = params.p, params.rho_abs2, params.sigma_min2
    return Thresholds(
        sigma_e2_min=-p * params.one_minus_rho2 + r2 * smin,
        rho_sq_max=(p + params.sigma_e2) / (p + smin),
    )


def lb_positive_predicate(params: ChannelParams) -> bool:
    return params.sigma_e2 > thresholds(params).sigma_e2_min


@dataclass(frozen=True)
class CsiHighSnr:
    mi_ab_asym: float
    lb_asym: float
    capacity_asym: float
    capacity_valid: bool = True


def capacity_asym(params: ChannelParams) -> float:
    """``log2(p (1 - |rho|^2) / (sA + sB))``, the common limit of both bounds."""
    validate(params)
    if params.rho_abs >= 1.0:
        raise AsymptoticUndefined("capacity asymptote is undefined for |rho| = 1")
    ssum = params.sigma_a2 + params.sigma_b2
    if ssum <= 0.0:
        raise InfiniteMI("asymptotic capacity needs sA + sB > 0")
    return math.log2(params.p * params.one_minus_rho2 / ssum)


def high_snr(params: ChannelParams) -> CsiHighSnr:
    """Leading high-SNR terms (pre-log one). ``capacity_asym`` is nan, and
    flagged invalid, at ``|rho| = 1``."""
    validate(params)
    p, se = params.p, params.sigma_e2
    ssum = params.sigma_a2 + params.sigma_b2
    if ssum <= 0.0:
        raise InfiniteMI("asymptotic I(A;B) needs sA + sB > 0")
    mi_asym = math.log2(p / ssum)
    lb_asym = mi_asym - math.log2(p / (p * params.one_minus_rho2 + params.sigma_max2 + se))
    try:
        cap, ok = capacity_asym(params), True
    except AsymptoticUndefined:
        cap, ok = math.nan, False
    return CsiHighSnr(mi_ab_asym=mi_asym, lb_asym=lb_asym, capacity_asym=cap, capacity_valid=ok)
