"""Reciprocal channel model shared by Alice, Bob and a correlated eavesdropper.

Alice and Bob observe ``H + W_A`` and ``H + W_B``; Eve observes ``H_E + W_E``
where ``(H, H_E)`` is a zero-mean circularly-symmetric complex Gaussian pair
with variance ``p`` and correlation ``rho``. Every quantity downstream is a
function of the five scalars held by :class:`ChannelParams`.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CorrelationOutOfRange,
    NegativeNoise,
    NonFinite,
    NonPositiveChannelVariance,
)

SELECTORS = ("AB", "AE", "BE", "ABE")


@dataclass(frozen=True)
class ChannelParams:
    """Model scalars in linear power units.

    ``rho`` is kept complex even though every capacity depends on ``|rho|``
    only; the sampler uses the phase.
    """

    p: float
    sigma_a2: float
    sigma_b2: float
    sigma_e2: float
    rho: complex = 0j

    def __post_init__(self):
        for name in ("p", "sigma_a2", "sigma_b2", "sigma_e2"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "rho", complex(self.rho))
        validate(self)

    @classmethod
    def from_snr_db(cls, snr_a_db, snr_b_db=None, snr_e_db=None, rho=0j, p=1.0):
        """Build parameters from per-party SNRs ``p / sigma^2`` in dB.

        Missing Bob/Eve SNRs default to Alice's.
        """
        snr_b_db = snr_a_db if snr_b_db is None else snr_b_db
        snr_e_db = snr_a_db if snr_e_db is None else snr_e_db
        return cls(
            p=p,
            sigma_a2=noise_from_snr_db(p, snr_a_db),
            sigma_b2=noise_from_snr_db(p, snr_b_db),
            sigma_e2=noise_from_snr_db(p, snr_e_db),
            rho=rho,
        )

    @property
    def rho_abs(self) -> float:
        return abs(self.rho)

    @property
    def rho_abs2(self) -> float:
        return abs(self.rho) ** 2

    @property
    def one_minus_rho2(self) -> float:
        # factored form keeps precision as |rho| -> 1
        r = abs(self.rho)
        return (1.0 - r) * (1.0 + r)

    @property
    def sigma_max2(self) -> float:
        """``max(sigma_a2, sigma_b2)``, the noisier legitimate party."""
        return max(self.sigma_a2, self.sigma_b2)

    @property
    def sigma_min2(self) -> float:
        return min(self.sigma_a2, self.sigma_b2)

    def noise(self, party: str) -> float:
        return {"A": self.sigma_a2, "B": self.sigma_b2, "E": self.sigma_e2}[party]

    def replace(self, **changes) -> "ChannelParams":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return {
            "p": self.p,
            "sigma_a2": self.sigma_a2,
            "sigma_b2": self.sigma_b2,
            "sigma_e2": self.sigma_e2,
            "rho_re": self.rho.real,
            "rho_im": self.rho.imag,
            "rho_abs": self.rho_abs,
        }


def validate(params: ChannelParams) -> ChannelParams:
    """Return ``params`` unchanged if all model constraints hold, else raise."""
    values = (params.p, params.sigma_a2, params.sigma_b2, params.sigma_e2)
    if not all(math.isfinite(v) for v in values) or not (
        math.isfinite(params.rho.real) and math.isfinite(params.rho.imag)
    ):
        raise NonFinite(f"non-finite channel parameter in {params!r}")
    if params.p <= 0.0:
        raise NonPositiveChannelVariance(f"channel variance must be > 0, got {params.p}")
    for name in ("sigma_a2", "sigma_b2", "sigma_e2"):
        if getattr(params, name) < 0.0:
            raise NegativeNoise(f"{name} must be >= 0, got {getattr(params, name)}")
    if abs(params.rho) > 1.0:
        raise CorrelationOutOfRange(f"|rho| must be <= 1, got {abs(params.rho)}")
    return params


def snr_db(p: float, sigma2: float) -> float:
    """``10 log10(p / sigma2)``."""
    return 10.0 * math.log10(p / sigma2)


def noise_from_snr_db(p: float, snr: float) -> float:
    """Noise variance giving ``p / sigma2`` equal to ``snr`` dB."""
    return p * 10.0 ** (-snr / 10.0)


@dataclass(frozen=True)
class HermitianCov:
    """Covariance of a Gaussian observation vector with its determinant."""

    which: str
    matrix: np.ndarray
    det: float

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


def det_ab(params: ChannelParams) -> float:
    sa, sb = params.sigma_a2, params.sigma_b2
    return params.p * (sa + sb) + sa * sb


def det_pair_eve(params: ChannelParams, party: str) -> float:
    """Determinant of the Alice/Eve (``party="A"``) or Bob/Eve covariance."""
    p, s, se = params.p, params.noise(party), params.sigma_e2
    return p * p * params.one_minus_rho2 + p * (s + se) + s * se


def det_abe(params: ChannelParams) -> float:
    # every term is non-negative, so no cancellation near singular points
    p, sa, sb, se = params.p, params.sigma_a2, params.sigma_b2, params.sigma_e2
    return p * p * params.one_minus_rho2 * (sa + sb) + p * se * (sa + sb) + (p + se) * sa * sb


def covariance(params: ChannelParams, which: str) -> HermitianCov:
    """Covariance matrix of the selected observations (``AB``, ``AE``, ``BE``, ``ABE``)."""
    validate(params)
    p, rho = params.p, params.rho
    a, b, e = p + params.sigma_a2, p + params.sigma_b2, p + params.sigma_e2
    if which == "AB":
        m = np.array([[a, p], [p, b]], dtype=complex)
        det = det_ab(params)
    elif which == "AE":
        m = np.array([[a, rho * p], [np.conj(rho) * p, e]], dtype=complex)
        det = det_pair_eve(params, "A")
    elif which == "BE":
        m = np.array([[b, rho * p], [np.conj(rho) * p, e]], dtype=complex)
        det = det_pair_eve(params, "B")
    elif which == "ABE":
        m = np.array(
            [
                [a, p, rho * p],
                [p, b, rho * p],
                [np.conj(rho) * p, np.conj(rho) * p, e],
            ],
            dtype=complex,
        )
        det = det_abe(params)
    else:
        raise ValueError(f"unknown selector {which!r}, expected one of {SELECTORS}")
    return HermitianCov(which=which, matrix=m, det=det)


def is_degenerate(det: float, p: float, dim: int, threshold: float = 1e-14) -> bool:
    """True when a determinant is numerically zero on the ``p**dim`` scale."""
    return det <= threshold * p**dim
