"""Sample moments and the three censored correlation estimators.

r1: censored sample Pearson coefficient of the exponential pair.
r2: censored xi-transform of the Rayleigh-pair Pearson coefficient.
r3: censored eta-transform of the squared cosine similarity of the
    Rayleigh pair (an approximate-ML construction).

All three clamp negative raw statistics to zero; the pre-censoring
value is kept on the Estimate for diagnostics, because the censoring
frequency is itself a quantity of interest in the Monte Carlo harness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateSampleError, DomainError
from .model import MomentSet
from .sampling import PairedSample

__all__ = [
    "EXPONENTIAL",
    "RAYLEIGH",
    "XI_GAIN",
    "ETA_OFFSET",
    "ETA_GAIN",
    "SampleMoments",
    "Estimate",
    "sample_moments",
    "pearson_stat",
    "cos2_stat",
    "xi_transform",
    "eta_transform",
    "r1_from_moments",
    "r2_from_moments",
    "r3_from_moments",
    "estimate_r1",
    "estimate_r2",
    "estimate_r3",
]

EXPONENTIAL = "exponential"
RAYLEIGH = "rayleigh"

# Calibration constants of the two inverse transforms.  They are fixed
# by construction of the estimators, not fitted here; the residual
# inversion error they leave is measured in the tests, not assumed.
XI_GAIN = 49.0 / 500.0
ETA_OFFSET = math.pi**2 / 16.0
ETA_GAIN = 7.0 / 12.0


@dataclass(frozen=True)
class SampleMoments(MomentSet):
    """MomentSet computed from data, tagged with family and sample size."""

    family: str = EXPONENTIAL
    n: int = 0

    def __post_init__(self):
        if self.family not in (EXPONENTIAL, RAYLEIGH):
            raise DomainError(f"unknown family {self.family!r}")
        if self.n < 1:
            raise DomainError("sample moments need n >= 1")


@dataclass(frozen=True)
class Estimate:
    """A censored estimate: value = max(raw, 0), censored = (raw < 0)."""

    value: float
    raw: float
    censored: bool


def _fsum_mean(values, n: int) -> float:
    # math.fsum is exact, which makes every sample moment (and hence
    # every estimator) independent of pair ordering.
    return math.fsum(values) / n


def sample_moments(s: PairedSample, family: str = EXPONENTIAL) -> SampleMoments:
    """The five joint sample moments m_kn = mean(a^kappa b^nu), kappa+nu <= 2."""
    if family == EXPONENTIAL:
        a, b = s.u, s.w
    elif family == RAYLEIGH:
        a, b = s.v, s.z
    else:
        raise DomainError(f"unknown family {family!r}")
    n = s.n
    return SampleMoments(
        m10=_fsum_mean(a.tolist(), n),
        m01=_fsum_mean(b.tolist(), n),
        m20=_fsum_mean((a * a).tolist(), n),
        m02=_fsum_mean((b * b).tolist(), n),
        m11=_fsum_mean((a * b).tolist(), n),
        family=family,
        n=n,
    )


def pearson_stat(m: SampleMoments) -> float:
    """Sample Pearson correlation from the five moments.

    Uses the population-style 1/n moments directly, i.e. variances are
    m20 - m10^2 without the n/(n-1) correction.
    """
    var_a = m.m20 - m.m10 * m.m10
    var_b = m.m02 - m.m01 * m.m01
    if var_a <= 0.0 or var_b <= 0.0:
        raise DegenerateSampleError("zero sample variance: correlation undefined")
    s = (m.m11 - m.m10 * m.m01) / math.sqrt(var_a * var_b)
    # Cauchy-Schwarz caps |s| at 1 up to roundoff; no clamping is
    # applied (there is no upper censoring in the estimators).
    assert abs(s) <= 1.0 + 1e-12
    return s


def cos2_stat(m: SampleMoments) -> float:
    """Squared cosine similarity m11^2 / (m20 m02) of a Rayleigh sample."""
    if m.family != RAYLEIGH:
        raise DomainError("cos2_stat is defined on Rayleigh-family moments")
    if m.m20 <= 0.0 or m.m02 <= 0.0:
        raise DegenerateSampleError("zero second moment: cosine similarity undefined")
    c2 = (m.m11 * m.m11) / (m.m20 * m.m02)
    assert c2 <= 1.0 + 1e-12
    return c2


def xi_transform(s: float) -> float:
    """Correction mapping the Rayleigh-pair Pearson coefficient toward r.

    xi(s) = s (1 + g (1 - s)) with g = 49/500, calibrated so that the
    transform approximately inverts the population nonlinearity between
    the Rayleigh correlation and r.
    """
    return s * (1.0 + XI_GAIN * (1.0 - s))


def eta_transform(c2: float) -> float:
    """Correction mapping squared cosine similarity toward r.

    eta(c2) = (c2 - a)/(1 - a) * (1 + b (1 - c2)) with a = pi^2/16 and
    b = 7/12; a is the r = 0 limit of the statistic, so eta(a) = 0 and
    eta(1) = 1.
    """
    return (c2 - ETA_OFFSET) / (1.0 - ETA_OFFSET) * (1.0 + ETA_GAIN * (1.0 - c2))


def _censor(raw: float) -> Estimate:
    if raw < 0.0:
        return Estimate(value=0.0, raw=raw, censored=True)
    return Estimate(value=raw, raw=raw, censored=False)


def r1_from_moments(m: SampleMoments) -> Estimate:
    if m.family != EXPONENTIAL:
        raise DomainError("r1 uses exponential-family moments")
    return _censor(pearson_stat(m))


def r2_from_moments(m: SampleMoments) -> Estimate:
    if m.family != RAYLEIGH:
        raise DomainError("r2 uses Rayleigh-family moments")
    return _censor(xi_transform(pearson_stat(m)))


def r3_from_moments(m: SampleMoments) -> Estimate:
    return _censor(eta_transform(cos2_stat(m)))


def estimate_r1(s: PairedSample) -> Estimate:
    """Censored sample Pearson coefficient of the exponential pair."""
    return r1_from_moments(sample_moments(s, EXPONENTIAL))


def estimate_r2(s: PairedSample) -> Estimate:
    """Censored xi-transformed Pearson coefficient of the Rayleigh pair."""
    return r2_from_moments(sample_moments(s, RAYLEIGH))


def estimate_r3(s: PairedSample) -> Estimate:
    """Censored eta-transformed squared cosine similarity (approximate ML)."""
    return r3_from_moments(sample_moments(s, RAYLEIGH))
