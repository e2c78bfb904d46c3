"""Bivariate Rayleigh/exponential model built on a 4-D Gaussian layer.

Two zero-mean complex Gaussians X = X_I + j X_Q and Y = Y_I + j Y_Q with
the structured 4x4 covariance below yield a Rayleigh pair (V, Z) =
(|X|, |Y|) and, after squaring, an exponential pair (U, W) = (V^2, Z^2).
The exponential pair's Pearson correlation coefficient r equals
rho_c^2 + rho_s^2, the squared magnitude of the complex correlation of
the Gaussian layer, and is the parameter everything downstream
estimates and bounds.

All pdf work is done in log space end to end; linear-scale densities
are only reconstructed inside quadrature tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateModelError, DomainError
from .specfun import bessel_I0_log, ellip_E, ellip_K

__all__ = [
    "ModelParams",
    "GaussCovariance",
    "MomentSet",
    "build_covariance",
    "pop_moments_rayleigh",
    "pop_moments_exp",
    "logpdf_exp",
    "logpdf_rayleigh",
    "pearson_rayleigh_pop",
    "cos2_limit",
]


@dataclass(frozen=True)
class ModelParams:
    """Parameter vector (r, sigma2_x, sigma2_y) with 0 <= r <= 1."""

    r: float
    sigma2_x: float = 1.0
    sigma2_y: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.r <= 1.0):
            raise DomainError(f"correlation coefficient r={self.r} outside [0, 1]")
        if not (self.sigma2_x > 0.0 and math.isfinite(self.sigma2_x)):
            raise DomainError("sigma2_x must be positive and finite")
        if not (self.sigma2_y > 0.0 and math.isfinite(self.sigma2_y)):
            raise DomainError("sigma2_y must be positive and finite")

    @property
    def rho(self) -> float:
        """Gaussian-layer correlation magnitude, rho = sqrt(r)."""
        return math.sqrt(self.r)


@dataclass(frozen=True, eq=False)
class GaussCovariance:
    """The structured 4x4 covariance of (X_I, X_Q, Y_I, Y_Q).

    rho_c and rho_s are the in-phase/quadrature split of the complex
    correlation; only rho_c^2 + rho_s^2 = r is observable through the
    envelope pair.
    """

    matrix: np.ndarray
    rho_c: float
    rho_s: float
    sigma2_x: float
    sigma2_y: float


@dataclass(frozen=True)
class MomentSet:
    """Joint moments E{A^kappa B^nu} for kappa+nu in {1, 2}.

    Used both for population values and (in estimators) sample values;
    the naming follows m_{kappa nu}.
    """

    m10: float
    m01: float
    m20: float
    m02: float
    m11: float


def build_covariance(p: ModelParams, angle: float = 0.0) -> GaussCovariance:
    """Covariance matrix of the Gaussian layer for parameters ``p``.

    ``angle`` fixes the split rho_c = sqrt(r) cos(angle), rho_s =
    sqrt(r) sin(angle).  The envelope laws depend only on r, not on the
    angle, which the sampling tests verify; production code always uses
    angle = 0.
    """
    rho = p.rho
    rho_c = rho * math.cos(angle)
    rho_s = rho * math.sin(angle)
    sx = math.sqrt(p.sigma2_x)
    sy = math.sqrt(p.sigma2_y)
    c = sx * sy * rho_c
    s = sx * sy * rho_s
    m = np.array(
        [
            [p.sigma2_x, 0.0, c, s],
            [0.0, p.sigma2_x, -s, c],
            [c, -s, p.sigma2_y, 0.0],
            [s, c, 0.0, p.sigma2_y],
        ]
    )
    return GaussCovariance(m, rho_c, rho_s, p.sigma2_x, p.sigma2_y)


def pop_moments_rayleigh(p: ModelParams) -> MomentSet:
    """Population moments of the Rayleigh pair (V, Z).

    The cross moment couples through the complete elliptic integrals:
    E{VZ} = sigma_x sigma_y [2 E(rho) - (1 - rho^2) K(rho)].
    """
    sx = math.sqrt(p.sigma2_x)
    sy = math.sqrt(p.sigma2_y)
    rho = p.rho
    if rho < 1.0:
        cross = 2.0 * ellip_E(rho) - (1.0 - rho * rho) * ellip_K(rho)
    else:
        cross = 2.0 * ellip_E(1.0)  # (1-rho^2) K(rho) -> 0 as rho -> 1
    half_pi = math.sqrt(0.5 * math.pi)
    return MomentSet(
        m10=sx * half_pi,
        m01=sy * half_pi,
        m20=2.0 * p.sigma2_x,
        m02=2.0 * p.sigma2_y,
        m11=sx * sy * cross,
    )


def pop_moments_exp(p: ModelParams) -> MomentSet:
    """Population moments of the exponential pair (U, W)."""
    return MomentSet(
        m10=2.0 * p.sigma2_x,
        m01=2.0 * p.sigma2_y,
        m20=8.0 * p.sigma2_x**2,
        m02=8.0 * p.sigma2_y**2,
        m11=4.0 * (p.r + 1.0) * p.sigma2_x * p.sigma2_y,
    )


def _check_nonneg(x, name: str):
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0) or np.isnan(arr).any():
        raise DomainError(f"{name} must be >= 0")
    return arr


def logpdf_exp(p: ModelParams, u, w):
    """Log density of the exponential pair at (u, w), u, w >= 0.

    Uses bessel_I0_log, so it stays finite and accurate even when the
    Bessel argument sqrt(r u w) / (sx sy (1 - r)) is huge (r near 1).
    Accepts arrays (broadcast).

    Raises
    ------
    DegenerateModelError
        If r = 1, where the joint law degenerates onto a curve.
    """
    if p.r >= 1.0:
        raise DegenerateModelError("joint pdf undefined at r = 1")
    ua = _check_nonneg(u, "u")
    wa = _check_nonneg(w, "w")
    omr = 1.0 - p.r
    sx2, sy2 = p.sigma2_x, p.sigma2_y
    zeta = np.sqrt(p.r * ua * wa) / (math.sqrt(sx2 * sy2) * omr)
    out = (
        -math.log(4.0 * sx2 * sy2 * omr)
        - (ua / sx2 + wa / sy2) / (2.0 * omr)
        + bessel_I0_log(zeta)
    )
    return float(out) if np.ndim(out) == 0 else out


def logpdf_rayleigh(p: ModelParams, v, z):
    """Log density of the Rayleigh pair at (v, z), v, z >= 0.

    Equals logpdf_exp at (v^2, z^2) plus the Jacobian log(4 v z); the
    density vanishes on the axes, so the log is -inf at v = 0 or z = 0.
    """
    if p.r >= 1.0:
        raise DegenerateModelError("joint pdf undefined at r = 1")
    va = _check_nonneg(v, "v")
    za = _check_nonneg(z, "z")
    omr = 1.0 - p.r  # 1 - rho^2
    sx2, sy2 = p.sigma2_x, p.sigma2_y
    zeta = p.rho * va * za / (math.sqrt(sx2 * sy2) * omr)
    with np.errstate(divide="ignore"):
        lead = np.log(va * za)
    out = (
        lead
        - math.log(sx2 * sy2 * omr)
        - (va * va / sx2 + za * za / sy2) / (2.0 * omr)
        + bessel_I0_log(zeta)
    )
    return float(out) if np.ndim(out) == 0 else out


def pearson_rayleigh_pop(r) -> float:
    """Population Pearson correlation of the Rayleigh pair as a function of r.

    Strictly increasing on [0, 1] with fixed points only at 0 and 1; in
    between it stays below r, which is what the xi correction in the
    estimators module compensates for.
    """
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0) or np.isnan(arr).any():
        raise DomainError("r must lie in [0, 1]")
    one = arr == 1.0
    safe = np.where(one, 0.0, arr)
    rho = np.sqrt(safe)
    cross = 2.0 * ellip_E(rho) - (1.0 - safe) * ellip_K(rho)
    out = (2.0 * cross - math.pi) / (4.0 - math.pi)
    out = np.where(one, 1.0, out)
    return float(out) if np.ndim(r) == 0 else out


def cos2_limit(r) -> float:
    """Large-n limit of the squared cosine-similarity statistic.

    Equals (E{VZ})^2 / (E{V^2} E{Z^2}); ranges from pi^2/16 at r = 0 to
    1 at r = 1.
    """
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0) or np.isnan(arr).any():
        raise DomainError("r must lie in [0, 1]")
    one = arr == 1.0
    safe = np.where(one, 0.0, arr)
    rho = np.sqrt(safe)
    half_cross = ellip_E(rho) - 0.5 * (1.0 - safe) * ellip_K(rho)
    out = np.where(one, 1.0, half_cross * half_cross)
    return float(out) if np.ndim(r) == 0 else out
