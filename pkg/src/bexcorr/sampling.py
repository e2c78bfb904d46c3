"""Reproducible paired Rayleigh/exponential sampling.

Streams are addressed by (master_seed, stream_id) through the Philox
counter-based bit generator, so a Monte Carlo sweep keyed by
replication index is bit-reproducible regardless of how replications
are scheduled across workers.  Gaussian variates come from numpy's
``Generator.standard_normal`` (ziggurat); numpy guarantees stream
stability for a fixed (bit generator, method) pair, and changing either
is a breaking change for golden files.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .model import GaussCovariance, ModelParams, build_covariance

__all__ = ["SeedSpec", "PairedSample", "sample_pairs", "gaussian_quadruple", "mixing_matrix"]

_U64 = 2**64


@dataclass(frozen=True)
class SeedSpec:
    """Addresses one reproducible substream.

    Distinct (master_seed, stream_id) pairs give statistically
    independent streams; the same pair always reproduces bit-identical
    output.
    """

    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_id"):
            v = getattr(self, name)
            if not isinstance(v, int) or not (0 <= v < _U64):
                raise DomainError(f"{name} must be an integer in [0, 2^64)")

    def generator(self) -> np.random.Generator:
        key = np.array([self.master_seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True, eq=False)
class PairedSample:
    """n paired observations in Rayleigh (v, z) and exponential (u, w) form.

    The exponential values are exactly the squares of the Rayleigh
    values, u_i = v_i^2 and w_i = z_i^2.
    """

    v: np.ndarray
    z: np.ndarray
    u: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        n = len(self.v)
        if n < 1:
            raise DomainError("sample must contain at least one pair")
        if not (len(self.z) == len(self.u) == len(self.w) == n):
            raise DomainError("v, z, u, w must share one length")
        if np.any(self.v < 0) or np.any(self.z < 0):
            raise DomainError("Rayleigh magnitudes must be >= 0")
        if np.any(self.u != self.v * self.v) or np.any(self.w != self.z * self.z):
            raise DomainError("u, w must equal v^2, z^2 exactly")

    @property
    def n(self) -> int:
        return len(self.v)

    @classmethod
    def from_rayleigh(cls, v, z) -> "PairedSample":
        v = np.asarray(v, dtype=float)
        z = np.asarray(z, dtype=float)
        return cls(v=v, z=z, u=v * v, w=z * z)

    @classmethod
    def from_exponential(cls, u, w) -> "PairedSample":
        # v = sqrt(u) then u <- v*v keeps the square identity exact
        # (changes u by at most 1 ulp).
        v = np.sqrt(np.asarray(u, dtype=float))
        z = np.sqrt(np.asarray(w, dtype=float))
        return cls(v=v, z=z, u=v * v, w=z * z)


def mixing_matrix(cov: GaussCovariance) -> np.ndarray:
    """Lower-triangular-patterned M with M M^T equal to the model covariance.

    Closed form exploiting the covariance structure: the Y components
    are correlated mixtures of the X components plus independent
    innovations scaled by sqrt(1 - r).  Valid for all r in [0, 1],
    including the degenerate r = 1 (zero innovation).
    """
    sx = np.sqrt(cov.sigma2_x)
    sy = np.sqrt(cov.sigma2_y)
    resid = 1.0 - (cov.rho_c**2 + cov.rho_s**2)
    si = np.sqrt(resid) if resid > 0.0 else 0.0
    return np.array(
        [
            [sx, 0.0, 0.0, 0.0],
            [0.0, sx, 0.0, 0.0],
            [sy * cov.rho_c, -sy * cov.rho_s, sy * si, 0.0],
            [sy * cov.rho_s, sy * cov.rho_c, 0.0, sy * si],
        ]
    )


def gaussian_quadruple(cov: GaussCovariance, rng: np.random.Generator, size: int | None = None):
    """Draw (x_i, x_q, y_i, y_q) with the exact structured covariance.

    Returns four scalars for size=None, else four arrays of length
    ``size``.
    """
    m = mixing_matrix(cov)
    g = rng.standard_normal((1 if size is None else size, 4))
    q = g @ m.T
    if size is None:
        return tuple(float(x) for x in q[0])
    return q[:, 0], q[:, 1], q[:, 2], q[:, 3]


def sample_pairs(p: ModelParams, n: int, seed: SeedSpec, angle: float = 0.0) -> PairedSample:
    """Draw n iid Rayleigh/exponential pairs, deterministically per seed.

    ``angle`` rotates the (rho_c, rho_s) split of the Gaussian layer;
    it is observationally irrelevant for the envelope laws and exists
    so tests can verify that irrelevance.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    cov = build_covariance(p, angle)
    x_i, x_q, y_i, y_q = gaussian_quadruple(cov, seed.generator(), size=n)
    v = np.hypot(x_i, x_q)
    z = np.hypot(y_i, y_q)
    return PairedSample(v=v, z=z, u=v * v, w=z * z)
