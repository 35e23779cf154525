"""Closed-form divergence between GSM feature triples and score pooling.

The divergence between two subband models splits into a Weibull term for
the multiplier and a zero-mean Gaussian term for the covariance, since the
two GSM components are independent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.special import gammaln

from .gsm import SubbandFeatures, WeibullParams

EULER_GAMMA = 0.5772156649015329
D0 = 0.1


class DivergenceError(ValueError):
    pass


@dataclass(frozen=True)
class SubbandDistance:
    d: float
    scale: int
    orientation: int


def kld_weibull(p1: WeibullParams, p2: WeibullParams) -> float:
    """KL(Weibull(k1, lam1) || Weibull(k2, lam2)), k shape and lam scale.

    ln(k1/lam1^k1) - ln(k2/lam2^k2) + (k1 - k2)(ln lam1 - gamma/k1)
        + (lam1/lam2)^k2 * Gamma(k2/k1 + 1) - 1
    """
    k1, l1, k2, l2 = float(p1.k), float(p1.lam), float(p2.k), float(p2.lam)
    if min(k1, l1, k2, l2) <= 0:
        raise DivergenceError("Weibull parameters must be positive")
    if (k1, l1) == (k2, l2):
        return 0.0
    ln_l1, ln_l2 = math.log(l1), math.log(l2)
    d = (
        math.log(k1) - k1 * ln_l1
        - math.log(k2) + k2 * ln_l2
        + (k1 - k2) * (ln_l1 - EULER_GAMMA / k1)
        + math.exp(k2 * (ln_l1 - ln_l2) + gammaln(k2 / k1 + 1.0))
        - 1.0
    )
    # nonnegative in exact arithmetic; only rounding can push it below
    return max(d, 0.0)


def _chol(m: np.ndarray, name: str) -> np.ndarray:
    try:
        return linalg.cholesky(m, lower=True)
    except linalg.LinAlgError as exc:
        raise DivergenceError(f"{name} is not positive definite") from exc


def kld_gaussian_zero_mean(m1, m2) -> float:
    """KL(N(0, M1) || N(0, M2)) = 0.5 [tr(M2^-1 M1) + ln|M2|/|M1| - N]."""
    a = np.asarray(m1, dtype=np.float64)
    b = np.asarray(m2, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape != b.shape:
        raise DivergenceError(f"covariance shapes {a.shape} and {b.shape} do not match")
    if np.array_equal(a, b):
        _chol(a, "M1")
        return 0.0
    la = _chol(a, "M1")
    lb = _chol(b, "M2")
    # tr(M2^-1 M1) = ||L2^-1 L1||_F^2
    z = linalg.solve_triangular(lb, la, lower=True)
    trace = float(np.sum(z * z))
    logdet_a = 2.0 * float(np.sum(np.log(np.diag(la))))
    logdet_b = 2.0 * float(np.sum(np.log(np.diag(lb))))
    d = 0.5 * (trace + logdet_b - logdet_a - a.shape[0])
    return max(d, 0.0)


def kld_joint(f1: SubbandFeatures, f2: SubbandFeatures) -> SubbandDistance:
    if f1.key != f2.key:
        raise DivergenceError(f"subband mismatch: {f1.key} vs {f2.key}")
    d = kld_weibull(f1.weibull, f2.weibull) + kld_gaussian_zero_mean(f1.cov, f2.cov)
    return SubbandDistance(d=d, scale=f1.scale, orientation=f1.orientation)


def pool(distances, d0: float = D0) -> float:
    """Q = log2(1 + sum(D_i) / d0)."""
    if not d0 > 0:
        raise DivergenceError(f"d0 must be positive, got {d0}")
    total = 0.0
    for dist in distances:
        d = dist.d if isinstance(dist, SubbandDistance) else float(dist)
        if not math.isfinite(d):
            where = (
                f" at subband (scale={dist.scale}, orientation={dist.orientation})"
                if isinstance(dist, SubbandDistance) else ""
            )
            raise DivergenceError(f"non-finite distance{where}")
        total += d
    return math.log2(1.0 + total / d0)


def compare_features(reference, distorted, d0: float = D0):
    """Q and per-subband distances between two RR feature sets."""
    ref = {f.key: f for f in reference.features}
    dist = {f.key: f for f in distorted.features}
    if set(ref) != set(dist):
        raise DivergenceError(f"feature sets cover different subbands: {sorted(ref)} vs {sorted(dist)}")
    distances = [kld_joint(ref[key], dist[key]) for key in sorted(ref)]
    return pool(distances, d0), distances
