"""Gaussian scale mixture features of tetrolet detail subbands.

Every interior coefficient of a subband contributes its 3x3 neighborhood as
a 9-vector Y. The subband covariance M is estimated from all neighborhoods,
each neighborhood gets a maximum-likelihood multiplier sqrt(Y^T M^-1 Y / 9),
and the multiplier field is summarized by a Weibull (shape k, scale lambda)
maximum-likelihood fit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import linalg

NEIGHBORHOOD = 3
DIM = NEIGHBORHOOD * NEIGHBORHOOD
EPS_REG = 1e-6
EPS_FLOOR = 1e-12
MIN_WEIBULL_SAMPLES = 30


class FeatureError(ValueError):
    """A subband or sample set cannot be turned into GSM features."""


class WeibullFitError(FeatureError):
    def __init__(self, message, last_k=None):
        super().__init__(message)
        self.last_k = last_k


@dataclass(frozen=True)
class WeibullParams:
    k: float
    lam: float

    def __post_init__(self):
        if not (self.k > 0 and self.lam > 0 and math.isfinite(self.k) and math.isfinite(self.lam)):
            raise ValueError(f"Weibull parameters must be finite and > 0, got k={self.k}, lambda={self.lam}")


@dataclass
class SubbandFeatures:
    scale: int
    orientation: int
    cov: np.ndarray
    weibull: WeibullParams
    dropped_zero_fraction: float = 0.0

    @property
    def key(self) -> tuple[int, int]:
        return (self.scale, self.orientation)

    def __eq__(self, other):
        if not isinstance(other, SubbandFeatures):
            return NotImplemented
        return (
            self.key == other.key
            and self.weibull == other.weibull
            and self.dropped_zero_fraction == other.dropped_zero_fraction
            and np.array_equal(self.cov, other.cov)
        )


@dataclass
class RRFeatureSet:
    """Reduced-reference side information for one image."""

    source_id: str
    image_dims: tuple[int, int]  # (width, height) after crop
    features: list[SubbandFeatures] = field(default_factory=list)
    levels: int = 2
    format_version: int = 1

    def __eq__(self, other):
        if not isinstance(other, RRFeatureSet):
            return NotImplemented
        return (
            self.source_id == other.source_id
            and tuple(self.image_dims) == tuple(other.image_dims)
            and self.levels == other.levels
            and self.format_version == other.format_version
            and self.features == other.features
        )


def extract_neighborhoods(subband) -> np.ndarray:
    """(n, 9) row-major flattened 3x3 windows centered on interior coefficients."""
    s = np.asarray(subband, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] < NEIGHBORHOOD or s.shape[1] < NEIGHBORHOOD:
        raise FeatureError(f"subband of shape {s.shape} is smaller than 3x3")
    windows = sliding_window_view(s, (NEIGHBORHOOD, NEIGHBORHOOD))
    return windows.reshape(-1, DIM).copy()


def estimate_covariance(vectors, eps: float = EPS_REG) -> np.ndarray:
    """Sample covariance (divisor n-1) plus eps * tr/9 * I for positive definiteness."""
    y = np.asarray(vectors, dtype=np.float64)
    if y.ndim != 2 or y.shape[0] < 2:
        raise FeatureError("need at least 2 vectors to estimate a covariance")
    c = np.cov(y, rowvar=False)
    c = 0.5 * (c + c.T)
    d = c.shape[0]
    ridge = eps * np.trace(c) / d
    c[np.diag_indices(d)] += max(ridge, EPS_FLOOR)
    return c


def _cholesky(m: np.ndarray) -> np.ndarray:
    try:
        return linalg.cholesky(m, lower=True)
    except linalg.LinAlgError as exc:
        raise FeatureError("covariance matrix is not positive definite") from exc


def estimate_multipliers(vectors, m) -> np.ndarray:
    """sqrt(Y^T M^-1 Y / N) for each row Y of `vectors`."""
    y = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    chol = _cholesky(np.asarray(m, dtype=np.float64))
    z = linalg.solve_triangular(chol, y.T, lower=True)
    return np.sqrt(np.einsum("ij,ij->j", z, z) / y.shape[1])


def estimate_multiplier(y, m) -> float:
    return float(estimate_multipliers(np.asarray(y, dtype=np.float64)[None, :], m)[0])


def fit_weibull(samples, tol: float = 1e-8, max_iter: int = 200) -> WeibullParams:
    """Two-parameter Weibull maximum-likelihood fit.

    Newton iteration on the profile score
        sum(x^k ln x) / sum(x^k) - 1/k - mean(ln x) = 0,
    started from the log-moment estimate k0 = pi / (sqrt(6) * std(ln x)).
    The score is increasing in k, so a bracket keeps Newton steps honest.
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size < MIN_WEIBULL_SAMPLES:
        raise FeatureError(f"need at least {MIN_WEIBULL_SAMPLES} samples, got {x.size}")
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise FeatureError("Weibull samples must be finite and strictly positive")
    logs = np.log(x)
    spread = logs.std()
    if spread == 0 or np.ptp(x) == 0:
        raise FeatureError("all Weibull samples are equal; the shape is unidentifiable")
    # x^k / max(x)^k keeps the sums finite for large k
    centered = logs - logs.max()
    mean_log = logs.mean() - logs.max()

    def score(k):
        w = np.exp(k * centered)
        s0 = w.sum()
        s1 = (w * centered).sum()
        s2 = (w * centered * centered).sum()
        f = s1 / s0 - 1.0 / k - mean_log
        df = s2 / s0 - (s1 / s0) ** 2 + 1.0 / (k * k)
        return f, df

    k = math.pi / (math.sqrt(6.0) * spread)
    lo, hi = 0.0, math.inf
    for _ in range(max_iter):
        f, df = score(k)
        if f > 0:
            hi = min(hi, k)
        else:
            lo = max(lo, k)
        k_new = k - f / df
        if abs(k_new - k) < tol:
            k = k_new
            break
        if not (lo < k_new < hi) or not math.isfinite(k_new):
            k_new = 0.5 * (lo + hi) if math.isfinite(hi) else 2.0 * k
        k = k_new
    else:
        raise WeibullFitError(f"Weibull shape did not converge in {max_iter} iterations", last_k=k)
    lam = math.exp(logs.max() + math.log(np.mean(np.exp(k * centered))) / k)
    return WeibullParams(k=float(k), lam=float(lam))


def subband_features(subband, scale: int, orientation: int, eps: float = EPS_REG) -> SubbandFeatures:
    y = extract_neighborhoods(subband)
    cov = estimate_covariance(y, eps=eps)
    mult = estimate_multipliers(y, cov)
    positive = mult[mult > 0]
    dropped = 1.0 - positive.size / mult.size
    return SubbandFeatures(
        scale=scale,
        orientation=orientation,
        cov=cov,
        weibull=fit_weibull(positive),
        dropped_zero_fraction=float(dropped),
    )


def extract_features(decomp, eps: float = EPS_REG, source_id: str = "") -> RRFeatureSet:
    """GSM features of every detail subband, ordered by (scale, orientation)."""
    feats = []
    for scale in range(1, len(decomp.levels) + 1):
        for orientation in (1, 2, 3):
            try:
                feats.append(
                    subband_features(decomp.subband(scale, orientation), scale, orientation, eps)
                )
            except FeatureError as exc:
                raise type(exc)(f"subband (scale={scale}, orientation={orientation}): {exc}") from exc
    h, w = decomp.shape
    return RRFeatureSet(
        source_id=source_id, image_dims=(w, h), features=feats, levels=len(decomp.levels)
    )
