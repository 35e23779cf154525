"""Reduced-reference image quality in the tetrolet domain.

Tetrolet detail subbands are modelled as Gaussian scale mixtures with a
Weibull multiplier; reference and distorted models are compared with a
closed-form Kullback-Leibler divergence.
"""
from .divergence import compare_features, kld_gaussian_zero_mean, kld_joint, kld_weibull, pool
from .gsm import RRFeatureSet, SubbandFeatures, WeibullParams, extract_features, fit_weibull
from .pipeline import RunConfig, features_from_path, features_from_plane, measure_plane, quality
from .tetrolet import TetroletDecomposition, forward, inverse
from .tiling import enumerate_coverings, fundamental_forms

__version__ = "0.1.0"
