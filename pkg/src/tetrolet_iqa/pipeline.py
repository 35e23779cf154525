"""Image -> RR features -> quality score."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dataset_io, divergence, gsm, tetrolet


@dataclass(frozen=True)
class RunConfig:
    levels: int = 2
    d0: float = divergence.D0
    eps_reg: float = gsm.EPS_REG
    fit_mode: str = "per-group"
    seed: int = 0


def features_from_plane(plane, config: RunConfig = RunConfig(), source_id: str = "") -> gsm.RRFeatureSet:
    cropped, _ = dataset_io.crop_to_transform_size(plane, config.levels)
    decomp = tetrolet.forward(cropped, config.levels)
    return gsm.extract_features(decomp, eps=config.eps_reg, source_id=source_id)


def features_from_path(path, config: RunConfig = RunConfig()) -> gsm.RRFeatureSet:
    return features_from_plane(dataset_io.load_grayscale(path), config, source_id=str(path))


def measure_plane(plane, reference: gsm.RRFeatureSet, config: RunConfig = RunConfig()):
    """Q and per-subband distances of a distorted plane against RR features."""
    cropped, _ = dataset_io.crop_to_transform_size(plane, reference.levels)
    h, w = cropped.shape
    if (w, h) != tuple(reference.image_dims):
        rw, rh = reference.image_dims
        raise ValueError(f"distorted image crops to {w}x{h}, RR features were taken at {rw}x{rh}")
    distorted = gsm.extract_features(
        tetrolet.forward(cropped, reference.levels), eps=config.eps_reg
    )
    return divergence.compare_features(reference, distorted, d0=config.d0)


def compare_planes(reference, distorted, config: RunConfig = RunConfig()):
    return measure_plane(distorted, features_from_plane(reference, config), config)


def quality(reference, distorted, config: RunConfig = RunConfig()) -> float:
    """Q between two luminance planes (0 for identical images)."""
    return compare_planes(np.asarray(reference), np.asarray(distorted), config)[0]
