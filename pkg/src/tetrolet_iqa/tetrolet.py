"""Adaptive tetrolet decomposition and its exact inverse.

Each 4x4 block picks, out of the 117 tetromino coverings, the one whose
twelve Haar detail coefficients have the smallest l1 norm. The four low-pass
values of a block form a 2x2 tile of the next level's input, laid out
column-major ``[[a0, a2], [a1, a3]]``; detail coefficients are placed into
their subband planes with the same layout.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .tiling import Covering, enumerate_coverings, piece_cell_order, slot_table

HAAR = _kernels.HAAR


@dataclass
class BlockCoefficients:
    lowpass: np.ndarray  # (4,)
    details: np.ndarray  # (3, 4): [orientation, piece]
    covering_index: int

    @property
    def l1_cost(self) -> float:
        return float(np.abs(self.details).sum())


@dataclass
class TetroletLevel:
    details: np.ndarray  # (3, h/2, w/2)
    coverings: np.ndarray  # (h/4, w/4) int


@dataclass
class TetroletDecomposition:
    shape: tuple[int, int]
    levels: list[TetroletLevel] = field(default_factory=list)
    lowpass: np.ndarray | None = None

    def subband(self, scale: int, orientation: int) -> np.ndarray:
        """Detail plane for scale 1.. (finest first) and orientation 1..3."""
        return self.levels[scale - 1].details[orientation - 1]

    def coefficient_count(self) -> int:
        n = sum(lv.details.size for lv in self.levels)
        return n + (0 if self.lowpass is None else self.lowpass.size)


def haar_on_slots(values) -> tuple[float, np.ndarray]:
    """Orthonormal 4-point Haar of four slot values: (lowpass, 3 details)."""
    v = np.asarray(values, dtype=np.float64)
    if v.shape != (4,):
        raise ValueError(f"expected 4 slot values, got shape {v.shape}")
    out = HAAR @ v
    return float(out[0]), out[1:]


def covering_matrix(covering: Covering) -> np.ndarray:
    """16x16 orthonormal map from a row-major block to its coefficients.

    Output order: a[0..3], w1[0..3], w2[0..3], w3[0..3].
    """
    t = np.zeros((16, 16))
    for s, piece in enumerate(covering.pieces):
        cells = [r * 4 + c for r, c in piece_cell_order(piece)]
        for band in range(4):
            t[band * 4 + s, cells] = HAAR[band]
    return t


def transform_block(block, dictionary=None) -> BlockCoefficients:
    """Tetrolet coefficients of a single 4x4 block under its l1-best covering."""
    b = np.asarray(block, dtype=np.float64)
    if b.shape != (4, 4):
        raise ValueError(f"expected a 4x4 block, got shape {b.shape}")
    slots = slot_table() if dictionary is None else np.stack([c.slot_cells() for c in dictionary])
    if slots.shape[0] != 117:
        raise ValueError(f"dictionary must hold all 117 coverings, got {slots.shape[0]}")
    idx, coeffs = _kernels.analyze_blocks(b.reshape(1, 16), slots)
    return BlockCoefficients(
        lowpass=coeffs[0, 0].copy(), details=coeffs[0, 1:].copy(), covering_index=int(idx[0])
    )


def _to_blocks(plane: np.ndarray) -> np.ndarray:
    h, w = plane.shape
    return plane.reshape(h // 4, 4, w // 4, 4).transpose(0, 2, 1, 3).reshape(-1, 16)


def _from_blocks(blocks: np.ndarray, hb: int, wb: int) -> np.ndarray:
    return blocks.reshape(hb, wb, 4, 4).transpose(0, 2, 1, 3).reshape(hb * 4, wb * 4)


def _tiles_to_plane(values: np.ndarray, hb: int, wb: int) -> np.ndarray:
    # values (nb, 4) indexed by piece -> plane with tile [[v0, v2], [v1, v3]]
    tiles = values.reshape(hb, wb, 2, 2).transpose(0, 1, 3, 2)
    return tiles.transpose(0, 2, 1, 3).reshape(hb * 2, wb * 2)


def _plane_to_tiles(plane: np.ndarray) -> np.ndarray:
    hb, wb = plane.shape[0] // 2, plane.shape[1] // 2
    tiles = plane.reshape(hb, 2, wb, 2).transpose(0, 2, 3, 1)
    return tiles.reshape(hb * wb, 4)


def check_dimensions(shape, levels: int) -> None:
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    step = 4 * 2 ** (levels - 1)
    h, w = shape
    if h < step or w < step or h % step or w % step:
        raise ValueError(
            f"image {w}x{h} (width x height) not divisible by {step} for {levels} level(s)"
        )


def forward(image, levels: int = 2) -> TetroletDecomposition:
    plane = np.asarray(image, dtype=np.float64)
    if plane.ndim != 2:
        raise ValueError(f"expected a 2-D plane, got shape {plane.shape}")
    check_dimensions(plane.shape, levels)
    slots = slot_table()
    decomp = TetroletDecomposition(shape=plane.shape)
    current = plane
    for _ in range(levels):
        hb, wb = current.shape[0] // 4, current.shape[1] // 4
        idx, coeffs = _kernels.analyze_blocks(_to_blocks(current), slots)
        details = np.stack([_tiles_to_plane(coeffs[:, band], hb, wb) for band in (1, 2, 3)])
        decomp.levels.append(TetroletLevel(details=details, coverings=idx.reshape(hb, wb)))
        current = _tiles_to_plane(coeffs[:, 0], hb, wb)
    decomp.lowpass = current
    return decomp


def inverse(decomp: TetroletDecomposition) -> np.ndarray:
    if decomp.lowpass is None or not decomp.levels:
        raise ValueError("decomposition has no low-pass plane or no levels")
    slots = slot_table()
    current = np.asarray(decomp.lowpass, dtype=np.float64)
    for r, level in reversed(list(enumerate(decomp.levels, start=1))):
        if level.coverings is None:
            raise ValueError(f"level {r} is missing its covering-index map")
        hb, wb = level.coverings.shape
        if current.shape != (2 * hb, 2 * wb) or level.details.shape != (3, 2 * hb, 2 * wb):
            raise ValueError(f"level {r} plane shapes do not match its covering map")
        coeffs = np.empty((hb * wb, 4, 4))
        coeffs[:, 0] = _plane_to_tiles(current)
        for band in (1, 2, 3):
            coeffs[:, band] = _plane_to_tiles(level.details[band - 1])
        idx = np.asarray(level.coverings, dtype=np.int64).ravel()
        if idx.min() < 0 or idx.max() >= slots.shape[0]:
            raise ValueError(f"level {r} has covering indices outside 0..116")
        current = _from_blocks(_kernels.synthesize_blocks(coeffs, idx, slots), hb, wb)
    return current


def dump_decomposition(decomp: TetroletDecomposition, out_dir) -> list[Path]:
    """Write one plain-text matrix per subband, covering map and final low-pass."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for r, level in enumerate(decomp.levels, start=1):
        for o in (1, 2, 3):
            p = out / f"level{r}_orient{o}.txt"
            np.savetxt(p, level.details[o - 1], fmt="%.17g")
            written.append(p)
        p = out / f"level{r}_coverings.txt"
        np.savetxt(p, level.coverings, fmt="%d")
        written.append(p)
    p = out / "lowpass.txt"
    np.savetxt(p, decomp.lowpass, fmt="%.17g")
    written.append(p)
    return written


def load_decomposition(in_dir) -> TetroletDecomposition:
    src = Path(in_dir)
    lowpass = np.loadtxt(src / "lowpass.txt", ndmin=2)
    levels = []
    r = 1
    while (src / f"level{r}_coverings.txt").exists():
        details = np.stack(
            [np.loadtxt(src / f"level{r}_orient{o}.txt", ndmin=2) for o in (1, 2, 3)]
        )
        cov = np.loadtxt(src / f"level{r}_coverings.txt", dtype=np.int64, ndmin=2)
        levels.append(TetroletLevel(details=details, coverings=cov))
        r += 1
    if not levels:
        raise ValueError(f"no decomposition levels found in {src}")
    h, w = levels[0].details.shape[1:]
    return TetroletDecomposition(shape=(2 * h, 2 * w), levels=levels, lowpass=lowpass)
