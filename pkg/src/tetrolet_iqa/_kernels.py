"""Per-block covering search and synthesis kernels.

Two interchangeable backends: numba-compiled loops and a vectorized numpy
path. The numba path is used when numba imports and the environment variable
``TETROLET_IQA_DISABLE_NUMBA`` is unset (or "0"). Both return the same
covering choices; coefficients agree to rounding.
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

HAAR = 0.5 * np.array(
    [
        [1.0, 1.0, 1.0, 1.0],
        [1.0, 1.0, -1.0, -1.0],
        [1.0, -1.0, 1.0, -1.0],
        [1.0, -1.0, -1.0, 1.0],
    ]
)

# coverings whose l1 cost is within this fraction of sum|block| of the minimum
# count as tied; the smallest index wins
TIE_RTOL = 1e-12

_CHUNK = 2048


def numba_available() -> bool:
    return numba is not None


def numba_enabled() -> bool:
    flag = os.environ.get("TETROLET_IQA_DISABLE_NUMBA", "").strip().lower()
    return numba is not None and flag in ("", "0", "false", "no")


def covering_costs_numpy(blocks: np.ndarray, slots: np.ndarray) -> np.ndarray:
    """l1 detail cost of every covering for every block, shape (nb, n_cov)."""
    gathered = blocks[:, slots]  # (nb, cov, piece, slot)
    details = gathered @ HAAR[1:].T  # (nb, cov, piece, 3)
    return np.abs(details).sum(axis=(-1, -2))


def _pick(costs: np.ndarray, blocks: np.ndarray) -> np.ndarray:
    tol = TIE_RTOL * np.abs(blocks).sum(axis=1)
    best = costs.min(axis=1)
    return np.argmax(costs <= (best + tol)[:, None], axis=1)


def analyze_numpy(blocks: np.ndarray, slots: np.ndarray):
    nb = blocks.shape[0]
    idx = np.empty(nb, dtype=np.int64)
    coeffs = np.empty((nb, 4, 4))
    for lo in range(0, nb, _CHUNK):
        chunk = blocks[lo:lo + _CHUNK]
        idx[lo:lo + _CHUNK] = _pick(covering_costs_numpy(chunk, slots), chunk)
    chosen = blocks[np.arange(nb)[:, None, None], slots[idx]]  # (nb, piece, slot)
    coeffs[:] = np.einsum("ls,nps->nlp", HAAR, chosen)
    return idx, coeffs


def synthesize_numpy(coeffs: np.ndarray, idx: np.ndarray, slots: np.ndarray) -> np.ndarray:
    nb = coeffs.shape[0]
    # HAAR is symmetric and orthonormal, so it is its own inverse
    values = np.einsum("ls,nlp->nps", HAAR, coeffs)
    out = np.empty((nb, 16))
    out[np.arange(nb)[:, None], slots[idx].reshape(nb, 16)] = values.reshape(nb, 16)
    return out


def _analyze_loop(blocks, slots, tie_rtol):
    nb = blocks.shape[0]
    ncov = slots.shape[0]
    idx = np.empty(nb, dtype=np.int64)
    coeffs = np.empty((nb, 4, 4))
    costs = np.empty(ncov)
    for b in range(nb):
        scale = 0.0
        for i in range(16):
            scale += abs(blocks[b, i])
        best = np.inf
        for c in range(ncov):
            cost = 0.0
            for p in range(4):
                v0 = blocks[b, slots[c, p, 0]]
                v1 = blocks[b, slots[c, p, 1]]
                v2 = blocks[b, slots[c, p, 2]]
                v3 = blocks[b, slots[c, p, 3]]
                cost += abs(0.5 * (v0 + v1 - v2 - v3))
                cost += abs(0.5 * (v0 - v1 + v2 - v3))
                cost += abs(0.5 * (v0 - v1 - v2 + v3))
            costs[c] = cost
            if cost < best:
                best = cost
        limit = best + tie_rtol * scale
        pick = 0
        for c in range(ncov):
            if costs[c] <= limit:
                pick = c
                break
        idx[b] = pick
        for p in range(4):
            v0 = blocks[b, slots[pick, p, 0]]
            v1 = blocks[b, slots[pick, p, 1]]
            v2 = blocks[b, slots[pick, p, 2]]
            v3 = blocks[b, slots[pick, p, 3]]
            coeffs[b, 0, p] = 0.5 * (v0 + v1 + v2 + v3)
            coeffs[b, 1, p] = 0.5 * (v0 + v1 - v2 - v3)
            coeffs[b, 2, p] = 0.5 * (v0 - v1 + v2 - v3)
            coeffs[b, 3, p] = 0.5 * (v0 - v1 - v2 + v3)
    return idx, coeffs


def _synthesize_loop(coeffs, idx, slots):
    nb = coeffs.shape[0]
    out = np.empty((nb, 16))
    for b in range(nb):
        c = idx[b]
        for p in range(4):
            a = coeffs[b, 0, p]
            w1 = coeffs[b, 1, p]
            w2 = coeffs[b, 2, p]
            w3 = coeffs[b, 3, p]
            out[b, slots[c, p, 0]] = 0.5 * (a + w1 + w2 + w3)
            out[b, slots[c, p, 1]] = 0.5 * (a + w1 - w2 - w3)
            out[b, slots[c, p, 2]] = 0.5 * (a - w1 + w2 - w3)
            out[b, slots[c, p, 3]] = 0.5 * (a - w1 - w2 + w3)
    return out


if numba is not None:
    _analyze_jit = numba.njit(cache=True, nogil=True)(_analyze_loop)
    _synthesize_jit = numba.njit(cache=True, nogil=True)(_synthesize_loop)
else:  # pragma: no cover
    _analyze_jit = _synthesize_jit = None


def analyze_numba(blocks: np.ndarray, slots: np.ndarray):
    if _analyze_jit is None:
        raise RuntimeError("numba is not installed")
    return _analyze_jit(np.ascontiguousarray(blocks, dtype=np.float64), slots, TIE_RTOL)


def synthesize_numba(coeffs: np.ndarray, idx: np.ndarray, slots: np.ndarray) -> np.ndarray:
    if _synthesize_jit is None:
        raise RuntimeError("numba is not installed")
    return _synthesize_jit(
        np.ascontiguousarray(coeffs, dtype=np.float64), np.asarray(idx, dtype=np.int64), slots
    )


def analyze_blocks(blocks: np.ndarray, slots: np.ndarray):
    """Best covering and its (band, piece) coefficients for each 16-vector block.

    Band 0 is the low-pass, bands 1..3 the three detail orientations.
    """
    if numba_enabled():
        return analyze_numba(blocks, slots)
    return analyze_numpy(blocks, slots)


def synthesize_blocks(coeffs: np.ndarray, idx: np.ndarray, slots: np.ndarray) -> np.ndarray:
    if numba_enabled():
        return synthesize_numba(coeffs, idx, slots)
    return synthesize_numpy(coeffs, idx, slots)
