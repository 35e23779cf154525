"""Tetromino coverings of the 4x4 board.

The dictionary built here is what the tetrolet transform searches per block:
117 exact covers of a 4x4 board by four tetrominoes, falling into 22 classes
under the symmetries of the square.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

BOARD = 4

Cell = tuple[int, int]
Shape = tuple[Cell, ...]


def _normalize(cells) -> Shape:
    cells = list(cells)
    r0 = min(r for r, _ in cells)
    c0 = min(c for _, c in cells)
    return tuple(sorted((r - r0, c - c0) for r, c in cells))


def _rot(cells) -> Shape:
    return _normalize((c, -r) for r, c in cells)


def _flip(cells) -> Shape:
    return _normalize((r, -c) for r, c in cells)


def shape_orbit(shape: Shape) -> set[Shape]:
    """All distinct orientations of a shape under rotation and reflection."""
    out = set()
    for s in (_normalize(shape), _flip(shape)):
        for _ in range(4):
            out.add(s)
            s = _rot(s)
    return out


def is_connected(cells) -> bool:
    cells = set(cells)
    if not cells:
        return False
    start = next(iter(cells))
    seen = {start}
    stack = [start]
    while stack:
        r, c = stack.pop()
        for nb in ((r + 1, c), (r - 1, c), (r, c + 1), (r, c - 1)):
            if nb in cells and nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == len(cells)


@functools.lru_cache(maxsize=None)
def fixed_tetrominoes() -> tuple[Shape, ...]:
    """The 19 fixed (oriented) tetromino shapes, normalized to the origin."""
    shapes = {((0, 0),)}
    for _ in range(3):
        grown = set()
        for shape in shapes:
            for r, c in shape:
                for nb in ((r + 1, c), (r - 1, c), (r, c + 1), (r, c - 1)):
                    if nb not in shape:
                        grown.add(_normalize(shape + (nb,)))
        shapes = grown
    return tuple(sorted(shapes))


def enumerate_free_tetrominoes() -> list[Shape]:
    """One canonical representative per free tetromino (I, O, T, S, L)."""
    reps = {min(shape_orbit(s)) for s in fixed_tetrominoes()}
    return sorted(reps)


@dataclass(frozen=True)
class Tetromino:
    cells: frozenset

    def __post_init__(self):
        cells = self.cells
        if len(cells) != 4:
            raise ValueError(f"tetromino needs 4 cells, got {len(cells)}")
        if any(not (0 <= r < BOARD and 0 <= c < BOARD) for r, c in cells):
            raise ValueError(f"cell outside the {BOARD}x{BOARD} board: {sorted(cells)}")
        if not is_connected(cells):
            raise ValueError(f"cells are not edge-connected: {sorted(cells)}")


def piece_cell_order(piece: Tetromino) -> list[Cell]:
    """Cell-to-Haar-slot order: row-major (top to bottom, then left to right)."""
    return sorted(piece.cells)


@dataclass(frozen=True)
class Covering:
    index: int
    labels: tuple[int, ...]
    pieces: tuple[Tetromino, ...]

    @property
    def grid(self) -> np.ndarray:
        return np.array(self.labels, dtype=np.int64).reshape(BOARD, BOARD)

    def slot_cells(self) -> np.ndarray:
        """(4, 4) array of flat board positions: [piece, slot] -> r * 4 + c."""
        return np.array(
            [[r * BOARD + c for r, c in piece_cell_order(p)] for p in self.pieces],
            dtype=np.int64,
        )

    def ascii(self) -> str:
        return "\n".join(
            "".join("ABCD"[v] for v in self.labels[r * BOARD:(r + 1) * BOARD])
            for r in range(BOARD)
        )


def _placements() -> list[frozenset]:
    out = []
    for shape in fixed_tetrominoes():
        h = max(r for r, _ in shape) + 1
        w = max(c for _, c in shape) + 1
        for dr in range(BOARD - h + 1):
            for dc in range(BOARD - w + 1):
                out.append(frozenset((r + dr, c + dc) for r, c in shape))
    return out


def _exact_covers() -> list[tuple[frozenset, ...]]:
    by_cell: dict[Cell, list[frozenset]] = {}
    for p in _placements():
        for cell in p:
            by_cell.setdefault(cell, []).append(p)
    order = [(r, c) for r in range(BOARD) for c in range(BOARD)]
    found = []

    def solve(covered: frozenset, chosen: list):
        free = next((cell for cell in order if cell not in covered), None)
        if free is None:
            found.append(tuple(chosen))
            return
        for p in by_cell[free]:
            if not (p & covered):
                chosen.append(p)
                solve(covered | p, chosen)
                chosen.pop()

    solve(frozenset(), [])
    return found


def _owner_grid(pieces) -> tuple[int, ...]:
    owner = {}
    for i, p in enumerate(pieces):
        for cell in p:
            owner[cell] = i
    return tuple(owner[(r, c)] for r in range(BOARD) for c in range(BOARD))


def _first_appearance_labels(pieces) -> tuple[int, ...]:
    relabel: dict[int, int] = {}
    return tuple(relabel.setdefault(g, len(relabel)) for g in _owner_grid(pieces))


def _column_major_pieces(pieces) -> tuple[frozenset, ...]:
    # Piece s sits at entry s of the column-major 2x2 low-pass tile.
    return tuple(sorted(pieces, key=lambda p: min((c, r) for r, c in p)))


_SQUARES = (0, 0, 1, 1, 0, 0, 1, 1, 2, 2, 3, 3, 2, 2, 3, 3)


@functools.lru_cache(maxsize=None)
def enumerate_coverings() -> tuple[Covering, ...]:
    """All 117 coverings in canonical order.

    Index 0 is the all-squares (classical Haar) covering; the rest follow in
    lexicographic order of their row-major label grids, labels assigned by
    first appearance.
    """
    keyed = []
    for cover in _exact_covers():
        key = _first_appearance_labels(cover)
        keyed.append(((key != _SQUARES, key), cover))
    keyed.sort(key=lambda kv: kv[0])
    out = []
    for index, ((_, key), cover) in enumerate(keyed):
        pieces = _column_major_pieces(cover)
        out.append(
            Covering(
                index=index,
                labels=_owner_grid(pieces),
                pieces=tuple(Tetromino(p) for p in pieces),
            )
        )
    return tuple(out)


def board_symmetries():
    """The eight symmetries of the square as maps on (row, col)."""
    n = BOARD - 1
    return [
        lambda r, c: (r, c),
        lambda r, c: (c, n - r),
        lambda r, c: (n - r, n - c),
        lambda r, c: (n - c, r),
        lambda r, c: (r, n - c),
        lambda r, c: (n - r, c),
        lambda r, c: (c, r),
        lambda r, c: (n - c, n - r),
    ]


def partition_key(cover: Covering | tuple) -> frozenset:
    """Label-free identity of a covering: the set of its piece cell sets."""
    pieces = cover.pieces if isinstance(cover, Covering) else cover
    return frozenset(p.cells if isinstance(p, Tetromino) else frozenset(p) for p in pieces)


def transform_covering(cover: Covering, sym) -> frozenset:
    return frozenset(
        frozenset(sym(r, c) for r, c in p.cells) for p in cover.pieces
    )


def fundamental_forms(coverings=None) -> list[list[Covering]]:
    """Partition coverings into orbits under the 8 board symmetries.

    Orbits come back ordered by their smallest member index, and members by
    index, so the first member is a stable representative.
    """
    if coverings is None:
        coverings = enumerate_coverings()
    by_key = {partition_key(c): c for c in coverings}
    seen: set[int] = set()
    orbits = []
    for cover in coverings:
        if cover.index in seen:
            continue
        members = {}
        for sym in board_symmetries():
            image = by_key.get(transform_covering(cover, sym))
            if image is None:
                raise ValueError(f"covering {cover.index} maps outside the dictionary")
            members[image.index] = image
        seen.update(members)
        orbits.append([members[i] for i in sorted(members)])
    return orbits


@functools.lru_cache(maxsize=None)
def slot_table() -> np.ndarray:
    """(117, 4, 4) int array: [covering, piece, slot] -> flat block position."""
    table = np.stack([c.slot_cells() for c in enumerate_coverings()])
    table.setflags(write=False)
    return table
