import hashlib

import pytest

from oracles import brute_force_cover_count, brute_force_placements, canonical_grid
from tetrolet_iqa import tiling
from tetrolet_iqa.tiling import (
    Tetromino,
    enumerate_coverings,
    enumerate_free_tetrominoes,
    fundamental_forms,
    piece_cell_order,
)

GOLDEN_SHA256 = "364492614c8c29cb66017df44a8f5433b0a9618661d0de9a7927157da83455c6"


def test_five_free_tetrominoes():
    assert len(enumerate_free_tetrominoes()) == 5


def test_o_tetromino_orbit_is_a_single_shape():
    square = ((0, 0), (0, 1), (1, 0), (1, 1))
    assert tiling.shape_orbit(square) == {square}


def test_fixed_placements_match_brute_force():
    assert sorted(map(sorted, tiling._placements())) == sorted(map(sorted, brute_force_placements()))
    assert len(brute_force_placements()) == 113


def test_117_coverings_match_independent_count():
    coverings = enumerate_coverings()
    assert len(coverings) == 117
    assert brute_force_cover_count() == 117
    assert len({c.labels for c in coverings}) == 117
    assert [c.index for c in coverings] == list(range(117))


def test_index_zero_is_the_haar_squares_covering():
    c0 = enumerate_coverings()[0]
    assert c0.ascii() == "AACC\nAACC\nBBDD\nBBDD"


def test_every_label_class_is_a_tetromino():
    for c in enumerate_coverings():
        grid = c.grid
        for lab in range(4):
            cells = frozenset(zip(*(grid == lab).nonzero()))
            Tetromino(cells)  # validates
            assert cells == c.pieces[lab].cells


def test_22_fundamental_forms():
    orbits = fundamental_forms(enumerate_coverings())
    assert len(orbits) == 22
    assert sum(len(o) for o in orbits) == 117
    assert len({canonical_grid(c.grid) for c in enumerate_coverings()}) == 22


def test_squares_orbit_is_a_singleton():
    orbits = fundamental_forms()
    orbit = next(o for o in orbits if o[0].index == 0)
    assert len(orbit) == 1


def test_symmetries_stay_inside_the_orbit():
    coverings = enumerate_coverings()
    by_key = {tiling.partition_key(c): c for c in coverings}
    orbit_of = {}
    for n, orbit in enumerate(fundamental_forms(coverings)):
        for c in orbit:
            orbit_of[c.index] = n
    for c in coverings:
        for sym in tiling.board_symmetries():
            image = by_key[tiling.transform_covering(c, sym)]
            assert orbit_of[image.index] == orbit_of[c.index]


def test_enumeration_order_is_golden():
    blob = "\n".join("".join(map(str, c.labels)) for c in enumerate_coverings())
    assert hashlib.sha256(blob.encode()).hexdigest() == GOLDEN_SHA256


@pytest.mark.parametrize(
    "cells, expected",
    [
        ({(1, 1), (0, 0), (1, 0), (0, 1)}, [(0, 0), (0, 1), (1, 0), (1, 1)]),
        ({(3, 2), (1, 2), (0, 2), (2, 2)}, [(0, 2), (1, 2), (2, 2), (3, 2)]),
    ],
)
def test_piece_cell_order_is_row_major(cells, expected):
    assert piece_cell_order(Tetromino(frozenset(cells))) == expected


def test_piece_cell_order_is_a_permutation():
    for c in enumerate_coverings():
        for p in c.pieces:
            order = piece_cell_order(p)
            assert len(order) == 4 and set(order) == p.cells


@pytest.mark.parametrize(
    "cells",
    [
        {(0, 0), (0, 1), (0, 2)},
        {(0, 0), (0, 1), (2, 2), (2, 3)},
        {(0, 0), (0, 1), (0, 2), (0, 4)},
    ],
)
def test_invalid_tetrominoes_rejected(cells):
    with pytest.raises(ValueError):
        Tetromino(frozenset(cells))
