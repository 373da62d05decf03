from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arcembed.design import (
    Design,
    DifferenceFamily,
    ParallelClass,
    StructureError,
    complete_design,
    develop_family,
    incidence_matrix,
    starter_parallel_class,
    validate_design,
    validate_family,
)
from conftest import ROT52_BLOCKS


def brute_pair_counts(D):
    counts = {p: 0 for p in combinations(range(D.v), 2)}
    for blk in D.blocks:
        for p in combinations(blk, 2):
            counts[p] += 1
    return counts


def test_family_is_valid(rot52_family):
    rep = validate_family(rot52_family)
    assert rep.ok, rep.violations
    assert rep.details["differences"] == 48
    assert rep.details["residues"] == list(range(1, 17))


def test_family_shape(rot52_family):
    assert (rot52_family.k, rot52_family.v, rot52_family.stride) == (4, 52, 17)
    assert rot52_family.short_block() == (0, 17, 34, 51)


def test_developed_design(rot52_design):
    D = rot52_design
    assert (D.v, D.b, D.k, D.r) == (52, 221, 4, 17)
    assert validate_design(D, 1).ok
    assert set(brute_pair_counts(D).values()) == {1}


def test_perturbed_family_is_rejected():
    blocks = [b[:] for b in ROT52_BLOCKS]
    blocks[0][3] = 45
    F = DifferenceFamily(51, blocks)
    rep = validate_family(F)
    assert not rep.ok
    assert len(rep.violations) == 2  # both difference and residue coverage break
    with pytest.raises(ValueError):
        develop_family(F)


@pytest.mark.parametrize(
    "modulus,blocks",
    [
        (51, []),
        (51, [[1, 2, 3]]),
        (51, [[1, 2, 3, 4], [1, 2, 3]]),
        (51, [[1, 1, 2, 3]] * 4),
        (51, [[1, 2, 3, 60]] * 4),
        (50, [[1, 2, 3, 4]] * 4),
    ],
)
def test_family_structure_errors(modulus, blocks):
    with pytest.raises(StructureError):
        DifferenceFamily(modulus, blocks)


def test_deleted_block_is_reported(rot52_design):
    D = Design(52, rot52_design.blocks[1:])
    rep = validate_design(D, 1)
    assert not rep.ok
    assert len(rep.details["uncovered_pairs"]) == 6


def test_repeated_pair_is_reported():
    D = Design(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3), (0, 1, 2)])
    rep = validate_design(D, 1)
    assert not rep.ok
    assert rep.first_violation()


def test_design_rejects_bad_blocks():
    with pytest.raises(StructureError):
        Design(3, [(0, 5)])
    with pytest.raises(StructureError):
        Design(3, [()])


def test_starter_class(rot52_family, rot52_design):
    pc = starter_parallel_class(rot52_family, rot52_design)
    assert len(pc.block_indices) == 13
    union = sorted(x for b in pc.block_indices for x in rot52_design.blocks[b])
    assert union == list(range(52))


def test_incidence_matrix(rot52_design):
    M = incidence_matrix(rot52_design)
    assert len(M) == 52 and len(M[0]) == 221
    assert all(sum(row) == 17 for row in M)
    assert all(sum(col) == 4 for col in zip(*M))


def test_json_round_trip(rot52_design):
    assert Design.from_json(rot52_design.to_json()) == rot52_design


def test_parallel_class_ordering():
    assert ParallelClass((1, 2)) < ParallelClass((1, 3))


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
def test_complete_design_is_a_2_design(n):
    assert validate_design(complete_design(n), 1).ok


def test_small_rotational_families():
    # 2-(4,2,1): n=3, short block {0, inf} develops to {0,3},{1,3},{2,3}
    D = develop_family(DifferenceFamily(3, [[1, 2]]))
    assert D == complete_design(4)
    D6 = develop_family(DifferenceFamily(5, [[1, 4], [2, 3]]))
    assert D6 == complete_design(6)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 50), st.permutations(range(4)))
def test_translated_and_reordered_family_develops_to_same_design(shift, order):
    """Translating every base block and reordering elements leaves the
    developed design unchanged."""
    base = develop_family(DifferenceFamily(51, ROT52_BLOCKS))
    moved = [[(b[i] + shift) % 51 for i in order] for b in ROT52_BLOCKS]
    F = DifferenceFamily(51, moved)
    if validate_family(F).ok:  # residues mod 17 can change under translation
        assert develop_family(F) == base
    else:
        assert shift % 17 != 0
