import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pamlab.lattice import (
    Box,
    Path,
    PathCapError,
    ScaleError,
    default_scales,
    enumerate_paths,
    enumerate_paths_from,
    l1,
    returning_walk_counts,
    strip_box_partition,
    visit_profile,
)


def test_box_cardinality_and_sites():
    b = Box.centered(2, 2)
    assert b.cardinality == 25 == len(b.sites())
    assert b.contains((2, -2)) and not b.contains((3, 0))
    assert tuple(b.sites()[0]) == (-2, -2)


def test_three_site_loops_in_d1():
    paths = enumerate_paths([-1, 0, 1], 0, 0, 3)
    assert [p.sites for p in paths] == [((0,), (1,), (0,)), ((0,), (-1,), (0,))]


def test_trivial_path_and_parity():
    assert [p.sites for p in enumerate_paths(None, (0,), (0,), 1)] == [((0,),)]
    assert enumerate_paths(None, (0,), (1,), 3) == []
    assert enumerate_paths(None, (0,), (3,), 3) == []


@pytest.mark.parametrize("d,n", [(1, 5), (1, 8), (2, 4), (2, 6), (3, 4)])
def test_count_bound(d, n):
    x = (0,) * d
    for y in [x, (1,) + (0,) * (d - 1)]:
        assert len(enumerate_paths(None, x, y, n)) <= (2 * d) ** (n - 1)


@pytest.mark.parametrize("d", [1, 2])
def test_loop_counts_match_convolution(d):
    walks = returning_walk_counts(d, 8)
    for n in range(1, 10):
        loops = len(enumerate_paths(None, (0,) * d, (0,) * d, n))
        assert loops == walks[n - 1]


def test_path_cap():
    with pytest.raises(PathCapError):
        enumerate_paths(None, (0, 0), (0, 0), 13, cap=1000)
    with pytest.raises(PathCapError):
        enumerate_paths_from((0,), 12, cap=100)


def test_enumerate_paths_from_counts():
    assert len(enumerate_paths_from((0, 0), 4)) == 4**3
    assert all(p.sites[0] == (0,) for p in enumerate_paths_from(0, 3))


def test_container_respected():
    U = Box.centered(1, 2)
    for p in enumerate_paths(U, (0, 0), (1, 1), 5):
        assert all(U.contains(z) for z in p.sites)


def test_path_validation():
    with pytest.raises(ValueError):
        Path(((0,), (2,)))
    with pytest.raises(ValueError):
        Path(())


def test_visit_profile_examples():
    p = visit_profile(Path(((0,), (1,), (0,))))
    assert p.distinct_sites == ((0,), (1,)) and p.multiplicities == (2, 1)
    assert visit_profile(Path(((0,), (1,), (2,)))).multiplicities == (1, 1, 1)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=0, max_size=12))
def test_visit_profile_sums_to_length(steps):
    dirs = [(1, 0), (-1, 0), (0, 1), (0, -1)]
    sites = [(0, 0)]
    for s in steps:
        sites.append(tuple(a + b for a, b in zip(sites[-1], dirs[s])))
    path = Path(tuple(sites))
    assert sum(visit_profile(path).multiplicities) == len(path)


def test_partition_worked_example():
    part = strip_box_partition(5, 3, 1)
    assert (part.q, part.q_bar) == (3, 2)
    assert part.lengths == (4, 4, 3) and sum(part.lengths) == 11
    assert part.fine == (2, 2, 1)
    # the widened intervals leave no interior at r_i = 2
    assert [part.main_box_cardinality((i,)) for i in (1, 2, 3)] == [0, 0, 1]


@pytest.mark.parametrize("L,l,r,d", [(5, 3, 1, 1), (10, 5, 1, 1), (12, 5, 1, 2), (20, 8, 2, 1), (8, 4, 1, 2), (30, 10, 2, 1)])
def test_partition_covers_box_exactly(L, l, r, d):
    part = strip_box_partition(L, l, r, d)
    seen = set()
    for idx, sites in part.main_boxes.items():
        block = set(map(tuple, sites))
        assert not (block & seen)
        seen |= block
        assert len(sites) == part.main_box_cardinality(idx)
        expected = math.prod(max(0, part.lengths[i - 1] - 2 * part.fine[i - 1]) for i in idx)
        assert len(sites) == expected
    strip = set(map(tuple, part.strip))
    assert not (strip & seen)
    assert strip | seen == set(map(tuple, Box.centered(L, d).sites()))


def test_partition_rejects_bad_scales():
    with pytest.raises(ScaleError):
        strip_box_partition(5, 3, 0)
    with pytest.raises(ScaleError):
        strip_box_partition(5, 2, 1)
    with pytest.raises(ScaleError):
        strip_box_partition(5, 12, 1)
    # 2L+1 = 25 = 3*7 + 4 leaves more remainder than boxes
    with pytest.raises(ScaleError):
        strip_box_partition(12, 7, 2)


def test_default_scales_example():
    assert default_scales(3, 1.0, 2.0) == (90, 20, 9)


def test_default_scales_scan():
    prev = (0, 0, 0)
    for t in np.linspace(4, 12, 33):
        L, l, r = default_scales(float(t), 1.0, 2.0)
        assert 2 * r < l <= 2 * L + 1
        assert L >= prev[0] and l >= prev[1] and r >= prev[2]
        prev = (L, l, r)
    with pytest.raises(ScaleError):
        default_scales(1.0, 1.0, 2.0)


def test_l1():
    assert l1((1, -2), (-1, 1)) == 5
