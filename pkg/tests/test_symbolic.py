import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entropy_lab.symbolic import (OpenSet, Partition, Point, ProductOpenSet, find_point, make_system,
                                  metric, nonempty_intersection, periodic_points, random_point,
                                  refine_partition, shift, system_from_json)

from oracles import brute_words

FULL = make_system("full-shift", 2)
GOLDEN = make_system("sft", 2, [[1, 1], [1, 0]])
FIXED = make_system("periodic-orbit", 2)
ORBIT01 = make_system("periodic-orbit", 2, word=(0, 1))


def cyl(w, o=0):
    return OpenSet.cylinder(tuple(w), o)


# --- systems ----------------------------------------------------------------


def test_full_shift_adjacency():
    assert FULL.adjacency.tolist() == [[1, 1], [1, 1]]


def test_golden_mean_forbids_11():
    words = {tuple(w) for w in GOLDEN.words(2)}
    assert words == {(0, 0), (0, 1), (1, 0)}
    assert not GOLDEN.is_admissible((1, 1))
    assert GOLDEN.is_admissible((0, 1, 0, 0, 1))


@pytest.mark.parametrize("sysm", [FULL, GOLDEN, ORBIT01, make_system("periodic-orbit", 2, word=(0, 1, 1))])
@pytest.mark.parametrize("L", [1, 3, 5])
def test_words_match_enumeration(sysm, L):
    assert [tuple(w) for w in sysm.words(L)] == brute_words(sysm, L)


def test_fixed_point_system():
    assert FIXED.n_vertices == 1
    assert [tuple(w) for w in FIXED.words(4)] == [(0, 0, 0, 0)]


def test_rejects_stranded_symbol():
    with pytest.raises(ValueError, match="all-zero"):
        make_system("sft", 2, [[1, 0], [1, 0]])
    with pytest.raises(ValueError):
        make_system("sft", 2, [[1, 2], [1, 0]])


def test_rejects_inadmissible_orbit_word():
    with pytest.raises(ValueError):
        make_system("periodic-orbit", 3, word=(0, 5))


def test_system_from_json():
    s = system_from_json('{"kind": "sft", "alphabet": 2, "adjacency": [[1,1],[1,0]]}')
    assert s.kind == "sft" and s.adjacency.tolist() == [[1, 1], [1, 0]]


# --- points, shift, metric ------------------------------------------------------


def test_shift_examples():
    assert shift(Point((0, 1), 0), 1) == Point((0, 1), 1)
    assert shift(Point((0,)), 5) == Point((0,))


def test_point_canonical_form():
    assert Point((1, 0, 1, 0), 0) == Point((0, 1), 1)
    assert Point((1, 0), 0).window(0, 4) == (1, 0, 1, 0)


def test_shift_invertible_on_random_points():
    rng = np.random.default_rng(3)
    for _ in range(100):
        x = random_point(GOLDEN, rng, 6)
        assert shift(shift(x, 3), -3) == x
        assert x.in_system(GOLDEN)


def test_metric_examples():
    x0, x1 = Point((0,)), Point((1,))
    assert metric(x0, x0) == 0.0
    assert metric(x0, x1) == 1.0
    assert metric(Point((0, 1), 0), x0) == 0.5


def _points(sysm, max_period=5):
    return [x for p in range(1, max_period + 1) for x in periodic_points(sysm, p)]


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_metric_axioms(data):
    pts = _points(FULL, 5)
    x, y, z = (data.draw(st.sampled_from(pts)) for _ in range(3))
    assert metric(x, y) == metric(y, x)
    assert (metric(x, y) == 0) == (x == y)
    assert metric(x, z) <= metric(x, y) + metric(y, z) + 1e-15


def test_point_equality_agrees_with_windows():
    pts = _points(GOLDEN, 5)
    for x, y in itertools.combinations(pts, 2):
        span = 2 * max(x.period, y.period)
        same = x.window(-span, 2 * span) == y.window(-span, 2 * span)
        assert same == (x == y)


# --- open sets and intersections ------------------------------------------------


def test_open_set_normalization():
    U = OpenSet(((0, (0,)), (0, (0, 1)), (1, (1,))))
    assert U.cylinders == ((0, (0,)), (1, (1,)))
    assert OpenSet(((0, (0, 1)), (0, ()))) == OpenSet.whole()


def test_intersection_examples():
    assert nonempty_intersection([(0, cyl([0])), (1, cyl([1]))], None, FULL)
    assert not nonempty_intersection([(0, cyl([1])), (1, cyl([1]))], None, GOLDEN)
    assert not nonempty_intersection([(0, cyl([0])), (1, cyl([1]))], None, FIXED)


def test_find_point_satisfies_constraints():
    x = find_point([(0, cyl([1])), (2, cyl([1])), (5, cyl([0, 1]))], cyl([1, 0]), GOLDEN)
    assert x is not None and x.in_system(GOLDEN)
    assert x[0] == 1 and x[2] == 1 and x.window(5, 2) == (0, 1) and x.window(0, 2) == (1, 0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 4), st.lists(st.integers(0, 1), min_size=1, max_size=2)),
                min_size=1, max_size=4))
def test_intersection_monotone_and_exact(constraints):
    sets = [(t, cyl(w)) for t, w in constraints]
    # exact against finite-word enumeration (golden mean is irreducible)
    words = brute_words(GOLDEN, 7)
    expect = any(all(tuple(w[t:t + len(c)]) == tuple(c) for t, c in constraints) for w in words)
    got = nonempty_intersection(sets, None, GOLDEN)
    assert got == expect
    # adding a constraint never turns false into true
    for extra in ([(0, cyl([1]))], [(3, cyl([0, 0]))]):
        if not got:
            assert not nonempty_intersection(sets + extra, None, GOLDEN)


def test_product_sets():
    P2 = make_system("product", component=GOLDEN, factor_count=2)
    A = ProductOpenSet.product([cyl([1]), cyl([1])])
    assert nonempty_intersection([(0, A)], None, P2)
    assert not nonempty_intersection([(0, A), (1, A)], None, P2)
    S = ProductOpenSet.symmetric([cyl([0]), cyl([1])])
    assert len(S.boxes) == 2
    assert S.contains((Point((1, 0)), Point((0,))))


# --- partitions ---------------------------------------------------------------


def test_refine_generator_full_shift():
    R = refine_partition(Partition.generator(FULL), FULL, 3)
    assert len(R.keys) == 8
    assert sorted(R.keys) == sorted(itertools.product((0, 1), repeat=3))


def test_refine_identity_and_golden():
    P = Partition.generator(GOLDEN)
    assert refine_partition(P, GOLDEN, 1) is P
    R = refine_partition(P, GOLDEN, 2)
    assert len(R.keys) == 3 and (1, 1) not in R.keys


@pytest.mark.parametrize("sysm", [FULL, GOLDEN, ORBIT01])
def test_refinement_counts_nondecreasing_and_disjoint(sysm):
    P = Partition.generator(sysm)
    counts = []
    for n in range(1, 6):
        R = refine_partition(P, sysm, n)
        counts.append(len(R.keys))
        cells = R.cells
        for a, b in itertools.combinations(cells, 2):
            assert not nonempty_intersection([(0, a), (0, b)], None, sysm)
    assert counts == sorted(counts)


def test_replete():
    assert Partition.generator(FULL).is_replete()
    assert not Partition.generator(FIXED).is_replete()
