import itertools

import numpy as np
import pytest

from entropy_lab.induced import (InducedOpenSet, SymmetricClass, induced_disjoint, induced_shift,
                                 lift_open_pair, membership, product_shift, psi, psi_hat, quasifactor_atoms,
                                 quasifactor_mass, sample_product_image_pair, tau, theorem3_experiment)
from entropy_lab.independence import random_disjoint_pair
from entropy_lab.measures import (EmpiricalMeasure, in_basic_set, SymmetricQuasifactor, barycenter_residual, make_bernoulli,
                                  make_markov, make_periodic_measure, parry_matrix)
from entropy_lab.symbolic import OpenSet, Point, make_system, periodic_points, random_point

from oracles import brute_words

FULL = make_system("full-shift", 2)
GOLDEN = make_system("sft", 2, [[1, 1], [1, 0]])
FIXED = make_system("periodic-orbit", 2)
ZERO, ONE = OpenSet.cylinder((0,)), OpenSet.cylinder((1,))


def cyl(w, o=0):
    return OpenSet.cylinder(tuple(w), o)


def random_tuple(rng, system, n):
    return tuple(random_point(system, rng, 4) for _ in range(n))


# --- psi, tau, psi_hat, shifts ------------------------------------------------------


def test_psi_examples():
    x, y = Point((0, 1)), Point((1,))
    assert psi((x,)) == EmpiricalMeasure((x,))
    assert psi((x, x)).support() == {x: 1.0}
    assert psi((x, y)) == psi((y, x))
    assert tau((x, y)) == tau((y, x))
    a, b = psi((x, x, y)), psi((x, y, y))
    assert a != b
    assert a.support()[x] == pytest.approx(2 / 3) and b.support()[x] == pytest.approx(1 / 3)


def test_factorization_and_commutation_on_random_tuples():
    rng = np.random.default_rng(9)
    for _ in range(100):
        n = int(rng.integers(1, 5))
        xs = random_tuple(rng, GOLDEN, n)
        assert psi_hat(tau(xs)) == psi(xs)
        c = tau(xs)
        assert induced_shift(psi_hat(c)) == psi_hat(product_shift(c))


def test_shift_degenerate_cases():
    fixed = SymmetricClass((Point((0,)), Point((0,))))
    assert product_shift(fixed) == fixed
    c = SymmetricClass((Point((0, 1), 0), Point((0, 1), 0)))
    assert product_shift(product_shift(c)) == c
    assert induced_shift(psi_hat(c)) != psi_hat(c)


# --- quasifactor masses ---------------------------------------------------------------


def test_quasifactor_mass_examples():
    mu = make_bernoulli([0.5, 0.5])
    assert quasifactor_mass(mu, 2, [(ZERO, 1), (ONE, 1)]) == pytest.approx(0.5, abs=1e-15)
    assert quasifactor_mass(mu, 2, [(ZERO, 2)]) == pytest.approx(0.25, abs=1e-15)
    with pytest.raises(ValueError):
        quasifactor_mass(mu, 2, [(ZERO, 1), (cyl((0, 1)), 1)])
    with pytest.raises(ValueError):
        quasifactor_mass(mu, 2, [(ZERO, 1)])


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_quasifactor_atoms_sum_to_one(n):
    mu = make_markov(parry_matrix(GOLDEN.adjacency), GOLDEN)
    for depth in (1, 2):
        atoms = quasifactor_atoms(mu, n, depth)
        assert sum(m for _, m, _ in atoms) == pytest.approx(1.0, abs=1e-12)


def test_multiset_masses_agree_with_enumeration():
    mu = make_bernoulli([0.3, 0.7])
    n, L = 3, 2
    words = brute_words(FULL, L)
    cells = [cyl(w) for w in words]
    totals = {}
    for combo in itertools.product(range(len(words)), repeat=n):
        key = tuple(sorted(combo))
        p = np.prod([mu.mass(words[i]) for i in combo])
        totals[key] = totals.get(key, 0.0) + p
    for key, p in totals.items():
        comp = [key.count(i) for i in range(len(words))]
        target = [(cells[i], c) for i, c in enumerate(comp) if c]
        assert quasifactor_mass(mu, n, target) == pytest.approx(p, abs=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_barycenter_exact(n):
    mu = make_bernoulli([0.5, 0.5], depth=8)
    tests = [cyl(w, o) for L in range(1, 9) for w in brute_words(FULL, L)[:: max(1, 2 ** L // 8)]
             for o in (0, 8 - L)]
    assert barycenter_residual(SymmetricQuasifactor(mu, n), mu, tests) <= 1e-12


# --- sets of empirical measures ------------------------------------------------------


def test_lift_membership_examples():
    x, y = Point((0,)), Point((1,))
    S0, S1 = lift_open_pair(ZERO, ONE, 2)
    assert S0.level == 0.5
    assert membership(EmpiricalMeasure((x,)), S0)
    half = EmpiricalMeasure((x, y))
    assert not membership(half, S0) and not membership(half, S1)


def test_lifted_sets_disjoint():
    rng = np.random.default_rng(1)
    for _ in range(20):
        U0, U1 = random_disjoint_pair(GOLDEN, rng, 2)
        for n in (2, 3):
            assert induced_disjoint(*lift_open_pair(U0, U1, n), GOLDEN)


def test_lift_rejects_overlap():
    with pytest.raises(ValueError):
        lift_open_pair(ZERO, cyl((0, 1)), 2)


def test_threshold_preimage_matches_membership():
    rng = np.random.default_rng(6)
    U = cyl((0,)) | cyl((1, 1))
    for n in (2, 3, 4):
        for level in (0.0, 0.25, 0.5, (n - 1) / n):
            S = InducedOpenSet.threshold(U, level, n)
            pre = S.preimage()
            for _ in range(20):
                xs = random_tuple(rng, FULL, n)
                assert pre.contains(xs) == membership(psi(xs), S)


def test_product_image_membership():
    U1, U2 = cyl((0,)), cyl((1,))
    x = Point((0,))
    S = InducedOpenSet.product_image((U1, U2))
    assert membership(psi((x, Point((1,)))), S)
    assert not membership(psi((x, x)), S)


def test_sampled_product_image_pairs_disjoint():
    rng = np.random.default_rng(0)
    for _ in range(10):
        (V0, V1), W, (S0, S1) = sample_product_image_pair(FULL, 2, rng)
        assert induced_disjoint(S0, S1, FULL)
        # every product-image measure lies in the weak-star set around V_i
        for S, w in ((S0, W[0]), (S1, W[1])):
            pts = [next(p for p in periodic_points(FULL, 4) if U.contains(p)) for U in S.sets]
            assert in_basic_set(psi(pts), w)


# --- sign pattern ------------------------------------------------------------------


def test_theorem3_forward_and_backward():
    mu = make_bernoulli([0.5, 0.5])
    fwd = theorem3_experiment(FULL, mu, 2, "forward", pairs=3, seed=0)
    assert fwd.all_positive
    bwd = theorem3_experiment(FULL, mu, 2, "backward", pairs=3, seed=0)
    assert bwd.all_positive
    for p in bwd.pairs:
        assert p["base_verified"] and p["base_ratio"] >= p["induced_density"]


def test_theorem3_periodic_zero():
    orbit = make_system("periodic-orbit", 2, word=(0, 1))
    mu = make_periodic_measure(orbit)
    for direction in ("forward", "backward"):
        rep = theorem3_experiment(orbit, mu, 2, direction, pairs=2, seed=0)
        assert rep.densities == [0.0, 0.0] and not rep.all_positive


def test_theorem3_deterministic():
    mu = make_bernoulli([0.5, 0.5])
    a = theorem3_experiment(FULL, mu, 2, "forward", pairs=2, seed=3)
    b = theorem3_experiment(FULL, mu, 2, "forward", pairs=2, seed=3)
    assert a.pairs == b.pairs


def test_theorem3_n1_is_identity():
    mu = make_bernoulli([0.5, 0.5])
    for direction in ("forward", "backward"):
        rep = theorem3_experiment(FULL, mu, 1, direction, pairs=2, seed=0)
        assert rep.all_positive and any("n = 1" in n for n in rep.notes)
    assert all(p["base_verified"] for p in rep.pairs)
