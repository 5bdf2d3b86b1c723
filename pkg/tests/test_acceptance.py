"""Acceptance criteria, one PASS/FAIL line each.

Run under pytest (lines are printed uncaptured) or directly::

    python tests/test_acceptance.py
"""

import itertools
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from entropy_lab.entropy import (katok_cover_number, katok_entropy_estimate, ks_entropy_estimate,  # noqa: E402
                                 markov_entropy_exact)
from entropy_lab.independence import (IndependenceProblem, density_estimate, is_independence_set,  # noqa: E402
                                      max_independence_in_window, phi, random_disjoint_pair)
from entropy_lab.induced import (induced_shift, product_shift, psi, psi_hat, quasifactor_atoms,  # noqa: E402
                                 quasifactor_mass, tau, theorem3_experiment)
from entropy_lab.measures import (DiscreteMeasure, SymmetricQuasifactor, barycenter_residual,  # noqa: E402
                                  compositions, dirac, make_bernoulli, make_markov, make_periodic_measure,
                                  parry_matrix, prohorov)
from entropy_lab.seplemma import theorem5_family, theorem5_pipeline  # noqa: E402
from entropy_lab.symbolic import OpenSet, Partition, make_system, metric, periodic_points, random_point  # noqa: E402

from oracles import phi_bitmask_oracle, prohorov_brute  # noqa: E402

LOG_PHI = math.log2((1 + 5 ** 0.5) / 2)
FULL = make_system("full-shift", 2)
GOLDEN = make_system("sft", 2, [[1, 1], [1, 0]])
FIXED = make_system("periodic-orbit", 2)
ORBIT = make_system("periodic-orbit", 2, word=(0, 1, 1))
ZERO, ONE = OpenSet.cylinder((0,)), OpenSet.cylinder((1,))


def parry(depth=12):
    return make_markov(parry_matrix(GOLDEN.adjacency), GOLDEN, depth)


class Checks:
    """Collects named sub-checks; the criterion passes when all do."""

    def __init__(self):
        self.items = []

    def __call__(self, name, ok, detail=""):
        self.items.append((name, bool(ok), detail))

    @property
    def ok(self):
        return all(ok for _, ok, _ in self.items)

    def summary(self):
        bad = [f"{n} [{d}]" if d else n for n, ok, d in self.items if not ok]
        if bad:
            return "failed: " + "; ".join(bad)
        return "; ".join(f"{n} {d}".strip() for n, _, d in self.items)


def criterion_1(c):
    mu = make_bernoulli([0.5, 0.5], depth=14)
    rep = ks_entropy_estimate(mu, None, Partition.generator(FULL), 14)
    err = max(abs(h - 1.0) for _, h, _ in rep.rows)
    c("rows n<=14", err <= 1e-10, f"max|H/n-1|={err:.1e}")
    h = markov_entropy_exact([[0.5, 0.5], [0.5, 0.5]])
    c("exact rate", abs(h - 1.0) <= 1e-10, f"={h!r}")


def criterion_2(c):
    mu = make_bernoulli([0.5, 0.5], depth=14)
    P = Partition.generator(FULL)
    Ns = [katok_cover_number(mu, None, P, n, 0.125) for n in range(4, 15)]
    c("N(n)=ceil(0.875*2^n)", Ns == [math.ceil(0.875 * 2 ** n) for n in range(4, 15)])
    s = katok_entropy_estimate(mu, None, P, 0.125, range(4, 15)).slope
    c("Bernoulli slope", abs(s - 1.0) < 0.05, f"{s:.4f}")
    oracle = markov_entropy_exact(parry_matrix(GOLDEN.adjacency))
    s = katok_entropy_estimate(parry(), GOLDEN, Partition.generator(GOLDEN), 0.2, range(4, 13)).slope
    c("Parry slope", abs(s - oracle) < 0.08, f"{s:.4f} vs {oracle:.4f}")


PTS = sorted({x for p in range(1, 5) for x in periodic_points(FULL, p)})


def _random_measure(rng, max_atoms=6):
    k = int(rng.integers(1, max_atoms + 1))
    idx = rng.choice(len(PTS), size=k, replace=False)
    return DiscreteMeasure(dict(zip([PTS[i] for i in idx], rng.dirichlet(np.ones(k)))))


def criterion_3(c):
    rng = np.random.default_rng(3)
    worst = 0.0
    pairs = [(_random_measure(rng), _random_measure(rng)) for _ in range(100)]
    for a, b in pairs:
        d = prohorov(a, b)
        worst = max(worst, abs(d - prohorov(a, b, oracle=True)),
                    abs(d - prohorov_brute(a.support(), b.support(), metric)))
    c("flow vs oracle, 100 pairs", worst <= 1e-9, f"max diff {worst:.1e}")
    bad = 0
    for _ in range(100):
        a, b, e = (_random_measure(rng) for _ in range(3))
        ab = prohorov(a, b)
        bad += not (abs(ab - prohorov(b, a)) <= 1e-12 and 0 <= ab <= 1 and prohorov(a, a) == 0
                    and (ab > 0) == (a != b) and prohorov(a, e) <= ab + prohorov(b, e) + 1e-9)
    c("metric axioms, 100 triples", bad == 0, f"{bad} bad")
    worst = 0.0
    for _ in range(50):
        x, y = random_point(FULL, rng, 6), random_point(FULL, rng, 6)
        worst = max(worst, abs(prohorov(dirac(x), dirac(y)) - min(metric(x, y), 1.0)))
    c("Dirac pairs, 50", worst <= 1e-9, f"max diff {worst:.1e}")


def _hereditary(J, sets, D, system):
    return all(is_independence_set(sub, sets, D, system)
               for r in range(len(J) + 1) for sub in itertools.combinations(J, r))


def criterion_4(c):
    rng = np.random.default_rng(4)
    mismatches, heredity_bad, atoms_max = 0, 0, 0
    for i in range(50):
        if i % 2 == 0:
            system, depth = FULL, int(rng.integers(1, 5))
            p = float(rng.uniform(0.2, 0.8))
            mu = make_bernoulli([p, 1 - p])
        else:
            system, depth = GOLDEN, int(rng.integers(1, 6))
            mu = parry()
        atoms_max = max(atoms_max, len(system.words(depth)))
        m = int(rng.integers(3, 9))
        delta = float(rng.uniform(0.05, 0.6))
        U0, U1 = random_disjoint_pair(system, rng, 2)
        r = phi(IndependenceProblem(system, mu, (U0, U1), delta, m, atom_depth=depth))
        ref = phi_bitmask_oracle(system, mu, [U0.cylinders, U1.cylinders], delta, m, depth)
        mismatches += (not r.exact) or r.value != ref
        heredity_bad += not _hereditary(r.witness, (U0, U1), r.D, system)
        _, J = max_independence_in_window((U0, U1), None, system, m)
        heredity_bad += not _hereditary(J, (U0, U1), None, system)
    c("exact phi vs oracle, 50 instances", mismatches == 0, f"{mismatches} mismatches, <= {atoms_max} atoms")
    c("heredity of witnesses", heredity_bad == 0, f"{heredity_bad} bad")
    d = density_estimate(IndependenceProblem(FULL, make_bernoulli([0.5, 0.5]), (ZERO, ONE), 0.1, 10),
                         [6, 8, 10], [0.1, 0.25]).density
    c("full shift density", d == 1.0, f"{d}")
    d = density_estimate(IndependenceProblem(ORBIT, make_periodic_measure(ORBIT), (ZERO, ONE), 0.1, 10),
                         [6, 8, 10], [0.1, 0.25]).density
    c("periodic density", d == 0.0, f"{d}")


def criterion_5(c):
    rng = np.random.default_rng(5)
    bad = 0
    for _ in range(100):
        n = int(rng.integers(1, 5))
        xs = tuple(random_point(GOLDEN, rng, 4) for _ in range(n))
        cls = tau(xs)
        bad += psi_hat(cls) != psi(xs)
        bad += induced_shift(psi_hat(cls)) != psi_hat(product_shift(cls))
    c("identities on 100 tuples", bad == 0, f"{bad} bad")
    worst = 0.0
    for mu in (make_bernoulli([0.3, 0.7], depth=8), parry(8)):
        for n in (1, 2, 3, 4):
            for depth in (1, 2):
                worst = max(worst, abs(sum(m for _, m, _ in quasifactor_atoms(mu, n, depth)) - 1))
            cells = [OpenSet.cylinder(tuple(int(s) for s in w)) for w in mu.system.words(2)]
            total = sum(quasifactor_mass(mu, n, [(cells[i], k) for i, k in enumerate(comp) if k])
                        for comp in compositions(n, len(cells)))
            worst = max(worst, abs(total - 1))
    c("complete families sum to 1", worst <= 1e-12, f"max err {worst:.1e}")
    worst = 0.0
    for mu in (make_bernoulli([0.5, 0.5], depth=8), parry(8)):
        tests = [OpenSet.cylinder(tuple(int(s) for s in w)) for L in range(1, 9) for w in mu.system.words(L)]
        for n in (1, 2, 3, 4):
            worst = max(worst, barycenter_residual(SymmetricQuasifactor(mu, n), mu, tests))
    c("barycenter, depth <= 8", worst <= 1e-12, f"max residual {worst:.1e}")


def criterion_6(c):
    mu = make_bernoulli([0.5, 0.5])
    fwd = theorem3_experiment(FULL, mu, 2, "forward", pairs=10, seed=6)
    c("forward densities >= 0.05", fwd.all_positive, f"min {min(fwd.densities):.3f}")
    bwd = theorem3_experiment(FULL, mu, 2, "backward", pairs=10, seed=6)
    c("backward densities >= 0.05", bwd.all_positive, f"min {min(bwd.densities):.3f}")
    ok = all(p["base_verified"] and p["base_ratio"] >= p["induced_density"] for p in bwd.pairs)
    c("base witnesses |J|/m >= induced density", ok)
    orbit = make_system("periodic-orbit", 2, word=(0, 1))
    pm = make_periodic_measure(orbit)
    zero = all(d == 0.0 for direction in ("forward", "backward")
               for d in theorem3_experiment(orbit, pm, 2, direction, pairs=10, seed=6).densities)
    c("periodic both directions 0", zero)


def criterion_7(c):
    mu = make_bernoulli([0.5, 0.5], depth=14)
    P = Partition.generator(FULL)
    rep = theorem5_pipeline(FULL, mu, P, 10, 0.125, katok_range=range(4, 15))
    c("2^10 separated vectors", rep.separated == 1024 and rep.realized == 1024, f"{rep.separated}")
    c("separating coordinates", rep.separating_ok and rep.min_gap == 1.0)
    c("implied c <= log2(k)/m", rep.implied_c_upper is not None
      and rep.implied_c_upper <= math.log2(rep.k) / 10 + 1e-12, f"c={rep.implied_c_upper}, k={rep.k}")
    c("Katok slope", abs(rep.katok_slope - 1.0) < 0.05, f"{rep.katok_slope:.4f}")
    violations = 0
    for system, m_, b, ms in ((FULL, mu, 0.5, range(4, 11)), (GOLDEN, parry(), 0.3, range(4, 11))):
        _, fam = theorem5_family(system, m_, Partition.generator(system), ms, 0.125, b=b)
        violations += fam.violations
    c("no lemma violations", violations == 0, f"{violations}")


def criterion_8(c):
    for X in (FIXED, ORBIT):
        tag = "fixed point" if X is FIXED else f"period-{len(X.orbit_word)} orbit"
        mu = make_periodic_measure(X)
        P = Partition.generator(X)
        rep = ks_entropy_estimate(mu, X, P, 8)
        rate = [d for n, _, d in rep.rows if n > len(X.orbit_word)]
        c(f"{tag} entropy", markov_entropy_exact(mu.transition, mu.pi) == 0.0 and all(d == 0.0 for d in rate))
        Ns = sorted({katok_cover_number(mu, X, P, n, d) for n in range(1, 9) for d in (0.01, 0.125, 0.5)})
        c(f"{tag} covering numbers 1", Ns == [1], f"N in {Ns}")
        dens = density_estimate(IndependenceProblem(X, mu, (ZERO, ONE), 0.1, 8), [4, 8], [0.1, 0.25]).density
        c(f"{tag} density", dens == 0.0, f"{dens}")
        t5 = theorem5_pipeline(X, mu, P, 6, 0.125)
        c(f"{tag} sigma-family empty", t5.family_size == 0 and t5.realized == 0)


CRITERIA = {
    1: ("entropy exactness", criterion_1, 5),
    2: ("Katok covering numbers", criterion_2, 60),
    3: ("Prohorov distance", criterion_3, 30),
    4: ("independence machinery", criterion_4, 120),
    5: ("quasifactor identities", criterion_5, 30),
    6: ("induced sign pattern", criterion_6, 300),
    7: ("separated-image pipeline", criterion_7, 60),
    8: ("degenerate systems", criterion_8, 5),
}


def evaluate(k):
    name, fn, limit = CRITERIA[k]
    checks = Checks()
    t = time.perf_counter()
    fn(checks)
    dt = time.perf_counter() - t
    checks("runtime", dt < limit, f"{dt:.1f} s < {limit} s")
    line = f"{'PASS' if checks.ok else 'FAIL'} criterion {k} ({name}): {checks.summary()}"
    return checks.ok, line


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k, capsys):
    ok, line = evaluate(k)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [evaluate(k) for k in sorted(CRITERIA)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
