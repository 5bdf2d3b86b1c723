"""Independence sets and the density phi(m)/m.

On the golden-mean shift the pair ([1], [0]) cannot sit at two adjacent
times, because that would need the word 11.  Independence sets therefore
avoid neighbours and their density is 1/2.  A periodic orbit has no
independence at all.
"""

import numpy as np

from entropy_lab import (IndependenceProblem, OpenSet, density_estimate, is_independence_set, make_bernoulli,
                         make_markov, make_periodic_measure, make_system, max_independence_in_window,
                         mu_upe_verdict, parry_matrix, phi)
from entropy_lab.independence import random_disjoint_pair

golden = make_system("sft", 2, [[1, 1], [1, 0]])
one, zero = OpenSet.cylinder((1,)), OpenSet.cylinder((0,))

print("J = {1, 2} independent:", is_independence_set([1, 2], (one, zero), None, golden))
print("J = {1, 3} independent:", is_independence_set([1, 3], (one, zero), None, golden))
for m in (4, 7, 10):
    size, J = max_independence_in_window((one, zero), None, golden, m)
    print(f"largest independence set in 1..{m}: {J} (size {size})")

mu = make_markov(parry_matrix(golden.adjacency), golden)
print("\nphi over unions of 2-cylinders carrying mass >= 1 - delta:")
for delta in (0.1, 0.4):
    r = phi(IndependenceProblem(golden, mu, (one, zero), delta, 8, atom_depth=2))
    print(f"  delta={delta}: phi(8) = {r.value}, exact={r.exact}, {r.candidates} candidate unions")

rep = density_estimate(IndependenceProblem(golden, mu, (one, zero), 0.1, 12), [6, 9, 12], [0.1, 0.25])
print(f"density estimate {rep.density:.3f}")

full = make_system("full-shift", 2)
rng = np.random.default_rng(1)
v = mu_upe_verdict(full, make_bernoulli([0.5, 0.5]), [random_disjoint_pair(full, rng) for _ in range(8)])
print(f"\nfair coin, 8 random pairs: consistent with UPE = {v.consistent} ({v.label})")
orbit = make_system("periodic-orbit", 2, word=(0, 1, 1))
v = mu_upe_verdict(orbit, make_periodic_measure(orbit), [(zero, one)])
print(f"orbit 011: consistent = {v.consistent}, weakest density {v.weakest[2].density}")
