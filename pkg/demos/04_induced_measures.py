"""Empirical measures of n-tuples and the induced system on them.

psi sends a tuple to its empirical measure; it forgets order, so it factors
through the symmetric quotient.  The induced shift commutes with it.  The
pushed-forward product measure has the original measure as barycenter, and
positive independence downstairs lifts to the induced system and back.
"""

import numpy as np

from entropy_lab import OpenSet, Point, make_bernoulli, make_periodic_measure, make_system, psi, psi_hat, tau
from entropy_lab.induced import induced_shift, lift_open_pair, membership, product_shift, quasifactor_mass
from entropy_lab.measures import SymmetricQuasifactor, barycenter_residual, EmpiricalMeasure
from entropy_lab.induced import theorem3_experiment

x, y = Point((0, 1)), Point((1,))
print("psi(x, y) == psi(y, x):", psi((x, y)) == psi((y, x)))
c = tau((x, x, y))
print("shift commutes:", induced_shift(psi_hat(c)) == psi_hat(product_shift(c)))

mu = make_bernoulli([0.5, 0.5])
zero, one = OpenSet.cylinder((0,)), OpenSet.cylinder((1,))
print("\nmass of {one atom in [0], one in [1]} for n=2:", quasifactor_mass(mu, 2, [(zero, 1), (one, 1)]))
print("mass of {both atoms in [0]}:", quasifactor_mass(mu, 2, [(zero, 2)]))
tests = [OpenSet.cylinder(tuple(int(s) for s in w)) for L in (1, 2, 3) for w in mu.system.words(L)]
print("barycenter residual, n=3:", barycenter_residual(SymmetricQuasifactor(mu, 3), mu, tests))

S0, S1 = lift_open_pair(zero, one, 2)
half = EmpiricalMeasure((Point((0,)), Point((1,))))
print("\n(dx + dy)/2 in either lifted set:", membership(half, S0) or membership(half, S1))

full = mu.system
for direction in ("forward", "backward"):
    rep = theorem3_experiment(full, mu, 2, direction, pairs=4, seed=0)
    print(f"{direction:8s} densities on the coin: {np.round(rep.densities, 3).tolist()}")
orbit = make_system("periodic-orbit", 2, word=(0, 1))
rep = theorem3_experiment(orbit, make_periodic_measure(orbit), 2, "backward", pairs=4, seed=0)
print(f"backward densities on orbit 01: {rep.densities}")
