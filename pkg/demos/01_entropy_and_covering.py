"""Block entropies and covering numbers on three systems.

The full 2-shift with the fair coin has entropy exactly 1 bit and every
block average shows it.  The golden-mean shift with its Parry measure has
entropy log2 of the golden ratio; the block averages approach it from above
at rate H(pi)/n while the increments are exact from n = 2 on.  Covering
numbers N(n, delta) grow at the same exponential rate for every fixed delta.
"""

import math

from entropy_lab import (Partition, katok_entropy_estimate, ks_entropy_estimate, make_bernoulli,
                         make_markov, make_periodic_measure, make_system, markov_entropy_exact, parry_matrix)

full = make_system("full-shift", 2)
golden = make_system("sft", 2, [[1, 1], [1, 0]])
orbit = make_system("periodic-orbit", 2, word=(0, 1, 1))

cases = [
    ("fair coin", full, make_bernoulli([0.5, 0.5], depth=14)),
    ("Parry, golden mean", golden, make_markov(parry_matrix(golden.adjacency), golden, depth=14)),
    ("orbit 011", orbit, make_periodic_measure(orbit, depth=14)),
]

for name, X, mu in cases:
    P = Partition.generator(X)
    rep = ks_entropy_estimate(mu, X, P, 12)
    exact = markov_entropy_exact(mu.transition, mu.pi)
    print(f"\n== {name}: exact rate {exact:.6f} bits")
    print("  n   H/n       H_n - H_(n-1)")
    for n, h, d in rep.rows[::3]:
        print(f"  {n:2d}  {h:.6f}  {d:.6f}")
    for delta in (0.1, 0.3):
        est = katok_entropy_estimate(mu, X, P, delta, range(4, 13))
        Ns = [row[2] for row in est.rows]
        print(f"  delta={delta}: N(4..12) = {Ns}")
        print(f"            slope of log2 N = {est.slope:.4f}")

print(f"\nlog2 of the golden ratio = {math.log2((1 + 5 ** 0.5) / 2):.6f}")
