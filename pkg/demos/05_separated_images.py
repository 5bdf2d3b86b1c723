"""From independence to entropy through separated vectors.

Cover the space by P^{m-1} cells, record each cell's itinerary through P
as a row of a 0/1 matrix, and push point masses on sigma-realizing periodic
points through it.  Each sigma pattern on the independence set gives a
vector, and distinct patterns are 1 apart in the max norm.  The number of
rows k_m then has to grow exponentially.
"""

from entropy_lab import Partition, make_bernoulli, make_markov, make_periodic_measure, make_system, parry_matrix
from entropy_lab import theorem5_pipeline
from entropy_lab.seplemma import theorem5_family

full = make_system("full-shift", 2)
golden = make_system("sft", 2, [[1, 1], [1, 0]])

rep = theorem5_pipeline(full, make_bernoulli([0.5, 0.5], depth=14), Partition.generator(full), 10, 0.125,
                        katok_range=range(4, 15))
print(f"fair coin, m=10: k={rep.k}, |I|={len(rep.independence)}, separated={rep.separated}, "
      f"min gap={rep.min_gap}, c <= {rep.implied_c_upper}, Katok slope {rep.katok_slope:.4f}")

mu = make_markov(parry_matrix(golden.adjacency), golden, depth=12)
reps, fam = theorem5_family(golden, mu, Partition.generator(golden), range(4, 11), 0.125, b=0.3)
print("\nParry measure, m = 4..10")
for m, k, s, g in fam.rows:
    print(f"  m={m:2d}  k={k:4d}  separated={s:3d}  hypothesis met={g.hypothesis_met}")
print(f"  fitted c = {fam.c_fit:.3f}, violations = {fam.violations}")

for word in ((0,), (0, 1)):
    X = make_system("periodic-orbit", 2, word=word)
    r = theorem5_pipeline(X, make_periodic_measure(X), Partition.generator(X), 6, 0.125)
    print(f"\norbit {''.join(map(str, word))}: k={r.k}, family={r.family_size}; {r.notes[0]}")
