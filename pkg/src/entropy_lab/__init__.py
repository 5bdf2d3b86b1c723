"""Finite symbolic laboratory for measure-theoretic entropy and independence.

Systems are shift spaces with periodic points and cylinder open sets
(``symbolic``); invariant measures, Prohorov distances and quasifactors live
in ``measures``; ``entropy`` computes partition entropy and covering numbers;
``independence`` and ``induced`` handle independence sets on a system and on
its induced system of empirical measures; ``seplemma`` runs the
trajectory-matrix argument tying independence to entropy.
"""

__version__ = "0.1.0"

from .entropy import (katok_cover_number, katok_entropy_estimate, ks_entropy_estimate,  # noqa: E402
                      markov_entropy_exact, partition_entropy)
from .independence import (IndependenceProblem, density_estimate, is_independence_set,  # noqa: E402
                           max_independence_in_window, mu_upe_verdict, phi)
from .induced import psi, psi_hat, quasifactor_mass, tau, theorem3_experiment  # noqa: E402
from .measures import (CylinderMeasure, DiscreteMeasure, EmpiricalMeasure, make_bernoulli,  # noqa: E402
                       make_markov, make_periodic_measure, parry_matrix, prohorov)
from .seplemma import (build_trajectory_matrix, count_eps_separated, gw_consistency_check,  # noqa: E402
                       theorem5_pipeline)
from .symbolic import (OpenSet, Partition, Point, ProductOpenSet, System, make_system,  # noqa: E402
                       metric, nonempty_intersection, refine_partition, shift)

__all__ = [
    "CylinderMeasure", "DiscreteMeasure", "EmpiricalMeasure", "IndependenceProblem", "OpenSet",
    "Partition", "Point", "ProductOpenSet", "System", "build_trajectory_matrix", "count_eps_separated",
    "density_estimate", "gw_consistency_check", "is_independence_set", "katok_cover_number",
    "katok_entropy_estimate", "ks_entropy_estimate", "make_bernoulli", "make_markov",
    "make_periodic_measure", "make_system", "markov_entropy_exact", "max_independence_in_window",
    "metric", "mu_upe_verdict", "nonempty_intersection", "parry_matrix", "partition_entropy", "phi",
    "prohorov", "psi", "psi_hat", "quasifactor_mass", "refine_partition", "shift", "tau",
    "theorem3_experiment", "theorem5_pipeline",
]
