"""Partition entropy, Kolmogorov-Sinai estimates and Katok covering numbers.

All logarithms are base 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .measures import CylinderMeasure, DepthError, is_irreducible, stationary_vector
from .symbolic import Partition, System, refine_partition

SUM_TOL = 1e-10


def _xlogx(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    pos = p > 0
    out[pos] = p[pos] * np.log2(p[pos])
    return out


def cell_masses(mu: CylinderMeasure, P: Partition) -> dict:
    """Mass of every (nonempty) cell of ``P`` keyed by cell key."""
    if P.length > mu.depth:
        raise DepthError(f"partition window needs depth L >= {P.length}, measure has L={mu.depth}")
    words, masses = mu.word_masses(P.length)
    out = dict.fromkeys(P.keys, 0.0)
    for key, m in zip(P.label_array(words), masses):
        out[key] += float(m)
    return out


def partition_entropy(mu: CylinderMeasure, P: Partition) -> float:
    """``H_mu(P) = -sum mu(C) log2 mu(C)`` with ``0 log 0 = 0``."""
    m = np.fromiter(cell_masses(mu, P).values(), dtype=float)
    if abs(m.sum() - 1) > SUM_TOL:
        raise ValueError(f"cell masses sum to {m.sum()!r}")
    return float(-_xlogx(m).sum()) + 0.0  # no negative zero


def join(P: Partition, Q: Partition) -> Partition:
    """``P ∨ Q``, over the union of the two windows."""
    lo = min(P.offset, Q.offset)
    length = max(P.offset + P.length, Q.offset + Q.length) - lo
    words = P.system.words(length)
    lp, lq = P.label_array(words, P.offset - lo), Q.label_array(words, Q.offset - lo)
    labels = {tuple(int(s) for s in w): (a, b) for w, a, b in zip(words, lp, lq)}
    return Partition(P.system, lo, length, labels)


@dataclass
class EntropyReport:
    """Per-``n`` entropy series for one partition."""

    partition: str
    rows: list = field(default_factory=list)  # (n, H/n, H(P^{n-1}) - H(P^{n-2}))
    katok: list = field(default_factory=list)  # (n, delta, N, log2 N / n)
    oracle: float | None = None

    @property
    def estimate(self) -> float:
        return self.rows[-1][1]

    @property
    def difference_estimate(self) -> float:
        return self.rows[-1][2]


def ks_entropy_estimate(mu: CylinderMeasure, system: System | None, P: Partition,
                        n_max: int, name: str = "P") -> EntropyReport:
    """``(1/n) H_mu(P^{n-1})`` and the increments ``H(P^{n-1}) - H(P^{n-2})``, n = 1..n_max."""
    system = system or mu.system
    need = P.length + n_max - 1
    if need > mu.depth:
        raise DepthError(f"n_max={n_max} needs cylinder depth L >= {need}, measure has L={mu.depth}")
    report = EntropyReport(name)
    prev = 0.0
    for n in range(1, n_max + 1):
        H = partition_entropy(mu, refine_partition(P, system, n))
        report.rows.append((n, H / n, H - prev))
        prev = H
    return report


def markov_entropy_exact(matrix, pi=None) -> float:
    """Entropy rate ``-sum_i pi_i sum_j p_ij log2 p_ij``.

    Without ``pi`` the chain must be irreducible; a given stationary ``pi``
    (e.g. a mixture over closed classes) is used as is.
    """
    P = np.asarray(matrix, dtype=float)
    if pi is None:
        if not is_irreducible(P):
            raise ValueError("transition matrix is reducible")
        pi = stationary_vector(P)
    return float(-(np.asarray(pi)[:, None] * _xlogx(P)).sum()) + 0.0


# --------------------------------------------------------------------------
# Covering numbers
# --------------------------------------------------------------------------


def greedy_mass_cover(sets: list[np.ndarray], atom_mass: np.ndarray, target: float) -> list[int]:
    """Greedy set cover: pick sets by largest uncovered mass until ``target`` is reached.

    ``sets`` holds index arrays into ``atom_mass``.  For pairwise disjoint
    sets this is the mass-sorted prefix, which is optimal.
    """
    covered = np.zeros(len(atom_mass), dtype=bool)
    chosen: list[int] = []
    total = 0.0
    while total < target - 1e-12:
        gains = [atom_mass[s][~covered[s]].sum() if i not in chosen else -1.0
                 for i, s in enumerate(sets)]
        best = int(np.argmax(gains))
        if gains[best] <= 0:
            raise ValueError("cover cannot reach the target mass")
        chosen.append(best)
        covered[sets[best]] = True
        total = float(atom_mass[covered].sum())
    return chosen


def _check_delta(delta: float) -> None:
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")


def katok_cover(mu: CylinderMeasure, system: System | None, P: Partition, n: int,
                delta: float, mode: str = "exact") -> list:
    """Keys of a minimal family of ``P^{n-1}`` cells covering mass >= 1 - delta."""
    _check_delta(delta)
    system = system or mu.system
    R = refine_partition(P, system, n)
    masses = cell_masses(mu, R)
    keys = list(masses)
    m = np.array([masses[k] for k in keys])
    target = 1.0 - delta
    if mode == "exact":
        # disjoint cells: heaviest-first prefix is optimal (stable order breaks ties)
        order = np.argsort(-m, kind="stable")
        cum = np.cumsum(m[order])
        k = int(np.searchsorted(cum, target - 1e-12)) + 1
        return [keys[i] for i in order[:k]]
    if mode == "greedy":
        sets = [np.array([i]) for i in range(len(keys))]
        return [keys[i] for i in greedy_mass_cover(sets, m, target)]
    raise ValueError(f"unknown mode {mode!r}")


def katok_cover_number(mu: CylinderMeasure, system: System | None, P: Partition, n: int,
                       delta: float, mode: str = "exact") -> int:
    """``N(T, P, n, delta)``."""
    return len(katok_cover(mu, system, P, n, delta, mode))


@dataclass
class KatokEstimate:
    slope: float
    intercept: float
    rows: list  # (n, delta, N, log2 N / n)


def katok_entropy_estimate(mu: CylinderMeasure, system: System | None, P: Partition,
                           delta: float, n_range) -> KatokEstimate:
    """Least-squares slope of ``log2 N(T, P, n, delta)`` against ``n``."""
    if not mu.ergodic:
        raise ValueError("the covering-number formula needs an ergodic measure")
    ns = list(n_range)
    rows = []
    for n in ns:
        N = katok_cover_number(mu, system, P, n, delta)
        rows.append((n, delta, N, float(np.log2(N)) / n))
    y = np.log2([r[2] for r in rows])
    if len(ns) == 1:
        return KatokEstimate(rows[0][3], 0.0, rows)
    if (y == y[0]).all():
        # bounded covering numbers: the fit would leave rounding noise
        return KatokEstimate(0.0, float(y[0]), rows)
    slope, intercept = np.polyfit(ns, y, 1)
    return KatokEstimate(float(slope), float(intercept), rows)
