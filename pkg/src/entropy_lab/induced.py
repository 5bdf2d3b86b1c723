"""Empirical-measure systems ``M_n(X)`` and the symmetric quasifactor.

Sets of empirical measures are handled through their preimages in the
product system ``X^(n)``: ``psi`` is onto ``M_n(X)`` and intertwines the
diagonal shift with the induced map, so an intersection of shifted sets is
nonempty in ``M_n(X)`` exactly when the symmetrised preimages meet in
``X^(n)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .independence import (IndependenceProblem, density_estimate, max_independence_in_window,
                           minimal_candidates, random_disjoint_pair)
from .measures import (CylinderMeasure, EmpiricalMeasure, WeakStarBasicSet, compositions,
                       measure_of_open, multinomial_mass, pushforward)
from .symbolic import (WHOLE, Engine, OpenSet, Point, ProductOpenSet, System, make_system,
                       nonempty_intersection, shift)


@dataclass(frozen=True)
class SymmetricClass:
    """``<x_1, ..., x_n>``: a point of ``X^(n) / S_n``."""

    points: tuple[Point, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(sorted(self.points)))


def psi(points: Sequence[Point]) -> EmpiricalMeasure:
    """``(x_1..x_n) -> (1/n) sum delta_{x_l}``."""
    return EmpiricalMeasure(tuple(points))


def tau(points: Sequence[Point]) -> SymmetricClass:
    return SymmetricClass(tuple(points))


def psi_hat(cls: SymmetricClass) -> EmpiricalMeasure:
    return EmpiricalMeasure(cls.points)


def product_shift(cls: SymmetricClass) -> SymmetricClass:
    """``T_n`` on the symmetric product."""
    return SymmetricClass(tuple(shift(x) for x in cls.points))


def induced_shift(nu: EmpiricalMeasure) -> EmpiricalMeasure:
    return pushforward(nu)


# --------------------------------------------------------------------------
# Quasifactor masses
# --------------------------------------------------------------------------


def lift_product_system(system: System, n: int) -> System:
    return make_system("product", component=system, factor_count=n)


def quasifactor_mass(mu: CylinderMeasure, n: int, target: Sequence[tuple[OpenSet, int]]) -> float:
    """``(psi_hat o tau)_* mu^(n)`` of "the atoms hit ``C_i`` exactly ``m_i`` times".

    ``target`` lists ``(C_i, m_i)`` with pairwise disjoint ``C_i`` and
    ``sum m_i = n``.
    """
    if sum(m for _, m in target) != n:
        raise ValueError("multiplicities must sum to n")
    sets = [C for C, _ in target]
    for i, A in enumerate(sets):
        for B in sets[i + 1:]:
            if nonempty_intersection([(0, A), (0, B)], None, mu.system):
                raise ValueError("target cylinders overlap")
    return multinomial_mass([measure_of_open(mu, C) for C in sets], [m for _, m in target])


def multiset_event(cells: Sequence[OpenSet], multiplicities: Sequence[int]) -> ProductOpenSet:
    """Preimage in ``X^(n)`` of the multiset event as a symmetric union of boxes."""
    seq = [C for C, m in zip(cells, multiplicities) for _ in range(m)]
    return ProductOpenSet.symmetric(seq)


def quasifactor_atoms(mu: CylinderMeasure, n: int, atom_depth: int = 1) -> list:
    """All multiset events over the depth-``atom_depth`` cylinders, with masses."""
    words, masses = mu.word_masses(atom_depth)
    cells = [OpenSet.cylinder(tuple(int(s) for s in w)) for w in words]
    out = []
    for comp in compositions(n, len(cells)):
        mass = multinomial_mass(masses, comp)
        out.append((multiset_event(cells, comp), mass, comp))
    return out


# --------------------------------------------------------------------------
# Sets of empirical measures
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class InducedOpenSet:
    """``{nu : nu(U) > level}`` (threshold) or ``psi(U_1 x ... x U_n)`` (product-image)."""

    mode: str
    sets: tuple[OpenSet, ...]
    level: float = 0.0
    n: int = 1

    def __post_init__(self):
        if self.mode == "threshold":
            if len(self.sets) != 1 or not 0 <= self.level < 1:
                raise ValueError("threshold sets take one open set and a level in [0, 1)")
        elif self.mode == "product-image":
            if len(self.sets) != self.n:
                raise ValueError(f"product-image sets need exactly n={self.n} open sets")
        else:
            raise ValueError(f"unknown mode {self.mode!r}")

    @classmethod
    def threshold(cls, U: OpenSet, level: float, n: int) -> InducedOpenSet:
        return cls("threshold", (U,), level, n)

    @classmethod
    def product_image(cls, sets: Sequence[OpenSet]) -> InducedOpenSet:
        return cls("product-image", tuple(sets), 0.0, len(sets))

    def preimage(self) -> ProductOpenSet:
        """``psi^{-1}`` of the set inside ``X^(n)``."""
        if self.mode == "product-image":
            return ProductOpenSet.symmetric(self.sets)
        U = self.sets[0]
        need = math.floor(self.level * self.n + 1e-9) + 1  # atoms in U needed for mass > level
        boxes = []
        for inside in itertools.combinations(range(self.n), need):
            comps = [U.cylinders if l in inside else (WHOLE,) for l in range(self.n)]
            boxes.extend(itertools.product(*comps))
        return ProductOpenSet(tuple(boxes))


def membership(nu: EmpiricalMeasure, S: InducedOpenSet) -> bool:
    if S.mode == "threshold":
        return nu.measure_of(S.sets[0]) > S.level
    if nu.n != S.n:
        return False
    adj = np.array([[U.contains(x) for U in S.sets] for x in nu.atoms], dtype=np.int8)
    match = maximum_bipartite_matching(csr_matrix(adj), perm_type="column")
    return bool((match >= 0).all())


def lift_open_pair(U0: OpenSet, U1: OpenSet, n: int) -> tuple[InducedOpenSet, InducedOpenSet]:
    """``{nu in M_n : nu(U_i) > (n-1)/n}``; level 0 when ``n = 1``."""
    if U0.is_empty or U1.is_empty:
        raise ValueError("open sets must be nonempty")
    if U0.intersects_syntactically(U1):
        raise ValueError("open sets must be disjoint")
    level = (n - 1) / n
    return InducedOpenSet.threshold(U0, level, n), InducedOpenSet.threshold(U1, level, n)


def induced_disjoint(S0: InducedOpenSet, S1: InducedOpenSet, system: System) -> bool:
    prod = lift_product_system(system, S0.n)
    return not nonempty_intersection([(0, S0.preimage()), (0, S1.preimage())], None, prod)


# --------------------------------------------------------------------------
# Theorem-3 style experiments
# --------------------------------------------------------------------------


def _induced_problem(system: System, mu: CylinderMeasure, n: int, pair, delta: float, m: int,
                     atom_depth: int) -> IndependenceProblem:
    prod = lift_product_system(system, n)
    atoms = [(ev, mass) for ev, mass, _ in quasifactor_atoms(mu, n, atom_depth)]
    tuple_sets = tuple(S.preimage() for S in pair)
    return IndependenceProblem(prod, None, tuple_sets, delta, m, atom_depth, atoms)


def sample_product_image_pair(system: System, n: int, rng: np.random.Generator, max_len: int = 2):
    """Disjoint Lemma-1 sets ``W(V_i; 1/2)`` and product images inside them.

    ``V_0, V_1`` are disjoint cylinders; each ``U_{i,l}`` is a cylinder
    refining ``V_i``, so ``psi(U_{i,1} x ... x U_{i,n})`` lies in ``W(V_i; 1/2)``
    and the two images are disjoint.
    """
    V0, V1 = random_disjoint_pair(system, rng, max_len)
    W = (WeakStarBasicSet((V0,), (0.5,)), WeakStarBasicSet((V1,), (0.5,)))
    sides = []
    for V in (V0, V1):
        (o, w), = V.cylinders
        comps = []
        for _ in range(n):
            ext = int(rng.integers(0, 2))
            choices = [tuple(int(s) for s in u) for u in system.words(len(w) + ext)
                       if tuple(int(s) for s in u[:len(w)]) == w]
            comps.append(OpenSet.cylinder(choices[int(rng.integers(len(choices)))], o))
        sides.append(InducedOpenSet.product_image(comps))
    return (V0, V1), W, tuple(sides)


@dataclass
class Theorem3Report:
    direction: str
    n: int
    pairs: list = field(default_factory=list)  # dicts per pair
    threshold: float = 0.05
    notes: list = field(default_factory=list)

    @property
    def densities(self) -> list[float]:
        return [p["induced_density"] for p in self.pairs]

    @property
    def all_positive(self) -> bool:
        return all(d >= self.threshold for d in self.densities)


def _witness_in_lift(system: System, n: int, tuple_sets, D_lift, J, sigma):
    """Point tuple in ``D^n ∩ ⋂ T_n^{-j}`` (lifted set ``sigma(j)``), or None."""
    prod = lift_product_system(system, n)
    eng = Engine(prod, [list(tuple_sets), [D_lift]])
    fixed = [(j + eng.anchors[0], eng.mask(0, tuple_sets[s])) for j, s in zip(J, sigma)]
    fixed.append((eng.anchors[1], eng.mask(1, D_lift)))
    return eng.witness(fixed)


def theorem3_experiment(system: System, mu: CylinderMeasure, n: int, direction: str = "forward",
                        pairs: int | Sequence = 10, m_schedule: Sequence[int] = (4, 6, 8),
                        delta_grid: Sequence[float] = (0.1, 0.25), atom_depth: int = 1,
                        seed: int = 0, threshold: float = 0.05, max_len: int = 2) -> Theorem3Report:
    """Sign-pattern check of both directions of the ``M_n`` equivalence.

    forward: product-image pairs inside disjoint Lemma-1 sets; independence
    density in ``(M_n(X), (psi_hat o tau)_* mu^(n))``.
    backward: base pairs lifted to threshold ``(n-1)/n``; induced density,
    then base witnesses read off the atoms of realising empirical measures.
    """
    if not mu.ergodic:
        raise ValueError("an ergodic measure is required")
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    rng = np.random.default_rng(seed)
    report = Theorem3Report(direction, n, threshold=threshold)
    if n == 1:
        report.notes.append("n = 1: M_1(X) is identified with X via x -> delta_x, a sanity identity")
    count = pairs if isinstance(pairs, int) else len(pairs)
    explicit = None if isinstance(pairs, int) else list(pairs)
    for pid in range(count):
        entry: dict = {"pair": pid}
        if direction == "forward":
            if explicit is not None:
                induced_pair = explicit[pid]
                entry["base"] = None
            else:
                base, W, induced_pair = sample_product_image_pair(system, n, rng, max_len)
                entry["base"] = [repr(V) for V in base]
                entry["lemma1_thresholds"] = [w.thresholds[0] for w in W]
            if not induced_disjoint(*induced_pair, system):
                raise ValueError("sampled induced pair is not disjoint")
        else:
            U0, U1 = explicit[pid] if explicit is not None else random_disjoint_pair(system, rng, max_len)
            induced_pair = lift_open_pair(U0, U1, n)
            entry["base"] = [repr(U0), repr(U1)]
        entry["induced_sets"] = [[repr(U) for U in S.sets] + [S.mode, S.level] for S in induced_pair]
        prob = _induced_problem(system, mu, n, induced_pair, delta_grid[0], max(m_schedule), atom_depth)
        rep = density_estimate(prob, m_schedule, delta_grid)
        entry["induced_density"] = rep.density
        entry["best_delta"] = rep.best_delta
        entry["phi"] = [(r["delta"], r["m"], r["phi"]) for r in rep.rows]
        if direction == "backward":
            entry.update(_backward_witnesses(system, mu, n, (U0, U1), induced_pair, rep,
                                             max(m_schedule), atom_depth))
        report.pairs.append(entry)
    return report


def _backward_witnesses(system, mu, n, base_pair, induced_pair, rep, m, atom_depth) -> dict:
    """Reconstruct base independence sets from induced witnesses.

    For ``alpha < 1 - (1-delta)^{1/n}`` every base ``D`` with
    ``mu(D) >= 1 - alpha`` lifts to ``D^n`` of quasifactor mass >= ``1 - delta``.
    An induced independence set relative to the lift is independent in the
    base relative to ``D``: any atom of a realising measure lies in
    ``D ∩ ⋂ T^{-j} U_{sigma(j)}``.
    """
    delta = rep.best_delta
    alpha = 0.999 * (1 - (1 - delta) ** (1.0 / n))
    words, masses = mu.word_masses(atom_depth)
    cells = [OpenSet.cylinder(tuple(int(s) for s in w)) for w in words]
    tuple_sets = tuple(S.preimage() for S in induced_pair)
    U0, U1 = base_pair
    results = []
    for idx in minimal_candidates(masses, alpha):
        D = cells[idx[0]]
        for i in idx[1:]:
            D = D | cells[i]
        D_lift = ProductOpenSet.product([D] * n)
        size, J = max_independence_in_window(tuple_sets, D_lift, lift_product_system(system, n), m)
        verified = True
        for sigma in itertools.product(range(2), repeat=len(J)):
            pts = _witness_in_lift(system, n, tuple_sets, D_lift, J, sigma)
            if pts is None:
                verified = False
                break
            x = pts if isinstance(pts, Point) else pts[0]  # one factor: a bare point
            U = (U0, U1)
            if not (D.contains(x) and all(U[s].contains(shift(x, j)) for j, s in zip(J, sigma))):
                verified = False
                break
        results.append({"D": repr(D), "J": list(J), "ratio": size / m, "verified": verified})
    worst = min(results, key=lambda r: r["ratio"]) if results else None
    return {"alpha": alpha, "base_witnesses": results,
            "base_ratio": worst["ratio"] if worst else 0.0,
            "base_verified": all(r["verified"] for r in results)}
