"""Independence sets, the min-max count phi(A, delta, m) and independence density.

``D`` candidates are restricted to unions of fixed-depth cylinder atoms; every
reported value is exact within that family unless flagged otherwise.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .measures import CylinderMeasure
from .symbolic import Engine, OpenSet, ProductOpenSet, System, nonempty_intersection

GUARD = 10 ** 6
EXACT_ATOMS = 16


class _Context:
    """Compiled masks for one (system, tuple, D) triple."""

    def __init__(self, system: System, tuple_sets: Sequence, D=None):
        self.system = system
        self.k = len(tuple_sets)
        self.eng = Engine(system, [list(tuple_sets), [D if D is not None else OpenSet.whole()]])
        self.alts = [self.eng.mask(0, A) for A in tuple_sets]
        self.anchor = self.eng.anchors[0]
        self.fixed = [] if D is None else [(self.eng.anchors[1], self.eng.mask(1, D))]

    def independent(self, J: Sequence[int]) -> bool:
        if not J:
            return True
        branches = [(j + self.anchor, self.alts) for j in J]
        return self.eng.all_feasible(self.fixed, branches)

    # incremental extension: leaves are the reach sets of every pattern so far
    def root(self, first_pos: int):
        if any(p >= first_pos for p, _ in self.fixed):
            return None
        reach, pos = self.eng.full(), None
        for p, m in sorted(self.fixed, key=lambda t: t[0]):
            if pos is not None:
                reach = self.eng.auto.step(reach, p - pos)
            reach, pos = reach & m, p
        if self.fixed and not reach.any():
            return ([], pos)
        return ([reach], pos)

    def extend(self, state, j: int):
        leaves, pos = state
        p = j + self.anchor
        out = []
        for leaf in leaves:
            r = leaf if pos is None else self.eng.auto.step(leaf, p - pos)
            for a in self.alts:
                c = r & a
                if not c.any():
                    return None
                out.append(c)
        return (out, p)


def is_independence_set(J: Sequence[int], tuple_sets: Sequence, D=None,
                        system: System | None = None) -> bool:
    """Whether ``D ∩ ⋂_{j in J} T^{-j} A_{sigma(j)}`` is nonempty for every ``sigma``.

    Only ``I = J`` is checked: each smaller ``I`` gives a superset.
    """
    J = sorted(set(J))
    if len(tuple_sets) ** len(J) > GUARD:
        raise ValueError(f"{len(tuple_sets)}^{len(J)} patterns exceed the guard {GUARD}; use a smaller J")
    return _Context(system, tuple_sets, D).independent(J)


def max_independence_in_window(tuple_sets: Sequence, D=None, system: System | None = None,
                               m: int = 1, start: int = 1, stop_at: int | None = None):
    """Largest independence set inside ``{start, ..., start+m-1}``.

    Depth-first branch and bound over increasing indices; an index that
    breaks independence is never revisited below that node (heredity).
    ``stop_at`` ends the search once a set of that size is found.

    Returns
    -------
    (size, witness) : tuple[int, tuple[int, ...]]
    """
    ctx = _Context(system, tuple_sets, D)
    end = start + m
    best: list[int] = []
    cap = m if stop_at is None else min(m, stop_at)

    root = ctx.root(start + ctx.anchor)  # None: fall back to full re-checks
    if root is not None and not root[0]:
        return 0, ()

    def dfs(J: list[int], state, nxt: int) -> bool:
        nonlocal best
        if len(J) > len(best):
            best = list(J)
            if len(best) >= cap:
                return True
        for j in range(nxt, end):
            if len(J) + (end - j) <= len(best):
                break
            if state is not None:
                st = ctx.extend(state, j)
                ok = st is not None
            else:
                st, ok = None, ctx.independent(J + [j])
            if ok and dfs(J + [j], st, j + 1):
                return True
        return False

    dfs([], root, start)
    return len(best), tuple(best)


# --------------------------------------------------------------------------
# phi and density
# --------------------------------------------------------------------------


@dataclass
class IndependenceProblem:
    """A tuple of open sets, a measure, and the minimisation budget ``delta``.

    ``atoms`` overrides the default ``D`` atoms (the depth-``atom_depth``
    cylinders weighted by ``mu``) with explicit ``(set, mass)`` pairs.
    """

    system: System
    mu: CylinderMeasure | None
    tuple_sets: tuple
    delta: float
    m: int
    atom_depth: int = 1
    atoms: list | None = None

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if any(getattr(A, "is_empty", False) or not getattr(A, "cylinders", getattr(A, "boxes", ()))
               for A in self.tuple_sets):
            raise ValueError("tuple sets must be nonempty")

    def d_atoms(self) -> list:
        if self.atoms is not None:
            return list(self.atoms)
        words, masses = self.mu.word_masses(self.atom_depth)
        return [(OpenSet.cylinder(tuple(int(s) for s in w)), float(x)) for w, x in zip(words, masses)]


def _union(sets: list):
    if not sets:
        return OpenSet()
    out = sets[0]
    for s in sets[1:]:
        out = out | s
    return out


@dataclass
class PhiResult:
    value: int
    D: object
    witness: tuple
    exact: bool
    candidates: int


def minimal_candidates(masses: Sequence[float], delta: float):
    """Inclusion-minimal atom subsets with mass >= 1 - delta (positive-mass atoms only)."""
    masses = np.asarray(masses, dtype=float)
    pos = np.flatnonzero(masses > 0)
    k = len(pos)
    codes = np.arange(1 << k, dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(k)) & 1).astype(bool)
    tot = bits @ masses[pos]
    lightest = np.where(bits, masses[pos][None, :], np.inf).min(axis=1)
    target = 1.0 - delta - 1e-12
    ok = (tot >= target) & (tot - lightest < target)
    out = [tuple(int(pos[i]) for i in np.flatnonzero(bits[c])) for c in np.flatnonzero(ok)]
    out.sort(key=lambda s: (len(s), s))
    return out


def phi(problem: IndependenceProblem, exact_limit: int = EXACT_ATOMS) -> PhiResult:
    """``min_D max{|J ∩ {1..m}| : J independent relative to D}`` over atom-union ``D``.

    The inner maximum is monotone in ``D``, so in exact mode only
    inclusion-minimal qualifying unions are searched.  Beyond
    ``exact_limit`` atoms an adversarial greedy removal gives an upper bound.
    """
    atoms = problem.d_atoms()
    masses = np.array([a[1] for a in atoms])
    if masses.sum() < 1 - problem.delta - 1e-12:
        raise ValueError("no union of D atoms reaches mass 1 - delta")
    sets = [a[0] for a in atoms]

    def inner(idx, stop_at=None):
        D = _union([sets[i] for i in idx])
        return max_independence_in_window(problem.tuple_sets, D, problem.system, problem.m,
                                          stop_at=stop_at), D

    if int((masses > 0).sum()) <= exact_limit:
        cands = minimal_candidates(masses, problem.delta)
        best = None
        for idx in cands:
            (v, J), D = inner(idx, None if best is None else best.value)
            if best is None or v < best.value:
                best = PhiResult(v, D, J, True, len(cands))
                if v == 0:
                    break
        return best
    # greedy adversarial removal
    current = [i for i in range(len(atoms)) if masses[i] > 0]
    (v, J), D = inner(current)
    result = PhiResult(v, D, J, False, 1)
    target = 1.0 - problem.delta - 1e-12
    while True:
        options = []
        for i in current:
            rest = [x for x in current if x != i]
            if masses[rest].sum() >= target:
                (vi, Ji), Di = inner(rest)
                options.append((vi, i, Ji, Di))
        if not options:
            return result
        vi, i, Ji, Di = min(options, key=lambda t: (t[0], t[1]))
        if vi > result.value:
            return result
        current.remove(i)
        result = PhiResult(vi, Di, Ji, False, result.candidates + len(options))


def extrapolate(ms: Sequence[int], values: Sequence[int]) -> float:
    """Density estimate ``min(phi(m_K)/m_K, growth slope)`` clipped to ``[0, 1]``.

    The slope ``(phi(m_K) - phi(m_1)) / (m_K - m_1)`` removes bounded
    offsets (a periodic orbit has ``phi = 1`` at every horizon); the ratio
    guards against negative offsets.
    """
    ratio = values[-1] / ms[-1]
    if len(ms) == 1:
        return float(min(max(ratio, 0.0), 1.0))
    slope = (values[-1] - values[0]) / (ms[-1] - ms[0])
    return float(min(max(min(ratio, slope), 0.0), 1.0))


@dataclass
class DensityReport:
    """Per-horizon phi values and the extrapolated (grid-sup) density."""

    rows: list = field(default_factory=list)  # dicts: delta, m, phi, ratio, exact, witness, D
    per_delta: dict = field(default_factory=dict)
    density: float = 0.0
    best_delta: float | None = None

    def witness(self, delta: float | None = None):
        d = self.best_delta if delta is None else delta
        rows = [r for r in self.rows if r["delta"] == d]
        return rows[-1]["witness"] if rows else ()


def density_estimate(problem: IndependenceProblem, m_schedule: Sequence[int],
                     delta_grid: Sequence[float] | None = None) -> DensityReport:
    """Estimate ``sup_delta limsup_m phi(A, delta, m)/m`` on a finite grid ("grid-sup")."""
    ms = sorted(m_schedule)
    grid = list(delta_grid) if delta_grid is not None else [problem.delta]
    rep = DensityReport()
    for d in grid:
        vals = []
        for m in ms:
            sub = IndependenceProblem(problem.system, problem.mu, problem.tuple_sets, d, m,
                                      problem.atom_depth, problem.atoms)
            res = phi(sub)
            vals.append(res.value)
            rep.rows.append(dict(delta=d, m=m, phi=res.value, ratio=res.value / m, exact=res.exact,
                                 witness=res.witness, D=res.D))
        rep.per_delta[d] = extrapolate(ms, vals)
    rep.best_delta = max(grid, key=lambda d: (rep.per_delta[d], -grid.index(d)))
    rep.density = rep.per_delta[rep.best_delta]
    return rep


# --------------------------------------------------------------------------
# UPE verdicts
# --------------------------------------------------------------------------


def check_disjoint_pair(U0, U1, system: System) -> None:
    for U in (U0, U1):
        if not nonempty_intersection([(0, U)], None, system):
            raise ValueError(f"{U!r} is empty in {system!r}")
    if nonempty_intersection([(0, U0), (0, U1)], None, system):
        raise ValueError(f"{U0!r} and {U1!r} are not disjoint")


def random_disjoint_pair(system: System, rng: np.random.Generator, max_len: int = 2,
                         tries: int = 1000) -> tuple[OpenSet, OpenSet]:
    """Two disjoint nonempty cylinders at offset 0 with words of length <= ``max_len``."""
    for _ in range(tries):
        picks = []
        for _ in range(2):
            L = int(rng.integers(1, max_len + 1))
            words = system.words(L)
            picks.append(OpenSet.cylinder(tuple(int(s) for s in words[rng.integers(len(words))])))
        if not nonempty_intersection([(0, picks[0]), (0, picks[1])], None, system):
            return picks[0], picks[1]
    raise ValueError(f"no disjoint cylinder pair found in {system!r}")


@dataclass
class Verdict:
    consistent: bool
    threshold: float
    pairs: list  # (U0, U1, DensityReport)
    label: str = "sampled evidence, not proof"

    @property
    def weakest(self):
        return min(self.pairs, key=lambda p: p[2].density) if self.pairs else None


def mu_upe_verdict(system: System, mu: CylinderMeasure, pair_samples: Sequence,
                   m_schedule: Sequence[int] = (6, 8, 10), delta_grid: Sequence[float] = (0.1, 0.25),
                   atom_depth: int = 1, threshold: float = 0.05) -> Verdict:
    """Sampled check of the UPE criterion: every pair must show density above ``threshold``."""
    out = []
    for U0, U1 in pair_samples:
        check_disjoint_pair(U0, U1, system)
        prob = IndependenceProblem(system, mu, (U0, U1), delta_grid[0], max(m_schedule), atom_depth)
        out.append((U0, U1, density_estimate(prob, m_schedule, delta_grid)))
    ok = all(r.density >= threshold for _, _, r in out)
    return Verdict(ok, threshold, out)
