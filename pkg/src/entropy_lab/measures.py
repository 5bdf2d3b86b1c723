"""Invariant cylinder measures, finitely supported measures and the Prohorov metric."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import networkx as nx
import numpy as np

from .symbolic import OpenSet, Point, System, make_system, metric, shift

MASS_TOL = 1e-12


class DepthError(ValueError):
    """A cylinder window does not fit in the measure's depth."""


# --------------------------------------------------------------------------
# Cylinder measures
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CylinderMeasure:
    """Shift-invariant measure generated by a Markov chain on the system's vertices.

    Cylinder masses are ``pi[v_0] * prod P[v_i, v_{i+1}]`` summed over the
    vertex paths carrying the word.  ``depth`` bounds the cylinder windows
    this measure will evaluate.
    """

    system: System
    pi: np.ndarray
    transition: np.ndarray
    generator: str
    depth: int = 8
    ergodic: bool = True

    def word_masses(self, length: int) -> tuple[np.ndarray, np.ndarray]:
        """Admissible words of ``length`` symbols and their masses."""
        if length > self.depth:
            raise DepthError(f"window of length {length} exceeds depth L={self.depth}; "
                             f"rebuild the measure with depth >= {length}")
        cache = self.__dict__.setdefault("_wm_cache", {})
        if length in cache:
            return cache[length]
        sysm = self.system
        paths = sysm.paths(length)
        if length == 0:
            out = (np.zeros((1, 0), dtype=np.int64), np.ones(1))
        else:
            mass = self.pi[paths[:, 0]].copy()
            for c in range(1, length):
                mass *= self.transition[paths[:, c - 1], paths[:, c]]
            labelled = sysm.labels[paths]
            words, inv = np.unique(labelled, axis=0, return_inverse=True)
            agg = np.zeros(len(words))
            np.add.at(agg, inv.ravel(), mass)
            out = (words, agg)
        cache[length] = out
        return out

    @cached_property
    def masses(self) -> dict:
        """Depth-``L`` cylinder masses keyed by word."""
        words, m = self.word_masses(self.depth)
        return {tuple(int(s) for s in w): float(x) for w, x in zip(words, m)}

    def mass(self, word: Sequence[int]) -> float:
        """Mass of the cylinder ``[word]`` (any offset, by invariance)."""
        word = tuple(word)
        if len(word) > self.depth:
            raise DepthError(f"word of length {len(word)} exceeds depth L={self.depth}")
        lab = self.system.labels
        alpha = self.pi * (lab == word[0]) if word else self.pi
        for s in word[1:]:
            alpha = (alpha @ self.transition) * (lab == s)
        return float(alpha.sum())

    def measure_of(self, U: OpenSet) -> float:
        return measure_of_open(self, U)

    def sample_words(self, length: int, count: int, rng: np.random.Generator) -> np.ndarray:
        """``count`` independent words of ``length`` symbols drawn from the measure."""
        V = len(self.pi)
        cum = np.cumsum(self.transition, axis=1)
        v = rng.choice(V, size=count, p=self.pi)
        out = np.empty((count, length), dtype=np.int64)
        for c in range(length):
            out[:, c] = self.system.labels[v]
            u = rng.random(count)
            v = np.minimum((u[:, None] > cum[v]).sum(axis=1), V - 1)
        return out

    def __repr__(self) -> str:
        return f"CylinderMeasure({self.generator}, {self.system!r}, L={self.depth})"


def _check_stochastic(P: np.ndarray) -> None:
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValueError("transition matrix must be square")
    if (P < 0).any():
        raise ValueError("transition matrix has negative entries")
    if np.abs(P.sum(axis=1) - 1).max() > MASS_TOL:
        raise ValueError("transition matrix rows must sum to 1")


def is_irreducible(P) -> bool:
    P = np.asarray(P, dtype=float)
    from scipy.sparse.csgraph import connected_components
    n, _ = connected_components(P > 0, directed=True, connection="strong")
    return n == 1


def stationary_vector(P) -> np.ndarray:
    """Stationary row vector of an irreducible stochastic matrix."""
    P = np.asarray(P, dtype=float)
    k = P.shape[0]
    A = np.vstack([P.T - np.eye(k), np.ones(k)])
    b = np.zeros(k + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    # a few power steps polish the residual
    for _ in range(50):
        nxt = pi @ P
        if np.abs(nxt - pi).max() < 1e-15:
            break
        pi = nxt
    pi = np.clip(pi, 0, None)
    return pi / pi.sum()


def make_bernoulli(probs, depth: int = 8) -> CylinderMeasure:
    """Product measure on the full shift over ``len(probs)`` symbols."""
    p = np.asarray(probs, dtype=float)
    if (p < 0).any():
        raise ValueError("probabilities must be nonnegative")
    if abs(p.sum() - 1) > MASS_TOL:
        raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
    sysm = make_system("full-shift", len(p))
    P = np.tile(p, (len(p), 1))
    return CylinderMeasure(sysm, p.copy(), P, "bernoulli", depth, ergodic=True)


def closed_classes(P) -> list[np.ndarray]:
    """Closed communicating classes of a stochastic matrix."""
    from scipy.sparse.csgraph import connected_components
    P = np.asarray(P, dtype=float)
    n, lab = connected_components(P > 0, directed=True, connection="strong")
    out = []
    for c in range(n):
        members = np.flatnonzero(lab == c)
        if not (P[members][:, lab != c] > 0).any():
            out.append(members)
    return out


def mixture_stationary(P) -> np.ndarray:
    """Uniform mixture of the stationary vectors of the closed classes."""
    P = np.asarray(P, dtype=float)
    classes = closed_classes(P)
    pi = np.zeros(P.shape[0])
    for members in classes:
        pi[members] += stationary_vector(P[np.ix_(members, members)]) / len(classes)
    return pi


def make_markov(matrix, system: System | None = None, depth: int = 8,
                allow_reducible: bool = False) -> CylinderMeasure:
    """Stationary Markov measure; the SFT defaults to the support of ``matrix``.

    A reducible matrix is rejected unless ``allow_reducible``; it then gives
    the uniform mixture over its closed classes, ergodic only when there is
    exactly one such class.
    """
    P = np.asarray(matrix, dtype=float)
    _check_stochastic(P)
    irreducible = is_irreducible(P)
    if not irreducible and not allow_reducible:
        raise ValueError("transition matrix is reducible; an ergodic (irreducible) chain is required")
    if system is None:
        adj = (P > 0).astype(int)
        system = make_system("full-shift", P.shape[0]) if adj.all() else make_system("sft", P.shape[0], adj)
    elif system.kind not in ("sft", "full-shift"):
        raise ValueError("Markov measures live on shifts of finite type")
    if ((P > 0) & (system.adjacency == 0)).any():
        raise ValueError("transition matrix charges a forbidden transition")
    pi = stationary_vector(P) if irreducible else mixture_stationary(P)
    if np.abs(pi @ P - pi).max() > MASS_TOL:
        raise ValueError("stationary vector did not converge")
    ergodic = irreducible or len(closed_classes(P)) == 1
    return CylinderMeasure(system, pi, P, "markov", depth, ergodic=ergodic)


def make_periodic_measure(system: System, depth: int = 8) -> CylinderMeasure:
    """Uniform measure on the orbit of a periodic-orbit system."""
    if system.kind != "periodic-orbit":
        raise ValueError("needs a periodic-orbit system")
    p = system.n_vertices
    P = system.adjacency.astype(float)
    return CylinderMeasure(system, np.full(p, 1.0 / p), P, "periodic", depth, ergodic=True)


def parry_matrix(adjacency) -> np.ndarray:
    """Transition matrix of the measure of maximal entropy of an irreducible SFT."""
    A = np.asarray(adjacency, dtype=float)
    w, v = np.linalg.eig(A)
    i = int(np.argmax(w.real))
    lam = w[i].real
    r = np.abs(v[:, i].real)
    return A * r[None, :] / (lam * r[:, None])


def measure_from_json(doc, system: System | None = None, depth: int = 8,
                      allow_reducible: bool = False) -> CylinderMeasure:
    kind = doc["type"]
    depth = int(doc.get("depth", depth))
    if kind == "bernoulli":
        return make_bernoulli(doc["probs"], depth)
    if kind == "markov":
        return make_markov(doc["matrix"], system if system is not None and system.kind == "sft" else None,
                           depth, allow_reducible)
    if kind == "parry":
        return make_markov(parry_matrix(system.adjacency), system, depth)
    if kind == "periodic":
        return make_periodic_measure(system, depth)
    raise ValueError(f"unknown measure type {kind!r}")


def measure_of_open(mu: CylinderMeasure, U: OpenSet) -> float:
    """Exact mass of a finite union of cylinders."""
    if U.is_empty:
        return 0.0
    lo, hi = U.window
    if hi - lo == 0:
        return 1.0
    words, masses = mu.word_masses(hi - lo)
    return float(masses[U.word_mask(words, lo)].sum())


# --------------------------------------------------------------------------
# Finitely supported measures
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EmpiricalMeasure:
    """``(1/n) sum_l delta_{x_l}``; atoms kept as a sorted multiset."""

    atoms: tuple[Point, ...]

    def __post_init__(self):
        if not self.atoms:
            raise ValueError("an empirical measure needs at least one atom")
        object.__setattr__(self, "atoms", tuple(sorted(self.atoms)))

    @property
    def n(self) -> int:
        return len(self.atoms)

    def support(self) -> dict[Point, float]:
        out: dict[Point, float] = {}
        for x in self.atoms:
            out[x] = out.get(x, 0.0) + 1.0 / self.n
        return out

    def measure_of(self, U: OpenSet) -> float:
        return sum(U.contains(x) for x in self.atoms) / self.n

    def count_in(self, U: OpenSet) -> int:
        return sum(U.contains(x) for x in self.atoms)


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finitely supported probability measure with arbitrary weights."""

    weights: Mapping[Point, float]

    def __post_init__(self):
        w = {}
        for x, m in dict(self.weights).items():
            if m < 0:
                raise ValueError("negative weight")
            if m > 0:
                w[x] = w.get(x, 0.0) + float(m)
        total = sum(w.values())
        if abs(total - 1) > 1e-9:
            raise ValueError(f"weights sum to {total}, not 1")
        object.__setattr__(self, "weights", dict(sorted(w.items())))

    def support(self) -> dict[Point, float]:
        return dict(self.weights)

    def measure_of(self, U: OpenSet) -> float:
        return sum(m for x, m in self.weights.items() if U.contains(x))

    def __hash__(self):
        return hash(tuple(self.weights.items()))


def dirac(x: Point) -> EmpiricalMeasure:
    return EmpiricalMeasure((x,))


def pushforward(nu):
    """The induced map: ``(T~nu)(A) = nu(T^{-1}A)``, i.e. shift every atom."""
    if isinstance(nu, EmpiricalMeasure):
        return EmpiricalMeasure(tuple(shift(x) for x in nu.atoms))
    if isinstance(nu, DiscreteMeasure):
        return DiscreteMeasure({shift(x): m for x, m in nu.weights.items()})
    raise TypeError(f"cannot push forward {type(nu).__name__}")


# --------------------------------------------------------------------------
# Prohorov metric
# --------------------------------------------------------------------------


def _support(nu) -> dict[Point, float]:
    if isinstance(nu, (EmpiricalMeasure, DiscreteMeasure)):
        return nu.support()
    if isinstance(nu, Point):
        return {nu: 1.0}
    raise TypeError(f"Prohorov distance needs finitely supported measures, got {type(nu).__name__}")


def _oracle_one_sided(a, b, dist) -> float:
    """``max_A inf{delta : a(A) <= b(A^delta) + delta}`` by enumerating subsets ``A``."""
    n = len(a)
    worst = 0.0
    for r in range(1, n + 1):
        for A in itertools.combinations(range(n), r):
            mass = float(sum(a[i] for i in A))
            dA = dist[list(A)].min(axis=0)  # distance of each b-atom to A
            radii = np.unique(np.concatenate([[0.0], dA]))
            best = 1.0
            for i, r0 in enumerate(radii):
                r1 = radii[i + 1] if i + 1 < len(radii) else np.inf
                covered = float(b[dA <= r0].sum())
                cand = max(r0, mass - covered)
                if cand < r1:
                    best = min(best, cand)
                    break
            worst = max(worst, best)
    return worst


FLOW_TOL = 1e-12


def _deficiency(a, b, dist, radius) -> float:
    """``1 - maxflow`` when atoms may move at most ``radius``."""
    G = nx.DiGraph()
    for i, m in enumerate(a):
        G.add_edge("s", ("a", i), capacity=float(m))
    for j, m in enumerate(b):
        G.add_edge(("b", j), "t", capacity=float(m))
    ii, jj = np.nonzero(dist <= radius)
    for i, j in zip(ii, jj):
        G.add_edge(("a", int(i)), ("b", int(j)))
    if "t" not in G or "s" not in G:
        return 1.0
    flow = nx.maximum_flow_value(G, "s", "t")
    g = 1.0 - flow
    return 0.0 if g < FLOW_TOL else g  # weights sum to 1 only up to round-off


def prohorov(nu1, nu2, oracle: bool = False) -> float:
    """Prohorov distance between finitely supported measures on a shift space.

    ``oracle=True`` enumerates every subset of the support (symmetrised,
    at most 12 atoms each).  The default flow mode searches the finite set
    of achievable radii: at radius ``r`` the smallest admissible defect is
    ``1 - maxflow(r)`` (Strassen), so the answer is ``max(r_i, g_i)`` at
    the first radius whose defect ``g_i`` drops below the next radius.
    """
    s1, s2 = _support(nu1), _support(nu2)
    p1, p2 = list(s1), list(s2)
    a = np.array([s1[x] for x in p1])
    b = np.array([s2[x] for x in p2])
    dist = np.array([[metric(x, y) for y in p2] for x in p1])
    if oracle:
        if len(p1) > 12 or len(p2) > 12:
            raise ValueError("oracle mode supports at most 12 atoms per measure")
        return max(_oracle_one_sided(a, b, dist), _oracle_one_sided(b, a, dist.T))
    radii = np.unique(np.concatenate([[0.0], dist.ravel()]))
    nxt = np.append(radii[1:], np.inf)
    lo, hi = 0, len(radii) - 1
    # predicate(i): defect at radii[i] is below radii[i+1]; monotone in i
    while lo < hi:
        mid = (lo + hi) // 2
        if _deficiency(a, b, dist, radii[mid]) < nxt[mid]:
            hi = mid
        else:
            lo = mid + 1
    return float(min(1.0, max(radii[lo], _deficiency(a, b, dist, radii[lo]))))


# --------------------------------------------------------------------------
# Weak* basic sets
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class WeakStarBasicSet:
    """``W(U_1..U_k; eta_1..eta_k) = {nu : nu(U_i) > eta_i for all i}``."""

    opens: tuple[OpenSet, ...]
    thresholds: tuple[float, ...]
    system: System | None = None

    def __post_init__(self):
        if len(self.opens) != len(self.thresholds) or not self.opens:
            raise ValueError("need one threshold per open set")
        if any(t <= 0 for t in self.thresholds) or sum(self.thresholds) >= 1:
            raise ValueError("thresholds must be positive with sum < 1")
        for i, U in enumerate(self.opens):
            if U.is_empty or (self.system is not None and U.is_empty_in(self.system)):
                raise ValueError(f"open set {i} is empty")
            for V in self.opens[i + 1:]:
                if self.system is not None:
                    from .symbolic import nonempty_intersection
                    overlap = nonempty_intersection([(0, U), (0, V)], None, self.system)
                else:
                    overlap = U.intersects_syntactically(V)
                if overlap:
                    raise ValueError("open sets must be pairwise disjoint")


def in_basic_set(nu, W: WeakStarBasicSet) -> bool:
    return all(nu.measure_of(U) > eta for U, eta in zip(W.opens, W.thresholds))


# --------------------------------------------------------------------------
# Quasifactors and the barycenter equation
# --------------------------------------------------------------------------


def compositions(n: int, parts: int):
    """All tuples of ``parts`` nonnegative integers summing to ``n``."""
    if parts == 1:
        yield (n,)
        return
    for k in range(n + 1):
        for rest in compositions(n - k, parts - 1):
            yield (k,) + rest


def multinomial_mass(cell_masses: Sequence[float], multiplicities: Sequence[int]) -> float:
    """``n!/(m_1!...m_r!) * prod mu(C_i)^{m_i}``."""
    n = sum(multiplicities)
    coef = math.factorial(n)
    for m in multiplicities:
        coef //= math.factorial(m)
    return float(coef * np.prod([c ** m for c, m in zip(cell_masses, multiplicities)]))


@dataclass(frozen=True)
class PointMassQuasifactor:
    """The trivial quasifactor ``delta_mu``."""

    mu: CylinderMeasure

    def mean_mass(self, U: OpenSet) -> float:
        return measure_of_open(self.mu, U)


@dataclass(frozen=True)
class SymmetricQuasifactor:
    """``(psi_hat o tau)_* mu^(n)``: law of the empirical measure of n i.i.d. points."""

    mu: CylinderMeasure
    n: int

    def mean_mass(self, U: OpenSet) -> float:
        # theta(U) = k/n on the multiset event {U^k, (X\U)^(n-k)}
        p = measure_of_open(self.mu, U)
        cells = (p, 1.0 - p)
        return sum(multinomial_mass(cells, (k, self.n - k)) * k / self.n for k in range(self.n + 1))


@dataclass(frozen=True)
class SampledQuasifactor:
    """Equal-weight sample of empirical measures standing in for a quasifactor."""

    samples: tuple[EmpiricalMeasure, ...]

    def mean_mass(self, U: OpenSet) -> float:
        return float(np.mean([nu.measure_of(U) for nu in self.samples]))


def sample_quasifactor(mu: CylinderMeasure, n: int, count: int, seed: int,
                       length: int | None = None) -> SampledQuasifactor:
    """Empirical measures of ``n`` points drawn i.i.d. from ``mu``.

    Each atom is the periodic point repeating a sampled word of ``length``
    symbols, so its coordinates ``0..length-1`` are distributed as under
    ``mu``; test sets must sit inside that window.
    """
    length = length or mu.depth
    rng = np.random.default_rng(seed)
    words = mu.sample_words(length, count * n, rng).reshape(count, n, length)
    samples = tuple(EmpiricalMeasure(tuple(Point(tuple(int(s) for s in w)) for w in row))
                    for row in words)
    return SampledQuasifactor(samples)


def barycenter_residual(qf, mu: CylinderMeasure, tests: Sequence[OpenSet]) -> float:
    """``max_U |∫ theta(U) d qf(theta) - mu(U)|`` over the test sets."""
    if isinstance(qf, SampledQuasifactor):
        for U in tests:
            lo, hi = U.window
            if lo < 0:
                raise ValueError("sampled quasifactors only see coordinates >= 0")
    return max((abs(qf.mean_mass(U) - measure_of_open(mu, U)) for U in tests), default=0.0)
