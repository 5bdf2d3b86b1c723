"""Minimal covers, trajectory matrices and epsilon-separated images.

The chain checked here: a replete partition ``P``, an independence set for
interior cylinders ``(A_0, A_1)``, and the trajectory matrix of a cover of
``P^{m-1}`` cells give a norm-one map from ``l_1^k`` to ``l_inf^m`` whose image
holds ``2^{|I|}`` vectors that are 0.5-separated; the growth of ``k`` then
bounds the partition entropy from below.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .entropy import katok_cover, katok_entropy_estimate
from .independence import extrapolate, max_independence_in_window
from .measures import CylinderMeasure, EmpiricalMeasure
from .symbolic import Engine, OpenSet, Partition, System, refine_partition


def _cell_words(cell: OpenSet, lo: int, length: int, system: System) -> frozenset:
    words = system.words(length)
    return frozenset(tuple(int(s) for s in w) for w in words[cell.word_mask(words, lo)])


def disjointify(cover: Sequence[OpenSet], system: System):
    """``B_i = C_i \\ (C_1 ∪ ... ∪ C_{i-1})`` with empty differences dropped.

    Returns ``(index, B_i)`` pairs, ``index`` pointing back into ``cover``.
    """
    if not cover:
        return []
    lo = min(C.window[0] for C in cover)
    hi = max(C.window[1] for C in cover)
    length = max(hi - lo, 1)
    seen: set = set()
    out = []
    for i, C in enumerate(cover):
        ws = _cell_words(C, lo, length, system) - seen
        seen |= ws
        if ws:
            out.append((i, OpenSet.from_words(sorted(ws), lo)))
    return out


@dataclass
class TrajectoryMatrix:
    """0/1 matrix ``t[i, j]``: the ``P``-cell holding ``T^j(B_i)``."""

    entries: np.ndarray
    cells: list  # the B_i as OpenSets

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def apply(self, r: np.ndarray) -> np.ndarray:
        """``phi(r) = r M``."""
        return np.asarray(r, dtype=float) @ self.entries

    def operator_norm(self) -> float:
        # l_1 -> l_inf norm is the largest entry in absolute value
        return float(np.abs(self.entries).max()) if self.entries.size else 0.0


def build_trajectory_matrix(cells: Sequence[OpenSet], P: Partition, system: System | None,
                            m: int) -> TrajectoryMatrix:
    """Rows are the ``P``-itineraries of the cells over times ``0..m-1``."""
    system = system or P.system
    declared = list(P.declared or P.keys)
    if len(declared) > 2:
        raise ValueError("trajectory matrices need a partition into at most two cells")
    index = {k: i for i, k in enumerate(declared)}
    length = P.length + m - 1
    words = system.words(length)
    rows = []
    for B in cells:
        inside = B.word_mask(words, P.offset) if B.window[1] - B.window[0] <= length else None
        if inside is None:
            raise ValueError("cell window exceeds the refinement window")
        its = {tuple(index[P.labels[tuple(int(s) for s in w[t:t + P.length])]] for t in range(m))
               for w in words[inside]}
        if len(its) != 1:
            raise ValueError(f"cell {B!r} straddles partition cells (not from P^{m - 1})")
        rows.append(its.pop())
    return TrajectoryMatrix(np.array(rows, dtype=np.int8).reshape(len(rows), m), list(cells))


def sigma_vectors(matrix: TrajectoryMatrix, measures: Sequence, cells: Sequence[OpenSet] | None = None):
    """``phi(nu(B_1), ..., nu(B_k))`` for each measure."""
    cells = matrix.cells if cells is None else cells
    index = _word_index(cells)
    out = []
    for nu in measures:
        if index is not None and hasattr(nu, "support"):
            # atomic measure over disjoint cells on one window: one lookup per atom
            (lo, length), table = index
            r = np.zeros(len(cells))
            for x, w in nu.support().items():
                i = table.get(x.window(lo, length))
                if i is not None:
                    r[i] += w
        else:
            r = np.array([nu.measure_of(B) for B in cells])
        out.append(matrix.apply(r))
    return out


def _word_index(cells: Sequence[OpenSet]):
    """``word -> cell`` on a common window when the cells are disjoint, else None."""
    if not cells:
        return None
    lo = min(B.window[0] for B in cells)
    hi = max(B.window[1] for B in cells)
    table: dict = {}
    for i, B in enumerate(cells):
        for o, w in B.cylinders:
            if not w or o != lo or len(w) != hi - lo or w in table:
                return None
            table[w] = i
    return (lo, hi - lo), table


def count_eps_separated(vectors: Sequence[np.ndarray], eps: float) -> int:
    """Greedy maximal ``eps``-separated subset (max-norm distance > eps), in input order."""
    return len(separated_subset(vectors, eps))


def separated_subset(vectors: Sequence[np.ndarray], eps: float) -> list[int]:
    """Indices of the greedy separated subset."""
    if len(vectors) == 0:
        return []
    V = np.asarray([np.asarray(v, dtype=float) for v in vectors])
    chosen: list[int] = []
    for i, v in enumerate(V):
        if not chosen or (np.abs(V[chosen] - v).max(axis=1) > eps).all():
            chosen.append(i)
    return chosen


@dataclass
class GWCheck:
    hypothesis_met: bool
    c_upper: float | None  # log2(k)/m: largest c with k >= 2^{cm}
    violation: bool
    note: str = ""


def gw_consistency_check(k: int, m: int, b: float, eps: float, separated_count: int,
                         c: float | None = None) -> GWCheck:
    """Check one instance against the combinatorial lemma.

    The lemma needs more than ``2^{bm}`` separated vectors.  With ``c`` given
    (e.g. fitted over a family), a violation is ``k < 2^{cm}``.
    """
    if separated_count <= 2 ** (b * m):
        return GWCheck(False, None, False, "lemma hypothesis not met")
    c_upper = float(np.log2(k)) / m if k > 0 else float("-inf")
    violation = c is not None and k < 2 ** (c * m) * (1 - 1e-12)
    return GWCheck(True, c_upper, bool(violation))


@dataclass
class GWFamilyCheck:
    rows: list  # (m, k, separated, GWCheck)
    c_fit: float | None
    violations: int


def gw_family_check(instances: Sequence[tuple[int, int, int]], b: float, eps: float) -> GWFamilyCheck:
    """Fit ``c`` over ``(m, k, separated)`` instances and check ``k >= 2^{cm}`` on each.

    ``c_fit`` is the largest exponent with ``separated >= 2^{cm}`` on every
    instance meeting the hypothesis: the growth the separated families force.
    """
    met = [(m, k, s) for m, k, s in instances if s > 2 ** (b * m)]
    c_fit = min(np.log2(s) / m for m, k, s in met) if met else None
    rows = []
    for m, k, s in instances:
        rows.append((m, k, s, gw_consistency_check(k, m, b, eps, s, c_fit)))
    return GWFamilyCheck(rows, None if c_fit is None else float(c_fit),
                         sum(r[3].violation for r in rows))


# --------------------------------------------------------------------------
# End-to-end pipeline
# --------------------------------------------------------------------------


def interior_cylinders(P: Partition) -> tuple[OpenSet, OpenSet]:
    """``A_i ⊂ P_i`` with disjoint closures: the first cylinder of each (clopen) cell."""
    out = []
    for cell in P.cells:
        o, w = cell.cylinders[0]
        out.append(OpenSet.cylinder(w, o))
    return out[0], out[1]


@dataclass
class Theorem5Report:
    m: int
    delta: float
    cover: str
    replete: bool
    k: int = 0
    katok_N: int = 0
    independence: tuple = ()
    density: float = 0.0
    family_size: int = 0
    realized: int = 0
    separated: int = 0
    min_gap: float | None = None
    separating_ok: bool = False
    implied_c_upper: float | None = None
    gw: GWCheck | None = None
    katok_slope: float | None = None
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "gw"}
        d["independence"] = list(self.independence)
        if self.gw is not None:
            d["gw"] = dict(hypothesis_met=self.gw.hypothesis_met, c_upper=self.gw.c_upper,
                           violation=self.gw.violation, note=self.gw.note)
        return d


def theorem5_pipeline(system: System, mu: CylinderMeasure, P: Partition, m: int, delta: float,
                      cover: str = "space", eps: float = 0.5, b: float = 0.5,
                      density_schedule: Sequence[int] | None = None, threshold: float = 0.05,
                      katok_range: Sequence[int] | None = None) -> Theorem5Report:
    """Run the trajectory-matrix argument on one replete partition.

    ``cover="space"`` covers ``D = X`` (so every witness point lies in some
    ``B_i``); ``cover="katok"`` covers the heaviest cells reaching mass
    ``1 - delta``, and witness points are then sought inside that cover.
    Independence times are taken in ``{0, ..., m-1}``, the matrix columns.
    """
    if not mu.ergodic:
        raise ValueError("an ergodic measure is required")
    rep = Theorem5Report(m, delta, cover, P.is_replete())
    rep.katok_N = len(katok_cover(mu, system, P, m, delta))
    if katok_range is not None:
        rep.katok_slope = katok_entropy_estimate(mu, system, P, delta, katok_range).slope
    R = refine_partition(P, system, m)
    if cover == "space":
        C = R.cells
    elif cover == "katok":
        keys = katok_cover(mu, system, P, m, delta)
        by_key = dict(zip(R.keys, R.cells))
        C = [by_key[k] for k in keys]
    else:
        raise ValueError("cover must be 'space' or 'katok'")
    B = [cell for _, cell in disjointify(C, system)]
    rep.k = len(B)
    if not rep.replete:
        rep.notes.append("partition is not replete: no interior cylinders, empty sigma-family")
        return rep
    M = build_trajectory_matrix(B, P, system, m)
    A0, A1 = interior_cylinders(P)

    # hypothesis: positive independence density for (A_0, A_1)
    sched = list(density_schedule) if density_schedule is not None else sorted({max(2, m // 2), m})
    vals = [max_independence_in_window((A0, A1), None, system, mm, start=0)[0] for mm in sched]
    rep.density = extrapolate(sched, vals)
    if rep.density < threshold:
        rep.notes.append(f"independence density {rep.density:.3g} below {threshold}: "
                         "hypothesis not met, empty sigma-family")
        return rep
    _, I = max_independence_in_window((A0, A1), None, system, m, start=0)
    rep.independence = I
    rep.family_size = 2 ** len(I)

    union = OpenSet(tuple(c for cell in B for c in cell.cylinders))
    eng = Engine(system, [[A0, A1], [union]])
    masks = [eng.mask(0, A0), eng.mask(0, A1)]
    cover_fixed = (eng.anchors[1], eng.mask(1, union))
    pts, sigmas = [], []
    for sigma in itertools.product((0, 1), repeat=len(I)):
        fixed = [(j + eng.anchors[0], masks[s]) for j, s in zip(I, sigma)] + [cover_fixed]
        x = eng.witness(fixed)
        if x is not None:
            pts.append(x)
            sigmas.append(sigma)
    rep.realized = len(pts)
    if rep.realized < rep.family_size:
        rep.notes.append(f"{rep.family_size - rep.realized} sigma-patterns have no point inside the cover")

    vecs = sigma_vectors(M, [EmpiricalMeasure((x,)) for x in pts])
    rep.separated = count_eps_separated(vecs, eps)
    # each pair needs a separating time with coordinates > 0.9 against < 0.1
    S = np.asarray(sigmas, dtype=bool).reshape(len(sigmas), len(I))
    V = np.asarray(vecs, dtype=float).reshape(len(vecs), m)[:, list(I)]
    gap, ok = np.inf, True
    for i in range(len(S) - 1):
        diff = S[i] != S[i + 1:]
        hi, lo = np.maximum(V[i], V[i + 1:]), np.minimum(V[i], V[i + 1:])
        gap = min(gap, np.where(diff, hi - lo, -np.inf).max(axis=1).min())
        ok = ok and bool((diff & (hi > 0.9) & (lo < 0.1)).any(axis=1).all())
    rep.min_gap = float(gap) if len(S) > 1 else None
    rep.separating_ok = ok
    rep.gw = gw_consistency_check(rep.k, m, b, eps, rep.separated)
    rep.implied_c_upper = rep.gw.c_upper
    return rep


def theorem5_family(system: System, mu: CylinderMeasure, P: Partition, ms: Sequence[int],
                    delta: float, b: float = 0.5, eps: float = 0.5, cover: str = "space"):
    """Pipeline over several horizons plus the family-level lemma check."""
    reps = [theorem5_pipeline(system, mu, P, m, delta, cover=cover, eps=eps, b=b) for m in ms]
    fam = gw_family_check([(r.m, r.k, r.separated) for r in reps], b, eps)
    return reps, fam
