"""Symbolic dynamical systems: shifts, periodic points, cylinder sets, partitions.

Every system here is a two-sided shift space presented by a vertex-labelled
graph.  For a shift of finite type the vertices are the symbols themselves;
a finite periodic orbit is a labelled cycle; a product system ``X^(n)`` runs
``n`` independent copies of a component system in lockstep.

Intersections of shifted cylinder sets are decided exactly on the
higher-block presentation of the graph: once the block length covers every
cylinder window, each constraint is a mask over block states and
nonemptiness reduces to reachability.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

Word = tuple[int, ...]
Cyl = tuple[int, Word]  # (offset, word)

WHOLE: Cyl = (0, ())


# --------------------------------------------------------------------------
# Systems
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class System:
    """A two-sided shift space given by a vertex-labelled graph.

    Attributes
    ----------
    kind : str
        One of ``"full-shift"``, ``"sft"``, ``"periodic-orbit"``, ``"product"``.
    alphabet_size : int
        Number of symbols of the (component) alphabet.
    adjacency : ndarray
        0/1 vertex adjacency.  Vertices are symbols for shifts; phases of the
        orbit word for a periodic orbit.
    factor_count : int
        ``n`` for the product system ``T_n = T x ... x T``; 1 otherwise.
    component : System or None
        The factor system of a product.
    orbit_word : tuple or None
        The period word of a periodic-orbit system.
    """

    kind: str
    alphabet_size: int
    adjacency: np.ndarray = field(repr=False)
    factor_count: int = 1
    component: System | None = None
    orbit_word: Word | None = None

    @property
    def base(self) -> System:
        return self.component if self.component is not None else self

    @property
    def n_vertices(self) -> int:
        return self.base.adjacency.shape[0]

    @cached_property
    def labels(self) -> np.ndarray:
        b = self.base
        if b.orbit_word is not None:
            return np.asarray(b.orbit_word, dtype=np.int64)
        return np.arange(b.alphabet_size, dtype=np.int64)

    @cached_property
    def is_irreducible(self) -> bool:
        n, _ = connected_components(self.base.adjacency, directed=True, connection="strong")
        return n == 1

    def paths(self, length: int) -> np.ndarray:
        """All vertex paths with ``length`` vertices, shape ``(N, length)``."""
        return self.base._paths(length)

    def _paths(self, length: int) -> np.ndarray:
        cache = self.__dict__.setdefault("_path_cache", {})
        if length in cache:
            return cache[length]
        adj = self.adjacency.astype(bool)
        V = adj.shape[0]
        if length == 0:
            out = np.zeros((1, 0), dtype=np.int64)
        else:
            out = np.arange(V, dtype=np.int64)[:, None]
            for _ in range(length - 1):
                last = out[:, -1]
                rows, nxt = np.nonzero(adj[last])
                out = np.concatenate([out[rows], nxt[:, None]], axis=1)
        out.setflags(write=False)
        cache[length] = out
        return out

    def words(self, length: int) -> np.ndarray:
        """Admissible words of ``length`` symbols, lexicographically sorted."""
        cache = self.base.__dict__.setdefault("_word_cache", {})
        if length not in cache:
            w = self.labels[self.paths(length)]
            w = np.unique(w, axis=0) if length else w
            w.setflags(write=False)
            cache[length] = w
        return cache[length]

    def is_admissible(self, word: Sequence[int], cyclic: bool = False) -> bool:
        """Whether ``word`` occurs in some point (as a periodic word if ``cyclic``)."""
        word = tuple(word)
        if not word:
            return True
        if any(s < 0 or s >= self.base.alphabet_size for s in word):
            return False
        if cyclic:
            # the periodic point word^inf exists iff word*2 is admissible and closes
            return _cyclic_path_exists(self.base, word)
        return _path_exists(self.base, word)

    def automaton(self, block: int) -> _BlockAutomaton:
        cache = self.base.__dict__.setdefault("_auto_cache", {})
        if block not in cache:
            cache[block] = _BlockAutomaton(self.base, block)
        return cache[block]

    def __repr__(self) -> str:
        if self.kind == "product":
            return f"System(product, n={self.factor_count}, of={self.component!r})"
        if self.kind == "periodic-orbit":
            return f"System(periodic-orbit, word={''.join(map(str, self.orbit_word))})"
        return f"System({self.kind}, alphabet={self.alphabet_size})"


def _label_masks(system: System) -> np.ndarray:
    lab = system.labels
    return lab[None, :] == np.arange(system.base.alphabet_size)[:, None]


def _path_exists(system: System, word: Word) -> bool:
    m = _label_masks(system)
    reach = m[word[0]].copy()
    adj = system.adjacency.astype(bool)
    for s in word[1:]:
        reach = (reach @ adj) & m[s]
        if not reach.any():
            return False
    return bool(reach.any())


def _cyclic_path_exists(system: System, word: Word) -> bool:
    m = _label_masks(system)
    adj = system.adjacency.astype(bool)
    for v0 in np.nonzero(m[word[0]])[0]:
        reach = np.zeros(system.n_vertices, dtype=bool)
        reach[v0] = True
        for s in word[1:]:
            reach = (reach @ adj) & m[s]
        if (reach @ adj)[v0]:
            return True
    return False


def make_system(kind: str, alphabet_size: int | None = None, adjacency=None, *,
                word: Sequence[int] | None = None, component: System | None = None,
                factor_count: int = 1) -> System:
    """Build a system.

    ``make_system("full-shift", 2)``, ``make_system("sft", 2, [[1, 1], [1, 0]])``,
    ``make_system("periodic-orbit", 2, word=(0, 1))`` and
    ``make_system("product", component=sys, factor_count=n)``.
    A periodic orbit with no word given is the fixed point ``...000...``.
    """
    if kind == "full-shift":
        if not alphabet_size or alphabet_size < 1:
            raise ValueError("full-shift needs a positive alphabet_size")
        adj = np.ones((alphabet_size, alphabet_size), dtype=np.int8)
        return System(kind, alphabet_size, _frozen(adj))
    if kind == "sft":
        adj = np.asarray(adjacency, dtype=np.int8)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency must be a square matrix")
        if alphabet_size is not None and adj.shape[0] != alphabet_size:
            raise ValueError(f"adjacency side {adj.shape[0]} != alphabet_size {alphabet_size}")
        if not np.isin(adj, (0, 1)).all():
            raise ValueError("adjacency entries must be 0 or 1")
        if (adj.sum(axis=1) == 0).any() or (adj.sum(axis=0) == 0).any():
            raise ValueError("adjacency has an all-zero row or column (stranded symbol)")
        return System(kind, adj.shape[0], _frozen(adj))
    if kind == "periodic-orbit":
        w = tuple(int(s) for s in (word if word is not None else (0,)))
        if not w:
            raise ValueError("orbit word must be nonempty")
        a = alphabet_size if alphabet_size is not None else max(w) + 1
        if max(w) >= a or min(w) < 0:
            raise ValueError("orbit word uses symbols outside the alphabet")
        p = len(w)
        adj = np.zeros((p, p), dtype=np.int8)
        adj[np.arange(p), (np.arange(p) + 1) % p] = 1
        return System(kind, a, _frozen(adj), orbit_word=w)
    if kind == "product":
        if component is None or factor_count < 1:
            raise ValueError("product needs a component system and factor_count >= 1")
        if component.kind == "product":
            raise ValueError("nested products are not supported")
        return System(kind, component.alphabet_size, component.adjacency,
                      factor_count=factor_count, component=component)
    raise ValueError(f"unknown system kind {kind!r}")


def system_from_json(doc) -> System:
    """Read ``{"kind": "sft", "alphabet": 2, "adjacency": [[1,1],[1,0]]}``."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    kind = doc["kind"]
    alphabet = doc.get("alphabet", doc.get("alphabet_size"))
    if kind == "product":
        return make_system("product", component=system_from_json(doc["component"]),
                           factor_count=int(doc.get("factor_count", doc.get("n", 1))))
    return make_system(kind, alphabet, doc.get("adjacency"), word=doc.get("word"))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


# --------------------------------------------------------------------------
# Points
# --------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Point:
    """A purely periodic two-sided sequence ``x_i = period_word[(phase + i) % p]``.

    Stored canonically: primitive period, rotated to its lexicographically
    least rotation, so that ``==`` is equality of sequences.
    """

    period_word: Word
    phase: int = 0

    def __post_init__(self):
        w = tuple(int(s) for s in self.period_word)
        if not w:
            raise ValueError("period word must be nonempty")
        n = len(w)
        p = next(d for d in range(1, n + 1) if n % d == 0 and w == w[:d] * (n // d))
        w = w[:p]
        r = min(range(p), key=lambda i: w[i:] + w[:i])
        object.__setattr__(self, "period_word", w[r:] + w[:r])
        object.__setattr__(self, "phase", (int(self.phase) - r) % p)

    @property
    def period(self) -> int:
        return len(self.period_word)

    def __getitem__(self, i: int) -> int:
        return self.period_word[(self.phase + i) % self.period]

    def window(self, lo: int, length: int) -> Word:
        return tuple(self[i] for i in range(lo, lo + length))

    def in_system(self, system: System) -> bool:
        return system.is_admissible(self.period_word, cyclic=True)

    def __repr__(self) -> str:
        return f"Point({''.join(map(str, self.period_word))}@{self.phase})"


def periodic_points(system: System, period: int) -> list[Point]:
    """Points of ``system`` whose period divides ``period`` (duplicates removed)."""
    paths = system.paths(period)
    adj = system.base.adjacency.astype(bool)
    closed = paths[adj[paths[:, -1], paths[:, 0]]]
    lab = system.labels
    return sorted({Point(tuple(int(s) for s in lab[p]), ph) for p in closed for ph in range(period)})


def random_point(system: System, rng: np.random.Generator, max_period: int = 4) -> Point:
    """A periodic point with period dividing some ``p <= max_period``, drawn from ``rng``."""
    for _ in range(100):
        pts = periodic_points(system, int(rng.integers(1, max_period + 1)))
        if pts:
            return pts[int(rng.integers(len(pts)))]
    raise ValueError(f"no periodic point of period <= {max_period} in {system!r}")


def shift(point: Point, steps: int = 1) -> Point:
    """``T^steps`` applied to ``point``; negative steps invert."""
    return Point(point.period_word, point.phase + steps)


def metric(x: Point, y: Point) -> float:
    """``2^{-k}`` with ``k = min{|i| : x_i != y_i}``; 0 when the points agree."""
    if x == y:
        return 0.0
    bound = math.lcm(x.period, y.period)
    for k in range(bound + 1):
        if x[k] != y[k] or x[-k] != y[-k]:
            return 2.0 ** -k
    raise AssertionError("unequal periodic points agree on a full common period")


# --------------------------------------------------------------------------
# Open sets
# --------------------------------------------------------------------------


def _contains(big: Cyl, small: Cyl) -> bool:
    """Whether cylinder ``small`` is a subset of cylinder ``big``."""
    (o, w), (o2, w2) = small, big
    if not w2:
        return True
    if o2 < o or o2 + len(w2) > o + len(w):
        return False
    return w[o2 - o:o2 - o + len(w2)] == w2


def _compatible(c1: Cyl, c2: Cyl) -> bool:
    (o1, w1), (o2, w2) = c1, c2
    lo, hi = max(o1, o2), min(o1 + len(w1), o2 + len(w2))
    return all(w1[i - o1] == w2[i - o2] for i in range(lo, hi))


@dataclass(frozen=True)
class OpenSet:
    """Finite union of cylinders ``{x : x[offset : offset+len(word)] == word}``.

    The empty union is the empty set; ``(0, ())`` is the whole space.
    """

    cylinders: tuple[Cyl, ...] = ()

    def __post_init__(self):
        cyl = sorted({(int(o), tuple(int(s) for s in w)) for o, w in self.cylinders})
        cyl = [(0, ()) if not w else (o, w) for o, w in cyl]
        cyl = sorted(set(cyl))
        # c is redundant iff some proper sub-cylinder of c is present
        present = set(cyl)
        if WHOLE in present:
            keep = [WHOLE]
        else:
            keep = [(o, w) for o, w in cyl
                    if not any((o + i, w[i:j]) in present
                               for i in range(len(w)) for j in range(i + 1, len(w) + 1)
                               if j - i < len(w))]
        object.__setattr__(self, "cylinders", tuple(keep))

    @classmethod
    def cylinder(cls, word: Sequence[int], offset: int = 0) -> OpenSet:
        return cls(((offset, tuple(word)),))

    @classmethod
    def whole(cls) -> OpenSet:
        return cls((WHOLE,))

    @classmethod
    def from_words(cls, words: Iterable[Sequence[int]], offset: int = 0) -> OpenSet:
        return cls(tuple((offset, tuple(w)) for w in words))

    def __or__(self, other: OpenSet) -> OpenSet:
        return OpenSet(self.cylinders + other.cylinders)

    @property
    def is_empty(self) -> bool:
        """Syntactic emptiness (no cylinders); see ``is_empty_in``."""
        return not self.cylinders

    def is_empty_in(self, system: System) -> bool:
        return not nonempty_intersection([(0, self)], None, system)

    @property
    def window(self) -> tuple[int, int]:
        """``(lo, hi)`` with every cylinder inside coordinates ``lo..hi-1``."""
        spans = [(o, o + len(w)) for o, w in self.cylinders if w]
        if not spans:
            return (0, 0)
        return (min(s[0] for s in spans), max(s[1] for s in spans))

    def contains(self, x: Point) -> bool:
        return any(x.window(o, len(w)) == w for o, w in self.cylinders)

    def word_mask(self, words: np.ndarray, lo: int) -> np.ndarray:
        """Which rows of ``words`` (read at coordinates ``lo..``) lie in the set."""
        out = np.zeros(len(words), dtype=bool)
        for o, w in self.cylinders:
            if not w:
                out[:] = True
                break
            if o < lo or o - lo + len(w) > words.shape[1]:
                raise ValueError(f"cylinder at offset {o} exceeds the word window")
            out |= (words[:, o - lo:o - lo + len(w)] == np.asarray(w)).all(axis=1)
        return out

    def intersects_syntactically(self, other: OpenSet) -> bool:
        """Intersection nonempty in the full shift over a large alphabet."""
        return any(_compatible(c, d) for c in self.cylinders for d in other.cylinders)

    def __repr__(self) -> str:
        if not self.cylinders:
            return "OpenSet(∅)"
        parts = [f"[{''.join(map(str, w))}]_{o}" if w else "X" for o, w in self.cylinders]
        return "OpenSet(" + " ∪ ".join(parts) + ")"


@dataclass(frozen=True)
class ProductOpenSet:
    """Finite union of boxes ``C_1 x ... x C_n`` in the product system ``X^(n)``.

    Each box component is a single cylinder ``(offset, word)``; the empty word
    leaves that coordinate free.
    """

    boxes: tuple[tuple[Cyl, ...], ...] = ()

    def __post_init__(self):
        boxes = tuple(sorted({tuple((int(o), tuple(w)) if w else WHOLE for o, w in b)
                              for b in self.boxes}))
        if len({len(b) for b in boxes}) > 1:
            raise ValueError("boxes must all have the same number of factors")
        object.__setattr__(self, "boxes", boxes)

    @classmethod
    def product(cls, sets: Sequence[OpenSet]) -> ProductOpenSet:
        return cls(tuple(itertools.product(*(s.cylinders for s in sets))))

    @classmethod
    def symmetric(cls, sets: Sequence[OpenSet]) -> ProductOpenSet:
        """Union over orderings: the preimage of ``tau(U_1 x ... x U_n)``."""
        boxes = []
        for perm in set(itertools.permutations(range(len(sets)))):
            boxes.extend(itertools.product(*(sets[i].cylinders for i in perm)))
        return cls(tuple(boxes))

    def __or__(self, other: ProductOpenSet) -> ProductOpenSet:
        return ProductOpenSet(self.boxes + other.boxes)

    @property
    def factor_count(self) -> int:
        return len(self.boxes[0]) if self.boxes else 0

    @property
    def window(self) -> tuple[int, int]:
        spans = [(o, o + len(w)) for b in self.boxes for o, w in b if w]
        if not spans:
            return (0, 0)
        return (min(s[0] for s in spans), max(s[1] for s in spans))

    def contains(self, xs: Sequence[Point]) -> bool:
        return any(all(x.window(o, len(w)) == w for x, (o, w) in zip(xs, b)) for b in self.boxes)


def _window_of(sets) -> tuple[int, int]:
    ws = [s.window for s in sets if _has_window(s)]
    if not ws:
        return (0, 0)
    return (min(w[0] for w in ws), max(w[1] for w in ws))


def _has_window(s) -> bool:
    if isinstance(s, OpenSet):
        return any(w for _, w in s.cylinders)
    return any(w for b in s.boxes for _, w in b)


# --------------------------------------------------------------------------
# Block automaton and intersection engine
# --------------------------------------------------------------------------


class _BlockAutomaton:
    """Higher-block presentation: states are vertex paths of ``block`` vertices."""

    def __init__(self, system: System, block: int):
        self.system = system
        self.block = block
        self.states = system.paths(block)  # (S, block)
        self.state_words = system.labels[self.states]
        S = len(self.states)
        V = system.n_vertices
        code = np.zeros(S, dtype=np.int64)
        for c in range(block):
            code = code * V + self.states[:, c]
        if block == 1:
            T = system.adjacency.astype(bool)[self.states[:, 0]][:, self.states[:, 0]]
        else:
            suffix = code % V ** (block - 1)
            prefix = code // V
            T = suffix[:, None] == prefix[None, :]
        self.T = T.astype(np.uint8)
        self._mask_cache: dict = {}

    @property
    def size(self) -> int:
        return len(self.states)

    def cyl_mask(self, rel: int, word: Word) -> np.ndarray:
        key = (rel, word)
        if key not in self._mask_cache:
            if not word:
                m = np.ones(self.size, dtype=bool)
            else:
                seg = self.state_words[:, rel:rel + len(word)]
                m = (seg == np.asarray(word)).all(axis=1)
            self._mask_cache[key] = m
        return self._mask_cache[key]

    @cached_property
    def Tbool(self) -> np.ndarray:
        return self.T.astype(bool)

    @cached_property
    def _Tt(self):
        return csr_matrix(self.T.T.astype(np.float32))

    def step(self, reach: np.ndarray, times: int = 1) -> np.ndarray:
        """One step of ``T`` along every axis of ``reach``."""
        V = self.size
        for _ in range(times):
            r = reach.astype(np.float32)
            for _ax in range(reach.ndim):
                # contract the leading axis and append it last, as tensordot would
                r = np.moveaxis((self._Tt @ r.reshape(V, -1)).reshape(r.shape), 0, -1)
            reach = r > 0
        return reach


class Engine:
    """Compiles shifted open sets into masks for one system.

    Sets are passed in *groups*; every member of a group shares the group's
    anchor (its minimal offset), so alternatives drawn from one group sit at
    the same automaton position.
    """

    def __init__(self, system: System, groups: Sequence[Sequence]):
        self.system = system
        self.n = system.factor_count
        self.anchors = []
        span = 1
        for g in groups:
            lo, hi = _window_of(g)
            self.anchors.append(lo)
            span = max(span, hi - lo)
        self.auto = system.automaton(span)
        self.shape = (self.auto.size,) * self.n

    def mask(self, group: int, s) -> np.ndarray:
        anchor = self.anchors[group]
        a = self.auto
        if isinstance(s, OpenSet):
            if self.n != 1:
                s = ProductOpenSet(tuple((c,) + (WHOLE,) * (self.n - 1) for c in s.cylinders))
            else:
                out = np.zeros(a.size, dtype=bool)
                for o, w in s.cylinders:
                    out |= a.cyl_mask(o - anchor if w else 0, w)
                return out
        if s.factor_count not in (0, self.n):
            raise ValueError(f"product set has {s.factor_count} factors, system has {self.n}")
        out = np.zeros(self.shape, dtype=bool)
        for box in s.boxes:
            m = None
            for o, w in box:
                cm = a.cyl_mask(o - anchor if w else 0, w)
                m = cm if m is None else np.multiply.outer(m, cm)
            out |= m
        return out

    def full(self) -> np.ndarray:
        return np.ones(self.shape, dtype=bool)

    def all_feasible(self, fixed: Sequence[tuple[int, np.ndarray]],
                     branches: Sequence[tuple[int, Sequence[np.ndarray]]]) -> bool:
        """True iff every choice of one alternative per branch leaves a feasible path."""
        events: dict[int, list] = {}
        for pos, m in fixed:
            ev = events.setdefault(pos, [None, None])
            ev[0] = m if ev[0] is None else ev[0] & m
        for pos, alts in branches:
            ev = events.setdefault(pos, [None, None])
            if ev[1] is not None:
                raise ValueError("two branch events at one position")
            ev[1] = list(alts)
        order = sorted(events)
        if not order:
            return True
        steps = [b - a for a, b in zip(order, order[1:])]

        def rec(i: int, reach: np.ndarray) -> bool:
            fm, alts = events[order[i]]
            if fm is not None:
                reach = reach & fm
            children = [reach] if alts is None else [reach & a for a in alts]
            for c in children:
                if not c.any():
                    return False
                if i + 1 < len(order) and not rec(i + 1, self.auto.step(c, steps[i])):
                    return False
            return True

        return rec(0, self.full())

    def witness(self, fixed: Sequence[tuple[int, np.ndarray]]):
        """A periodic point (tuple of points for products) meeting every mask, or None."""
        events: dict[int, np.ndarray] = {}
        for pos, m in fixed:
            events[pos] = m if pos not in events else events[pos] & m
        if not events:
            events[0] = self.full()
        lo, hi = min(events), max(events)
        reaches = []
        reach = self.full()
        for p in range(lo, hi + 1):
            if p > lo:
                reach = self.auto.step(reach)
            if p in events:
                reach = reach & events[p]
            if not reach.any():
                return None
            reaches.append(reach)
        # backtrack one state per position
        T = self.auto.Tbool
        cur = np.unravel_index(int(np.flatnonzero(reaches[-1])[0]), self.shape)
        seq = [cur]
        for r in reversed(reaches[:-1]):
            cand = r.copy()
            for ax, s in enumerate(cur):
                allowed = T[:, s]
                shape = [1] * len(self.shape)
                shape[ax] = -1
                cand &= allowed.reshape(shape)
            cur = np.unravel_index(int(np.flatnonzero(cand)[0]), self.shape)
            seq.append(cur)
        seq.reverse()
        pts = []
        for c in range(self.n):
            st = [self.auto.states[s[c]] for s in seq]
            verts = list(st[0]) + [int(s[-1]) for s in st[1:]]
            x = _close_cycle(self.system.base, verts, start=lo)
            if x is None:
                return None
            pts.append(x)
        return pts[0] if self.n == 1 else tuple(pts)


def _close_cycle(system: System, verts: list[int], start: int) -> Point | None:
    """Periodic point whose coordinates ``start..`` follow the vertex path ``verts``."""
    adj = system.adjacency.astype(bool)
    src, dst = verts[-1], verts[0]
    # BFS for a path src -> ... -> dst of length >= 1
    prev = {}
    frontier = [src]
    found = False
    while frontier and not found:
        nxt = []
        for v in frontier:
            for u in np.nonzero(adj[v])[0]:
                u = int(u)
                if u == dst:
                    prev.setdefault(("end",), v)
                    found = True
                    break
                if u not in prev and u != src:
                    prev[u] = v
                    nxt.append(u)
            if found:
                break
        frontier = nxt
    if not found:
        return None
    back = []
    v = prev[("end",)]
    while v != src:
        back.append(v)
        v = prev[v]
    cycle = verts + back[::-1]
    word = tuple(int(system.labels[v]) for v in cycle)
    return Point(word, (-start) % len(word))


def nonempty_intersection(sets: Sequence[tuple[int, object]], constraint=None,
                          system: System | None = None) -> bool:
    """Whether ``constraint ∩ ⋂ T^{-time}(set)`` contains a point of ``system``.

    ``sets`` is a list of ``(time, OpenSet)`` pairs (``ProductOpenSet`` for
    product systems).  With no sets the answer is whether ``constraint``
    (default: the whole space) is nonempty.
    """
    if system is None:
        raise ValueError("a system is required")
    groups = [[s] for _, s in sets] + [[constraint if constraint is not None else OpenSet.whole()]]
    eng = Engine(system, groups)
    fixed = [(t + eng.anchors[i], eng.mask(i, s)) for i, (t, s) in enumerate(sets)]
    if constraint is not None:
        fixed.append((eng.anchors[-1], eng.mask(len(sets), constraint)))
    if not fixed:
        return True
    return eng.all_feasible(fixed, [])


def find_point(sets: Sequence[tuple[int, object]], constraint=None, system: System | None = None):
    """A periodic point witnessing ``nonempty_intersection``, or None."""
    groups = [[s] for _, s in sets] + [[constraint if constraint is not None else OpenSet.whole()]]
    eng = Engine(system, groups)
    fixed = [(t + eng.anchors[i], eng.mask(i, s)) for i, (t, s) in enumerate(sets)]
    if constraint is not None:
        fixed.append((eng.anchors[-1], eng.mask(len(sets), constraint)))
    return eng.witness(fixed)


# --------------------------------------------------------------------------
# Partitions
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Partition:
    """Partition into unions of cylinders over the window ``offset..offset+length-1``.

    ``labels`` maps every admissible word on the window to its cell key.
    ``declared`` lists cell keys in order, including any that turned out empty.
    """

    system: System
    offset: int
    length: int
    labels: dict
    declared: tuple = ()

    @cached_property
    def keys(self) -> list:
        seen = dict.fromkeys(self.labels[tuple(w)] for w in self.system.words(self.length))
        return [k for k in (self.declared or seen) if k in seen]

    @cached_property
    def cells(self) -> list[OpenSet]:
        groups: dict = {k: [] for k in self.keys}
        for w, k in self.labels.items():
            groups[k].append(w)
        return [OpenSet.from_words(groups[k], self.offset) for k in self.keys]

    def __len__(self) -> int:
        return len(self.keys)

    def label_array(self, words: np.ndarray, shift_by: int = 0) -> list:
        """Cell keys of the sub-words ``words[:, shift_by : shift_by + length]``."""
        seg = words[:, shift_by:shift_by + self.length]
        return [self.labels[tuple(int(s) for s in w)] for w in seg]

    def is_replete(self) -> bool:
        """Two declared cells, each with nonempty interior.

        Cells are finite unions of cylinders, hence clopen: each cell with
        an admissible word contains a nonempty cylinder in its interior.
        """
        return len(self.declared or self.keys) == 2 and len(self.keys) == 2

    @classmethod
    def generator(cls, system: System) -> Partition:
        words = system.words(1)
        labels = {(int(w[0]),): int(w[0]) for w in words}
        return cls(system, 0, 1, labels, tuple(sorted(labels.values())))

    @classmethod
    def from_open_sets(cls, system: System, sets: Sequence[OpenSet]) -> Partition:
        lo, hi = _window_of(sets)
        length = max(hi - lo, 1)
        words = system.words(length)
        masks = np.array([s.word_mask(words, lo) for s in sets])
        counts = masks.sum(axis=0)
        if (counts != 1).any():
            bad = words[np.flatnonzero(counts != 1)[0]]
            raise ValueError(f"sets do not partition the space: word {tuple(int(c) for c in bad)} at offset {lo} "
                             f"lies in {int(counts[np.flatnonzero(counts != 1)[0]])} sets")
        labels = {tuple(int(s) for s in w): int(np.argmax(masks[:, i])) for i, w in enumerate(words)}
        return cls(system, lo, length, labels, tuple(range(len(sets))))


def refine_partition(P: Partition, system: System | None = None, n: int = 1) -> Partition:
    """The join ``P ∨ T^{-1}P ∨ ... ∨ T^{-(n-1)}P``; cells keyed by itineraries."""
    system = system or P.system
    if n < 1:
        raise ValueError("n must be positive")
    if n == 1:
        return P
    length = P.length + n - 1
    words = system.words(length)
    cols = [P.label_array(words, t) for t in range(n)]
    labels = {tuple(int(s) for s in w): tuple(c[i] for c in cols) for i, w in enumerate(words)}
    return Partition(system, P.offset, length, labels)


def cell_key_str(key: Hashable) -> str:
    if isinstance(key, tuple):
        return "".join(cell_key_str(k) for k in key)
    return str(key)
