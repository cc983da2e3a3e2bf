"""Typed pure simplicial complexes, their walls and type-induced bipartite graphs.

A complex is stored through its chambers only; walls and lower faces are
derived on demand. Vertex ids are opaque strings, types are integers 0..d.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter, deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Hashable, Iterable, Sequence


class ComplexError(ValueError):
    """Raised when a complex (or a file describing one) is malformed."""


class ComplexValidationError(ComplexError):
    def __init__(self, report: "ValidationReport"):
        self.report = report
        lines = [f"  - {v.kind}: {v.message}" for v in report.violations[:20]]
        more = len(report.violations) - 20
        if more > 0:
            lines.append(f"  ... and {more} more")
        super().__init__("invalid complex:\n" + "\n".join(lines))


@dataclass(frozen=True)
class TypedComplex:
    """Pure d-dimensional complex with a type function, given by its chambers.

    Construction does not validate; call :func:`validate` (loaders do).
    """

    d: int
    vertices: tuple[tuple[str, int], ...]
    chambers: tuple[tuple[str, ...], ...]

    @classmethod
    def build(cls, d: int, vertices: Iterable[tuple[str, int]],
              chambers: Iterable[Iterable[str]]) -> "TypedComplex":
        verts = tuple((str(v), int(t)) for v, t in vertices)
        types = dict(verts)
        chs = []
        for ch in chambers:
            ch = tuple(str(v) for v in ch)
            # order by type when possible so chamber[i] is the type-i vertex
            if all(v in types for v in ch):
                ch = tuple(sorted(ch, key=lambda v: (types[v], v)))
            chs.append(ch)
        return cls(int(d), verts, tuple(chs))

    @cached_property
    def type_of(self) -> dict[str, int]:
        return dict(self.vertices)

    @cached_property
    def classes(self) -> tuple[tuple[str, ...], ...]:
        """Vertex ids grouped by type, in input order."""
        groups: list[list[str]] = [[] for _ in range(self.d + 1)]
        for v, t in self.vertices:
            if 0 <= t <= self.d:
                groups[t].append(v)
        return tuple(tuple(g) for g in groups)

    @property
    def num_chambers(self) -> int:
        return len(self.chambers)

    def check_type(self, i: int) -> None:
        if not isinstance(i, int) or not 0 <= i <= self.d:
            raise ComplexError(f"type label {i!r} outside 0..{self.d}")


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    ids: tuple = ()


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def add(self, kind: str, message: str, ids: Iterable = ()) -> None:
        self.violations.append(Violation(kind, message, tuple(ids)))


def validate(cx: TypedComplex) -> ValidationReport:
    """Check every TypedComplex invariant; an empty report means valid."""
    rep = ValidationReport()
    if cx.d < 1:
        rep.add("dimension", f"d must be >= 1, got {cx.d}")

    counts = Counter(v for v, _ in cx.vertices)
    dups = sorted(v for v, c in counts.items() if c > 1)
    if dups:
        rep.add("duplicate vertex", f"vertex ids listed more than once: {dups}", dups)

    for v, t in cx.vertices:
        if not 0 <= t <= cx.d:
            rep.add("type range", f"vertex {v!r} has type {t} outside 0..{cx.d}", [v])

    if not cx.chambers:
        rep.add("no chambers", "complex has no chambers")

    types = cx.type_of
    seen: dict[frozenset, int] = {}
    used: set[str] = set()
    for idx, ch in enumerate(cx.chambers):
        unknown = [v for v in ch if v not in types]
        if unknown:
            rep.add("unknown vertex", f"chamber {idx} uses undeclared vertices {unknown}", unknown)
        if len(set(ch)) != len(ch):
            rep.add("repeated vertex", f"chamber {idx} repeats a vertex: {list(ch)}", ch)
        if len(ch) != cx.d + 1:
            rep.add("chamber size",
                    f"chamber {idx} has {len(ch)} vertices, expected {cx.d + 1}", ch)
        elif not unknown:
            ts = sorted(types[v] for v in ch)
            if ts != list(range(cx.d + 1)):
                rep.add("type function not injective on chamber",
                        f"chamber {idx} {list(ch)} has types {ts}", ch)
        key = frozenset(ch)
        if key in seen:
            rep.add("duplicate chamber", f"chambers {seen[key]} and {idx} coincide", ch)
        else:
            seen[key] = idx
        used.update(ch)

    isolated = [v for v, _ in cx.vertices if v not in used]
    if isolated:
        rep.add("isolated vertex", f"vertices in no chamber: {isolated}", isolated)
    return rep


def ensure_valid(cx: TypedComplex) -> TypedComplex:
    rep = validate(cx)
    if not rep.ok:
        raise ComplexValidationError(rep)
    return cx


@dataclass(frozen=True, order=True)
class Wall:
    """A (d-1)-face, keyed by its sorted vertex ids; ``cotype`` is the missing type."""

    vertices: tuple[str, ...]
    cotype: int


def _wall_key(chamber: Sequence[str], i: int) -> tuple[str, ...]:
    # chambers from TypedComplex.build are type-ordered
    return tuple(sorted(chamber[:i] + chamber[i + 1:]))


def _typed(cx: TypedComplex) -> list[tuple[str, ...]]:
    types = cx.type_of
    return [tuple(sorted(ch, key=lambda v: types[v])) for ch in cx.chambers]


def walls(cx: TypedComplex, i: int) -> list[Wall]:
    """Distinct i-cotype walls, sorted by vertex key."""
    cx.check_type(i)
    keys = {_wall_key(ch, i) for ch in _typed(cx)}
    return [Wall(k, i) for k in sorted(keys)]


@dataclass(frozen=True)
class BipartiteGraph:
    left: tuple[Hashable, ...]
    right: tuple[Hashable, ...]
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        nl, nr = len(self.left), len(self.right)
        for a, b in self.edges:
            if not (0 <= a < nl and 0 <= b < nr):
                raise ComplexError(f"edge ({a}, {b}) out of range")
        if len(set(self.edges)) != len(self.edges):
            raise ComplexError("parallel edges are not allowed")

    @classmethod
    def from_edges(cls, left: Sequence, right: Sequence,
                   edges: Iterable[tuple[int, int]]) -> "BipartiteGraph":
        return cls(tuple(left), tuple(right), tuple(sorted(set(map(tuple, edges)))))

    @cached_property
    def left_adj(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in self.left]
        for a, b in self.edges:
            adj[a].append(b)
        return tuple(tuple(x) for x in adj)

    @cached_property
    def right_adj(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in self.right]
        for a, b in self.edges:
            adj[b].append(a)
        return tuple(tuple(x) for x in adj)

    @property
    def left_degrees(self) -> list[int]:
        return [len(a) for a in self.left_adj]

    @property
    def right_degrees(self) -> list[int]:
        return [len(a) for a in self.right_adj]

    def biadjacency(self):
        """Dense 0/1 matrix, rows = left, columns = right."""
        import numpy as np

        m = np.zeros((len(self.left), len(self.right)))
        for a, b in self.edges:
            m[a, b] = 1.0
        return m

    def transpose(self) -> "BipartiteGraph":
        return BipartiteGraph.from_edges(self.right, self.left, ((b, a) for a, b in self.edges))

    def relabel(self, left_perm: Sequence[int], right_perm: Sequence[int]) -> "BipartiteGraph":
        """Graph with left vertex ``a`` moved to position ``left_perm[a]`` (same for right)."""
        left = [None] * len(self.left)
        right = [None] * len(self.right)
        for a, pa in enumerate(left_perm):
            left[pa] = self.left[a]
        for b, pb in enumerate(right_perm):
            right[pb] = self.right[b]
        return BipartiteGraph.from_edges(
            left, right, ((left_perm[a], right_perm[b]) for a, b in self.edges))


def induced_bipartite(cx: TypedComplex, i: int) -> BipartiteGraph:
    """B_i: type-i vertices against i-cotype walls, one edge per chamber."""
    cx.check_type(i)
    left = cx.classes[i]
    lidx = {v: k for k, v in enumerate(left)}
    ws = walls(cx, i)
    widx = {w.vertices: k for k, w in enumerate(ws)}
    edges = []
    for ch in _typed(cx):
        edges.append((lidx[ch[i]], widx[_wall_key(ch, i)]))
    return BipartiteGraph.from_edges(left, [w.vertices for w in ws], edges)


@dataclass(frozen=True)
class Irregular:
    """Witness that I-type faces lie in differing numbers of J-type faces."""

    face_a: tuple[str, ...]
    count_a: int
    face_b: tuple[str, ...]
    count_b: int


def type_regularity(cx: TypedComplex) -> dict[tuple[tuple[int, ...], tuple[int, ...]], int | Irregular]:
    """k_{I,J} for every I ⊆ J ⊆ {0..d}, or an :class:`Irregular` witness.

    Faces of type J are the projections of chambers onto the types in J.
    """
    chambers = _typed(cx)
    all_types = range(cx.d + 1)
    faces: dict[tuple[int, ...], set[tuple[str, ...]]] = {}
    for r in range(cx.d + 2):
        for J in itertools.combinations(all_types, r):
            faces[J] = {tuple(ch[t] for t in J) for ch in chambers}

    out: dict = {}
    for J, jfaces in faces.items():
        for r in range(len(J) + 1):
            for I in itertools.combinations(J, r):
                pos = [J.index(t) for t in I]
                counts: Counter = Counter(tuple(f[p] for p in pos) for f in jfaces)
                # every I-face is a sub-face of some J-face, so counts covers faces[I]
                vals = sorted(counts.items(), key=lambda kv: (kv[1], kv[0]))
                lo, hi = vals[0], vals[-1]
                if lo[1] == hi[1]:
                    out[(I, J)] = lo[1]
                else:
                    out[(I, J)] = Irregular(lo[0], lo[1], hi[0], hi[1])
    return out


def is_type_regular(cx: TypedComplex) -> bool:
    return not any(isinstance(v, Irregular) for v in type_regularity(cx).values())


def left_distances(g: BipartiteGraph, u: int) -> list[int | None]:
    """B-distances from left vertex ``u`` to every left vertex (None if unreachable)."""
    dist: list[int | None] = [None] * len(g.left)
    dist[u] = 0
    seen_right = [False] * len(g.right)
    queue = deque([u])
    while queue:
        a = queue.popleft()
        for b in g.left_adj[a]:
            if seen_right[b]:
                continue
            seen_right[b] = True
            for c in g.right_adj[b]:
                if dist[c] is None:
                    dist[c] = dist[a] + 2
                    queue.append(c)
    return dist


def bipartite_distance(g: BipartiteGraph, u: int, v: int) -> int | None:
    """Graph distance between two left vertices; None when disconnected."""
    n = len(g.left)
    if not (0 <= u < n and 0 <= v < n):
        raise IndexError(f"left index out of range (have {n} left vertices)")
    return left_distances(g, u)[v]


def left_components(g: BipartiteGraph) -> list[list[int]]:
    comp = [-1] * len(g.left)
    out = []
    for s in range(len(g.left)):
        if comp[s] >= 0:
            continue
        members = [k for k, dd in enumerate(left_distances(g, s)) if dd is not None]
        for k in members:
            comp[k] = len(out)
        out.append(members)
    return out


# -- JSON interchange ------------------------------------------------------

def complex_to_dict(cx: TypedComplex) -> dict:
    return {
        "d": cx.d,
        "vertices": [{"id": v, "type": t} for v, t in cx.vertices],
        "chambers": [list(ch) for ch in cx.chambers],
    }


def complex_from_dict(data: dict, *, check: bool = True) -> TypedComplex:
    try:
        d = data["d"]
        vertices = [(item["id"], item["type"]) for item in data["vertices"]]
        chambers = data["chambers"]
    except (KeyError, TypeError) as exc:
        raise ComplexError(f"malformed complex document: missing or bad field {exc}") from exc
    if not isinstance(d, int) or any(not isinstance(t, int) for _, t in vertices):
        raise ComplexError("'d' and vertex 'type' entries must be integers")
    cx = TypedComplex.build(d, vertices, chambers)
    return ensure_valid(cx) if check else cx


def load_complex(path: str | Path) -> TypedComplex:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ComplexError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        return complex_from_dict(data)
    except ComplexValidationError:
        raise
    except ComplexError as exc:
        raise ComplexError(f"{path}: {exc}") from exc


def dump_complex(cx: TypedComplex, path: str | Path) -> None:
    Path(path).write_text(json.dumps(complex_to_dict(cx), indent=1) + "\n", encoding="utf-8")

