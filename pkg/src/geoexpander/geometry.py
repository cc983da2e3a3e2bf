"""Embedded chambers in R^d: point-in-simplex predicates and coverage counts.

Coordinates are exact rationals by default. Simplices are closed: a point on
the boundary of an embedded chamber counts as covered.
"""

from __future__ import annotations

import enum
import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .complex import TypedComplex

Point = tuple  # of Fraction (exact) or float


class GeometryError(ValueError):
    pass


class Location(enum.Enum):
    INSIDE = "inside"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class SimplexTest:
    location: Location
    degenerate: bool = False

    @property
    def covered(self) -> bool:
        return self.location is not Location.OUTSIDE


def to_fraction(x) -> Fraction:
    """Exact value of a decimal string, int, float or Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise GeometryError("booleans are not coordinates")
    if isinstance(x, (int, float)):
        return Fraction(x)
    try:
        return Fraction(str(x).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise GeometryError(f"cannot parse coordinate {x!r}") from exc


def det_exact(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    m = [list(r) for r in rows]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, n):
            if m[r][c]:
                f = m[r][c] / m[c][c]
                m[r] = [a - f * b for a, b in zip(m[r], m[c])]
    return det


def orientation(simplex: Sequence[Point]) -> Fraction:
    """det[v_1 - v_0, ..., v_d - v_0] (exact)."""
    v0 = simplex[0]
    return det_exact([[a - b for a, b in zip(v, v0)] for v in simplex[1:]])


def _solve_exact(cols: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]):
    """Solve sum_j x_j cols[j] = rhs; None if inconsistent. Columns must be independent."""
    n, m = len(rhs), len(cols)
    aug = [[cols[j][i] for j in range(m)] + [rhs[i]] for i in range(n)]
    row = 0
    pivots = []
    for c in range(m):
        piv = next((r for r in range(row, n) if aug[r][c] != 0), None)
        if piv is None:
            return None
        aug[row], aug[piv] = aug[piv], aug[row]
        inv = 1 / aug[row][c]
        aug[row] = [x * inv for x in aug[row]]
        for r in range(n):
            if r != row and aug[r][c]:
                f = aug[r][c]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[row])]
        pivots.append(c)
        row += 1
    if any(aug[r][m] != 0 for r in range(row, n)):
        return None
    return [aug[k][m] for k in range(m)]


def _rank(vectors) -> int:
    m = [list(v) for v in vectors]
    rank = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((r for r in range(rank, len(m)) if m[r][c] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for r in range(rank + 1, len(m)):
            if m[r][c]:
                f = m[r][c] / m[rank][c]
                m[r] = [a - f * b for a, b in zip(m[r], m[rank])]
        rank += 1
    return rank


def in_hull_exact(p: Point, pts: Sequence[Point]) -> bool:
    """Closed convex hull membership for any (possibly degenerate) point set.

    By Carathéodory it suffices to try affinely independent subsets.
    """
    for r in range(1, len(pts) + 1):
        for sub in itertools.combinations(pts, r):
            base = sub[0]
            cols = [[a - b for a, b in zip(v, base)] for v in sub[1:]]
            if cols and _rank(cols) < len(cols):
                continue
            x = _solve_exact(cols, [a - b for a, b in zip(p, base)]) if cols else (
                [] if all(a == b for a, b in zip(p, base)) else None)
            if x is not None and all(t >= 0 for t in x) and sum(x) <= 1:
                return True
    return False


def point_in_simplex(p: Point, simplex: Sequence[Point], closed: bool = True,
                     exact: bool = True, eps: float = 1e-12) -> SimplexTest:
    """Classify ``p`` against the simplex spanned by d+1 points of R^d.

    Exact mode compares signs of the orientation determinants obtained by
    swapping ``p`` in for each vertex. Float mode solves for barycentric
    coordinates and treats any within ``eps`` of zero as zero. A degenerate
    simplex is flat, so nothing is strictly inside: points on it are
    BOUNDARY when ``closed`` and OUTSIDE otherwise.
    """
    d = len(p)
    if len(simplex) != d + 1 or any(len(v) != d for v in simplex):
        raise GeometryError(f"need {d + 1} points of dimension {d}")
    if not exact:
        return _point_in_simplex_float(p, simplex, closed, eps)
    p = tuple(to_fraction(x) for x in p)
    simplex = [tuple(to_fraction(x) for x in v) for v in simplex]
    D = orientation(simplex)
    if D == 0:
        on = closed and in_hull_exact(p, simplex)
        return SimplexTest(Location.BOUNDARY if on else Location.OUTSIDE, True)
    sgn = 1 if D > 0 else -1
    signs = []
    for j in range(d + 1):
        swapped = list(simplex)
        swapped[j] = p
        s = orientation(swapped) * sgn
        signs.append((s > 0) - (s < 0))
    return SimplexTest(_classify(signs))


def _classify(signs) -> Location:
    if any(s < 0 for s in signs):
        return Location.OUTSIDE
    if all(s > 0 for s in signs):
        return Location.INSIDE
    return Location.BOUNDARY


def _point_in_simplex_float(p, simplex, closed, eps) -> SimplexTest:
    v = np.asarray(simplex, dtype=float)
    T = (v[1:] - v[0]).T
    scale = max(1.0, float(np.abs(T).max()))
    if abs(np.linalg.det(T)) <= eps * scale ** len(p):
        on = closed and in_hull_exact(tuple(map(Fraction, map(float, p))),
                                      [tuple(map(Fraction, map(float, x))) for x in simplex])
        return SimplexTest(Location.BOUNDARY if on else Location.OUTSIDE, True)
    lam = np.linalg.solve(T, np.asarray(p, dtype=float) - v[0])
    bary = np.concatenate([[1.0 - lam.sum()], lam])
    signs = [0 if abs(b) <= eps else (1 if b > 0 else -1) for b in bary]
    return SimplexTest(_classify(signs))


# -- embeddings ------------------------------------------------------------

@dataclass(frozen=True)
class Embedding:
    d: int
    points: dict
    exact: bool = True

    @classmethod
    def from_mapping(cls, d: int, points: dict, exact: bool = True) -> "Embedding":
        conv = to_fraction if exact else float
        pts = {}
        for v, xs in points.items():
            xs = list(xs)
            if len(xs) != d:
                raise GeometryError(f"point for {v!r} has {len(xs)} coordinates, expected {d}")
            pts[str(v)] = tuple(conv(x) for x in xs)
        return cls(d, pts, exact)

    def check(self, cx: TypedComplex) -> None:
        if self.d != cx.d:
            raise GeometryError(f"embedding is in R^{self.d}, complex has dimension {cx.d}")
        missing = [v for v, _ in cx.vertices if v not in self.points]
        if missing:
            raise GeometryError(f"vertices without an image: {missing[:10]}")
        images = [self.points[v] for v, _ in cx.vertices]
        if len(set(images)) != len(images):
            raise GeometryError("embedding is not injective on vertices")

    def simplex(self, chamber: Sequence[str]) -> list[Point]:
        return [self.points[v] for v in chamber]


def embedding_to_dict(emb: Embedding) -> dict:
    return {"d": emb.d, "points": {v: [str(x) for x in xs] for v, xs in emb.points.items()}}


def embedding_from_dict(data: dict, exact: bool = True) -> Embedding:
    try:
        return Embedding.from_mapping(int(data["d"]), data["points"], exact)
    except (KeyError, TypeError) as exc:
        raise GeometryError(f"malformed embedding document: {exc}") from exc


def load_embedding(path: str | Path, exact: bool = True) -> Embedding:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GeometryError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return embedding_from_dict(data, exact)


def random_embedding(cx: TypedComplex, seed: int, digits: int = 6) -> Embedding:
    """Vertices i.i.d. uniform on [0,1]^d, rounded to ``digits`` decimals (exact)."""
    rng = np.random.default_rng(seed)
    scale = 10 ** digits
    while True:
        grid = rng.integers(0, scale + 1, size=(len(cx.vertices), cx.d))
        if len({tuple(r) for r in grid.tolist()}) == len(cx.vertices):
            break
    pts = {v: tuple(Fraction(int(x), scale) for x in row)
           for (v, _), row in zip(cx.vertices, grid)}
    return Embedding(cx.d, pts, True)


# -- coverage ----------------------------------------------------------------

@dataclass(frozen=True)
class CoverageResult:
    point: Point
    count: int
    fraction: Fraction
    witnesses: tuple[int, ...] = ()
    degenerate: tuple[int, ...] = ()

    def recount(self) -> int:
        return len(set(self.witnesses))


def coverage_at(cx: TypedComplex, emb: Embedding, p: Point, exact: bool | None = None
                ) -> CoverageResult:
    """Chambers whose closed embedded simplex contains ``p``."""
    exact = emb.exact if exact is None else exact
    wit, degen = [], []
    for idx, ch in enumerate(cx.chambers):
        t = point_in_simplex(p, emb.simplex(ch), closed=True, exact=exact)
        if t.degenerate:
            degen.append(idx)
        if t.covered:
            wit.append(idx)
    E = cx.num_chambers
    return CoverageResult(tuple(p), len(wit), Fraction(len(wit), E), tuple(wit), tuple(degen))


def _common_scale(points: Iterable[Point]) -> int:
    L = 1
    for p in points:
        for x in p:
            L = math.lcm(L, x.denominator)
    return L


def _candidates_2d(segments, verts_int):
    """Homogeneous integer candidates (X, Y, W), W > 0."""
    cands = {(x, y, 1) for x, y in verts_int}
    for (a, b), (c, e) in itertools.combinations(segments, 2):
        pt = _segment_intersection(a, b, c, e)
        if pt is not None:
            cands.add(pt)
    return cands


def _segment_intersection(a, b, c, e):
    """Single intersection point of closed segments ab and ce, homogeneous; None otherwise.

    Collinear overlaps return None: their extreme points are segment endpoints,
    which are candidates already.
    """
    rx, ry = b[0] - a[0], b[1] - a[1]
    sx, sy = e[0] - c[0], e[1] - c[1]
    den = rx * sy - ry * sx
    if den == 0:
        return None
    qpx, qpy = c[0] - a[0], c[1] - a[1]
    tn = qpx * sy - qpy * sx          # t = tn / den along ab
    un = qpx * ry - qpy * rx          # u = un / den along ce
    if den < 0:
        den, tn, un = -den, -tn, -un
    if not (0 <= tn <= den and 0 <= un <= den):
        return None
    X = a[0] * den + tn * rx
    Y = a[1] * den + tn * ry
    g = math.gcd(math.gcd(X, Y), den)
    return (X // g, Y // g, den // g)


def _normalize(pt):
    X, Y, W = pt
    return (Fraction(X, W), Fraction(Y, W))


def overlap_search_2d(cx: TypedComplex, emb: Embedding,
                      extra_candidates: Iterable[Point] = ()) -> CoverageResult:
    """Best covered point for a planar embedding of a 2-complex.

    Candidates: embedded vertices, pairwise intersections of embedded edges,
    triangle centroids and any ``extra_candidates``. For closed triangles this
    set attains the true maximum: the points covered by a fixed family form
    a convex polygon whose corners are vertices or edge crossings. Every
    comparison is exact; ties go to the lexicographically smallest point.
    """
    if cx.d != 2 or emb.d != 2:
        raise GeometryError("overlap_search_2d needs a 2-dimensional complex and embedding")
    emb.check(cx)
    if not emb.exact:
        emb = Embedding.from_mapping(2, emb.points, exact=True)
    L = _common_scale(emb.points.values())
    P = {v: (int(x * L), int(y * L)) for v, (x, y) in emb.points.items()}
    tris = [tuple(P[v] for v in ch) for ch in cx.chambers]
    segs = sorted({tuple(sorted((P[u], P[w]))) for ch in cx.chambers
                   for u, w in itertools.combinations(ch, 2)})
    cands = _candidates_2d(segs, P.values())
    for t in tris:
        cands.add((t[0][0] + t[1][0] + t[2][0], t[0][1] + t[1][1] + t[2][1], 3))
    for q in extra_candidates:
        fx, fy = to_fraction(q[0]) * L, to_fraction(q[1]) * L
        W = math.lcm(fx.denominator, fy.denominator)
        cands.add((int(fx * W), int(fy * W), W))
    cands = sorted(cands, key=_normalize)
    counts, degenerate = _count_2d(tris, cands)
    best = max(range(len(cands)), key=lambda k: (counts[k], -k))
    pt = tuple(c / L for c in _normalize(cands[best]))
    res = coverage_at(cx, emb, pt, exact=True)
    assert res.count == counts[best]
    return res


def _count_2d(tris, cands):
    """Closed-triangle coverage count at each homogeneous candidate, exact.

    A float pass settles clear-cut signs; only near-zero ones are redone in
    integers.
    """
    lines, degenerate = [], []
    for idx, (a, b, c) in enumerate(tris):
        D = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if D == 0:
            degenerate.append(idx)
            continue
        s = 1 if D > 0 else -1
        for u, w in ((a, b), (b, c), (c, a)):
            A = -(w[1] - u[1]) * s
            B = (w[0] - u[0]) * s
            C = ((w[1] - u[1]) * u[0] - (w[0] - u[0]) * u[1]) * s
            lines.append((idx, A, B, C))
    ntri = len(tris)
    counts = np.zeros(len(cands), dtype=np.int64)
    if lines:
        idx = np.array([l[0] for l in lines])
        A = np.array([float(l[1]) for l in lines])
        B = np.array([float(l[2]) for l in lines])
        C = np.array([float(l[3]) for l in lines])
        xs = np.array([X / W for X, Y, W in cands])
        ys = np.array([Y / W for X, Y, W in cands])
        val = xs[:, None] * A[None, :] + ys[:, None] * B[None, :] + C[None, :]
        mag = np.abs(xs[:, None] * A[None, :]) + np.abs(ys[:, None] * B[None, :]) + np.abs(C)[None, :]
        sure_pos = val > 1e-9 * mag
        sure_neg = val < -1e-9 * mag
        unsure = ~(sure_pos | sure_neg)
        for k, j in zip(*np.nonzero(unsure)):
            X, Y, W = cands[k]
            _, a_, b_, c_ = lines[j]
            v = a_ * X + b_ * Y + c_ * W
            sure_pos[k, j] = v >= 0
            sure_neg[k, j] = v < 0
        outside = np.zeros((len(cands), ntri), dtype=bool)
        for j in range(len(lines)):
            outside[:, idx[j]] |= sure_neg[:, j]
        live = np.ones(ntri, dtype=bool)
        live[degenerate] = False
        counts = (~outside[:, live]).sum(axis=1)
    counts = counts.astype(np.int64)
    for t in degenerate:
        a, b, c = (tuple(Fraction(x) for x in v) for v in tris[t])
        for k, (X, Y, W) in enumerate(cands):
            if in_hull_exact((Fraction(X, W), Fraction(Y, W)), [a, b, c]):
                counts[k] += 1
    return counts.tolist(), degenerate


def overlap_monte_carlo(cx: TypedComplex, emb: Embedding, samples: int, seed: int,
                        extra_candidates: Iterable[Point] = ()) -> CoverageResult:
    """Best coverage over seeded uniform samples in the bounding box plus chamber centroids.

    Samples are scored in floating point; the winner is recounted exactly and
    that exact count is returned.
    """
    emb.check(cx)
    d = cx.d
    exact_pts = {v: tuple(to_fraction(x) for x in xs) for v, xs in emb.points.items()}
    cands: list[Point] = []
    for ch in cx.chambers:
        vs = [exact_pts[v] for v in ch]
        cands.append(tuple(sum(c) / (d + 1) for c in zip(*vs)))
    cands.extend(tuple(to_fraction(x) for x in q) for q in extra_candidates)
    coords = np.array([[float(x) for x in p] for p in exact_pts.values()])
    lo, hi = coords.min(axis=0), coords.max(axis=0)
    rng = np.random.default_rng(seed)
    if samples > 0:
        draws = lo + (hi - lo) * rng.random((samples, d))
        cands.extend(tuple(Fraction(float(x)) for x in row) for row in draws)
    pts = np.array([[float(x) for x in p] for p in cands])

    counts = np.zeros(len(cands), dtype=np.int64)
    for ch in cx.chambers:
        v = np.array([[float(x) for x in exact_pts[u]] for u in ch])
        T = (v[1:] - v[0]).T
        if abs(np.linalg.det(T)) < 1e-15:
            continue                  # flat chamber: measure zero, skipped in sampling
        lam = np.linalg.solve(T, (pts - v[0]).T).T
        bary = np.column_stack([1.0 - lam.sum(axis=1), lam])
        counts += (bary >= -1e-12).all(axis=1)
    top = counts.max()
    best = min((k for k in range(len(cands)) if counts[k] == top), key=lambda k: cands[k])
    return coverage_at(cx, Embedding(d, exact_pts, True), cands[best], exact=True)
