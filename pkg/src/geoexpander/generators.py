"""Test families: complete partite complexes, flag complexes over F_q, random partite hypergraphs."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .complex import ComplexError, TypedComplex

DEFAULT_VECTOR_CAP = 10**6


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def prime_power_base(n: int) -> int | None:
    """Return p if n = p^k for a prime p, else None."""
    if n < 2:
        return None
    p = next(f for f in range(2, n + 1) if n % f == 0)
    while n % p == 0:
        n //= p
    return p if n == 1 else None


class PrimeField:
    """Arithmetic in F_q for prime q."""

    def __init__(self, q: int):
        if not is_prime(q):
            raise ValueError(f"q={q} is not prime (prime powers are unsupported)")
        self.q = q

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.q

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.q

    def neg(self, a: int) -> int:
        return -a % self.q

    def mul(self, a: int, b: int) -> int:
        return a * b % self.q

    def inv(self, a: int) -> int:
        if a % self.q == 0:
            raise ZeroDivisionError("inverse of zero in F_q")
        return pow(a, -1, self.q)

    def __repr__(self):
        return f"PrimeField({self.q})"


def gf_arith(q: int) -> PrimeField:
    return PrimeField(q)


def gaussian_binomial(n: int, k: int, q: int) -> int:
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def complete_partite(sizes: list[int]) -> TypedComplex:
    """All transversals of classes with the given sizes; vertex ``t{i}_{j}``."""
    if len(sizes) < 2:
        raise ComplexError("need at least two classes (d >= 1)")
    if any(s < 1 for s in sizes):
        raise ComplexError(f"every class must be nonempty, got sizes {list(sizes)}")
    classes = [[f"t{i}_{j}" for j in range(s)] for i, s in enumerate(sizes)]
    vertices = [(v, i) for i, cl in enumerate(classes) for v in cl]
    return TypedComplex.build(len(sizes) - 1, vertices, itertools.product(*classes))


def random_partite(sizes: list[int], p: Fraction | float, seed: int
                   ) -> tuple[TypedComplex, list[str]]:
    """Keep each transversal independently with probability ``p``.

    Transversals are visited in lexicographic order, one uniform draw each, so
    the result is a pure function of ``(sizes, p, seed)``. Vertices left in no
    chamber are dropped and returned as the second element.
    """
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise ValueError(f"probability {p} outside [0, 1]")
    if any(s < 1 for s in sizes):
        raise ComplexError(f"every class must be nonempty, got sizes {list(sizes)}")
    rng = np.random.default_rng(seed)
    classes = [[f"t{i}_{j}" for j in range(s)] for i, s in enumerate(sizes)]
    transversals = list(itertools.product(*classes))
    draws = rng.random(len(transversals))
    pf = float(p)
    kept = [tr for tr, u in zip(transversals, draws) if p == 1 or (p > 0 and u < pf)]
    used = {v for tr in kept for v in tr}
    vertices = [(v, i) for i, cl in enumerate(classes) for v in cl if v in used]
    pruned = [v for cl in classes for v in cl if v not in used]
    return TypedComplex.build(len(sizes) - 1, vertices, kept), pruned


@dataclass(frozen=True)
class FlagComplexSpec:
    q: int
    d: int
    vector_cap: int = DEFAULT_VECTOR_CAP

    @property
    def ambient(self) -> int:
        return self.d + 2


def _rref(rows: list[list[int]], F: PrimeField) -> tuple[tuple[int, ...], ...]:
    """Reduced row-echelon form with zero rows removed."""
    m = [list(r) for r in rows]
    q = F.q
    ncols = len(m[0]) if m else 0
    out_rows = 0
    for c in range(ncols):
        piv = next((r for r in range(out_rows, len(m)) if m[r][c] % q), None)
        if piv is None:
            continue
        m[out_rows], m[piv] = m[piv], m[out_rows]
        inv = F.inv(m[out_rows][c])
        m[out_rows] = [x * inv % q for x in m[out_rows]]
        for r in range(len(m)):
            if r != out_rows and m[r][c]:
                f = m[r][c]
                m[r] = [(x - f * y) % q for x, y in zip(m[r], m[out_rows])]
        out_rows += 1
    return tuple(tuple(r) for r in m[:out_rows])


def _subspaces(n: int, k: int, F: PrimeField):
    """Every k-dim subspace of F_q^n as its RREF basis, in sorted order."""
    q = F.q
    found = []
    for pivots in itertools.combinations(range(n), k):
        free = [(r, c) for r in range(k) for c in range(pivots[r] + 1, n) if c not in pivots]
        for vals in itertools.product(range(q), repeat=len(free)):
            m = [[0] * n for _ in range(k)]
            for r, c in enumerate(pivots):
                m[r][c] = 1
            for (r, c), x in zip(free, vals):
                m[r][c] = x
            found.append(tuple(tuple(r) for r in m))
    return sorted(found)


def _span_key(basis, vec, F: PrimeField):
    return _rref([list(r) for r in basis] + [list(vec)], F)


def _vertex_id(basis, q: int) -> str:
    sep = "" if q <= 10 else "."
    return f"{len(basis) - 1}:" + "|".join(sep.join(map(str, r)) for r in basis)


def flag_complex(spec: FlagComplexSpec) -> TypedComplex:
    """Order complex of proper nonzero subspaces of F_q^(d+2).

    A subspace of dimension k+1 has type k; chambers are complete flags.
    """
    q, d = spec.q, spec.d
    if d < 1:
        raise ComplexError("flag complex needs d >= 1")
    F = PrimeField(q)
    n = spec.ambient
    if q ** n > spec.vector_cap:
        raise OverflowError(f"q^(d+2) = {q ** n} exceeds the enumeration cap {spec.vector_cap}")

    levels = [_subspaces(n, k, F) for k in range(1, n)]
    vectors = list(itertools.product(range(q), repeat=n))
    # up[k][U] = subspaces of dimension k+2 containing the (k+1)-dim U
    up: list[dict] = []
    for k in range(len(levels) - 1):
        nxt = set(levels[k + 1])
        sup = {}
        for U in levels[k]:
            covers = {_span_key(U, v, F) for v in vectors}
            sup[U] = sorted(W for W in covers if len(W) == len(U) + 1)
            assert all(W in nxt for W in sup[U])
        up.append(sup)

    chambers = []

    def extend(chain):
        k = len(chain) - 1
        if k == len(up):
            chambers.append(tuple(_vertex_id(b, q) for b in chain))
            return
        for W in up[k][chain[-1]]:
            extend(chain + [W])

    for P in levels[0]:
        extend([P])

    vertices = [(_vertex_id(b, q), k) for k, level in enumerate(levels) for b in level]
    return TypedComplex.build(d, vertices, chambers)


def _primitive_root(q: int) -> int:
    for g in range(1, q):
        if len({pow(g, e, q) for e in range(1, q)}) == q - 1:
            return g
    raise ValueError(f"no primitive root mod {q}")


def flag_automorphisms(spec: FlagComplexSpec, cx: TypedComplex | None = None
                       ) -> list[dict[str, str]]:
    """Vertex permutations induced by a generating set of GL(d+2, q).

    Elementary transvections I + E_ij together with diag(g, 1, ..., 1) for a
    primitive root g generate the group; each acts on subspaces by right
    multiplication of basis rows and preserves types and flags.
    """
    cx = cx if cx is not None else flag_complex(spec)
    F = PrimeField(spec.q)
    n = spec.ambient
    mats = []
    for i in range(n):
        for j in range(n):
            if i != j:
                m = [[int(r == c) for c in range(n)] for r in range(n)]
                m[i][j] = 1
                mats.append(m)
    if spec.q > 2:
        m = [[int(r == c) for c in range(n)] for r in range(n)]
        m[0][0] = _primitive_root(spec.q)
        mats.append(m)

    def parse(vid: str):
        rows = vid.split(":", 1)[1].split("|")
        if spec.q > 10:
            return [[int(x) for x in r.split(".")] for r in rows]
        return [[int(x) for x in r] for r in rows]

    bases = {v: parse(v) for v, _ in cx.vertices}
    perms = []
    for m in mats:
        perm = {}
        for v, rows in bases.items():
            image = [[sum(r[k] * m[k][c] for k in range(n)) % spec.q for c in range(n)]
                     for r in rows]
            perm[v] = _vertex_id(_rref(image, F), spec.q)
        perms.append(perm)
    return perms
