"""Discrepancy of the partite hypergraph of a typed complex.

Disc(H) = max over W_i ⊆ V_i of | |E(W_0..W_d)|/|E| - prod |W_i|/|V_i| |.

Three routes: exact enumeration for small complexes, seeded hill climbing
for a certified lower bound, and the spectral upper bound d * max_i
lambda_tilde(B_i) valid for type-regular complexes.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .complex import TypedComplex, induced_bipartite, type_regularity, Irregular
from .spectral import lambda_tilde

DEFAULT_EXACT_CAP = 24


class DiscrepancyError(ValueError):
    pass


class CapExceeded(DiscrepancyError):
    pass


class IrregularComplexError(DiscrepancyError):
    pass


@dataclass(frozen=True)
class PartiteSelection:
    """One subset per vertex class; empty subsets are allowed."""

    subsets: tuple[frozenset, ...]

    @classmethod
    def of(cls, *subsets) -> "PartiteSelection":
        return cls(tuple(frozenset(s) for s in subsets))

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.subsets)

    def to_json(self) -> list[list[str]]:
        return [sorted(s) for s in self.subsets]


@dataclass(frozen=True)
class DiscrepancyResult:
    value: Fraction | float
    witness: PartiteSelection | None
    method: str
    details: dict = field(default_factory=dict, compare=False)


def _check_selection(cx: TypedComplex, sel: PartiteSelection) -> None:
    if len(sel.subsets) != cx.d + 1:
        raise DiscrepancyError(f"selection has {len(sel.subsets)} classes, complex has {cx.d + 1}")
    types = cx.type_of
    for i, s in enumerate(sel.subsets):
        for v in s:
            if types.get(v) != i:
                raise DiscrepancyError(f"vertex {v!r} is not of type {i}")


def restricted_edge_count(cx: TypedComplex, sel: PartiteSelection) -> int:
    """Number of chambers with a vertex in every selected subset."""
    _check_selection(cx, sel)
    picked = set().union(*sel.subsets)
    return sum(all(v in picked for v in ch) for ch in cx.chambers)


def deviation(cx: TypedComplex, sel: PartiteSelection) -> Fraction:
    """The quantity maximized in Disc(H), evaluated exactly at one selection."""
    count = restricted_edge_count(cx, sel)
    prod = Fraction(1)
    for s, cl in zip(sel.subsets, cx.classes):
        prod *= Fraction(len(s), len(cl))
    return abs(Fraction(count, cx.num_chambers) - prod)


def _chamber_index(cx: TypedComplex):
    """Chambers as an (E, d+1) array of class-local vertex indices, column i = type i."""
    local = {}
    for cl in cx.classes:
        for k, v in enumerate(cl):
            local[v] = k
    types = cx.type_of
    rows = []
    for ch in cx.chambers:
        row = [0] * (cx.d + 1)
        for v in ch:
            row[types[v]] = local[v]
        rows.append(row)
    return np.asarray(rows, dtype=np.int64).reshape(len(rows), cx.d + 1)


def _check_automorphisms(cx: TypedComplex, perms) -> list[dict[str, str]]:
    types = cx.type_of
    chambers = {frozenset(ch) for ch in cx.chambers}
    out = []
    for perm in perms:
        perm = dict(perm)
        if sorted(perm) != sorted(types) or sorted(perm.values()) != sorted(types):
            raise DiscrepancyError("automorphism is not a permutation of the vertex set")
        if any(types[perm[v]] != t for v, t in types.items()):
            raise DiscrepancyError("automorphism does not preserve types")
        if any(frozenset(perm[v] for v in ch) not in chambers for ch in cx.chambers):
            raise DiscrepancyError("automorphism does not map chambers to chambers")
        out.append(perm)
    return out


def _subset_orbits(cl: tuple[str, ...], perms: list[dict[str, str]]) -> list[int]:
    """One representative bitmask per orbit of subsets of ``cl`` under the permutations."""
    size = len(cl)
    pos = {v: k for k, v in enumerate(cl)}
    masks = np.arange(1 << size, dtype=np.int64)
    parent = np.arange(1 << size, dtype=np.int64)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for perm in perms:
        image = np.zeros_like(masks)
        for k, v in enumerate(cl):
            image |= ((masks >> k) & 1) << pos[perm[v]]
        for a, b in zip(masks.tolist(), image.tolist()):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    return sorted({find(int(m)) for m in masks})


def discrepancy_exact(cx: TypedComplex, cap: int = DEFAULT_EXACT_CAP,
                      automorphisms=None) -> DiscrepancyResult:
    """Exact Disc(H) with an attaining selection.

    Selections of every class but the largest are enumerated as bitmasks; for
    each, the best subset of the remaining class is read off directly, since
    the deviation is a sum of per-vertex terms there (take all positive terms
    or all negative ones).

    ``automorphisms`` (type-preserving vertex permutations, e.g. generators of
    a symmetry group) let one further class be enumerated only up to orbits;
    the cap then applies to the vertices still enumerated bit by bit.
    """
    sizes = [len(c) for c in cx.classes]
    last = max(range(cx.d + 1), key=lambda i: (sizes[i], -i))
    others = [i for i in range(cx.d + 1) if i != last]
    perms = _check_automorphisms(cx, automorphisms) if automorphisms else []
    orbit_class = None
    if perms:
        orbit_class = max(others, key=lambda i: (sizes[i], -i))
        others = [i for i in others if i != orbit_class]
        enumerated = sum(sizes[i] for i in others) + sizes[last]
    else:
        enumerated = sum(sizes)
    if enumerated > cap:
        raise CapExceeded(
            f"{enumerated} vertices exceed the exact enumeration cap {cap}; "
            "use discrepancy_local_search instead")

    ch = _chamber_index(cx)
    if orbit_class is None:
        best_score, mask, chosen = _scan(cx, ch, sizes, last, others, None)
        fixed = None
    else:
        best_score, best = -1, None
        for rep in _subset_orbits(cx.classes[orbit_class], perms):
            score, mask, chosen = _scan(cx, ch, sizes, last, others, (orbit_class, rep))
            if score > best_score:
                best_score, best = score, (mask, chosen, rep)
        mask, chosen, fixed = best

    offsets, off = {}, 0
    for i in others:
        offsets[i] = off
        off += sizes[i]
    subsets = []
    for i in range(cx.d + 1):
        cl = cx.classes[i]
        if i == last:
            subsets.append({cl[k] for k in range(sizes[i]) if chosen[k]})
        elif i == orbit_class:
            subsets.append({cl[k] for k in range(sizes[i]) if fixed >> k & 1})
        else:
            subsets.append({cl[k] for k in range(sizes[i]) if mask >> (offsets[i] + k) & 1})
    witness = PartiteSelection.of(*subsets)
    value = Fraction(best_score, cx.num_chambers * math.prod(sizes))
    return DiscrepancyResult(value, witness, "exact", {"orbit_class": orbit_class})


def _scan(cx, ch, sizes, last, others, fixed):
    """Best scaled score over bitmask selections of ``others``; ``fixed`` pins one class."""
    E = cx.num_chambers
    total = math.prod(sizes)            # scale: value = |score| / (E * total)
    offsets, off = {}, 0
    for i in others:
        offsets[i] = off
        off += sizes[i]
    nbits = off
    live = np.ones(E, dtype=bool)
    fixed_size = 1
    if fixed is not None:
        cls, rep = fixed
        live = ((rep >> ch[:, cls]) & 1).astype(bool)
        fixed_size = bin(rep).count("1")
    ch = ch[live]                       # chambers missing the pinned subset never count
    cmask = np.zeros(len(ch), dtype=np.int64)
    for i in others:
        cmask |= np.left_shift(np.int64(1), ch[:, i] + offsets[i])
    onehot = np.zeros((len(ch), sizes[last]), dtype=np.int64)
    onehot[np.arange(len(ch)), ch[:, last]] = 1
    class_masks = {i: ((1 << sizes[i]) - 1) << offsets[i] for i in others}

    best_score, best = -1, None
    nmask = 1 << nbits
    batch = max(1, min(nmask, (1 << 22) // max(len(ch), 1)))
    for start in range(0, nmask, batch):
        masks = np.arange(start, min(start + batch, nmask), dtype=np.int64)
        inc = (masks[:, None] & cmask[None, :]) == cmask[None, :]
        cv = inc.astype(np.int64) @ onehot                     # per last-class vertex
        wprod = np.full(len(masks), fixed_size, dtype=np.int64)
        for i in others:
            wprod *= _popcount((masks & class_masks[i]) >> offsets[i])
        terms = cv * total - (E * wprod)[:, None]             # contribution of each v
        pos = np.where(terms > 0, terms, 0).sum(axis=1)
        neg = -np.where(terms < 0, terms, 0).sum(axis=1)
        score = np.maximum(pos, neg)
        k = int(np.argmax(score))
        if score[k] > best_score:
            best_score = int(score[k])
            sign = 1 if pos[k] >= neg[k] else -1
            best = (int(masks[k]), terms[k] * sign > 0)
    return best_score, best[0], best[1]


def _popcount(x: np.ndarray) -> np.ndarray:
    x = x.copy()
    out = np.zeros_like(x)
    while np.any(x):
        out += x & 1
        x >>= 1
    return out


def _climb(cx: TypedComplex, ids: list[str], rng: np.random.Generator):
    """Best-improvement toggling from a random start; returns (scaled score, selected flags)."""
    types = cx.type_of
    pos = {v: k for k, v in enumerate(ids)}
    vtype = np.array([types[v] for v in ids])
    sizes = [len(c) for c in cx.classes]
    E = cx.num_chambers
    total = math.prod(sizes)
    inc = np.array([[pos[v] for v in ch] for ch in cx.chambers], dtype=np.int64)
    big = E * total >= 2**62
    dtype = object if big else np.int64
    sel = rng.random(len(ids)) < 0.5

    def scores(sel):
        nsel = sel[inc].sum(axis=1)
        count = int((nsel == cx.d + 1).sum())
        w = np.bincount(vtype[sel], minlength=cx.d + 1).astype(dtype)
        full = np.bincount(inc[nsel == cx.d + 1].ravel(), minlength=len(ids))
        near = np.bincount(inc[nsel == cx.d].ravel(), minlength=len(ids))
        # count after toggling each vertex
        new_count = np.where(sel, count - full, count + near).astype(dtype)
        prods = []
        for v in range(len(ids)):
            ww = list(w)
            ww[vtype[v]] += -1 if sel[v] else 1
            prods.append(math.prod(int(x) for x in ww))
        new_prod = np.array(prods, dtype=dtype)
        cur = abs(count * total - E * math.prod(int(x) for x in w))
        return cur, np.abs(new_count * total - E * new_prod)

    cur, cand = scores(sel)
    while True:
        k = int(np.argmax(cand))             # first maximum = lowest vertex id
        if cand[k] <= cur:
            return cur, sel
        sel = sel.copy()
        sel[k] = not sel[k]
        cur, cand = scores(sel)


def discrepancy_local_search(cx: TypedComplex, restarts: int = 20, seed: int = 0,
                             threads: int = 1) -> DiscrepancyResult:
    """Lower bound on Disc(H) by hill climbing over single-vertex toggles.

    Each restart gets its own child seed, so the outcome does not depend on
    ``threads``. The best witness is re-evaluated exactly.
    """
    ids = sorted(cx.type_of)
    children = np.random.SeedSequence(seed).spawn(max(restarts, 1))
    run = lambda ss: _climb(cx, ids, np.random.default_rng(ss))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(run, children))
    else:
        results = [run(ss) for ss in children]
    best_k = max(range(len(results)), key=lambda k: (results[k][0], -k))
    _, flags = results[best_k]
    types = cx.type_of
    subsets = [set() for _ in range(cx.d + 1)]
    for v, on in zip(ids, flags):
        if on:
            subsets[types[v]].add(v)
    witness = PartiteSelection.of(*subsets)
    value = deviation(cx, witness)
    return DiscrepancyResult(value, witness, "local-search",
                             {"restarts": restarts, "seed": seed, "best_restart": best_k})


@dataclass(frozen=True)
class SpectralBound:
    value: float
    per_type: tuple[float, ...]
    d: int

    @property
    def is_zero(self) -> bool:
        return self.value == 0


def discrepancy_spectral_bound(cx: TypedComplex, mode: str = "dense", **kw) -> SpectralBound:
    """``d * max_i lambda_tilde(B_i)``; refuses complexes that are not type-regular."""
    reg = type_regularity(cx)
    bad = [(I, J, w) for (I, J), w in reg.items() if isinstance(w, Irregular)]
    if bad:
        I, J, w = bad[0]
        raise IrregularComplexError(
            f"complex is not type-regular ({len(bad)} irregular type pairs), e.g. I={I}, J={J}: "
            f"face {w.face_a} lies in {w.count_a} faces, {w.face_b} in {w.count_b}; "
            "the spectral bound does not apply")
    per = tuple(lambda_tilde(induced_bipartite(cx, i), mode=mode, **kw) for i in range(cx.d + 1))
    return SpectralBound(cx.d * max(per), per, cx.d)
