"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (the lines are repeated in
the terminal summary) or directly with ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import random
import statistics
import sys
import tempfile
import time
import warnings
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from naive import naive_discrepancy  # noqa: E402
from oracles import classify_oracle  # noqa: E402
from test_bounds import log_oracle_q0, oracle_max_order  # noqa: E402

from geoexpander.bounds import (certify_overlap, coxeter_max_order, lambda_upper_bound,  # noqa: E402
                                m_constant, main_constants, xi_pgl2)
from geoexpander.cli import run  # noqa: E402
from geoexpander.complex import BipartiteGraph, TypedComplex, induced_bipartite, is_type_regular  # noqa: E402
from geoexpander.discrepancy import (discrepancy_exact, discrepancy_local_search,  # noqa: E402
                                     discrepancy_spectral_bound)
from geoexpander.generators import (FlagComplexSpec, complete_partite, flag_automorphisms,  # noqa: E402
                                    flag_complex, random_partite)
from geoexpander.geometry import (Embedding, coverage_at, overlap_search_2d,  # noqa: E402
                                  point_in_simplex, random_embedding)
from geoexpander.spectral import (DisconnectedWarning, lambda_tilde, walk_decomposition)  # noqa: E402

RESULTS: dict[int, str] = {}


def record(n: int, ok: bool, detail: str) -> bool:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n:2d}: {detail}"
    RESULTS[n] = line
    print(line)
    return ok


def quiet_lambda(g, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DisconnectedWarning)
        return lambda_tilde(g, **kw)


# -- shared instances ---------------------------------------------------------

def random_instances(count: int = 60, seed: int = 20261016) -> list[TypedComplex]:
    rng = random.Random(seed)
    out = []
    k = 0
    while len(out) < count:
        d = rng.randint(1, 3)
        sizes = [1] * (d + 1)
        budget = rng.randint(d + 1, 12)
        while sum(sizes) < budget:
            sizes[rng.randrange(d + 1)] += 1
        p = Fraction(rng.randint(1, 3), 4)
        cx, _ = random_partite(sizes, p, seed=k)
        k += 1
        if cx.chambers:
            out.append(cx)
    return out


_INSTANCES: list[TypedComplex] = []


def instances() -> list[TypedComplex]:
    if not _INSTANCES:
        _INSTANCES.extend(random_instances())
    return _INSTANCES


def heawood() -> BipartiteGraph:
    edges = [(p, line) for line in range(7) for p in ((line + s) % 7 for s in (0, 1, 3))]
    return BipartiteGraph.from_edges([f"p{i}" for i in range(7)], [f"L{i}" for i in range(7)], edges)


def k24() -> BipartiteGraph:
    return BipartiteGraph.from_edges(["a", "b"], list("wxyz"), [(i, j) for i in range(2) for j in range(4)])


# -- criteria -----------------------------------------------------------------

def criterion_1() -> bool:
    t0 = time.perf_counter()
    cases = instances()
    mismatch, local_hits = 0, 0
    for k, cx in enumerate(cases):
        exact = discrepancy_exact(cx).value
        if exact != naive_discrepancy(cx.classes, cx.chambers):
            mismatch += 1
        if discrepancy_local_search(cx, restarts=20, seed=k).value == exact:
            local_hits += 1
    elapsed = time.perf_counter() - t0
    rate = local_hits / len(cases)
    ok = len(cases) >= 50 and mismatch == 0 and rate >= 0.9 and elapsed < 60
    return record(1, ok, f"{len(cases)} instances, exact/naive mismatches {mismatch}, "
                         f"local search exact on {local_hits}/{len(cases)} ({rate:.0%}), {elapsed:.1f}s")


def criterion_2() -> bool:
    checked, violations, notes = 0, [], []
    named = [(f"complete{s}", complete_partite(list(s)), {})
             for s in [(1, 1), (2, 2, 2), (3, 3), (2, 3, 4), (2, 2, 2, 2)]]
    for q, d, label in [(2, 1, "PG(2,2)"), (3, 1, "PG(2,3)"), (2, 2, "PG(3,2)")]:
        spec = FlagComplexSpec(q, d)
        cx = flag_complex(spec)
        kw = {"cap": 30}
        if label == "PG(3,2)":
            kw = {"cap": 50, "automorphisms": flag_automorphisms(spec, cx)}
        named.append((label, cx, kw))
    regular_random = [cx for cx in instances() if is_type_regular(cx)]
    named += [(f"random#{k}", cx, {}) for k, cx in enumerate(regular_random)]
    for label, cx, kw in named:
        disc = discrepancy_exact(cx, **kw).value
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DisconnectedWarning)
            bound = discrepancy_spectral_bound(cx).value
        checked += 1
        if disc > bound + 1e-12:
            violations.append(label)
        if label.startswith("PG"):
            notes.append(f"{label} Disc={disc} <= {bound:.4f}")
    return record(2, not violations,
                  f"{checked} complexes ({len(regular_random)} type-regular random), "
                  f"violations {violations or 0}; " + "; ".join(notes))


def criterion_3() -> bool:
    graphs = [("Heawood", heawood()), ("K24", k24())]
    for q, d in [(2, 1), (3, 1), (2, 2), (3, 2)]:
        cx = flag_complex(FlagComplexSpec(q, d))
        graphs += [(f"flag{q},{d}/B{i}", induced_bipartite(cx, i)) for i in range(d + 1)]
    for k, cx in enumerate(instances()):
        graphs += [(f"random#{k}/B{i}", induced_bipartite(cx, i)) for i in range(cx.d + 1)]
    worst, worst_name, n = 0.0, "", 0
    for k, (name, g) in enumerate(graphs):
        if len(g.left) > 500:
            continue
        n += 1
        diff = abs(quiet_lambda(g) - quiet_lambda(g, mode="iterative", seed=k))
        if diff > worst:
            worst, worst_name = diff, name
    h_dense = abs(quiet_lambda(heawood()) - math.sqrt(2) / 3)
    h_iter = abs(quiet_lambda(heawood(), mode="iterative", seed=1) - math.sqrt(2) / 3)
    ok = worst < 1e-8 and h_dense < 1e-10 and h_iter < 1e-10
    return record(3, ok, f"{n} graphs, max |iter - dense| = {worst:.2e} ({worst_name or '-'}); "
                         f"Heawood error dense {h_dense:.1e}, iterative {h_iter:.1e}")


def _two_step(g: BipartiteGraph) -> list[list[Fraction]]:
    m = g.biadjacency()
    rows, cols = m.shape
    dl = m.sum(axis=1)
    dr = m.sum(axis=0)
    return [[sum((Fraction(int(m[u, b]) * int(m[v, b]), int(dl[u]) * int(dr[b])) for b in range(cols)),
                 Fraction(0)) for v in range(rows)] for u in range(rows)]


def _power(mat, n):
    size = len(mat)
    out = [[Fraction(int(i == j)) for j in range(size)] for i in range(size)]
    for _ in range(n):
        out = [[sum((out[i][k] * mat[k][j] for k in range(size)), Fraction(0)) for j in range(size)]
               for i in range(size)]
    return out


def _left_dist(g: BipartiteGraph) -> list[list[int | None]]:
    size = len(g.left)
    two_step = [{c for b in g.left_adj[a] for c in g.right_adj[b]} for a in range(size)]
    out = []
    for s in range(size):
        dist = [None] * size
        dist[s] = 0
        frontier = [s]
        while frontier:
            nxt = []
            for a in frontier:
                for c in two_step[a]:
                    if dist[c] is None:
                        dist[c] = dist[a] + 2
                        nxt.append(c)
            frontier = nxt
        out.append(dist)
    return out


def identity_holds(g: BipartiteGraph, n: int) -> tuple[bool, bool]:
    """(identity verified independently, alpha rows nonnegative and summing to 1)."""
    wd = walk_decomposition(g, n)
    lhs = _power(_two_step(g), n)
    dist = _left_dist(g)
    size = len(g.left)
    rhs = [[Fraction(0)] * size for _ in range(size)]
    for u in range(size):
        for k in range(n + 1):
            sphere = [v for v in range(size) if dist[u][v] == 2 * k]
            for v in sphere:
                rhs[u][v] += wd.alpha[u][k] / len(sphere)
    distributions = all(min(a) >= 0 and sum(a) == 1 for a in wd.alpha)
    holds = lhs == rhs
    assert holds == wd.identity_holds, "library verdict disagrees with the independent check"
    return holds, distributions


def random_graphs(count: int = 10) -> list[BipartiteGraph]:
    out, seed = [], 0
    while len(out) < count:
        cx, _ = random_partite([4, 4], Fraction(1, 2), seed)
        seed += 1
        if not cx.chambers:
            continue
        g = induced_bipartite(cx, 0)
        if all(x is not None for x in _left_dist(g)[0]) and len(g.left) > 1:
            out.append(g)
    return out


def criterion_4() -> bool:
    pg32 = flag_complex(FlagComplexSpec(2, 2))
    fixed = [("K24", k24()), ("Heawood", heawood()), ("PG(3,2)/B0", induced_bipartite(pg32, 0))]
    rand = [(f"random#{k}", g) for k, g in enumerate(random_graphs())]
    failures, dist_ok = [], True
    for name, g in fixed + rand:
        for n in (1, 2, 3):
            holds, dists = identity_holds(g, n)
            dist_ok &= dists
            if not holds:
                failures.append(f"{name}:n={n}")
    fixed_fail = [f for f in failures if not f.startswith("random")]
    rand_graphs_ok = sum(1 for name, _ in rand if not any(f.startswith(name + ":") for f in failures))
    detail = (f"fixed graphs {'all hold' if not fixed_fail else fixed_fail}; random graphs with the identity "
              f"for n=1,2,3: {rand_graphs_ok}/{len(rand)}; alpha distributions valid: {dist_ok}")
    if failures:
        detail += ("; the identity requires each 2n-step walk law to be uniform on distance spheres, "
                   "which irregular random graphs do not satisfy")
    return record(4, not failures and dist_ok, detail)


def criterion_5() -> bool:
    orders = [coxeter_max_order(d) for d in (2, 3, 4)]
    oracle = [oracle_max_order(d) for d in (2, 3, 4)]
    m = m_constant(2, 1)
    xi0 = all(xi_pgl2(q, 0).coeff == 1 and float(xi_pgl2(q, 0)) == 1 for q in range(2, 101))
    xi41 = abs(float(xi_pgl2(4, 1)) - 0.8) <= 1e-12
    exps = {d: lambda_upper_bound(d, 9, 2 * d * coxeter_max_order(d)).exponent for d in (2, 3)}
    exp_ok = all(exps[d] == Fraction(-1, 4 * d) for d in (2, 3))
    ok = orders == [12, 48, 1152] == oracle and m.exact == 12 and xi0 and xi41 and exp_ok
    return record(5, ok, f"N_2..4 = {orders} (oracle {oracle}); M_2,1 = {m.exact}; xi(q,0)=1: {xi0}; "
                         f"xi(4,1) = {float(xi_pgl2(4, 1))!r}; exponents {[str(e) for e in exps.values()]}")


def criterion_6() -> bool:
    mc = main_constants(2, Fraction(1, 2))
    ref = log_oracle_q0(2, 0.5)
    rel = abs(float(mc.q0_log10) - ref) / abs(ref)
    mant, exp = mc.q0_scientific
    ok = mc.epsilon == Fraction(1, 16) and rel < 1e-9
    return record(6, ok, f"epsilon = {mc.epsilon}; q_0 = {mant}e{exp}; log10 relative error {rel:.1e}")


def criterion_7() -> bool:
    rng = random.Random(7)

    def coord():
        return Fraction(rng.randint(0, 8), 4)

    disagreements = 0
    for _ in range(10_000):
        p = (coord(), coord())
        tri = [(coord(), coord()) for _ in range(3)]
        if point_in_simplex(p, tri).location.name.lower() != classify_oracle(p, tri):
            disagreements += 1
    recount_bad = 0
    for seed in range(10):
        cx = complete_partite([3, 3, 3]) if seed % 2 else complete_partite([2, 2, 2])
        emb = random_embedding(cx, seed)
        best = overlap_search_2d(cx, emb)
        probes = [best.point] + [tuple(Fraction(rng.randint(0, 100), 100) for _ in range(2)) for _ in range(5)]
        for p in probes:
            res = coverage_at(cx, emb, p)
            brute = sum(classify_oracle(p, emb.simplex(ch)) != "outside" for ch in cx.chambers)
            recount_bad += not (res.count == res.recount() == brute)
    single = complete_partite([1, 1, 1])
    one = overlap_search_2d(single, Embedding.from_mapping(
        2, {"t0_0": (0, 0), "t1_0": (1, 0), "t2_0": (0, 1)})).fraction
    two = TypedComplex.build(2, [("a", 0), ("b", 1), ("c", 2), ("x", 0), ("y", 1), ("z", 2)],
                             [("a", "b", "c"), ("x", "y", "z")])
    half = overlap_search_2d(two, Embedding.from_mapping(2, {
        "a": (0, 0), "b": (1, 0), "c": (0, 1), "x": (5, 5), "y": (6, 5), "z": (5, 6)})).fraction
    ok = disagreements == 0 and recount_bad == 0 and one == 1 and half == Fraction(1, 2)
    return record(7, ok, f"10000 pairs, {disagreements} disagreements; {recount_bad} recount mismatches; "
                         f"single triangle {one}, two disjoint {half}")


def criterion_8() -> bool:
    t0 = time.perf_counter()
    cx = complete_partite([5, 5, 5])
    fracs = []
    for seed in range(20):
        res = overlap_search_2d(cx, random_embedding(cx, seed))
        assert res.count == res.recount()
        fracs.append(res.fraction)
    elapsed = time.perf_counter() - t0
    ok = min(fracs) >= Fraction(15, 100) and elapsed < 120
    return record(8, ok, f"20 embeddings, fraction min {float(min(fracs)):.3f} median "
                         f"{float(statistics.median(fracs)):.3f} max {float(max(fracs)):.3f}; {elapsed:.1f}s")


def criterion_9() -> bool:
    complete_ok = all(certify_overlap(complete_partite([2] * (d + 1)), Fraction(1, 2)).epsilon
                      == Fraction(1, 2 ** (d + 1)) for d in (1, 2, 3))
    pg32 = flag_complex(FlagComplexSpec(2, 2))
    sweep = [Fraction(k, 100) for k in range(1, 100)]
    consistent, branches = True, set()
    lam_max = None
    for c in sweep:
        cert = certify_overlap(pg32, c)
        lam_max = max(cert.per_type)
        expected = 2 * lam_max < float(c) ** 3
        consistent &= cert.certified == expected
        branches.add(cert.certified)
    both = branches == {True, False}
    detail = (f"complete partite epsilon = (1/2)^(d+1) for d=1,2,3: {complete_ok}; PG(3,2) verdict consistent "
              f"over c_2 in (0,1): {consistent}; branches exercised: {sorted(branches)}")
    if not both:
        detail += (f"; 2*max lambda_tilde = {2 * lam_max:.4f} exceeds 1 > c_2^3 for every admissible c_2, "
                   "so the certified branch cannot occur on PG(3,2)")
    return record(9, complete_ok and consistent and both, detail)


def criterion_10() -> bool:
    import os
    os.environ.setdefault("SOURCE_DATE_EPOCH", "1700000000")
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        cx = tmp / "c.json"
        assert run(["generate", "--kind", "random", "--sizes", "3,3,3", "--p", "2/3", "--seed", "5",
                    "--out", str(cx)]) == 0
        cases = {
            "generate": ["generate", "--kind", "random", "--sizes", "3,3,3", "--p", "1/2", "--seed", "8"],
            "spectral": ["spectral", "--input", str(cx), "--mode", "iter", "--seed", "3", "--n", "2"],
            "disc": ["disc", "--input", str(cx), "--method", "local", "--seed", "9", "--threads", "4"],
            "overlap": ["overlap", "--input", str(cx), "--random-embedding", "2", "--mode", "mc",
                        "--samples", "2000", "--seed", "4"],
        }
        same = {}
        for name, argv in cases.items():
            blobs = []
            for _ in range(2):
                rep = tmp / f"{name}.json"
                code = run(argv + ["--report", str(rep)])
                blobs.append((code, rep.read_bytes()))
            same[name] = blobs[0] == blobs[1] and blobs[0][0] == 0
    return record(10, all(same.values()), "byte-identical reruns: " +
                  ", ".join(f"{k} {'yes' if v else 'NO'}" for k, v in same.items()))


# -- pytest entry points --------------------------------------------------------

def test_criterion_1_discrepancy_exactness():
    assert criterion_1(), RESULTS[1]


def test_criterion_2_mixing_inequality():
    assert criterion_2(), RESULTS[2]


def test_criterion_3_spectral_oracle():
    assert criterion_3(), RESULTS[3]


def test_criterion_4_walk_decomposition():
    assert criterion_4(), RESULTS[4]


def test_criterion_5_constant_chain():
    assert criterion_5(), RESULTS[5]


def test_criterion_6_main_constants():
    assert criterion_6(), RESULTS[6]


def test_criterion_7_geometry():
    assert criterion_7(), RESULTS[7]


def test_criterion_8_overlap_sanity():
    assert criterion_8(), RESULTS[8]


def test_criterion_9_certification():
    assert criterion_9(), RESULTS[9]


def test_criterion_10_determinism():
    assert criterion_10(), RESULTS[10]


if __name__ == "__main__":
    checks = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
              criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]
    outcomes = [check() for check in checks]
    print(f"{sum(outcomes)}/{len(outcomes)} criteria passed")
    sys.exit(0 if all(outcomes) else 1)
