"""Normalized second eigenvalue of bipartite graphs and the walk decomposition.

Everything is phrased on the LEFT side of a :class:`BipartiteGraph`. The
two-step operator is ``P = D_V^-1 M D_W^-1 M^T`` (M the 0/1 biadjacency);
it is reversible with stationary distribution proportional to the left
degrees, and lambda_tilde is the square root of its second eigenvalue.
"""

from __future__ import annotations

import warnings
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .complex import BipartiteGraph, left_components, left_distances

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000
EXACT_CAP = 500
# below this a float estimate is checked against the exact rank-one test
_ZERO_SNAP = 1e-7


class SpectralError(RuntimeError):
    pass


class ConvergenceError(SpectralError):
    def __init__(self, iterations: int, last_change: float):
        self.iterations = iterations
        super().__init__(
            f"power iteration did not converge after {iterations} iterations "
            f"(last Rayleigh quotient change {last_change:.3e})")


class DisconnectedWarning(UserWarning):
    pass


class CapExceeded(SpectralError):
    pass


def normalized_biadjacency(g: BipartiteGraph) -> np.ndarray:
    """``D_V^-1/2 M D_W^-1/2``; its singular values are the positive spectrum of B."""
    m = g.biadjacency()
    dl = np.sqrt(m.sum(axis=1))
    dr = np.sqrt(m.sum(axis=0))
    return m / dl[:, None] / dr[None, :]


def two_step_exact(g: BipartiteGraph) -> list[list[Fraction]]:
    """Row-stochastic rational matrix of the two-step walk on left vertices."""
    n = len(g.left)
    rows = []
    for u in range(n):
        row = [Fraction(0)] * n
        du = len(g.left_adj[u])
        for b in g.left_adj[u]:
            share = Fraction(1, du * len(g.right_adj[b]))
            for v in g.right_adj[b]:
                row[v] += share
        rows.append(row)
    return rows


def two_step_is_rank_one(g: BipartiteGraph) -> bool:
    """True iff the two-step operator vanishes on mean-zero functions (all rows equal)."""
    rows = two_step_exact(g)
    return all(r == rows[0] for r in rows[1:])


def _check_graph(g: BipartiteGraph) -> None:
    if not g.left or not g.edges:
        raise SpectralError("empty graph")
    if any(d == 0 for d in g.left_degrees) or any(d == 0 for d in g.right_degrees):
        raise SpectralError("graph has isolated vertices")


def _dense(g: BipartiteGraph) -> float:
    # singular values of the normalized biadjacency are the nonnegative
    # eigenvalues of the symmetric normalized adjacency of B
    s = np.linalg.svd(normalized_biadjacency(g), compute_uv=False)
    return float(s[1]) if len(s) > 1 else 0.0


def _iterative(g: BipartiteGraph, tol: float, seed: int, max_iter: int) -> float:
    nb = normalized_biadjacency(g)
    n = nb.shape[0]
    if n == 1:
        return 0.0
    top = np.sqrt(np.asarray(g.left_degrees, dtype=float))
    top /= np.linalg.norm(top)
    rng = np.random.default_rng(seed)
    x = rng.random(n)
    x -= top * (top @ x)
    norm = np.linalg.norm(x)
    if norm == 0.0:
        return 0.0
    x /= norm
    rq_prev = np.inf
    change = prev_change = np.inf
    for it in range(1, max_iter + 1):
        y = nb.T @ x
        rq = float(y @ y)
        z = nb @ y
        z -= top * (top @ z)
        change = abs(rq - rq_prev)
        nz = np.linalg.norm(z)
        if nz < 1e-12:
            # the deflated operator annihilates x up to round-off
            return float(np.linalg.norm(y))
        if change < tol:
            # Rayleigh quotients approach the limit geometrically; with a slow
            # ratio the remaining distance is much larger than one step
            ratio = change / prev_change if prev_change > 0 else 0.0
            if ratio >= 1.0 or change * ratio / (1.0 - ratio) < tol:
                break
        prev_change = change
        rq_prev = rq
        x = z / nz
        x -= top * (top @ x)
        x /= np.linalg.norm(x)
    else:
        raise ConvergenceError(max_iter, change)
    return float(np.linalg.norm(nb.T @ x))


def lambda_tilde(g: BipartiteGraph, mode: str = "dense", tol: float = DEFAULT_TOL,
                 seed: int = 0, max_iter: int = DEFAULT_MAX_ITER) -> float:
    """Normalized second largest eigenvalue of B, in [0, 1].

    ``mode="dense"`` takes the full spectrum of the normalized adjacency;
    ``mode="iterative"`` runs power iteration on the two-step operator with
    the stationary direction deflated, starting from a seeded uniform vector
    and stopping once successive Rayleigh quotients differ by less than
    ``tol``.

    A disconnected graph has eigenvalue 1 with multiplicity > 1, so the
    result is 1.0 and a :class:`DisconnectedWarning` is issued; use
    :func:`component_lambdas` for the per-component values.
    """
    _check_graph(g)
    comps = left_components(g)
    if len(comps) > 1:
        best = max(component_lambdas(g, mode=mode, tol=tol, seed=seed, max_iter=max_iter))
        warnings.warn(
            f"graph has {len(comps)} components (max per-component lambda {best:.6g}); "
            "global value is 1", DisconnectedWarning, stacklevel=2)
        return 1.0
    if mode == "dense":
        val = _dense(g)
    elif mode in ("iterative", "iter"):
        val = _iterative(g, tol, seed, max_iter)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if val < _ZERO_SNAP and len(g.left) <= EXACT_CAP and two_step_is_rank_one(g):
        return 0.0
    return min(max(val, 0.0), 1.0)


def _subgraph(g: BipartiteGraph, members: list[int]) -> BipartiteGraph:
    keep = set(members)
    lmap = {a: k for k, a in enumerate(members)}
    rights = sorted({b for a, b in g.edges if a in keep})
    rmap = {b: k for k, b in enumerate(rights)}
    return BipartiteGraph.from_edges(
        [g.left[a] for a in members], [g.right[b] for b in rights],
        [(lmap[a], rmap[b]) for a, b in g.edges if a in keep])


def component_lambdas(g: BipartiteGraph, **kw) -> list[float]:
    return [lambda_tilde(_subgraph(g, c), **kw) for c in left_components(g)]


def lambda_tilde_right(g: BipartiteGraph, **kw) -> float:
    """Same quantity computed from the wall side; equal nonzero spectrum."""
    return lambda_tilde(g.transpose(), **kw)


# -- exact walk machinery -------------------------------------------------

def distance_table(g: BipartiteGraph) -> list[list[int | None]]:
    return [left_distances(g, u) for u in range(len(g.left))]


@dataclass(frozen=True)
class DistanceOperator:
    """Averaging over the B-sphere of radius 2k; ``empty_rows`` have no such vertices."""

    k: int
    matrix: tuple[tuple[Fraction, ...], ...]
    empty_rows: tuple[int, ...]


def distance_operator(g: BipartiteGraph, k: int, dist=None) -> DistanceOperator:
    if k < 0:
        raise ValueError("k must be >= 0")
    dist = dist or distance_table(g)
    n = len(g.left)
    rows, empty = [], []
    for u in range(n):
        sphere = [v for v in range(n) if dist[u][v] == 2 * k]
        row = [Fraction(0)] * n
        if sphere:
            w = Fraction(1, len(sphere))
            for v in sphere:
                row[v] = w
        else:
            empty.append(u)
        rows.append(tuple(row))
    return DistanceOperator(k, tuple(rows), tuple(empty))


def walk_distribution(g: BipartiteGraph, start: int, n: int) -> dict[int, Fraction]:
    """Exact endpoint law of ``n`` two-step moves of the simple walk from ``start``."""
    law = {start: Fraction(1)}
    for _ in range(n):
        nxt: dict[int, Fraction] = defaultdict(Fraction)
        for a, mass in law.items():
            step = mass / len(g.left_adj[a])
            for b in g.left_adj[a]:
                share = step / len(g.right_adj[b])
                for c in g.right_adj[b]:
                    nxt[c] += share
        law = dict(nxt)
    return law


@dataclass(frozen=True)
class WalkDecomposition:
    n: int
    alpha: tuple[tuple[Fraction, ...], ...]   # alpha[u][k]
    uniform: bool
    identity_holds: bool
    mismatches: tuple[tuple[int, int], ...]    # (u, v) entries breaking the identity

    @property
    def common_alpha(self) -> tuple[Fraction, ...] | None:
        return self.alpha[0] if self.uniform else None


def walk_decomposition(g: BipartiteGraph, n: int, cap: int = EXACT_CAP) -> WalkDecomposition:
    """Split ``(T^t T)^n`` by B-distance of the endpoint.

    ``alpha[u][k]`` is the probability that a random 2n-walk from ``u`` ends at
    distance exactly 2k. The identity ``(T^t T)^n = sum_k diag(alpha_k) A_k``
    holds iff every row of ``(T^t T)^n`` is constant on each sphere; entries
    where it is not are listed in ``mismatches``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_graph(g)
    size = len(g.left)
    if size > cap:
        raise CapExceeded(f"{size} left vertices exceed the exact-arithmetic cap {cap}")
    dist = distance_table(g)
    alphas, bad = [], []
    for u in range(size):
        law = walk_distribution(g, u, n)
        alpha = [Fraction(0)] * (n + 1)
        for v, mass in law.items():
            alpha[dist[u][v] // 2] += mass
        spheres = defaultdict(int)
        for v in range(size):
            if dist[u][v] is not None:
                spheres[dist[u][v]] += 1
        for v in range(size):
            k2 = dist[u][v]
            expected = Fraction(0)
            if k2 is not None and k2 <= 2 * n:
                expected = alpha[k2 // 2] / spheres[k2]
            if law.get(v, Fraction(0)) != expected:
                bad.append((u, v))
        alphas.append(tuple(alpha))
    uniform = all(a == alphas[0] for a in alphas)
    return WalkDecomposition(n, tuple(alphas), uniform, not bad, tuple(bad))


def compose_from_alpha(g: BipartiteGraph, wd: WalkDecomposition) -> list[list[Fraction]]:
    """``sum_k diag(alpha_k) A_k`` as an explicit rational matrix."""
    dist = distance_table(g)
    size = len(g.left)
    out = [[Fraction(0)] * size for _ in range(size)]
    for k in range(wd.n + 1):
        A = distance_operator(g, k, dist)
        for u in range(size):
            a = wd.alpha[u][k]
            if a == 0:
                continue
            for v, x in enumerate(A.matrix[u]):
                if x:
                    out[u][v] += a * x
    return out


def matrix_power_exact(m: list[list[Fraction]], n: int) -> list[list[Fraction]]:
    size = len(m)
    result = [[Fraction(int(i == j)) for j in range(size)] for i in range(size)]
    for _ in range(n):
        result = [[sum((result[i][k] * m[k][j] for k in range(size) if result[i][k]), Fraction(0))
                   for j in range(size)] for i in range(size)]
    return result


def backstep_fractions(g: BipartiteGraph, origin: int) -> list[tuple[Fraction, Fraction]]:
    """Per left vertex v: share of 2-walks (v, F, u) that keep or reduce the distance to ``origin``.

    Walks are counted as paths v -> wall -> u, the return u = v included.
    The first entry counts dist(origin, u) == dist(origin, v) (1-backstep),
    the second dist(origin, u) == dist(origin, v) - 2 (2-backstep).
    """
    dist = left_distances(g, origin)
    if any(x is None for x in dist):
        raise SpectralError("graph is disconnected")
    out = []
    for v in range(len(g.left)):
        total = same = back = 0
        for b in g.left_adj[v]:
            for u in g.right_adj[b]:
                total += 1
                if dist[u] == dist[v]:
                    same += 1
                elif dist[u] == dist[v] - 2:
                    back += 1
        out.append((Fraction(same, total), Fraction(back, total)))
    return out
