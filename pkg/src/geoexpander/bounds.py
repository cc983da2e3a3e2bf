"""The explicit constant chain: N_d, Xi_PGL2, Hecke norm bounds, M_{d,n},
the lambda-tilde bound, q_0(d), epsilon(d), and certified overlap verdicts.

Quantities of the form c * q^e are kept as (rational coefficient, integer
base, rational exponent) and only rendered to decimals at the edges.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .complex import TypedComplex
from .discrepancy import discrepancy_spectral_bound
from .generators import prime_power_base

_mp = mpmath.MPContext()
_mp.dps = 60

CRYSTALLOGRAPHIC = "crystallographic"
ALL_FINITE = "all-finite"

# Pach's selection constant is not known numerically; nothing here is certified.
PACH_CONSTANT_REGISTRY: dict[int, dict] = {
    d: {"value": None, "certified": False,
        "note": "no certified value; pass c_d explicitly"} for d in range(1, 9)
}

_EXCEPTIONAL_WEYL = {2: [("G2", 12)], 4: [("F4", 1152)], 6: [("E6", 51840)],
                     7: [("E7", 2903040)], 8: [("E8", 696729600)]}
_NON_CRYSTALLOGRAPHIC = {3: [("H3", 120)], 4: [("H4", 14400)]}


class BoundsError(ValueError):
    pass


class UnboundedOrder(BoundsError):
    pass


def irreducible_coxeter_groups(k: int, mode: str = CRYSTALLOGRAPHIC) -> list[tuple[str, int]]:
    """Irreducible finite Coxeter groups of rank ``k`` with their orders.

    The dihedral family I2(m) is left out: it is unbounded in rank 2.
    """
    groups = [(f"A{k}", math.factorial(k + 1))]
    if k >= 2:
        groups.append((f"B{k}", 2**k * math.factorial(k)))
    if k >= 4:
        groups.append((f"D{k}", 2 ** (k - 1) * math.factorial(k)))
    groups += _EXCEPTIONAL_WEYL.get(k, [])
    if mode == ALL_FINITE:
        groups += _NON_CRYSTALLOGRAPHIC.get(k, [])
    elif mode != CRYSTALLOGRAPHIC:
        raise BoundsError(f"unknown coxeter mode {mode!r}")
    return groups


def coxeter_max_order(d: int, mode: str = CRYSTALLOGRAPHIC) -> int:
    """N_d: largest order of a finite Coxeter group of rank d.

    Crystallographic mode ranges over products of irreducible Weyl groups of
    total rank d. All-finite mode also admits H3 and H4; at rank 2 it raises
    because I2(m) has order 2m for every m.
    """
    if d < 1:
        raise BoundsError("rank must be >= 1")
    if mode == ALL_FINITE and d == 2:
        raise UnboundedOrder("unbounded (I2(m)): rank-2 finite Coxeter groups have no maximal order")
    best = [1] + [0] * d
    for r in range(1, d + 1):
        for k in range(1, r + 1):
            top = max(order for _, order in irreducible_coxeter_groups(k, mode))
            best[r] = max(best[r], top * best[r - k])
    return best[d]


@dataclass(frozen=True)
class PowerValue:
    """``coeff * base ** exponent`` with exact rational parts."""

    coeff: Fraction
    base: int
    exponent: Fraction

    def log10(self) -> float:
        return float(self.log10_mp())

    def log10_mp(self):
        c = self.coeff
        return (_mp.log10(c.numerator) - _mp.log10(c.denominator)
                + _mp.mpf(self.exponent.numerator) / self.exponent.denominator
                * _mp.log10(self.base))

    def to_mp(self):
        return _mp.power(10, self.log10_mp())

    def __float__(self) -> float:
        return float(self.to_mp())

    def scientific(self, digits: int = 15) -> tuple[str, int]:
        return mp_scientific(self.log10_mp(), digits)

    def describe(self) -> str:
        return f"{self.coeff} * {self.base}^({self.exponent})"


def mp_scientific(log10_value, digits: int = 15) -> tuple[str, int]:
    """(mantissa string, decimal exponent) of 10**log10_value."""
    e = int(_mp.floor(log10_value))
    mant = _mp.power(10, log10_value - e)
    s = _mp.nstr(mant, digits)
    if s.startswith("10"):     # rounding pushed the mantissa to 10
        e += 1
        s = _mp.nstr(mant / 10, digits)
    return s, e


def xi_pgl2(q: int, n: int) -> PowerValue:
    """Harish-Chandra function of PGL2 at diag(pi^n, 1): q^(-n/2) (n(q-1)+q+1)/(q+1)."""
    if q < 2 or n < 0:
        raise BoundsError("need q >= 2 and n >= 0")
    return PowerValue(Fraction(n * (q - 1) + q + 1, q + 1), q, Fraction(-n, 2))


def hecke_norm_bound(d: int, q: int, k: int, mode: str = CRYSTALLOGRAPHIC) -> PowerValue:
    """(2k+1) q^{N_d} q^{-k/d} on mean-zero functions."""
    if d < 2 or k < 0:
        raise BoundsError("need d >= 2 and k >= 0")
    N = coxeter_max_order(d, mode)
    return PowerValue(Fraction(2 * k + 1), q, N - Fraction(k, d))


@dataclass(frozen=True)
class MConstant:
    d: int
    n: int
    N: int
    inner_sum: int             # sum_{k=0}^n (3N)^n (2k+1)
    value: object              # mpf, the 2n-th root
    closed_form: object        # sqrt(3N) (n+1)^(1/n)

    @property
    def exact(self) -> int | None:
        """Integer value when the inner sum is a perfect 2n-th power."""
        r = round(float(self.value))
        return r if r ** (2 * self.n) == self.inner_sum else None

    def log10(self):
        return _mp.log10(self.inner_sum) / (2 * self.n)


def m_constant(d: int, n: int, mode: str = CRYSTALLOGRAPHIC) -> MConstant:
    if d < 2 or n < 1:
        raise BoundsError("need d >= 2 and n >= 1")
    N = coxeter_max_order(d, mode)
    inner = sum((3 * N) ** n * (2 * k + 1) for k in range(n + 1))
    value = _mp.root(_mp.mpf(inner), 2 * n)
    closed = _mp.sqrt(3 * N) * _mp.root(n + 1, n)
    if abs(value - closed) > _mp.mpf("1e-12") * closed:
        raise AssertionError(f"M_{{{d},{n}}} sum form {value} != closed form {closed}")
    return MConstant(d, n, N, inner, value, closed)


@dataclass(frozen=True)
class LambdaBound:
    M: MConstant
    q: int
    exponent: Fraction          # of q
    hypothesis: str

    def log10(self):
        return self.M.log10() + _mp.mpf(self.exponent.numerator) / self.exponent.denominator * _mp.log10(self.q)

    @property
    def value(self) -> float:
        return float(_mp.power(10, self.log10()))

    @property
    def vacuous(self) -> bool:
        return self.log10() >= 0


def lambda_upper_bound(d: int, q: int, n: int, mode: str = CRYSTALLOGRAPHIC) -> LambdaBound:
    """max_i lambda_tilde(B_i) <= M_{d,n} q^{-1/(2d) + N_d/(2n)}.

    Valid only for quotients with injectivity radius > 4n; that hypothesis is
    carried along as a string and never checked.
    """
    M = m_constant(d, n, mode)
    exponent = Fraction(-1, 2 * d) + Fraction(M.N, 2 * n)
    return LambdaBound(M, q, exponent, f"injectivity radius r(Gamma) > {4 * n}")


@dataclass(frozen=True)
class WalkBound:
    value: Fraction

    @property
    def vacuous(self) -> bool:
        return self.value >= 1


def walk_bound_check(d: int, q: int, n: int, k: int, mode: str = CRYSTALLOGRAPHIC) -> WalkBound:
    """Share of 2n-walks ending at distance 2k is at most (3N_d)^n / q^(n-k) in the building."""
    if not 0 <= k <= n:
        raise BoundsError(f"need 0 <= k <= n, got k={k}, n={n}")
    N = coxeter_max_order(d, mode)
    return WalkBound(Fraction((3 * N) ** n, q ** (n - k)))


@dataclass(frozen=True)
class MainConstants:
    d: int
    c_d: Fraction
    n: int                     # 2 d N_d
    epsilon: Fraction
    M: MConstant
    q0_log10: object           # mpf

    @property
    def q0_scientific(self) -> tuple[str, int]:
        return mp_scientific(self.q0_log10)


def _pach(c_d) -> Fraction:
    c = Fraction(c_d)
    if not 0 < c < 1:
        raise BoundsError(f"Pach constant must lie in (0, 1), got {c}")
    return c


def main_constants(d: int, c_d, mode: str = CRYSTALLOGRAPHIC) -> MainConstants:
    """epsilon = c_d^(d+1) / 2 and q_0 = (2d M_{d,2dN_d} c_d^-(d+1))^(4d)."""
    c = _pach(c_d)
    N = coxeter_max_order(d, mode)
    n = 2 * d * N
    M = m_constant(d, n, mode)
    eps = c ** (d + 1) / 2
    log_base = (_mp.log10(2 * d) + M.log10()
                - (d + 1) * (_mp.log10(c.numerator) - _mp.log10(c.denominator)))
    return MainConstants(d, c, n, eps, M, 4 * d * log_base)


@dataclass(frozen=True)
class Entry:
    name: str
    value: object
    formula: str
    anchor: str

    def to_json(self) -> dict:
        return {"name": self.name, "value": self.value, "formula": self.formula,
                "anchor": self.anchor}


@dataclass
class BoundReport:
    d: int
    q: int
    n: int
    c_d: Fraction
    mode: str
    entries: list[Entry] = field(default_factory=list)
    verdict: str = ""
    warnings: list[str] = field(default_factory=list)

    def get(self, name: str) -> Entry:
        return next(e for e in self.entries if e.name == name)

    def to_json(self) -> dict:
        return {"d": self.d, "q": self.q, "n": self.n, "c_d": str(self.c_d),
                "coxeter_mode": self.mode, "entries": [e.to_json() for e in self.entries],
                "verdict": self.verdict, "warnings": self.warnings}


def _sci(log10_value) -> str:
    m, e = mp_scientific(log10_value)
    return f"{m}e{e}"


def bound_report(d: int, q: int, n: int, c_d, mode: str = CRYSTALLOGRAPHIC) -> BoundReport:
    """Evaluate the whole chain for one parameter set."""
    c = _pach(c_d)
    if d < 2 or q < 2 or n < 1:
        raise BoundsError("need d >= 2, q >= 2, n >= 1")
    rep = BoundReport(d, q, n, c, mode)
    base = prime_power_base(q)
    if base is None or base == 2:
        msg = f"q={q} is not an odd prime power; the main theorem assumes one"
        warnings.warn(msg)
        rep.warnings.append(msg)
    N = coxeter_max_order(d, mode)
    add = rep.entries.append
    add(Entry("N_d", N, "max order of a rank-d finite Coxeter group (" + mode + ")",
              "maximal Coxeter group order"))
    M = m_constant(d, n, mode)
    add(Entry("M_{d,n}", _mp.nstr(M.value, 20),
              "(sum_{k=0}^n (3N_d)^n (2k+1))^(1/2n) = sqrt(3N_d) (n+1)^(1/n)",
              "eigenvalue bound constant"))
    for k in range(n + 1):
        h = hecke_norm_bound(d, q, k, mode)
        add(Entry(f"hecke_bound[k={k}]", _sci(h.log10_mp()), "(2k+1) q^(N_d - k/d)",
                  "normalized Hecke operator norm bound"))
        add(Entry(f"walk_bound[k={k}]", str(walk_bound_check(d, q, n, k, mode).value),
                  "(3N_d)^n / q^(n-k)", "2n-walk distance distribution bound"))
    lb = lambda_upper_bound(d, q, n, mode)
    add(Entry("lambda_tilde_bound", _sci(lb.log10()),
              f"M_{{d,n}} q^({lb.exponent})  [{lb.hypothesis}]",
              "second eigenvalue bound for type-induced graphs"))
    disc_log = lb.log10() + _mp.log10(d)
    add(Entry("disc_bound", _sci(disc_log), "d * lambda_tilde_bound",
              "hypergraph mixing lemma"))
    mc = main_constants(d, c, mode)
    add(Entry("epsilon", str(mc.epsilon), "c_d^(d+1) / 2", "overlap constant"))
    add(Entry("q_0", _sci(mc.q0_log10), "(2d M_{d,2dN_d} c_d^-(d+1))^(4d)",
              "residue field threshold"))
    if _mp.log10(q) > mc.q0_log10:
        rep.verdict = f"certified {mc.epsilon}-overlap (q > q_0)"
    else:
        rep.verdict = "not certified: q <= q_0"
    return rep


@dataclass(frozen=True)
class Certificate:
    certified: bool
    epsilon: Fraction | float | None
    disc_bound: Fraction | float
    per_type: tuple[float, ...]
    c_d: Fraction
    gap: Fraction | float

    @property
    def verdict(self) -> str:
        if self.certified:
            return f"certified epsilon-overlap with epsilon = {self.epsilon}"
        return f"inconclusive: spectral discrepancy bound exceeds c_d^(d+1) by {self.gap}"


def certify_overlap(cx: TypedComplex, c_d, mode: str = "dense") -> Certificate:
    """Overlap certificate from the measured spectral discrepancy bound.

    epsilon = c_d^(d+1) - d * max_i lambda_tilde(B_i); certified only when
    positive. An exactly vanishing bound keeps epsilon rational.
    """
    c = _pach(c_d)
    sb = discrepancy_spectral_bound(cx, mode=mode)
    target = c ** (cx.d + 1)
    bound = Fraction(0) if sb.value == 0 else sb.value
    eps = target - bound
    if eps > 0:
        return Certificate(True, eps, bound, sb.per_type, c, Fraction(0))
    return Certificate(False, None, bound, sb.per_type, c, -eps)
