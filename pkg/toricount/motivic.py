"""Power-structure calculus on truncated multivariate series with L-polynomial coefficients.

MultiSeries is the carrier for Möbius series and Euler products. Coefficients may be ints,
Fractions or LPoly values; ``exp``/``log`` and rational exponents need a coefficient ring that
divides by integers (Fraction or LPoly).
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from sympy import divisors
from sympy.functions.combinatorial.numbers import mobius

from toricount.logger import get_logger
from toricount.lpoly import LPoly, eval_at

Exponent = Tuple[int, ...]
Coefficient = Any

P1_CLASS = LPoly.ONE + LPoly.L


class SeriesError(Exception):
    """Raised for series operations outside their domain (wrong constant term, mismatched shapes)."""

    pass


def _render(value: Coefficient) -> str:
    if isinstance(value, LPoly):
        return value.render_sparse()
    return str(value)


class MultiSeries:
    """Σ c_e t^e over exponents e ∈ N^nvars with |e| ≤ dmax; terms beyond dmax are discarded."""

    __slots__ = ("nvars", "dmax", "coeffs")

    def __init__(self, nvars: int, dmax: int, coeffs: Optional[Dict[Exponent, Coefficient]] = None):
        if nvars < 1:
            raise SeriesError("a series needs at least one variable")
        if dmax < 0:
            raise SeriesError(f"truncation order must be >= 0, got {dmax}")
        self.nvars = nvars
        self.dmax = dmax
        self.coeffs: Dict[Exponent, Coefficient] = {}
        for e, c in (coeffs or {}).items():
            e = tuple(e)
            if len(e) != nvars or any(k < 0 for k in e):
                raise SeriesError(f"bad exponent {e} for a series in {nvars} variables")
            if sum(e) <= dmax and c:
                self.coeffs[e] = c

    @classmethod
    def one(cls, nvars: int, dmax: int) -> "MultiSeries":
        return cls(nvars, dmax, {(0,) * nvars: 1})

    @classmethod
    def from_univariate(cls, values: Sequence[Coefficient]) -> "MultiSeries":
        return cls(1, len(values) - 1, {(k,): v for k, v in enumerate(values)})

    @property
    def zero_exponent(self) -> Exponent:
        return (0,) * self.nvars

    def __getitem__(self, e: Sequence[int]) -> Coefficient:
        return self.coeffs.get(tuple(e), 0)

    def constant_term(self) -> Coefficient:
        return self[self.zero_exponent]

    def items(self) -> Iterator[Tuple[Exponent, Coefficient]]:
        """Terms sorted by total degree, then lexicographically."""
        return iter(sorted(self.coeffs.items(), key=lambda kv: (sum(kv[0]), kv[0])))

    def univariate(self) -> List[Coefficient]:
        if self.nvars != 1:
            raise SeriesError("univariate() needs a series in one variable")
        return [self[(k,)] for k in range(self.dmax + 1)]

    def min_degree(self) -> Optional[int]:
        """Lowest total degree of a nonconstant term."""
        degrees = [sum(e) for e in self.coeffs if any(e)]
        return min(degrees) if degrees else None

    def _check_shape(self, other: "MultiSeries") -> int:
        if self.nvars != other.nvars:
            raise SeriesError(f"series in {self.nvars} and {other.nvars} variables cannot be combined")
        return min(self.dmax, other.dmax)

    def __add__(self, other) -> "MultiSeries":
        if not isinstance(other, MultiSeries):
            other = MultiSeries(self.nvars, self.dmax, {self.zero_exponent: other})
        dmax = self._check_shape(other)
        coeffs = dict(self.coeffs)
        for e, c in other.coeffs.items():
            coeffs[e] = coeffs[e] + c if e in coeffs else c
        return MultiSeries(self.nvars, dmax, coeffs)

    __radd__ = __add__

    def __neg__(self) -> "MultiSeries":
        return MultiSeries(self.nvars, self.dmax, {e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other) -> "MultiSeries":
        return self + (-other)

    def __rsub__(self, other) -> "MultiSeries":
        return (-self) + other

    def scale(self, factor: Coefficient) -> "MultiSeries":
        return MultiSeries(self.nvars, self.dmax, {e: factor * c for e, c in self.coeffs.items()})

    def __mul__(self, other) -> "MultiSeries":
        if not isinstance(other, MultiSeries):
            return self.scale(other)
        dmax = self._check_shape(other)
        left = [(e, sum(e), c) for e, c in self.coeffs.items() if sum(e) <= dmax]
        right = sorted(((e, sum(e), c) for e, c in other.coeffs.items() if sum(e) <= dmax), key=lambda t: t[1])
        coeffs: Dict[Exponent, Coefficient] = {}
        for ea, da, ca in left:
            budget = dmax - da
            for eb, db, cb in right:
                if db > budget:
                    break
                e = tuple(x + y for x, y in zip(ea, eb))
                term = ca * cb
                coeffs[e] = coeffs[e] + term if e in coeffs else term
        return MultiSeries(self.nvars, dmax, coeffs)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "MultiSeries":
        if not isinstance(exponent, int):
            raise SeriesError("use series_pow for non-integer exponents")
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = MultiSeries.one(self.nvars, self.dmax)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            exponent >>= 1
            if exponent:
                base = base * base
        return result

    def _euler_weighted(self) -> Dict[Exponent, Coefficient]:
        return {e: c * sum(e) for e, c in self.coeffs.items() if any(e)}

    def inverse(self) -> "MultiSeries":
        """1/P for a series with constant term 1 (or ±1)."""
        c0 = self.constant_term()
        if c0 not in (1, -1):
            raise SeriesError(f"inverse needs constant term ±1, got {c0!r}")
        tail = (self - c0) * c0
        result = MultiSeries.one(self.nvars, self.dmax)
        power = MultiSeries.one(self.nvars, self.dmax)
        for _ in range(self.dmax):
            power = -(power * tail)
            if not power.coeffs:
                break
            result = result + power
        return result * c0

    def log(self) -> "MultiSeries":
        """log P for constant term 1, through |e|·g_e = |e|·f_e - Σ |e'|·g_e'·f_(e-e')."""
        if self.constant_term() != 1:
            raise SeriesError("log needs constant term 1")
        g: Dict[Exponent, Coefficient] = {}
        weighted: Dict[Exponent, Coefficient] = {}
        for e in self._exponents_by_degree():
            if not any(e):
                continue
            n = sum(e)
            acc = self[e] * n
            for e1, w1 in weighted.items():
                rest = tuple(a - b for a, b in zip(e, e1))
                if min(rest) < 0 or not any(rest):
                    continue
                f = self.coeffs.get(rest)
                if f:
                    acc = acc - w1 * f
            if acc:
                weighted[e] = acc
                g[e] = acc * Fraction(1, n)
        return MultiSeries(self.nvars, self.dmax, g)

    def exp(self) -> "MultiSeries":
        """exp G for a series without constant term, through |e|·f_e = Σ |e'|·g_e'·f_(e-e')."""
        if self.constant_term():
            raise SeriesError("exp needs a series without constant term")
        weighted = self._euler_weighted()
        f: Dict[Exponent, Coefficient] = {self.zero_exponent: 1}
        for e in _all_exponents(self.nvars, self.dmax):
            if not any(e):
                continue
            acc = 0
            for e1, w1 in weighted.items():
                rest = tuple(a - b for a, b in zip(e, e1))
                if min(rest) < 0:
                    continue
                prev = f.get(rest)
                if prev:
                    acc = acc + w1 * prev
            if acc:
                f[e] = acc * Fraction(1, sum(e))
        return MultiSeries(self.nvars, self.dmax, f)

    def _exponents_by_degree(self) -> List[Exponent]:
        return _all_exponents(self.nvars, self.dmax)

    def substitute_power(self, n: int) -> "MultiSeries":
        """t_i -> t_i^n for every variable."""
        if n < 1:
            raise SeriesError(f"substitution exponent must be positive, got {n}")
        return MultiSeries(self.nvars, self.dmax, {tuple(k * n for k in e): c for e, c in self.coeffs.items()})

    def map_coefficients(self, fn: Callable[[Coefficient], Coefficient]) -> "MultiSeries":
        return MultiSeries(self.nvars, self.dmax, {e: fn(c) for e, c in self.coeffs.items()})

    def specialize(self, q: int) -> "MultiSeries":
        """Evaluate every coefficient at L = q."""
        return self.map_coefficients(lambda c: eval_at(c, q))

    def truncate(self, dmax: int) -> "MultiSeries":
        return MultiSeries(self.nvars, min(dmax, self.dmax), self.coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiSeries):
            return NotImplemented
        if self.nvars != other.nvars:
            return False
        dmax = min(self.dmax, other.dmax)
        a = {e: c for e, c in self.coeffs.items() if sum(e) <= dmax}
        b = {e: c for e, c in other.coeffs.items() if sum(e) <= dmax}
        return a == b

    __hash__ = None

    def first_difference(self, other: "MultiSeries") -> Optional[Tuple[Exponent, Coefficient, Coefficient]]:
        dmax = self._check_shape(other)
        for e in _all_exponents(self.nvars, dmax):
            if self[e] != other[e]:
                return e, self[e], other[e]
        return None

    def dump_lines(self) -> List[str]:
        """One line per nonzero coefficient: comma-separated exponent, tab, coefficient."""
        return [f"{','.join(str(k) for k in e)}\t{_render(c)}" for e, c in self.items()]

    def __repr__(self) -> str:
        return f"MultiSeries(nvars={self.nvars}, dmax={self.dmax}, terms={len(self.coeffs)})"


@lru_cache(maxsize=64)
def _all_exponents_cached(nvars: int, dmax: int) -> Tuple[Exponent, ...]:
    found: List[Exponent] = []

    def rec(prefix: List[int], remaining: int, slots: int):
        if slots == 0:
            found.append(tuple(prefix))
            return
        for k in range(remaining + 1):
            rec(prefix + [k], remaining - k, slots - 1)

    rec([], dmax, nvars)
    return tuple(sorted(found, key=lambda e: (sum(e), e)))


def _all_exponents(nvars: int, dmax: int) -> List[Exponent]:
    """Every exponent of total degree ≤ dmax, by ascending total degree."""
    return list(_all_exponents_cached(nvars, dmax))


def all_exponents(nvars: int, dmax: int) -> List[Exponent]:
    return _all_exponents(nvars, dmax)


# -- Adams-type operations -------------------------------------------------------------------


def psi_n(p: Union[LPoly, int], n: int) -> LPoly:
    """L -> L^n on L-polynomials."""
    return LPoly.coerce(p).substitute_power(n)


def phi_n(p: Union[LPoly, int], n: int) -> LPoly:
    """(1/n) Σ_{d|n} μ(n/d) Ψ_d(p)."""
    if n < 1:
        raise SeriesError(f"phi_n needs n >= 1, got {n}")
    p = LPoly.coerce(p)
    total = LPoly.ZERO
    for d in divisors(n):
        m = int(mobius(n // d))
        if m:
            total = total + psi_n(p, int(d)) * m
    return total * Fraction(1, n)


@dataclass
class AdamsSequence:
    """Ψ_n and Φ_n of one class for n ≤ nmax."""

    base: LPoly
    psi: Dict[int, LPoly] = field(default_factory=dict)
    phi: Dict[int, LPoly] = field(default_factory=dict)

    @classmethod
    def of(cls, p: Union[LPoly, int], nmax: int) -> "AdamsSequence":
        p = LPoly.coerce(p)
        return cls(p, {n: psi_n(p, n) for n in range(1, nmax + 1)}, {n: phi_n(p, n) for n in range(1, nmax + 1)})

    def consistent(self) -> bool:
        """Ψ_n = Σ_{d|n} d·Φ_d for every stored n."""
        for n, psi in self.psi.items():
            total = LPoly.ZERO
            for d in divisors(n):
                total = total + self.phi[int(d)] * int(d)
            if total != psi:
                return False
        return True


# -- exponentiation --------------------------------------------------------------------------


@lru_cache(maxsize=4096)
def generalized_binomial(x: LPoly, k: int) -> LPoly:
    """x(x-1)...(x-k+1)/k!."""
    value = LPoly.ONE
    for j in range(k):
        value = value * (x - j) * Fraction(1, j + 1)
    return value


def power_product_by_blocks(p: MultiSeries, xs: Dict[int, Union[LPoly, int]], dmax: Optional[int] = None) -> MultiSeries:
    """∏_f P(t^f)^{x_f} as Σ over blocks of equal f of binom(x_f, k)·(P - 1)^k(t^f).

    Each (P - 1)^k is the sum over ordered k-tuples of nonzero exponents, so the result is the
    expansion over nondecreasing sequences f with the falling-factorial block weights.
    """
    if p.constant_term() != 1:
        raise SeriesError("power_product_by_blocks needs constant term 1")
    dmax = p.dmax if dmax is None else min(dmax, p.dmax)
    tail = (p - 1).truncate(dmax)
    low = tail.min_degree()
    result = MultiSeries.one(p.nvars, dmax)
    if low is None:
        return result
    for f, x in sorted(xs.items()):
        if f * low > dmax:
            continue
        x = LPoly.coerce(x)
        shifted = tail.substitute_power(f)
        block = MultiSeries.one(p.nvars, dmax)
        power = MultiSeries.one(p.nvars, dmax)
        k = 0
        while True:
            k += 1
            power = power * shifted
            if not power.coeffs:
                break
            block = block + power.scale(generalized_binomial(x, k))
        result = result * block
    return result


def series_pow(p: MultiSeries, x: Union[LPoly, int, Fraction], method: str = "exp-log") -> MultiSeries:
    """P^x for constant term 1 and x ∈ Q[L].

    ``method`` is ``exp-log`` (exp(x·log P)) or ``binomial`` (Σ binom(x, k)(P - 1)^k).
    """
    if p.constant_term() != 1:
        raise SeriesError("series_pow needs constant term 1")
    x = LPoly.coerce(x)
    if method == "exp-log":
        return p.map_coefficients(LPoly.coerce).log().scale(x).exp()
    if method == "binomial":
        return power_product_by_blocks(p.map_coefficients(LPoly.coerce), {1: x})
    raise SeriesError(f"unknown method '{method}', expected 'exp-log' or 'binomial'")


def euler_product_factor_bound(local: MultiSeries, dmax: int) -> int:
    """Largest n whose factor local(t^n)^{x_n} can reach total degree ≤ dmax."""
    low = (local - 1).min_degree()
    if low is None:
        return 0
    return dmax // low


def motivic_euler_product(
    local: MultiSeries, dmax: int, exponents: Optional[Callable[[int], LPoly]] = None, method: str = "exp-log"
) -> MultiSeries:
    """∏_{n≥1} local(t^n)^{Φ_n(P¹)} truncated at total degree dmax.

    ``exponents`` replaces n ↦ Φ_n(P¹); ``method`` selects the exp-log or block expansion route.
    """
    if local.constant_term() != 1:
        raise SeriesError("motivic_euler_product needs constant term 1")
    exponents = exponents or (lambda n: phi_n(P1_CLASS, n))
    local = local.map_coefficients(LPoly.coerce).truncate(dmax)
    nmax = euler_product_factor_bound(local, dmax)
    get_logger().debug(f"motivic Euler product: dmax={dmax}, {nmax} factors, method={method}", module="toricount.motivic")
    if method == "exp-log":
        g = local.log()
        total = MultiSeries(local.nvars, dmax)
        for n in range(1, nmax + 1):
            total = total + g.substitute_power(n).scale(exponents(n))
        return total.exp()
    if method == "binomial":
        return power_product_by_blocks(local, {n: exponents(n) for n in range(1, nmax + 1)}, dmax)
    raise SeriesError(f"unknown method '{method}', expected 'exp-log' or 'binomial'")


# -- Hasse-Weil zeta of P^1 ------------------------------------------------------------------


def sym_class_P1(n: int) -> LPoly:
    """[Sym^n P¹] = 1 + L + ... + L^n."""
    return LPoly.from_dict({k: 1 for k in range(n + 1)})


def hw_zeta_P1(dmax: int) -> MultiSeries:
    return MultiSeries.from_univariate([sym_class_P1(n) for n in range(dmax + 1)])


def hw_zeta_point(dmax: int) -> MultiSeries:
    return MultiSeries.from_univariate([LPoly.ONE] * (dmax + 1))


@dataclass(frozen=True)
class PowerIdentityReport:
    variety: str
    dmax: int
    ok: bool
    first_mismatch: Optional[Tuple[Exponent, Coefficient, Coefficient]] = None


_HW_ZETAS: Dict[str, Tuple[LPoly, Callable[[int], MultiSeries]]] = {
    "P1": (P1_CLASS, hw_zeta_P1),
    "point": (LPoly.ONE, hw_zeta_point),
}


def verify_power_identity(dmax: int, variety: str = "P1") -> PowerIdentityReport:
    """Compare Z_HW(X, t) with ∏_n (1 - t^n)^{-Φ_n(X)} up to t^dmax for X = P1 or a point."""
    if variety not in _HW_ZETAS:
        raise SeriesError(f"unknown variety '{variety}', expected one of {sorted(_HW_ZETAS)}")
    cls, zeta = _HW_ZETAS[variety]
    lhs = zeta(dmax)
    one_minus_t = MultiSeries.from_univariate([1, -1] + [0] * max(dmax - 1, 0)).truncate(dmax)
    rhs = motivic_euler_product(one_minus_t, dmax, exponents=lambda n: -phi_n(cls, n))
    mismatch = lhs.first_difference(rhs)
    return PowerIdentityReport(variety, dmax, mismatch is None, mismatch)


def series_from_table(nvars: int, dmax: int, table: Iterable[Tuple[Exponent, Coefficient]]) -> MultiSeries:
    return MultiSeries(nvars, dmax, dict(table))
