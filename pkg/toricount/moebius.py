"""Möbius functions attached to the primitive collections of a toric variety.

μ⁰ lives on {0,1}^I, μ_X on tuples of effective divisors of P¹, and the aggregated
coefficients m_q(d) / μ^mot(d) are the coefficients of Euler products of the local series
Σ μ⁰(n) t^n. Every aggregate is available through two independent routes.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

import sympy
from sympy import divisors
from sympy.functions.combinatorial.numbers import mobius
from sympy.polys.polyfuncs import interpolate

from toricount.forms import ClosedPoint, check_budget, count_projective_forms, have_common_root, projective_forms
from toricount.logger import get_logger
from toricount.lpoly import LPoly
from toricount.motivic import MultiSeries, all_exponents, motivic_euler_product
from toricount.toric import ToricVariety

Exponent = Tuple[int, ...]
DivisorTuple = Sequence[Dict[ClosedPoint, int]]

DEFAULT_BUDGET = 100_000_000

_L = sympy.Symbol("L")


class MoebiusError(Exception):
    """Raised when a Möbius computation breaks an integrality or interpolation requirement."""

    pass


@dataclass(frozen=True)
class Mu0Table:
    """μ⁰ on {0,1}^I, indexed by the 0/1 vector; entries outside {0,1}^I read as 0."""

    num_rays: int
    values: Dict[Exponent, int]

    def __getitem__(self, n: Sequence[int]) -> int:
        n = tuple(n)
        if len(n) != self.num_rays:
            raise MoebiusError(f"vector of length {len(n)}, expected {self.num_rays}")
        if any(c not in (0, 1) for c in n):
            return 0
        return self.values.get(n, 0)

    def support(self) -> Dict[Exponent, int]:
        return {n: v for n, v in self.values.items() if v}

    def as_series(self, dmax: int) -> MultiSeries:
        return MultiSeries(self.num_rays, dmax, self.support())

    def collapsed(self, dmax: int) -> MultiSeries:
        """The local series with every t_i set to one variable s: Σ μ⁰(n) s^|n|."""
        coeffs: Dict[Exponent, int] = {}
        for n, v in self.support().items():
            key = (sum(n),)
            coeffs[key] = coeffs.get(key, 0) + v
        return MultiSeries(1, dmax, coeffs)

    def class_sum(self) -> LPoly:
        """Σ_n μ⁰(n) L^(#I - |n|)."""
        total = LPoly.ZERO
        for n, v in self.support().items():
            total = total + LPoly.monomial(self.num_rays - sum(n), v)
        return total


def _vector(mask: int, size: int) -> Exponent:
    return tuple((mask >> i) & 1 for i in range(size))


def face_indicator(X: ToricVariety) -> List[int]:
    """S(mask) = 1 when the rays in ``mask`` span a cone of the fan (the empty set included)."""
    size = X.num_rays
    return [1 if X.is_face(i for i in range(size) if (mask >> i) & 1) else 0 for mask in range(1 << size)]


def mu0_from_indicator(size: int, indicator: Sequence[int]) -> Mu0Table:
    """Subset Möbius transform of a face indicator given on bitmasks."""
    values = list(indicator)
    for i in range(size):
        bit = 1 << i
        for mask in range(1 << size):
            if mask & bit:
                values[mask] -= values[mask ^ bit]
    return Mu0Table(size, {_vector(mask, size): v for mask, v in enumerate(values)})


def mu0(X: ToricVariety) -> Mu0Table:
    """μ⁰(n) = Σ_{n' ≤ n} (-1)^(|n| - |n'|) S(n'), by a subset Möbius transform of the face indicator."""
    return mu0_from_indicator(X.num_rays, face_indicator(X))


def mu0_closed_form(X: ToricVariety, max_collections: int = 20) -> Mu0Table:
    """μ⁰(n) = Σ over sets A of primitive collections with ∪A = n of (-1)^|A|."""
    collections = [sum(1 << i for i in c) for c in X.primitive_collections()]
    if len(collections) > max_collections:
        raise MoebiusError(f"{len(collections)} primitive collections, closed form capped at {max_collections}")
    size = X.num_rays
    values: Dict[int, int] = {}
    for k in range(len(collections) + 1):
        for chosen in combinations(collections, k):
            union = 0
            for c in chosen:
                union |= c
            values[union] = values.get(union, 0) + (-1) ** k
    return Mu0Table(size, {_vector(mask, size): values.get(mask, 0) for mask in range(1 << size)})


def printed_sign_form(X: ToricVariety) -> Dict[Exponent, int]:
    """(-1)^#{primitive collections ≤ n} on unions of primitive collections, 0 elsewhere.

    Agrees with μ⁰ when every union has a unique cover by primitive collections; differs for
    the hexagon fan.
    """
    collections = [frozenset(c) for c in X.primitive_collections()]
    unions = {frozenset()}
    for c in collections:
        unions |= {u | c for u in unions}
    result = {}
    for u in unions:
        inside = sum(1 for c in collections if c <= u)
        result[tuple(1 if i in u else 0 for i in range(X.num_rays))] = (-1) ** inside
    return result


def partial_sums_match_faces(X: ToricVariety, table: Mu0Table) -> bool:
    """Σ_{n' ≤ n} μ⁰(n') is 1 exactly on faces (and n = 0), 0 elsewhere."""
    size = X.num_rays
    sums = [table[_vector(mask, size)] for mask in range(1 << size)]
    for i in range(size):
        bit = 1 << i
        for mask in range(1 << size):
            if mask & bit:
                sums[mask] += sums[mask ^ bit]
    return sums == face_indicator(X)


def check_class_identity(X: ToricVariety, table: Optional[Mu0Table] = None) -> bool:
    """Σ_n μ⁰(n) L^(#I - |n|) = (L - 1)^rk Pic · [X]."""
    table = table or mu0(X)
    return table.class_sum() == (LPoly.L - 1) ** X.pic_rank * X.class_of_X()


def finite_product_form(X: ToricVariety, table: Optional[Mu0Table] = None) -> Optional[List[Tuple[int, ...]]]:
    """The primitive collections J when Σ μ⁰(n) t^n = ∏_J (1 - t^J), else None."""
    table = table or mu0(X)
    collections = X.primitive_collections()
    seen: set = set()
    for c in collections:
        if seen & set(c):
            return None
        seen |= set(c)
    expected: Dict[Exponent, int] = {}
    for k in range(len(collections) + 1):
        for chosen in combinations(collections, k):
            vector = tuple(1 if any(i in c for c in chosen) else 0 for i in range(X.num_rays))
            expected[vector] = (-1) ** k
    return collections if expected == table.support() else None


# -- finite-field aggregates -----------------------------------------------------------------


def closed_points_P1(q: int, m: int) -> int:
    """Number of closed points of degree m on P¹ over F_q."""
    if m < 1:
        raise MoebiusError(f"degree must be >= 1, got {m}")
    total = sum(int(mobius(e)) * (q ** (m // e) + 1) for e in divisors(m))
    return total // m


def _integer_block(tail: MultiSeries, exponent: int) -> MultiSeries:
    """(1 + tail)^exponent = Σ_k C(exponent, k) tail^k for a nonnegative integer exponent."""
    block = MultiSeries.one(tail.nvars, tail.dmax)
    power = MultiSeries.one(tail.nvars, tail.dmax)
    for k in range(1, exponent + 1):
        power = power * tail
        if not power.coeffs:
            break
        block = block + power.scale(comb(exponent, k))
    return block


def euler_product_fq(local: MultiSeries, q: int, dmax: int) -> MultiSeries:
    """∏_{m≥1} local(t^m)^(b_m) truncated at total degree dmax, b_m the degree-m closed points of P¹."""
    tail = local.truncate(dmax) - 1
    low = tail.min_degree()
    result = MultiSeries.one(local.nvars, dmax)
    if low is None:
        return result
    with get_logger().timed(f"Euler product over F_{q} dmax={dmax}", module="toricount.moebius"):
        for m in range(1, dmax // low + 1):
            result = result * _integer_block(tail.substitute_power(m), closed_points_P1(q, m))
    return result


def mu_aggregate_fq(X: ToricVariety, q: int, dmax: int, table: Optional[Mu0Table] = None) -> MultiSeries:
    """m_q(d) = Σ_{D ∈ P^d(F_q)} μ_X(D) as the coefficients of ∏_m (Σ μ⁰(n) t^(m·n))^(b_m)."""
    table = table or mu0(X)
    return euler_product_fq(table.as_series(dmax), q, dmax)


def mu_divisor(table: Mu0Table, divisor: DivisorTuple) -> int:
    """∏ over closed points P of μ⁰((ord_P D_i)_i); 0 as soon as some multiplicity is ≥ 2."""
    points = set()
    for d in divisor:
        points |= set(d)
    value = 1
    for point in points:
        n = tuple(d.get(point, 0) for d in divisor)
        if any(c >= 2 for c in n):
            return 0
        value *= table[n]
        if not value:
            return 0
    return value


def bruteforce_mu_aggregate(
    X: ToricVariety, q: int, d: Sequence[int], budget: int = DEFAULT_BUDGET, table: Optional[Mu0Table] = None
) -> int:
    """Σ μ_X(D) over tuples of effective divisors of multidegree d, enumerated as forms up to scalars."""
    table = table or mu0(X)
    visits = 1
    for k in d:
        visits *= count_projective_forms(q, k)
    check_budget(visits, budget, f"bruteforce_mu_aggregate{tuple(d)} over F_{q}")
    get_logger().debug(f"bruteforce_mu_aggregate d={list(d)} q={q}: {visits} tuples", module="toricount.moebius")
    divisors_by_degree = {k: [f.closed_points() for f in projective_forms(q, k)] for k in set(d)}
    total = 0
    for divisor in product(*(divisors_by_degree[k] for k in d)):
        total += mu_divisor(table, divisor)
    return total


# -- motivic coefficients --------------------------------------------------------------------


def _assert_integral(series: MultiSeries) -> MultiSeries:
    for e, c in series.coeffs.items():
        if not LPoly.coerce(c).is_integral():
            raise MoebiusError(f"non-integral motivic coefficient at {e}: {c!r}")
    return series


def mu_motivic(X: ToricVariety, dmax: int, method: str = "exp-log", table: Optional[Mu0Table] = None) -> MultiSeries:
    """μ^mot(d) for |d| ≤ dmax from the motivic Euler product ∏_n (Σ μ⁰(n) t^(n·k))^(Φ_n(P¹))."""
    table = table or mu0(X)
    with get_logger().timed(f"mu_motivic dmax={dmax} method={method}", module="toricount.moebius"):
        series = motivic_euler_product(table.as_series(dmax), dmax, method=method)
    return _assert_integral(series)


def mu_motivic_closed(X: ToricVariety, dmax: int, collections: Sequence[Tuple[int, ...]]) -> MultiSeries:
    """∏_J (1 - (1+L) t^J + L t^(2J)) for pairwise disjoint primitive collections J."""
    result = MultiSeries.one(X.num_rays, dmax)
    for c in collections:
        j = tuple(1 if i in c else 0 for i in range(X.num_rays))
        factor = MultiSeries(
            X.num_rays,
            dmax,
            {(0,) * X.num_rays: LPoly.ONE, j: -(LPoly.ONE + LPoly.L), tuple(2 * k for k in j): LPoly.L},
        )
        result = result * factor
    return result


def projective_tuple_class(e: Sequence[int]) -> LPoly:
    """[P^e] = ∏ (1 + L + ... + L^(e_i))."""
    value = LPoly.ONE
    for k in e:
        value = value * LPoly.from_dict({j: 1 for j in range(k + 1)})
    return value


def count_PX(X: ToricVariety, q: int, d: Sequence[int], budget: int = DEFAULT_BUDGET) -> int:
    """#P_X^d(F_q): tuples of forms up to per-coordinate scalars, coprime along every primitive collection."""
    visits = 1
    for k in d:
        visits *= count_projective_forms(q, k)
    check_budget(visits, budget, f"count_PX{tuple(d)} over F_{q}")
    collections = [c for c in X.primitive_collections() if all(d[i] > 0 for i in c)]
    forms_by_degree = {k: list(projective_forms(q, k)) for k in set(d)}
    total = 0
    for forms in product(*(forms_by_degree[k] for k in d)):
        if all(not have_common_root([forms[i] for i in c]) for c in collections):
            total += 1
    return total


def interpolate_class(points: Sequence[Tuple[int, int]]) -> LPoly:
    """Interpolating polynomial through (q, count) pairs, required to have integer coefficients."""
    if len(points) == 1:
        value = LPoly.constant(points[0][1])
    else:
        value = LPoly.from_expr(interpolate(list(points), _L), _L)
    if not value.is_integral():
        raise MoebiusError(f"interpolation through {list(points)} is not integral: {value!r}")
    return value


def _checked_interpolant(X: ToricVariety, d: Exponent, primes: Sequence[int], budget: int) -> LPoly:
    *fit, extra = primes
    value = interpolate_class([(q, count_PX(X, q, d, budget)) for q in fit])
    predicted, count = value.evaluate(extra), count_PX(X, extra, d, budget)
    if predicted != count:
        raise MoebiusError(f"[P_X^{list(d)}] through primes {fit} predicts {predicted} over F_{extra}, counted {count}")
    return value


def mu_motivic_from_definition(
    X: ToricVariety, dmax: int, primes: Sequence[int], budget: int = DEFAULT_BUDGET
) -> MultiSeries:
    """μ^mot from [P_X^d] = Σ_{d' ≤ d} μ^mot(d')·[P^(d-d')], solved by induction on |d|.

    Each [P_X^d] is interpolated from brute-force counts at the first |d| + 1 primes and checked
    against the count at the next one.

    Raises:
        MoebiusError: when fewer than dmax + 2 primes are given, or a count is off its interpolant.
    """
    if len(primes) < dmax + 2:
        raise MoebiusError(f"need {dmax + 2} primes to interpolate and check degree {dmax}, got {len(primes)}")
    mu: Dict[Exponent, LPoly] = {}
    for d in all_exponents(X.num_rays, dmax):
        value = _checked_interpolant(X, d, primes[: sum(d) + 2], budget)
        for d1, m in mu.items():
            if all(a <= b for a, b in zip(d1, d)):
                value = value - m * projective_tuple_class([b - a for a, b in zip(d1, d)])
        mu[d] = value
        get_logger().debug(f"mu_motivic_from_definition d={list(d)}: {value!r}", module="toricount.moebius")
    return _assert_integral(MultiSeries(X.num_rays, dmax, mu))


def dimension_bound_holds(series: MultiSeries) -> bool:
    """virtual_dim(μ^mot(d)) ≤ |d|/2 for every stored coefficient."""
    for e, c in series.coeffs.items():
        degree = LPoly.coerce(c).degree()
        if degree is not None and Fraction(degree) > Fraction(sum(e), 2):
            return False
    return True
