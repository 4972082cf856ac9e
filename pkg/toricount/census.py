"""Counting morphisms P¹ → X of fixed multidegree, their degree zeta functions and leading constants.

A degree class y is a vector in Z^I; ⟨y, D_i⟩ = y_i. Counts over F_q come from the Möbius
formula with the aggregated coefficients m_q(d), classes in L from the motivic coefficients
μ^mot(d), and the oracle enumerates tuples of binary forms directly.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil
from typing import Dict, List, Optional, Sequence, Tuple, Union

from toricount.forms import BinaryForm, check_budget, count_nonzero_forms, have_common_root, nonzero_forms
from toricount.lattice import dot, specialize_zeta
from toricount.logger import get_logger
from toricount.lpoly import InexactDivisionError, LPoly, LPolyError, RatFuncL, TailSeries, geom_inverse, virtual_dim
from toricount.moebius import (
    DEFAULT_BUDGET,
    Mu0Table,
    closed_points_P1,
    euler_product_fq,
    finite_product_form,
    mu0,
    mu_aggregate_fq,
    mu_motivic,
    mu_motivic_closed,
)
from toricount.motivic import MultiSeries, motivic_euler_product
from toricount.toric import DegreeClass, ToricVariety

Row = Union[int, LPoly]

CONTROL_SLACK = Fraction(5, 4)
EULER_EXACT_POINTS = 2000


class CensusError(Exception):
    """Raised for invalid count requests and for broken exactness invariants."""

    pass


@dataclass(frozen=True)
class CountReport:
    y: DegreeClass
    q: int
    count: int
    class_L: Optional[LPoly]
    expected_dim: int

    @property
    def leading_coeff(self) -> Optional[Fraction]:
        return None if self.class_L is None else self.class_L.leading_coeff()

    def consistent(self) -> bool:
        """count = class(q), degree = expected dimension and unit leading coefficient."""
        if self.class_L is None:
            return True
        return (
            self.class_L.evaluate(self.q) == self.count
            and self.class_L.degree() == self.expected_dim
            and self.class_L.leading_coeff() == 1
        )


@dataclass
class ZetaTable:
    x: Tuple[int, ...]
    rows: Dict[int, Row] = field(default_factory=dict)
    q: Optional[int] = None

    def coefficients(self) -> List[Row]:
        return [self.rows.get(d, 0) for d in range(max(self.rows, default=-1) + 1)]


def _in_domain(X: ToricVariety, y: Sequence[int]) -> bool:
    return X.is_effective_dual(y)


def _leq(d: Sequence[int], y: Sequence[int]) -> bool:
    return all(a <= b for a, b in zip(d, y))


def _projective_count(q: int, e: Sequence[int]) -> int:
    value = 1
    for k in e:
        value *= (q ** (k + 1) - 1) // (q - 1)
    return value


def count_closed_form(X: ToricVariety, y: Sequence[int], q: int, mu: Optional[MultiSeries] = None) -> int:
    """(q - 1)^dim X Σ_{0 ≤ d ≤ y} m_q(d)·#P^(y-d)(F_q); 0 outside Eff^∨ ∩ Pic^∨."""
    y = tuple(y)
    if not _in_domain(X, y):
        return 0
    mu = mu if mu is not None else mu_aggregate_fq(X, q, sum(y))
    if mu.dmax < sum(y):
        raise CensusError(f"Möbius series truncated at {mu.dmax}, need {sum(y)}")
    total = 0
    for d, m in mu.coeffs.items():
        if _leq(d, y):
            total += int(m) * _projective_count(q, [b - a for a, b in zip(d, y)])
    return (q - 1) ** X.n * total


def motivic_class(X: ToricVariety, y: Sequence[int], mu_mot: Optional[MultiSeries] = None) -> LPoly:
    """(L - 1)^(dim X - #I) Σ μ^mot(d) ∏ (L^(y_i - d_i + 1) - 1)."""
    y = tuple(y)
    if not _in_domain(X, y):
        return LPoly.ZERO
    mu_mot = mu_mot if mu_mot is not None else motivic_coefficients(X, sum(y))
    if mu_mot.dmax < sum(y):
        raise CensusError(f"motivic Möbius series truncated at {mu_mot.dmax}, need {sum(y)}")
    total = LPoly.ZERO
    for d, m in mu_mot.coeffs.items():
        if _leq(d, y):
            term = LPoly.coerce(m)
            for a, b in zip(d, y):
                term = term * (LPoly.monomial(b - a + 1) - 1)
            total = total + term
    try:
        return total.exquo((LPoly.L - 1) ** X.pic_rank)
    except InexactDivisionError as e:
        raise CensusError(f"class of degree {list(y)} is not a polynomial: {e}")


def motivic_coefficients(X: ToricVariety, dmax: int, table: Optional[Mu0Table] = None) -> MultiSeries:
    """μ^mot up to total degree dmax, from the finite product form when it exists."""
    table = table or mu0(X)
    collections = finite_product_form(X, table)
    if collections is not None:
        return mu_motivic_closed(X, dmax, collections)
    return mu_motivic(X, dmax, table=table)


def count_report(
    X: ToricVariety,
    y: Sequence[int],
    q: int,
    mu: Optional[MultiSeries] = None,
    mu_mot: Optional[MultiSeries] = None,
    with_class: bool = True,
) -> CountReport:
    y = tuple(y)
    count = count_closed_form(X, y, q, mu)
    class_L = motivic_class(X, y, mu_mot) if with_class else None
    return CountReport(y, q, count, class_L, X.morphism_dimension(y))


# -- brute force -----------------------------------------------------------------------------


def _search(
    forms_by_index: List[List[Tuple[int, ...]]],
    checks: Dict[int, List[Tuple[int, ...]]],
    q: int,
    chosen: List[BinaryForm],
) -> int:
    index = len(chosen)
    if index == len(forms_by_index):
        return 1
    total = 0
    for coeffs in forms_by_index[index]:
        chosen.append(BinaryForm(q, coeffs))
        if all(not have_common_root([chosen[i] for i in c]) for c in checks.get(index, [])):
            total += _search(forms_by_index, checks, q, chosen)
        chosen.pop()
    return total


def _count_chunk(args) -> int:
    first_forms, rest, checks, q = args
    return _search([first_forms] + rest, checks, q, [])


def bruteforce_count(X: ToricVariety, y: Sequence[int], q: int, budget: int = DEFAULT_BUDGET, jobs: int = 1) -> int:
    """#H_y(F_q)/(q - 1)^rk Pic over tuples of nonzero forms coprime along every primitive collection.

    Raises:
        BudgetError: when ∏ (q^(y_i + 1) - 1) exceeds ``budget``.
        CensusError: when the torsor count is not divisible by (q - 1)^rk Pic.
    """
    y = tuple(y)
    if not _in_domain(X, y):
        return 0
    visits = 1
    for k in y:
        visits *= count_nonzero_forms(q, k)
    check_budget(visits, budget, f"bruteforce_count{y} over F_{q}")
    forms = [[f.coeffs for f in nonzero_forms(q, k)] for k in y]
    checks: Dict[int, List[Tuple[int, ...]]] = {}
    for c in X.primitive_collections():
        if all(y[i] > 0 for i in c):
            checks.setdefault(max(c), []).append(c)
    log = get_logger()
    log.info(f"bruteforce_count y={list(y)} q={q}: {visits} tuples, jobs={jobs}", module="toricount.census")
    with log.timed(f"bruteforce_count y={list(y)} q={q}", module="toricount.census"):
        if jobs > 1 and len(forms[0]) > 1:
            size = ceil(len(forms[0]) / jobs)
            chunks = [(forms[0][i : i + size], forms[1:], checks, q) for i in range(0, len(forms[0]), size)]
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                torsor = sum(pool.map(_count_chunk, chunks))
        else:
            torsor = _search(forms, checks, q, [])
    scalars = (q - 1) ** X.pic_rank
    if torsor % scalars:
        raise CensusError(f"torsor count {torsor} is not divisible by (q - 1)^{X.pic_rank}")
    return torsor // scalars


# -- degree zeta -----------------------------------------------------------------------------


def degree_zeta(X: ToricVariety, x: Sequence[int], nmax: int, q: Optional[int] = None) -> ZetaTable:
    """Row d = Σ over degree classes with ⟨y, x⟩ = d of the count over F_q, or of the class in L when q is None."""
    x = tuple(x)
    levels = {d: X.degree_classes_of_height(x, d) for d in range(nmax + 1)}
    top = max((sum(y) for ys in levels.values() for y in ys), default=0)
    table = ZetaTable(x, q=q)
    if q is None:
        mu_mot = motivic_coefficients(X, top)
        for d, ys in levels.items():
            row = LPoly.ZERO
            for y in ys:
                row = row + motivic_class(X, y, mu_mot)
            table.rows[d] = row
    else:
        mu = mu_aggregate_fq(X, q, top)
        for d, ys in levels.items():
            table.rows[d] = sum(count_closed_form(X, y, q, mu) for y in ys)
    return table


def cone_counts(X: ToricVariety, x: Sequence[int], nmax: int) -> List[int]:
    """#{y ∈ Eff^∨ ∩ Pic^∨ : ⟨y, x⟩ = d} for d ≤ nmax, from the specialized cone zeta."""
    return specialize_zeta(X.dual_effective_zeta, x).coefficients(nmax)


# -- leading constants -----------------------------------------------------------------------


def _support_degree(collections: Sequence[Tuple[int, ...]]) -> int:
    return 2 * sum(len(c) for c in collections)


def _majorant_tail(q: int, s: int, dmax: int) -> Fraction:
    """Bound for Σ_{|d| > dmax} |m_q(d)| q^(-|d|) through the majorant ∏_m (1 + S s^(2m))^(q^m + 1) at s = r."""
    r = Fraction(5, 4 * q)
    rho = r * r
    log_bound = s * (q * rho / (1 - q * rho) + rho / (1 - rho))
    majorant = Fraction(3) ** ceil(log_bound)
    ratio = 1 / (q * r)
    return majorant * ratio ** (dmax + 1) / (1 - ratio)


def c_fin(X: ToricVariety, q: int, dmax: int, table: Optional[Mu0Table] = None) -> Tuple[Fraction, Fraction]:
    """q^dim X/(1 - q^-1)^rk Pic · Σ_{|d| ≤ dmax} m_q(d) q^-|d|, with a bound on the omitted tail."""
    if dmax < 2:
        raise CensusError(f"c_fin needs dmax >= 2, got {dmax}")
    table = table or mu0(X)
    series = euler_product_fq(table.collapsed(dmax), q, dmax)
    partial = sum((Fraction(int(c)) / q**e[0] for e, c in series.coeffs.items()), Fraction(0))
    scale = Fraction(q) ** X.n / (1 - Fraction(1, q)) ** X.pic_rank
    collections = finite_product_form(X, table)
    if collections is not None and dmax >= _support_degree(collections):
        tail = Fraction(0)
    else:
        weight = sum(abs(v) for n, v in table.support().items() if any(n))
        tail = scale * _majorant_tail(q, weight, dmax)
    return scale * partial, tail


def c_fin_euler(X: ToricVariety, q: int, mmax: int, table: Optional[Mu0Table] = None) -> Tuple[Fraction, Optional[Fraction]]:
    """q^dim X/(1 - q^-1)^rk Pic times the product over closed points P of degree ≤ mmax of
    (1 - q^-deg)^rk Pic · #X(κ_P)/q^(deg·dim X).

    Degrees with more than EULER_EXACT_POINTS closed points are left out of the exact product and
    accounted for in the bound, which is None when the geometric estimate does not apply yet.
    """
    table = table or mu0(X)
    cls = X.class_of_X()
    numerator, exponent = 1, 0
    last = 0
    for m in range(1, mmax + 1):
        points = closed_points_P1(q, m)
        if points > EULER_EXACT_POINTS:
            get_logger().debug(f"c_fin_euler: degrees {m}..{mmax} go into the tail bound", module="toricount.census")
            break
        qm = q**m
        numerator *= ((qm - 1) ** X.pic_rank * int(cls.evaluate(qm))) ** points
        exponent += m * (X.pic_rank + X.n) * points
        last = m
    scale = Fraction(q) ** X.n / (1 - Fraction(1, q)) ** X.pic_rank
    value = scale * Fraction(numerator, q**exponent)
    weight = sum(abs(v) for n, v in table.support().items() if any(n))
    delta = Fraction(4 * weight, q**last * (q - 1))
    if weight * Fraction(1, q ** (2 * (last + 1))) > Fraction(1, 2) or delta >= 1:
        return value, None
    return value, abs(value) * delta / (1 - delta)


def c_mot(X: ToricVariety, precision: int, table: Optional[Mu0Table] = None) -> TailSeries:
    """L^dim X/(1 - L^-1)^rk Pic · Σ μ^mot(d) L^-|d|, exact for a finite product form."""
    table = table or mu0(X)
    collections = finite_product_form(X, table)
    one_minus = RatFuncL(LPoly.ONE - LPoly.monomial(-1))
    if collections is not None:
        value = RatFuncL(LPoly.monomial(X.n))
        for c in collections:
            value = value * RatFuncL((LPoly.ONE - LPoly.monomial(-len(c))) * (LPoly.ONE - LPoly.monomial(1 - len(c))))
        value = value / one_minus**X.pic_rank
        if value.is_lpoly():
            return TailSeries.exact(value.to_lpoly())
        return value.expand(precision)
    # |d| > dmax contributes only below L^(-(dmax+1)/2)
    dmax = max(2, 2 * (X.n - precision) + 1)
    series = motivic_euler_product(table.collapsed(dmax), dmax)
    known = LPoly.ZERO
    for (k,), c in series.coeffs.items():
        known = known + LPoly.coerce(c) * LPoly.monomial(-k)
    total = TailSeries(known, (-(dmax + 1)) // 2 + 1)
    total = total * TailSeries.exact(LPoly.monomial(X.n))
    for _ in range(X.pic_rank):
        total = total * geom_inverse(1, precision - X.n)
    get_logger().debug(f"c_mot via truncated Euler product: dmax={dmax}", module="toricount.census")
    return total.truncate(precision)


# -- convergence and controlledness ----------------------------------------------------------


@dataclass
class ConvergenceReport:
    ray: DegreeClass
    q: int
    rows: List[Tuple[int, DegreeClass, int, Fraction]]
    limit: Fraction
    c_fin: Fraction
    regime: str


def ray_limit(X: ToricVariety, q: int, ray: Sequence[int], dmax: int, table: Optional[Mu0Table] = None) -> Fraction:
    """lim_n #Mor(n·ray)·q^(-n⟨ray, ω⟩), with μ⁰ restricted to the rays where ``ray`` is positive."""
    table = table or mu0(X)
    positive = [i for i, c in enumerate(ray) if c > 0]
    restricted = Mu0Table(
        X.num_rays, {n: v for n, v in table.support().items() if all(n[i] == 0 or i in positive for i in range(X.num_rays))}
    )
    series = euler_product_fq(restricted.collapsed(dmax), q, dmax)
    partial = sum((Fraction(int(c)) / q**e[0] for e, c in series.coeffs.items()), Fraction(0))
    zeros = X.num_rays - len(positive)
    return Fraction(q - 1) ** (X.n - X.num_rays + zeros) * Fraction(q) ** len(positive) * partial


def convergence_report(X: ToricVariety, q: int, ray: Sequence[int], steps: int, dmax: int = 12) -> ConvergenceReport:
    """Normalized counts #Mor(n·ray)·q^(-⟨n·ray, ω⟩) for n = 1..steps and their limit."""
    ray = tuple(ray)
    if not X.is_effective_dual(ray):
        raise CensusError(f"{list(ray)} is not in Eff^∨ ∩ Pic^∨")
    table = mu0(X)
    mu = mu_aggregate_fq(X, q, steps * sum(ray), table)
    rows = []
    for n in range(1, steps + 1):
        y = tuple(n * c for c in ray)
        count = count_closed_form(X, y, q, mu)
        rows.append((n, y, count, Fraction(count, q ** sum(y))))
    constant, _ = c_fin(X, q, dmax, table)
    regime = "interior" if all(c > 0 for c in ray) else "boundary"
    return ConvergenceReport(ray, q, rows, ray_limit(X, q, ray, dmax, table), constant, regime)


@dataclass(frozen=True)
class ControlReport:
    bounded: bool
    sup_observed: Fraction
    monotone: bool


def control_check(values: Sequence[Fraction], rho: Fraction, d_order: int) -> ControlReport:
    """Numeric proxy for (ρ, d)-control of Σ a_n t^n: the statistic |a_n|·n^(1-d)·ρ^n on nonzero entries.

    ``bounded``: the maximum over the last third of the window is at most 5/4 of the maximum over
    the first two thirds. ``monotone``: the same comparison without slack. It is not a termwise
    test; the statistic of a height zeta difference oscillates with the period of the cone levels.

    ``d_order = 0`` is accepted and weights by n, the statistic used for Picard rank one. The
    equivalence with boundedness of the series holds only from ``d_order = 1`` on.
    """
    if d_order < 0:
        raise CensusError(f"d_order must be >= 0, got {d_order}")
    rho = Fraction(rho)
    stats = [abs(Fraction(a)) * rho**n * Fraction(n) ** (1 - d_order) for n, a in enumerate(values) if n >= 1 and a]
    if len(stats) < 3:
        raise CensusError("control_check needs at least three nonzero entries")
    cut = (2 * len(stats)) // 3
    head, tail = max(stats[:cut]), max(stats[cut:])
    return ControlReport(tail <= CONTROL_SLACK * head, max(stats), tail <= head)


def zeta_difference(X: ToricVariety, q: int, x: Sequence[int], nmax: int, dmax: int = 12) -> List[Fraction]:
    """Rows of the degree zeta minus c_fin·q^d times the cone counts of Eff^∨ at level d."""
    table = degree_zeta(X, x, nmax, q)
    constant, _ = c_fin(X, q, dmax)
    counts = cone_counts(X, x, nmax)
    return [Fraction(table.rows[d]) - constant * q**d * counts[d] for d in range(nmax + 1)]


@dataclass
class MotivicDimReport:
    rows: List[Tuple[int, float, Optional[float]]]
    threshold: Optional[int]
    bound: int


def motivic_dim_check(X: ToricVariety, nmax: int, x: Optional[Sequence[int]] = None, precision: int = -12) -> MotivicDimReport:
    """virtual_dim of each motivic zeta row and of the row minus c_mot·L^d·(cone count), the latter shifted by -d.

    ``threshold`` is the first level from which every difference stays at most dim X - 1.
    """
    x = tuple(x) if x is not None else X.omega
    zeta = degree_zeta(X, x, nmax)
    constant = c_mot(X, precision)
    counts = cone_counts(X, x, nmax)
    rows = []
    for d in range(nmax + 1):
        row = zeta.rows[d]
        diff = TailSeries.exact(row) - constant * TailSeries.exact(LPoly.monomial(d, counts[d]))
        try:
            dim_diff: Optional[float] = virtual_dim(diff) - d
        except LPolyError:
            dim_diff = None
        rows.append((d, virtual_dim(row), dim_diff))
    bound = X.n - 1
    threshold = None
    for d in range(nmax, -1, -1):
        value = rows[d][2]
        if value is None or value > bound:
            break
        threshold = d
    return MotivicDimReport(rows, threshold, bound)


# -- BlP^2 fixture ---------------------------------------------------------------------------


def _mu_blowup(k: int) -> LPoly:
    return {0: LPoly.ONE, 1: -(LPoly.ONE + LPoly.L), 2: LPoly.L}[k]


def blowup_normalized_class(y0: int, yE: int) -> LPoly:
    """L^(-⟨y, ω⟩)[Mor] for the blown-up plane and y = (y0, y0, y0 + yE, yE), as a double sum over d0, dE ≤ 2."""
    if y0 < 0 or yE < 0:
        return LPoly.ZERO
    total = LPoly.ZERO
    for d0 in range(min(2, y0) + 1):
        for dE in range(min(2, yE) + 1):
            term = _mu_blowup(d0) * _mu_blowup(dE) * LPoly.monomial(-2 * d0 - 2 * dE)
            term = term * (LPoly.ONE - LPoly.monomial(-1 + dE - yE))
            term = term * (LPoly.ONE - LPoly.monomial(-1 + dE - yE - y0))
            term = term * (LPoly.ONE - LPoly.monomial(-1 + d0 - y0)) ** 2
            total = total + term
    return (total * LPoly.monomial(4)).exquo((LPoly.L - 1) ** 2)


def blowup_degree(y0: int, yE: int) -> DegreeClass:
    return (y0, y0, y0 + yE, yE)


def height(y: Sequence[int], x: Sequence[int]) -> int:
    return dot(y, x)
