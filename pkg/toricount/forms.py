"""Binary forms over prime fields: the atoms of every brute-force oracle.

A form of degree d is stored as its d+1 coefficients in ascending powers of u, the entry k being
the coefficient of u^k v^(d-k). Polynomial arithmetic goes through sympy's dense GF(p) routines
on the dehomogenization at v = 1 (sympy lists are in descending order).
"""

from dataclasses import dataclass
from itertools import product
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_factor, gf_gcd, gf_monic, gf_mul, gf_rem, gf_quo, gf_strip

INFINITY = "inf"

ClosedPoint = Union[Tuple[int, ...], str]


class BudgetError(Exception):
    """Raised when a brute-force enumeration would exceed its visit budget."""

    pass


def check_budget(visits: int, budget: int, what: str) -> None:
    if visits > budget:
        raise BudgetError(f"{what} needs {visits} visits, budget is {budget}")


def point_degree(point: ClosedPoint) -> int:
    """Residue degree of a closed point of P^1 (monic irreducible factor or infinity)."""
    if point == INFINITY:
        return 1
    return len(point) - 1


@dataclass(frozen=True)
class BinaryForm:
    q: int
    coeffs: Tuple[int, ...]

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("a binary form needs at least one coefficient")
        object.__setattr__(self, "coeffs", tuple(c % self.q for c in self.coeffs))

    @classmethod
    def zero(cls, q: int, degree: int) -> "BinaryForm":
        return cls(q, (0,) * (degree + 1))

    @classmethod
    def from_dehomogenized(cls, q: int, poly: Sequence[int], degree: int) -> "BinaryForm":
        """Build from a descending GF(q) list of degree at most ``degree``."""
        poly = gf_strip(list(poly))
        if len(poly) > degree + 1:
            raise ValueError(f"polynomial of degree {len(poly) - 1} does not fit a form of degree {degree}")
        ascending = list(reversed(poly)) + [0] * (degree + 1 - len(poly))
        return cls(q, tuple(ascending))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def dehomogenize(self) -> List[int]:
        return gf_strip(list(reversed(self.coeffs)))

    def vanishes_at_infinity(self) -> bool:
        return self.coeffs[-1] == 0

    def order_at_infinity(self) -> int:
        return self.degree - (len(self.dehomogenize()) - 1)

    def __mul__(self, other: "BinaryForm") -> "BinaryForm":
        product_poly = gf_mul(self.dehomogenize(), other.dehomogenize(), self.q, ZZ)
        return BinaryForm.from_dehomogenized(self.q, product_poly, self.degree + other.degree)

    def __add__(self, other: "BinaryForm") -> "BinaryForm":
        if other.degree != self.degree:
            raise ValueError("forms of different degrees cannot be added")
        return BinaryForm(self.q, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "BinaryForm":
        return BinaryForm(self.q, tuple(-c for c in self.coeffs))

    def exquo(self, divisor: "BinaryForm") -> Optional["BinaryForm"]:
        """The form R with divisor·R = self, or None when no such form exists."""
        degree = self.degree - divisor.degree
        if degree < 0 or divisor.is_zero():
            return None
        if self.is_zero():
            return BinaryForm.zero(self.q, degree)
        p, d = self.dehomogenize(), divisor.dehomogenize()
        if gf_rem(p, d, self.q, ZZ):
            return None
        quotient = gf_quo(p, d, self.q, ZZ)
        if len(quotient) - 1 > degree:
            return None
        return BinaryForm.from_dehomogenized(self.q, quotient, degree)

    def closed_points(self) -> Dict[ClosedPoint, int]:
        """Divisor of the form: monic irreducible factors of the dehomogenization plus infinity."""
        if self.is_zero():
            raise ValueError("the zero form has no divisor")
        points: Dict[ClosedPoint, int] = {}
        poly = self.dehomogenize()
        if len(poly) > 1:
            _, factors = gf_factor(poly, self.q, ZZ)
            for factor, multiplicity in factors:
                points[tuple(factor)] = multiplicity
        infinity = self.order_at_infinity()
        if infinity:
            points[INFINITY] = infinity
        return points

    def __repr__(self) -> str:
        return f"BinaryForm(q={self.q}, {list(self.coeffs)})"


def gcd_degree(forms: Sequence[BinaryForm]) -> int:
    """Degree of the gcd of nonzero binary forms (projective roots with multiplicity)."""
    if not forms:
        raise ValueError("gcd of an empty collection")
    q = forms[0].q
    g: List[int] = []
    for form in forms:
        g = gf_gcd(g, form.dehomogenize(), q, ZZ)
    return (len(g) - 1) + min(form.order_at_infinity() for form in forms)


def have_common_root(forms: Sequence[BinaryForm]) -> bool:
    """Whether nonzero forms share a projective root over the algebraic closure.

    Shared root iff the dehomogenizations have a nonconstant gcd or every form vanishes at
    infinity. A nonzero constant form never has a root.
    """
    if all(form.vanishes_at_infinity() for form in forms):
        return True
    q = forms[0].q
    g: List[int] = []
    for form in forms:
        g = gf_gcd(g, form.dehomogenize(), q, ZZ)
        if len(g) == 1:
            return False
    return len(g) > 1


def nonzero_forms(q: int, degree: int) -> Iterator[BinaryForm]:
    for coeffs in product(range(q), repeat=degree + 1):
        if any(coeffs):
            yield BinaryForm(q, coeffs)


def all_forms(q: int, degree: int) -> Iterator[BinaryForm]:
    for coeffs in product(range(q), repeat=degree + 1):
        yield BinaryForm(q, coeffs)


def projective_forms(q: int, degree: int) -> Iterator[BinaryForm]:
    """One representative per scalar class: the first nonzero coefficient is 1."""
    for form in nonzero_forms(q, degree):
        first = next(c for c in form.coeffs if c)
        if first == 1:
            yield form


def count_nonzero_forms(q: int, degree: int) -> int:
    return q ** (degree + 1) - 1


def count_projective_forms(q: int, degree: int) -> int:
    return (q ** (degree + 1) - 1) // (q - 1)


def monic_irreducibles(q: int, degree: int) -> List[Tuple[int, ...]]:
    """Monic irreducible polynomials of the given degree over GF(q), descending lists."""
    found = []
    for tail in product(range(q), repeat=degree):
        poly = [1] + list(tail)
        _, factors = gf_factor(poly, q, ZZ)
        if len(factors) == 1 and factors[0][1] == 1:
            found.append(tuple(poly))
    return found


def form_from_points(q: int, points: Dict[ClosedPoint, int]) -> BinaryForm:
    """Monic-normalized form with the given divisor."""
    poly = [1]
    degree = 0
    for point, multiplicity in points.items():
        degree += point_degree(point) * multiplicity
        if point == INFINITY:
            continue
        for _ in range(multiplicity):
            poly = gf_mul(poly, list(point), q, ZZ)
    return BinaryForm.from_dehomogenized(q, gf_monic(poly, q, ZZ)[1], degree)


def sum_forms(forms: Sequence[BinaryForm]) -> BinaryForm:
    total = forms[0]
    for form in forms[1:]:
        total = total + form
    return total


__all__ = [
    "BinaryForm",
    "BudgetError",
    "ClosedPoint",
    "INFINITY",
    "all_forms",
    "check_budget",
    "count_nonzero_forms",
    "count_projective_forms",
    "form_from_points",
    "gcd_degree",
    "have_common_root",
    "monic_irreducibles",
    "nonzero_forms",
    "point_degree",
    "projective_forms",
    "sum_forms",
]
