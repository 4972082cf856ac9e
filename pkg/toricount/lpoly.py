"""Exact Laurent polynomials in the class L of the affine line.

``LPoly`` is the working coefficient ring of the whole package: counting polynomials, Möbius
coefficients and leading constants all live in Q[L, L^-1]. ``TailSeries`` carries a descending
expansion in L^-1 whose terms below a precision are unknown, and ``RatFuncL`` holds closed forms
such as products of (1 - L^-k)^-1 until they are expanded.
"""

from fractions import Fraction
from typing import Dict, Iterable, Optional, Tuple, Union

import sympy
from sympy.polys.domains import QQ
from sympy.polys.rings import PolyElement, ring

_RING, _LGEN = ring("L", QQ)

Scalar = Union[int, Fraction]


class LPolyError(Exception):
    """Raised for undefined operations on L-polynomials and series."""

    pass


class InexactDivisionError(LPolyError):
    """Raised when an exact division in Q[L, L^-1] leaves a remainder."""

    pass


def _to_qq(value: Scalar):
    if isinstance(value, Fraction):
        return QQ(value.numerator, value.denominator)
    if isinstance(value, int):
        return QQ(value)
    raise TypeError(f"unsupported coefficient type: {type(value).__name__}")


def _to_fraction(value) -> Fraction:
    return Fraction(int(value.numerator), int(value.denominator))


class LPoly:
    """An element L^shift * poly of Q[L, L^-1], with poly not divisible by L.

    Instances are immutable and hashable. Integers and Fractions coerce into LPoly in every
    arithmetic operation and comparison.
    """

    __slots__ = ("_poly", "_shift", "_hash")

    L: "LPoly"
    ONE: "LPoly"
    ZERO: "LPoly"

    def __init__(self, poly: PolyElement, shift: int = 0):
        if not poly:
            self._poly = _RING.zero
            self._shift = 0
        else:
            low = min(monom[0] for monom in poly.keys())
            if low:
                poly = _RING.from_dict({(monom[0] - low,): c for monom, c in poly.items()})
            self._poly = poly
            self._shift = shift + low
        self._hash = None

    @classmethod
    def from_dict(cls, terms: Dict[int, Scalar]) -> "LPoly":
        """Build from a mapping exponent -> coefficient (zero coefficients are dropped)."""
        nonzero = {e: c for e, c in terms.items() if c}
        if not nonzero:
            return cls(_RING.zero)
        low = min(nonzero)
        return cls(_RING.from_dict({(e - low,): _to_qq(c) for e, c in nonzero.items()}), low)

    @classmethod
    def monomial(cls, exponent: int, coeff: Scalar = 1) -> "LPoly":
        return cls.from_dict({exponent: coeff})

    @classmethod
    def constant(cls, value: Scalar) -> "LPoly":
        return cls.from_dict({0: value})

    @classmethod
    def coerce(cls, value: Union["LPoly", Scalar]) -> "LPoly":
        if isinstance(value, LPoly):
            return value
        return cls.constant(value)

    @classmethod
    def from_expr(cls, expr, symbol) -> "LPoly":
        """Convert a sympy polynomial expression in ``symbol`` (e.g. an interpolation result)."""
        poly = sympy.Poly(sympy.expand(expr), symbol)
        terms = {}
        for (exp,), coeff in poly.terms():
            coeff = sympy.Rational(coeff)
            terms[int(exp)] = Fraction(int(coeff.p), int(coeff.q))
        return cls.from_dict(terms)

    # -- inspection -------------------------------------------------------------------------

    def terms(self) -> Dict[int, Fraction]:
        return {monom[0] + self._shift: _to_fraction(c) for monom, c in self._poly.items()}

    def coeff(self, exponent: int) -> Fraction:
        c = self._poly.get((exponent - self._shift,))
        return _to_fraction(c) if c is not None else Fraction(0)

    def is_zero(self) -> bool:
        return not self._poly

    def degree(self) -> Optional[int]:
        """Top exponent, None for zero."""
        if not self._poly:
            return None
        return self._poly.degree() + self._shift

    def low_degree(self) -> Optional[int]:
        if not self._poly:
            return None
        return self._shift

    def leading_coeff(self) -> Fraction:
        if not self._poly:
            return Fraction(0)
        return _to_fraction(self._poly.LC)

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.terms().values())

    def is_constant(self) -> bool:
        return self.is_zero() or (self._shift == 0 and self._poly.degree() == 0)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise LPolyError(f"{self!r} is not constant")
        return self.coeff(0)

    # -- arithmetic -------------------------------------------------------------------------

    def _aligned(self, other: "LPoly") -> Tuple[PolyElement, PolyElement, int]:
        if self.is_zero():
            return _RING.zero, other._poly, other._shift
        if other.is_zero():
            return self._poly, _RING.zero, self._shift
        base = min(self._shift, other._shift)
        a = self._poly * _LGEN ** (self._shift - base)
        b = other._poly * _LGEN ** (other._shift - base)
        return a, b, base

    def __add__(self, other) -> "LPoly":
        try:
            other = LPoly.coerce(other)
        except TypeError:
            return NotImplemented
        a, b, base = self._aligned(other)
        return LPoly(a + b, base)

    __radd__ = __add__

    def __neg__(self) -> "LPoly":
        return LPoly(-self._poly, self._shift)

    def __sub__(self, other) -> "LPoly":
        try:
            other = LPoly.coerce(other)
        except TypeError:
            return NotImplemented
        a, b, base = self._aligned(other)
        return LPoly(a - b, base)

    def __rsub__(self, other) -> "LPoly":
        return LPoly.coerce(other) - self

    def __mul__(self, other) -> "LPoly":
        if isinstance(other, (int, Fraction)):
            if not other:
                return LPoly.ZERO
            return LPoly(self._poly.mul_ground(_to_qq(other)), self._shift)
        if not isinstance(other, LPoly):
            return NotImplemented
        return LPoly(self._poly * other._poly, self._shift + other._shift)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "LPoly":
        if isinstance(other, (int, Fraction)):
            if not other:
                raise ZeroDivisionError("division of LPoly by zero")
            return self * (Fraction(1) / Fraction(other))
        if isinstance(other, LPoly):
            return self.exquo(other)
        return NotImplemented

    def __pow__(self, exponent: int) -> "LPoly":
        if exponent < 0:
            if self.is_zero() or self._poly.degree() != 0:
                raise LPolyError("negative powers exist only for monomials")
            inverse = LPoly(_RING.ground_new(QQ(1) / self._poly.LC), -self._shift)
            return inverse ** (-exponent)
        return LPoly(self._poly**exponent, self._shift * exponent)

    def exquo(self, other: Union["LPoly", Scalar]) -> "LPoly":
        """Exact quotient in Q[L, L^-1].

        Raises:
            InexactDivisionError: if ``other`` does not divide ``self``.
        """
        other = LPoly.coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("division of LPoly by zero")
        quotient, remainder = self._poly.div(other._poly)
        if remainder:
            raise InexactDivisionError(f"{other!r} does not divide {self!r}")
        return LPoly(quotient, self._shift - other._shift)

    # -- substitutions ----------------------------------------------------------------------

    def evaluate(self, q: Scalar) -> Fraction:
        q = Fraction(q)
        if not q and any(e < 0 for e in self.terms()):
            raise LPolyError("cannot evaluate negative powers of L at 0")
        return sum((c * q**e for e, c in self.terms().items()), Fraction(0))

    def substitute_power(self, n: int) -> "LPoly":
        """L -> L^n."""
        if n < 1:
            raise LPolyError(f"substitution exponent must be positive, got {n}")
        return LPoly.from_dict({e * n: c for e, c in self.terms().items()})

    # -- comparison and display -------------------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = LPoly.constant(other)
        if not isinstance(other, LPoly):
            return NotImplemented
        return self._shift == other._shift and self._poly == other._poly

    def __hash__(self) -> int:
        if self._hash is None:
            items = tuple(sorted(self.terms().items()))
            if not items:
                self._hash = hash(0)
            elif len(items) == 1 and items[0][0] == 0:
                self._hash = hash(items[0][1])
            else:
                self._hash = hash(items)
        return self._hash

    def __bool__(self) -> bool:
        return bool(self._poly)

    def render_sparse(self) -> str:
        """Sparse ``exponent:coefficient`` pairs by descending exponent; ``0`` for zero."""
        if self.is_zero():
            return "0"
        return ",".join(f"{e}:{c}" for e, c in sorted(self.terms().items(), reverse=True))

    def __repr__(self) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for e, c in sorted(self.terms().items(), reverse=True):
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if e == 0:
                body = f"{mag}"
            else:
                power = "L" if e == 1 else f"L^{e}"
                body = power if mag == 1 else f"{mag}*{power}"
            parts.append((sign, body))
        first_sign, first_body = parts[0]
        text = ("-" if first_sign == "-" else "") + first_body
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text


LPoly.L = LPoly.monomial(1)
LPoly.ONE = LPoly.constant(1)
LPoly.ZERO = LPoly.from_dict({})


class TailSeries:
    """A descending expansion in L^-1 known exactly at every exponent >= ``precision``.

    ``precision=None`` marks an exact value. Coefficients of exponents below the precision are
    unknown and never stored.
    """

    __slots__ = ("known", "precision")

    def __init__(self, known: Union[LPoly, Scalar], precision: Optional[int] = None):
        known = LPoly.coerce(known)
        if precision is not None:
            known = LPoly.from_dict({e: c for e, c in known.terms().items() if e >= precision})
        self.known = known
        self.precision = precision

    @classmethod
    def exact(cls, value: Union[LPoly, Scalar]) -> "TailSeries":
        return cls(value, None)

    def is_exact(self) -> bool:
        return self.precision is None

    def _top_bound(self) -> Optional[int]:
        top = self.known.degree()
        if self.precision is None:
            return top
        unknown_top = self.precision - 1
        return unknown_top if top is None else max(top, unknown_top)

    @staticmethod
    def _coerce(value) -> "TailSeries":
        if isinstance(value, TailSeries):
            return value
        return TailSeries.exact(value)

    def __add__(self, other) -> "TailSeries":
        other = TailSeries._coerce(other)
        precisions = [p for p in (self.precision, other.precision) if p is not None]
        return TailSeries(self.known + other.known, max(precisions) if precisions else None)

    __radd__ = __add__

    def __neg__(self) -> "TailSeries":
        return TailSeries(-self.known, self.precision)

    def __sub__(self, other) -> "TailSeries":
        return self + (-TailSeries._coerce(other))

    def __rsub__(self, other) -> "TailSeries":
        return TailSeries._coerce(other) - self

    def __mul__(self, other) -> "TailSeries":
        other = TailSeries._coerce(other)
        bounds = []
        if self.precision is not None:
            top = other._top_bound()
            if top is not None:
                bounds.append(self.precision + top)
        if other.precision is not None:
            top = self._top_bound()
            if top is not None:
                bounds.append(other.precision + top)
        if self.precision is not None and other.precision is not None:
            bounds.append(self.precision + other.precision)
        if not bounds:
            # one factor is exactly zero
            if self.precision is None and other.precision is None:
                return TailSeries(self.known * other.known, None)
            return TailSeries(LPoly.ZERO, None)
        return TailSeries(self.known * other.known, max(bounds))

    __rmul__ = __mul__

    def truncate(self, precision: int) -> "TailSeries":
        if self.precision is not None and precision < self.precision:
            precision = self.precision
        return TailSeries(self.known, precision)

    def evaluate(self, q: Scalar) -> Fraction:
        """Value of the known part at L = q."""
        return self.known.evaluate(q)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TailSeries):
            other = TailSeries._coerce(other)
        return self.known == other.known and self.precision == other.precision

    def __hash__(self) -> int:
        return hash((self.known, self.precision))

    def render_sparse(self) -> str:
        """``LPoly.render_sparse`` of the known part, followed by ``,O(L^p)`` when inexact."""
        if self.precision is None:
            return self.known.render_sparse()
        return f"{self.known.render_sparse()},O(L^{self.precision})"

    def __repr__(self) -> str:
        if self.precision is None:
            return repr(self.known)
        return f"{self.known!r} + O(L^{self.precision})"


class RatFuncL:
    """A reduced quotient num/den of Laurent polynomials with monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num: Union[LPoly, Scalar], den: Union[LPoly, Scalar] = 1):
        num, den = LPoly.coerce(num), LPoly.coerce(den)
        if den.is_zero():
            raise ZeroDivisionError("RatFuncL with zero denominator")
        shift = (num.low_degree() or 0) - (den.low_degree() or 0)
        p, q = num._poly, den._poly
        if p:
            p, q = p.cancel(q)
        else:
            q = _RING.one
        lc = q.LC
        p, q = p.quo_ground(lc), q.quo_ground(lc)
        self.num = LPoly(p, shift) if p else LPoly.ZERO
        self.den = LPoly(q, 0)

    def __add__(self, other) -> "RatFuncL":
        other = other if isinstance(other, RatFuncL) else RatFuncL(other)
        return RatFuncL(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "RatFuncL":
        return RatFuncL(-self.num, self.den)

    def __sub__(self, other) -> "RatFuncL":
        other = other if isinstance(other, RatFuncL) else RatFuncL(other)
        return self + (-other)

    def __mul__(self, other) -> "RatFuncL":
        other = other if isinstance(other, RatFuncL) else RatFuncL(other)
        return RatFuncL(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RatFuncL":
        other = other if isinstance(other, RatFuncL) else RatFuncL(other)
        if other.num.is_zero():
            raise ZeroDivisionError("division of RatFuncL by zero")
        return RatFuncL(self.num * other.den, self.den * other.num)

    def __pow__(self, exponent: int) -> "RatFuncL":
        if exponent < 0:
            return RatFuncL(self.den**-exponent, self.num**-exponent)
        return RatFuncL(self.num**exponent, self.den**exponent)

    def is_lpoly(self) -> bool:
        return self.den == LPoly.ONE

    def to_lpoly(self) -> LPoly:
        if not self.is_lpoly():
            raise InexactDivisionError(f"{self!r} is not a Laurent polynomial")
        return self.num

    def evaluate(self, q: Scalar) -> Fraction:
        den = self.den.evaluate(q)
        if not den:
            raise LPolyError(f"pole at L = {q}")
        return self.num.evaluate(q) / den

    def expand(self, precision: int) -> TailSeries:
        """Descending expansion in L^-1, exact at every exponent >= precision."""
        if self.is_lpoly():
            return TailSeries(self.num, precision)
        top = self.den.degree()
        lead = self.den.leading_coeff()
        # den = lead * L^top * (1 + rest), rest has only negative exponents
        rest = LPoly.from_dict({e - top: c / lead for e, c in self.den.terms().items() if e != top})
        num_top = self.num.degree()
        if num_top is None:
            return TailSeries(LPoly.ZERO, None)
        # 1/(1 + rest) is needed down to precision - (num_top - top)
        depth = precision - (num_top - top)
        inverse = LPoly.ONE
        power = LPoly.ONE
        step = -rest
        while True:
            power = _truncate(power * step, depth)
            if power.is_zero():
                break
            inverse = inverse + power
        inverse = inverse * LPoly.monomial(-top, Fraction(1) / lead)
        return TailSeries(self.num * inverse, precision)

    def __eq__(self, other) -> bool:
        other = other if isinstance(other, RatFuncL) else RatFuncL(other)
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def __repr__(self) -> str:
        if self.is_lpoly():
            return repr(self.num)
        return f"({self.num!r}) / ({self.den!r})"


def _truncate(x: LPoly, precision: int) -> LPoly:
    return LPoly.from_dict({e: c for e, c in x.terms().items() if e >= precision})


def virtual_dim(x: Union[LPoly, TailSeries, Scalar]) -> float:
    """Largest exponent with nonzero coefficient; ``-inf`` for zero.

    Raises:
        LPolyError: for a TailSeries whose top exponent is not determined by its known part.
    """
    if isinstance(x, TailSeries):
        top = x.known.degree()
        if x.precision is None:
            return float("-inf") if top is None else top
        if top is None:
            raise LPolyError(f"virtual dimension undetermined: everything above L^{x.precision} vanishes")
        return top
    x = LPoly.coerce(x)
    top = x.degree()
    return float("-inf") if top is None else top


def geom_inverse(k: int, precision: int) -> TailSeries:
    """Expansion of 1/(1 - L^-k), exact at every exponent >= precision."""
    if k < 1:
        raise LPolyError(f"geom_inverse needs k >= 1, got {k}")
    terms = {-k * m: 1 for m in range(0, (-precision) // k + 1) if -k * m >= precision}
    return TailSeries(LPoly.from_dict(terms), precision)


def eval_at(x: Union[LPoly, RatFuncL, TailSeries, Scalar], q: Scalar) -> Fraction:
    if isinstance(x, (LPoly, RatFuncL, TailSeries)):
        return x.evaluate(q)
    return Fraction(x)


def lpoly_sum(items: Iterable[LPoly]) -> LPoly:
    total = LPoly.ZERO
    for item in items:
        total = total + item
    return total
