from fractions import Fraction

import pytest
import sympy

from toricount.lpoly import (
    InexactDivisionError,
    LPoly,
    LPolyError,
    RatFuncL,
    TailSeries,
    eval_at,
    geom_inverse,
    lpoly_sum,
    virtual_dim,
)

L = LPoly.L


class TestLPoly:
    def test_normal_form_strips_powers_of_L(self):
        """Test that the normal form records the low and high degree."""
        x = LPoly.from_dict({-2: 1, 3: 4})
        assert x.low_degree() == -2
        assert x.degree() == 3
        assert x.terms() == {-2: Fraction(1), 3: Fraction(4)}

    def test_zero(self):
        """Test the zero polynomial has no degree and is falsy."""
        assert LPoly.ZERO.is_zero()
        assert LPoly.ZERO.degree() is None
        assert LPoly.from_dict({1: 0, 2: 0}) == 0
        assert not LPoly.ZERO

    def test_arithmetic_with_scalars(self):
        """Test mixed arithmetic with integers and fractions."""
        x = (L - 1) ** 2
        assert x == L**2 - 2 * L + 1
        assert x + Fraction(1, 2) == LPoly.from_dict({2: 1, 1: -2, 0: Fraction(3, 2)})
        assert 3 - L == LPoly.from_dict({0: 3, 1: -1})

    def test_negative_powers_of_monomials(self):
        """Test only monomials may be raised to negative powers."""
        assert L**-2 == LPoly.monomial(-2)
        assert (2 * L) ** -1 == LPoly.monomial(-1, Fraction(1, 2))
        with pytest.raises(LPolyError):
            _ = (L + 1) ** -1

    def test_exact_division(self):
        """Test exact division by a polynomial factor."""
        product = (L**2 + L + 1) * (L - 1) * L**-3
        assert product.exquo(L - 1) == (L**2 + L + 1) * L**-3
        assert product / (L**2 + L + 1) == (L - 1) * L**-3

    def test_inexact_division_raises(self):
        """Test inexact division and division by zero raise."""
        with pytest.raises(InexactDivisionError):
            (L**2 + 1).exquo(L - 1)
        with pytest.raises(ZeroDivisionError):
            L.exquo(0)

    def test_evaluate(self):
        """Test evaluation at q, which must be nonzero."""
        x = L**2 + 4 * L + 1 - L**-1
        assert x.evaluate(2) == Fraction(25, 2)
        with pytest.raises(LPolyError):
            x.evaluate(0)
        assert eval_at(x, 1) == 5
        assert eval_at(7, 3) == 7

    def test_substitute_power(self):
        """Test substituting L^k for L."""
        assert (L**2 - L**-1).substitute_power(3) == L**6 - L**-3
        with pytest.raises(LPolyError):
            L.substitute_power(0)

    def test_hash_agrees_with_constant_equality(self):
        """Test constants hash and compare like plain numbers."""
        assert hash(LPoly.constant(5)) == hash(5)
        assert LPoly.constant(5) == 5
        assert len({L + 1, 1 + L}) == 1

    def test_repr(self):
        """Test the readable and sparse renderings."""
        assert repr(L**2 - 2 + L**-2) == "L^2 - 2 + L^-2"
        assert repr(L**2 - 2 * L + 1) == "L^2 - 2*L + 1"
        assert repr(-L**-1) == "-L^-1"
        assert repr(LPoly.ZERO) == "0"
        assert (L**2 - L).render_sparse() == "2:1,1:-1"

    def test_from_expr(self):
        """Test conversion from a sympy expression."""
        t = sympy.Symbol("t")
        assert LPoly.from_expr((t - 1) ** 2 * (t + 1), t) == (L - 1) ** 2 * (L + 1)
        assert LPoly.from_expr(t / 2, t) == LPoly.monomial(1, Fraction(1, 2))

    def test_constant_value(self):
        """Test the value of a constant, and that L has none."""
        assert LPoly.constant(Fraction(2, 3)).constant_value() == Fraction(2, 3)
        with pytest.raises(LPolyError):
            L.constant_value()

    def test_lpoly_sum(self):
        """Test summing a list of polynomials, including the empty one."""
        assert lpoly_sum([L, L, LPoly.ONE]) == 2 * L + 1
        assert lpoly_sum([]) == 0


class TestTailSeries:
    def test_precision_drops_low_terms(self):
        """Test that terms at or below the precision are dropped."""
        s = TailSeries(L + 1 + L**-1 + L**-5, -2)
        assert s.known == L + 1 + L**-1
        assert repr(s) == "L + 1 + L^-1 + O(L^-2)"

    def test_render_sparse(self):
        """Test the sparse rendering marks the tail only for inexact values."""
        assert TailSeries(L + 1 + L**-1 + L**-5, -2).render_sparse() == "1:1,0:1,-1:1,O(L^-2)"
        assert TailSeries.exact(L**2 - 2 + L**-2).render_sparse() == "2:1,0:-2,-2:1"
        assert TailSeries(LPoly.ZERO, -3).render_sparse() == "0,O(L^-3)"

    def test_addition_takes_coarser_precision(self):
        """Test a sum keeps the coarser of the two precisions."""
        a = TailSeries(L + L**-3, -4)
        b = TailSeries(1 + L**-1, -2)
        total = a + b
        assert total.precision == -2
        assert total.known == L + 1 + L**-1

    def test_multiplication_bound(self):
        """Test the precision of a product of two truncated series."""
        # (L + O(L^-2)) * (1 + O(L^-1)): errors reach L * L^-1 = L^0
        product = TailSeries(L, -2) * TailSeries(1, -1)
        assert product.precision == 0
        assert product.known == L

    def test_exact_times_exact_is_exact(self):
        """Test a product of exact series stays exact."""
        product = TailSeries.exact(L - 1) * TailSeries.exact(L + 1)
        assert product.is_exact()
        assert product.known == L**2 - 1

    def test_geom_inverse(self):
        """Test the truncated geometric series of 1/(1 - L^-k)."""
        inv = geom_inverse(2, -6)
        assert inv.known == 1 + L**-2 + L**-4 + L**-6
        assert inv.precision == -6
        with pytest.raises(LPolyError):
            geom_inverse(0, -3)

    def test_geom_inverse_times_factor_is_one(self):
        """Test the geometric inverse times its factor is one up to precision."""
        product = geom_inverse(1, -8) * TailSeries.exact(1 - L**-1)
        assert product.known == LPoly.ONE
        assert product.precision == -8

    def test_truncate(self):
        """Test truncation never refines an existing precision."""
        s = TailSeries.exact(L + L**-3)
        assert s.truncate(-2).known == L
        assert s.truncate(-2).truncate(-5).precision == -2


class TestRatFuncL:
    def test_cancellation(self):
        """Test a quotient with a polynomial value is recognised."""
        r = RatFuncL(L**2 - 1, L - 1)
        assert r.is_lpoly()
        assert r.to_lpoly() == L + 1

    def test_not_polynomial(self):
        """Test a proper quotient evaluates but is not a polynomial."""
        r = RatFuncL(1, 1 - L**-1)
        assert not r.is_lpoly()
        with pytest.raises(InexactDivisionError):
            r.to_lpoly()
        assert r.evaluate(2) == 2
        with pytest.raises(LPolyError):
            r.evaluate(1)

    def test_expand_geometric(self):
        """Test expansion of 1/(1 - L^-1) in L^-1."""
        r = RatFuncL(1, 1 - L**-1)
        assert r.expand(-5) == geom_inverse(1, -5)

    def test_expand_product(self):
        """Test expansion of a product of quotients."""
        # L^2 / (1 - L^-1)^2 = L^2 (1 + 2L^-1 + 3L^-2 + ...)
        r = RatFuncL(L**2) / RatFuncL(1 - L**-1) ** 2
        expanded = r.expand(-2)
        assert expanded.known == L**2 + 2 * L + 3 + 4 * L**-1 + 5 * L**-2

    def test_field_operations(self):
        """Test sums, products and quotients of rational functions."""
        a = RatFuncL(1, L - 1)
        b = RatFuncL(1, L + 1)
        assert a + b == RatFuncL(2 * L, L**2 - 1)
        assert a * (L - 1) == RatFuncL(1)
        assert (a / a).to_lpoly() == 1
        with pytest.raises(ZeroDivisionError):
            RatFuncL(1, 0)


class TestVirtualDim:
    def test_lpoly(self):
        """Test the virtual dimension of polynomials and scalars."""
        assert virtual_dim(L**3 - L**-1) == 3
        assert virtual_dim(0) == float("-inf")
        assert virtual_dim(Fraction(1, 2)) == 0

    def test_tail_series(self):
        """Test the virtual dimension of truncated series."""
        assert virtual_dim(TailSeries(L**-1 + L**-4, -3)) == -1
        assert virtual_dim(TailSeries.exact(0)) == float("-inf")

    def test_undetermined(self):
        """Test the virtual dimension is undetermined when every known term is lost."""
        with pytest.raises(LPolyError):
            virtual_dim(TailSeries(L**-5, -3))
