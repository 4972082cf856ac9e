from fractions import Fraction

import pytest

from toricount.census import (
    CensusError,
    blowup_degree,
    blowup_normalized_class,
    bruteforce_count,
    c_fin,
    c_fin_euler,
    c_mot,
    cone_counts,
    control_check,
    convergence_report,
    count_closed_form,
    count_report,
    degree_zeta,
    height,
    motivic_class,
    motivic_dim_check,
    zeta_difference,
)
from toricount.forms import BudgetError
from toricount.lpoly import LPoly, eval_at
from toricount.moebius import mu_aggregate_fq
from toricount.toric import ToricError, catalog_variety

L = LPoly.L


class TestClosedForm:
    def test_projective_plane_lines(self, P2):
        """Test the closed form counts 24 lines in P2 over F_2."""
        assert count_closed_form(P2, (1, 1, 1), 2) == 24

    def test_projective_line_conics(self, P1):
        """Test the closed form and motivic class of degree (2, 2) maps to P1."""
        # coprime pairs of nonzero binary quadrics over F_2
        assert count_closed_form(P1, (2, 2), 2) == 24
        assert motivic_class(P1, (2, 2)) == L**5 - L**3

    def test_degree_zero_is_the_torus(self, BlP2):
        """Test degree zero maps to the blowup are the points of the torus."""
        assert count_closed_form(BlP2, (0, 0, 0, 0), 3) == 4
        assert motivic_class(BlP2, (0, 0, 0, 0)) == (L - 1) ** 2

    def test_outside_the_domain(self, P2):
        """Test classes outside the effective domain count zero everywhere."""
        assert count_closed_form(P2, (1, 2, 1), 2) == 0
        assert motivic_class(P2, (1, 2, 1)) == LPoly.ZERO
        assert bruteforce_count(P2, (1, 2, 1), 2) == 0

    def test_truncated_series(self, P2):
        """Test a Möbius series truncated below the degree is rejected."""
        with pytest.raises(CensusError, match="truncated"):
            count_closed_form(P2, (2, 2, 2), 2, mu=mu_aggregate_fq(P2, 2, 3))

    @pytest.mark.parametrize("q", [2, 3, 5, 7])
    def test_class_specializes(self, BlP2, q):
        """Test the blowup motivic class evaluates to the closed form count at q."""
        y = blowup_degree(2, 1)
        assert eval_at(motivic_class(BlP2, y), q) == count_closed_form(BlP2, y, q)

    def test_report(self, P2):
        """Test the count report carries the count, dimension, leading coefficient and class."""
        report = count_report(P2, (1, 1, 1), 2)
        assert report.count == 24
        assert report.expected_dim == 5
        assert report.leading_coeff == 1
        assert report.consistent()
        assert count_report(P2, (1, 1, 1), 2, with_class=False).class_L is None


class TestBruteforce:
    @pytest.mark.parametrize(
        "name, y, q",
        [
            ("P1", (2, 2), 2),
            ("P1", (1, 1), 3),
            ("P2", (1, 1, 1), 2),
            ("P1xP1", (1, 1, 1, 1), 2),
            ("BlP2", (1, 1, 2, 1), 2),
            ("BlP2", (0, 0, 1, 1), 3),
        ],
    )
    def test_matches_closed_form(self, name, y, q):
        """Test brute force enumeration agrees with the closed form."""
        X = catalog_variety(name)
        assert bruteforce_count(X, y, q) == count_closed_form(X, y, q)

    def test_parallel_chunks(self, P2):
        """Test brute force split over two jobs gives the same count."""
        assert bruteforce_count(P2, (1, 1, 1), 2, jobs=2) == 24

    def test_budget(self, P2):
        """Test brute force refuses to exceed its visit budget."""
        with pytest.raises(BudgetError):
            bruteforce_count(P2, (3, 3, 3), 2, budget=10)


class TestDegreeZeta:
    def test_projective_plane_rows(self, P2):
        """Test the anticanonical degree zeta of P2 over F_2."""
        assert degree_zeta(P2, (3,), 3, q=2).coefficients() == [1, 0, 0, 24]

    def test_motivic_rows(self, P2):
        """Test the motivic degree zeta rows specialize to the F_2 counts."""
        table = degree_zeta(P2, (3,), 3)
        assert table.q is None
        assert table.rows[3] == L * (L - 1) ** 2 * (L + 1) * (L + 2)
        assert table.rows[3].evaluate(2) == 24

    def test_cone_counts(self, P2, P1xP1):
        """Test the number of effective classes at each anticanonical level."""
        assert cone_counts(P2, (3,), 6) == [1, 0, 0, 1, 0, 0, 1]
        assert cone_counts(P1xP1, (2, 2), 4) == [1, 0, 2, 0, 3]

    def test_not_big(self, P1xP1):
        """Test a class that is not big is rejected."""
        with pytest.raises(ToricError, match="not big"):
            degree_zeta(P1xP1, (1, 0), 2, q=2)


class TestLeadingConstants:
    def test_blowup_exact(self, BlP2):
        """Test the blowup leading constant over F_3 is exact at height 12."""
        assert c_fin(BlP2, 3, 12) == (Fraction(64, 9), 0)

    def test_projective_line(self, P1):
        """Test the P1 leading constant over F_2."""
        assert c_fin(P1, 2, 4) == (Fraction(3, 2), 0)

    def test_projective_plane(self, P2):
        """Test the P2 leading constant over F_2."""
        assert c_fin(P2, 2, 8) == (Fraction(21, 4), 0)

    def test_short_window_reports_a_tail(self, P2):
        """Test a short height window returns a nonzero tail estimate."""
        value, tail = c_fin(P2, 2, 4)
        assert value == 5
        assert tail > 0

    def test_needs_two_terms(self, P2):
        """Test the leading constant needs at least two terms."""
        with pytest.raises(CensusError):
            c_fin(P2, 2, 1)

    def test_euler_product_agrees(self, BlP2):
        """Test the Euler product constant lies within its bound of the exact one."""
        exact, _ = c_fin(BlP2, 3, 12)
        value, bound = c_fin_euler(BlP2, 3, 10)
        assert bound is not None
        assert abs(value - exact) <= bound

    def test_euler_product_defers_large_degrees(self, P2):
        """Test degrees past the exact point limit move into the error bound."""
        # degrees beyond 8 have more than EULER_EXACT_POINTS closed points over F_3
        exact, tail = c_fin(P2, 3, 12)
        value, bound = c_fin_euler(P2, 3, 12)
        assert value == c_fin_euler(P2, 3, 8)[0]
        assert abs(value - exact) <= tail + bound

    def test_euler_product_without_factors(self, P2):
        """Test an empty Euler product has no tail bound."""
        value, bound = c_fin_euler(P2, 2, 0)
        assert value == 8
        assert bound is None

    def test_motivic_constant(self, P1, P2, BlP2):
        """Test the motivic leading constants of P1, P2 and the blowup."""
        assert c_mot(BlP2, -6).known == L**2 - 2 + L**-2
        assert c_mot(BlP2, -6).is_exact()
        assert c_mot(P1, -6).known == L - L**-1
        assert c_mot(P2, -6).known == L**2 + L - L**-1 - L**-2

    @pytest.mark.parametrize("name, q", [("P1", 2), ("P2", 2), ("BlP2", 3), ("P1xP1", 5)])
    def test_motivic_constant_specializes(self, name, q):
        """Test the motivic constant evaluates to the finite field constant."""
        X = catalog_variety(name)
        assert eval_at(c_mot(X, -6), q) == c_fin(X, q, 12)[0]

    def test_motivic_constant_without_product_form(self):
        """Test dP6 gives an inexact constant with leading term L^2."""
        constant = c_mot(catalog_variety("dP6"), -4)
        assert not constant.is_exact()
        assert constant.known.degree() == 2
        assert constant.known.leading_coeff() == 1


class TestConvergence:
    def test_boundary_ray_has_its_own_limit(self, BlP2):
        """Test the boundary ray of the blowup converges to a limit other than the constant."""
        report = convergence_report(BlP2, 3, (0, 0, 1, 1), 3)
        assert report.regime == "boundary"
        assert report.limit == Fraction(16, 3)
        assert report.limit != report.c_fin
        # maps of class nE are maps to the exceptional line, so the normalized count is constant
        assert all(row[3] == report.limit for row in report.rows)

    def test_interior_ray_reaches_the_constant(self, BlP2):
        """Test an interior ray of the blowup converges to the leading constant."""
        report = convergence_report(BlP2, 3, (1, 1, 2, 1), 2)
        assert report.regime == "interior"
        assert report.limit == report.c_fin == Fraction(64, 9)
        assert [row[0] for row in report.rows] == [1, 2]

    def test_ray_outside_the_domain(self, P2):
        """Test a ray outside the big cone is rejected."""
        with pytest.raises(CensusError):
            convergence_report(P2, 2, (1, 0, 0), 2)


class TestControl:
    def test_exactly_controlled(self):
        """Test a sequence growing exactly at rate 1/rho is bounded and monotone."""
        report = control_check([5 * 2**n for n in range(20)], Fraction(1, 2), 1)
        assert report.bounded
        assert report.monotone
        assert report.sup_observed == 5

    def test_growth_beyond_the_order(self):
        """Test a polynomial factor above the order is not bounded."""
        report = control_check([n * 2**n for n in range(31)], Fraction(1, 2), 1)
        assert not report.bounded
        assert report.sup_observed == 30

    def test_polynomial_factor_absorbed_by_order(self):
        """Test a higher order absorbs a linear factor."""
        assert control_check([n * 2**n for n in range(31)], Fraction(1, 2), 2).bounded

    def test_rank_one_weight(self):
        """Test order zero weights each entry by n, the statistic reported for Picard rank one."""
        report = control_check([0, 2, 4, 8], Fraction(1, 2), 0)
        assert report.sup_observed == 3
        assert not report.monotone

    def test_projective_plane_difference_is_controlled(self, P2):
        """Test the P2 height zeta difference at q=2 decays under the rank-one statistic."""
        report = control_check(zeta_difference(P2, 2, P2.omega, 12), Fraction(1, 2), P2.pic_rank - 1)
        assert report.bounded
        assert report.monotone
        assert report.sup_observed == Fraction(27, 4)

    def test_bad_inputs(self):
        """Test a negative order and too short sequences are rejected."""
        with pytest.raises(CensusError):
            control_check([1, 2, 3, 4], Fraction(1, 2), -1)
        with pytest.raises(CensusError, match="three"):
            control_check([0, 1, 0, 1], Fraction(1, 2), 1)

    def test_zeta_difference(self, P2):
        """Test the P2 zeta difference against the leading term."""
        assert zeta_difference(P2, 2, (3,), 3) == [Fraction(1) - Fraction(21, 4), 0, 0, Fraction(24 - 42)]

    def test_motivic_dimension(self, BlP2):
        """Test the virtual dimension of each blowup row is the expected one."""
        report = motivic_dim_check(BlP2, 6)
        assert report.bound == 1
        assert report.threshold == 0
        counts = cone_counts(BlP2, BlP2.omega, 6)
        for d, dim_row, _ in report.rows:
            assert dim_row == (d + 2 if counts[d] else float("-inf"))


class TestBlowupFixture:
    @pytest.mark.parametrize("y0, yE", [(0, 0), (1, 0), (0, 1), (1, 1), (2, 1), (3, 2)])
    def test_matches_general_formula(self, BlP2, y0, yE):
        """Test the blowup closed form matches the general motivic class."""
        y = blowup_degree(y0, yE)
        assert blowup_normalized_class(y0, yE) * LPoly.monomial(height(y, (1, 1, 1, 1))) == motivic_class(BlP2, y)

    def test_negative_entries(self):
        """Test a negative class entry gives the zero class."""
        assert blowup_normalized_class(-1, 2) == LPoly.ZERO

    def test_height(self):
        """Test the anticanonical height of a blowup class."""
        assert height(blowup_degree(1, 1), (1, 1, 1, 1)) == 5

    @pytest.mark.parametrize("n", range(2, 13))
    def test_boundary_ray_limit(self, n):
        """Test the normalized class along (0, 0, n, n) is already L^2(1 - L^-1)(1 - L^-2)."""
        assert blowup_normalized_class(0, n) == L**2 * (1 - L**-1) * (1 - L**-2)

    @pytest.mark.parametrize("n", range(2, 13))
    def test_interior_ray_limit(self, BlP2, n):
        """Test the normalized class along (n, n, 2n, n) equals the motivic constant."""
        constant = c_mot(BlP2, -8)
        assert constant.is_exact()
        assert blowup_normalized_class(n, n) == constant.known

    def test_constant_maps_are_off_the_limit(self):
        """Test the degree-zero class is (L - 1)^2, below the boundary limit."""
        assert blowup_normalized_class(0, 0) == (L - 1) ** 2
        assert blowup_normalized_class(0, 0) != L**2 * (1 - L**-1) * (1 - L**-2)
