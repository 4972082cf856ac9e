"""Verification suites behind ``toricount verify``.

Every check returns a CheckResult; a BudgetError inside a check turns into a skip so that the
suites stay usable on small budgets.
"""

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Tuple

from toricount import census, cox3
from toricount.forms import BinaryForm, BudgetError
from toricount.lattice import Cone, asymptotic_count, cone_zeta, enumerate_levels, specialize_zeta
from toricount.logger import get_logger
from toricount.lpoly import LPoly, TailSeries, eval_at
from toricount.moebius import (
    bruteforce_mu_aggregate,
    check_class_identity,
    dimension_bound_holds,
    finite_product_form,
    mu0,
    mu0_closed_form,
    mu_aggregate_fq,
    mu_motivic,
    mu_motivic_closed,
    mu_motivic_from_definition,
    partial_sums_match_faces,
)
from toricount.motivic import MultiSeries, all_exponents, series_pow, verify_power_identity
from toricount.toric import catalog_variety, check_exactness, orbit_point_count

SUITE_NAMES = ["toric-identities", "oracle", "motivic", "cone", "cox3"]

IDENTITY_VARIETIES = ["P1", "P2", "P3", "P1xP1", "BlP2", "F(2)", "dP6"]
ORACLE_VARIETIES = ["P1", "P2", "P1xP1", "BlP2"]


class SuiteError(Exception):
    """Raised for an unknown suite name."""

    pass


@dataclass
class SuiteParams:
    q: int = 2
    budget: int = 100_000_000
    jobs: int = 1
    max_total_degree: int = 8
    max_height: int = 12
    primes: List[int] = field(default_factory=lambda: [2, 3, 5, 7, 11, 13])
    seed: int = 0


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    status: str
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.status != "fail"


Check = Tuple[str, Callable[[], Tuple[bool, str]]]


def _run(suite: str, checks: List[Check]) -> List[CheckResult]:
    log = get_logger()
    results = []
    for name, check in checks:
        with log.context(suite=suite, check=name):
            try:
                with log.timed("check", module="toricount.suites"):
                    ok, detail = check()
                status = "pass" if ok else "fail"
            except BudgetError as e:
                status, detail = "skip", str(e)
            results.append(CheckResult(suite, name, status, detail))
            log.info(f"{status} {detail}", module="toricount.suites")
    return results


# -- toric identities ------------------------------------------------------------------------


def _toric_identity_checks(params: SuiteParams) -> List[Check]:
    checks: List[Check] = []
    for name in IDENTITY_VARIETIES:

        def class_identity(name=name):
            X = catalog_variety(name)
            return check_class_identity(X), f"Σ μ⁰(n) L^(#I-|n|) vs (L-1)^{X.pic_rank}·{X.class_of_X()!r}"

        def moebius_properties(name=name):
            X = catalog_variety(name)
            table = mu0(X)
            same = table.support() == mu0_closed_form(X).support()
            return partial_sums_match_faces(X, table) and same, f"{len(table.support())} nonzero values"

        def exactness(name=name):
            X = catalog_variety(name)
            problem = check_exactness(X)
            orbits = orbit_point_count(X, params.q)
            ok = problem is None and orbits == X.point_count(params.q)
            return ok, problem or f"#X(F_{params.q}) = {orbits}"

        checks += [
            (f"{name}:class-identity", class_identity),
            (f"{name}:moebius", moebius_properties),
            (f"{name}:exactness", exactness),
        ]
    return checks


# -- oracle equivalences ---------------------------------------------------------------------


def _oracle_checks(params: SuiteParams) -> List[Check]:
    checks: List[Check] = []
    for name in ORACLE_VARIETIES:
        for q in (2, 3):

            def counts(name=name, q=q):
                X = catalog_variety(name)
                classes = [y for d in range(5) for y in X.degree_classes_of_height(X.omega, d)]
                mu = mu_aggregate_fq(X, q, max(sum(y) for y in classes))
                tested = skipped = 0
                for y in classes:
                    try:
                        brute = census.bruteforce_count(X, y, q, params.budget, params.jobs)
                    except BudgetError:
                        skipped += 1
                        continue
                    closed = census.count_closed_form(X, y, q, mu)
                    if brute != closed:
                        return False, f"y={list(y)}: closed form {closed}, brute force {brute}"
                    tested += 1
                return True, f"{tested} classes agree, {skipped} over budget"

            checks.append((f"{name}:counts:q={q}", counts))

        def aggregates(name=name):
            X = catalog_variety(name)
            q, dmax = 2, 3
            series = mu_aggregate_fq(X, q, dmax)
            for d in all_exponents(X.num_rays, dmax):
                brute = bruteforce_mu_aggregate(X, q, d, params.budget)
                if brute != series[d]:
                    return False, f"d={list(d)}: Euler product {series[d]}, enumeration {brute}"
            return True, f"all |d| <= {dmax} at q={q}"

        checks.append((f"{name}:mu-aggregate", aggregates))
    return checks


# -- motivic ---------------------------------------------------------------------------------


def _random_series(rng: random.Random, nvars: int, dmax: int) -> MultiSeries:
    coeffs: Dict[Tuple[int, ...], LPoly] = {(0,) * nvars: LPoly.ONE}
    for e in all_exponents(nvars, dmax):
        if any(e) and rng.random() < 0.4:
            coeffs[e] = LPoly.from_dict({0: rng.randint(-2, 2), 1: rng.randint(-1, 1)})
    return MultiSeries(nvars, dmax, coeffs)


def _motivic_checks(params: SuiteParams) -> List[Check]:
    dmax = params.max_total_degree

    def blowup_mu():
        X = catalog_variety("BlP2")
        computed = mu_motivic(X, dmax)
        collections = finite_product_form(X)
        if collections is None:
            return False, "no finite product form"
        expected = mu_motivic_closed(X, dmax, collections)
        mismatch = computed.first_difference(expected)
        return mismatch is None, f"to |d| <= {dmax}" if mismatch is None else f"first mismatch {mismatch}"

    def blowup_constants():
        X = catalog_variety("BlP2")
        value = census.c_mot(X, -8)
        expected = LPoly.from_dict({2: 1, 0: -2, -2: 1})
        fin, tail = census.c_fin(X, 3, 12)
        closed_fin = Fraction(9) * (1 - Fraction(1, 9)) ** 2
        ok = value == TailSeries.exact(expected) and fin == closed_fin and eval_at(expected, 3) == closed_fin
        return ok, f"c_mot={value!r}, c_fin(3)={fin} (tail {tail})"

    def power_identity():
        report = verify_power_identity(10, "P1")
        return report.ok, "order 10" if report.ok else f"first mismatch {report.first_mismatch}"

    def two_routes():
        rng = random.Random(params.seed)
        for k in range(20):
            p = _random_series(rng, 2, 6)
            x = LPoly.from_dict({0: rng.randint(-3, 3), 1: rng.randint(-2, 2)})
            mismatch = series_pow(p, x, "exp-log").first_difference(series_pow(p, x, "binomial"))
            if mismatch is not None:
                return False, f"input {k}: {mismatch}"
        return True, "20 random inputs to order 6"

    def from_definition(name):
        def check():
            X = catalog_variety(name)
            bound = min(3, dmax)
            expected = mu_motivic(X, bound)
            computed = mu_motivic_from_definition(X, bound, params.primes, params.budget)
            mismatch = computed.first_difference(expected)
            return mismatch is None, f"|d| <= {bound}" if mismatch is None else f"first mismatch {mismatch}"

        return check

    def dimension_law(name):
        def check():
            X = catalog_variety(name)
            classes = [y for d in range(5) for y in X.degree_classes_of_height(X.omega, d)]
            mu = mu_aggregate_fq(X, params.q, max(sum(y) for y in classes))
            mu_mot = census.motivic_coefficients(X, max(sum(y) for y in classes))
            for y in classes:
                report = census.count_report(X, y, params.q, mu, mu_mot)
                if not report.consistent():
                    return False, f"y={list(y)}: class {report.class_L!r}, count {report.count}"
            return True, f"{len(classes)} classes"

        return check

    def dimension_bound(name):
        def check():
            return dimension_bound_holds(mu_motivic(catalog_variety(name), dmax)), f"|d| <= {dmax}"

        return check

    def euler_form(name):
        def check():
            X = catalog_variety(name)
            fin, tail = census.c_fin(X, 3, 12)
            euler, bound = census.c_fin_euler(X, 3, 12)
            if tail is None or bound is None:
                return False, f"no usable bound (tail {tail}, euler bound {bound})"
            gap = abs(fin - euler)
            return gap <= tail + bound, f"|c_fin - euler| = {float(gap):.3g} <= {float(tail + bound):.3g}"

        return check

    checks: List[Check] = [
        ("BlP2:mu-values", blowup_mu),
        ("BlP2:constants", blowup_constants),
        ("P1:power-identity", power_identity),
        ("series-pow:two-routes", two_routes),
    ]
    for name in ("P2", "BlP2"):
        checks.append((f"{name}:mu-from-definition", from_definition(name)))
    for name in ORACLE_VARIETIES:
        checks.append((f"{name}:dimension-law", dimension_law(name)))
    for name in ("P2", "BlP2", "dP6"):
        checks.append((f"{name}:dimension-bound", dimension_bound(name)))
    for name in ("P2", "BlP2", "P1xP1"):
        checks.append((f"{name}:c_fin-euler", euler_form(name)))
    return checks


# -- cone generating functions ---------------------------------------------------------------


def _cone_checks(params: SuiteParams) -> List[Check]:
    def regular_product():
        z = cone_zeta(Cone([(1, 0, 0), (1, 1, 0), (1, 1, 1)]))
        return z.is_product_form(), f"{len(z.terms)} term(s)"

    def coefficients(name):
        def check():
            X = catalog_variety(name)
            x = X.omega
            expected = enumerate_levels(X.dual_effective_cone, x, 30)
            computed = specialize_zeta(X.dual_effective_zeta, x).coefficients(30)
            return computed == expected, "levels 0..30 along ω"

        return check

    def asymptotics():
        z = cone_zeta(Cone([(1, 0), (1, 2)]))
        x = (1, 1)
        exact = specialize_zeta(z, x).coefficients(200)[200]
        approx = asymptotic_count(z, x, 200)
        ratio = Fraction(exact) / approx
        return abs(ratio - 1) <= Fraction(1, 10), f"count {exact}, leading term {approx}"

    def controlled(name):
        def check():
            X = catalog_variety(name)
            diffs = census.zeta_difference(X, params.q, X.omega, params.max_height)
            # |a_d|·d^(2 - rk)·q^-d
            report = census.control_check(diffs, Fraction(1, params.q), X.pic_rank - 1)
            return report.bounded, f"sup {report.sup_observed}, monotone={report.monotone}"

        return check

    checks: List[Check] = [("regular-cone:product-form", regular_product)]
    for name in ("P2", "P1xP1", "BlP2", "F(2)", "dP6"):
        checks.append((f"{name}:eff-dual-levels", coefficients(name)))
    checks.append(("asymptotic:alpha", asymptotics))
    for name in ("P2", "BlP2"):
        checks.append((f"{name}:controlled", controlled(name)))
    return checks


# -- cox3 ------------------------------------------------------------------------------------


def _random_form(rng: random.Random, q: int, degree: int) -> BinaryForm:
    while True:
        form = BinaryForm(q, tuple(rng.randrange(q) for _ in range(degree + 1)))
        if not form.is_zero():
            return form


def _cox3_checks(params: SuiteParams) -> List[Check]:
    def relation_dimension():
        rng = random.Random(params.seed)
        for k in range(100):
            q = rng.choice((3, 5))
            D = rng.randint(0, 4)
            e = [rng.randint(0, D // 2) for _ in range(3)]
            R = [_random_form(rng, q, ei) for ei in e]
            formula = cox3.relation_solution_dim(e, D, R)
            nullity = cox3.relation_nullspace_dim(R, D, q)
            if formula != nullity:
                return False, f"instance {k}: q={q} D={D} R={R}: formula {formula}, nullity {nullity}"
        return True, "100 random instances over q in {3, 5}"

    def shifted_counts():
        q = 2
        for d in ((0, 0, 0, 0), (1, 0, 0, 0), (0, 1, 0, 0)):
            shifts = cox3.unit_shifts(q)
            brute = cox3.nx_bruteforce(d, shifts, q, budget=params.budget)
            formula = cox3.nx_formula(d, shifts, q, params.budget)
            if brute != formula:
                return False, f"d={list(d)}: enumeration {brute}, closed form {formula}"
        return True, "unshifted small degrees at q=2"

    def moebius_count():
        q = 2
        for d in ((0, 0, 0, 0), (1, 0, 0, 0), (0, 1, 0, 0)):
            brute = cox3.bruteforce_count_cox3(d, q, params.budget)
            via = cox3.count_via_moebius_cox3(d, q, params.budget)
            if brute != via:
                return False, f"d={list(d)}: enumeration {brute}, Möbius sum {via}"
        return True, "small degrees at q=2"

    def degree_law():
        rows = []
        for d in ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)):
            poly = cox3.interpolate_count_cox3(d, params.primes, params.budget)
            expected = cox3.COX3.morphism_dimension(d)
            if poly.degree() != expected or poly.leading_coeff() != 1:
                return False, f"d={list(d)}: {poly!r}, expected degree {expected} and unit leading coefficient"
            rows.append(f"{list(d)}: {poly!r}")
        return True, "; ".join(rows)

    def as_check(fn: Callable[[], cox3.IdentityReport]) -> Callable[[], Tuple[bool, str]]:
        def check():
            report = fn()
            return report.ok, report.detail

        return check

    def local_factor():
        n = (0, 1, 0, 0, 1, 0, 0)
        return cox3.local_factor_matches_series(n, 6), f"n={list(n)} to order 6"

    return [
        ("mu0:partial-sums", lambda: (cox3.mu0_partial_sums_ok(), "faces from the forbidden incidences")),
        ("relation-dimension", relation_dimension),
        ("gcd-generating", as_check(lambda: cox3.gcd_identity_check(8))),
        ("local-factor", local_factor),
        ("tamagawa-local", as_check(cox3.tamagawa_local_identity)),
        ("torsor:q=2", as_check(lambda: cox3.torsor_identity_check(2, params.budget))),
        ("torsor:q=3", as_check(lambda: cox3.torsor_identity_check(3, params.budget))),
        ("shifted-counts", shifted_counts),
        ("moebius-count", moebius_count),
        ("degree-law", degree_law),
    ]


_BUILDERS: Dict[str, Callable[[SuiteParams], List[Check]]] = {
    "toric-identities": _toric_identity_checks,
    "oracle": _oracle_checks,
    "motivic": _motivic_checks,
    "cone": _cone_checks,
    "cox3": _cox3_checks,
}


def list_checks(suite: str, params: SuiteParams) -> List[str]:
    if suite not in _BUILDERS:
        raise SuiteError(f"unknown suite '{suite}', available: {', '.join(SUITE_NAMES)}")
    return [name for name, _ in _BUILDERS[suite](params)]


def run_suite(suite: str, params: SuiteParams) -> List[CheckResult]:
    """Run every check of ``suite`` in order.

    Raises:
        SuiteError: for an unknown suite name.
    """
    if suite not in _BUILDERS:
        raise SuiteError(f"unknown suite '{suite}', available: {', '.join(SUITE_NAMES)}")
    return _run(suite, _BUILDERS[suite](params))
