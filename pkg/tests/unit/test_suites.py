import pytest

from toricount import suites
from toricount.forms import BudgetError
from toricount.suites import SUITE_NAMES, CheckResult, SuiteError, SuiteParams, list_checks, run_suite


def _over_budget():
    raise BudgetError("needs 11 visits")


class TestListing:
    @pytest.mark.parametrize("suite", SUITE_NAMES)
    def test_every_suite_has_checks(self, suite):
        """Test every suite lists at least one check and no name twice."""
        names = list_checks(suite, SuiteParams())
        assert names
        assert len(names) == len(set(names))

    def test_check_names(self):
        """Test check names follow the subject:check pattern."""
        names = list_checks("toric-identities", SuiteParams())
        assert "dP6:class-identity" in names
        assert "F(2):exactness" in names
        assert "torsor:q=2" in list_checks("cox3", SuiteParams())

    def test_unknown_suite(self):
        """Test an unknown suite name lists the available ones."""
        with pytest.raises(SuiteError, match="available"):
            list_checks("everything", SuiteParams())
        with pytest.raises(SuiteError):
            run_suite("everything", SuiteParams())


class TestRun:
    def test_statuses(self, mocker):
        """Test pass, skip and fail statuses, with a budget overrun counted as a skip."""
        checks = [("good", lambda: (True, "fine")), ("big", _over_budget), ("bad", lambda: (False, "mismatch"))]
        mocker.patch.dict(suites._BUILDERS, {"cone": lambda params: checks})
        results = run_suite("cone", SuiteParams())
        assert results == [
            CheckResult("cone", "good", "pass", "fine"),
            CheckResult("cone", "big", "skip", "needs 11 visits"),
            CheckResult("cone", "bad", "fail", "mismatch"),
        ]
        assert [r.ok for r in results] == [True, True, False]

    def test_other_errors_propagate(self, mocker):
        """Test errors other than budget overruns are not swallowed."""
        def broken():
            raise ValueError("boom")

        mocker.patch.dict(suites._BUILDERS, {"cone": lambda params: [("broken", broken)]})
        with pytest.raises(ValueError):
            run_suite("cone", SuiteParams())

    def test_toric_identities_pass(self):
        """Test every toric identity check passes."""
        results = run_suite("toric-identities", SuiteParams())
        assert all(r.status == "pass" for r in results), [r for r in results if not r.ok]

    @pytest.mark.slow
    def test_cone_suite_passes(self):
        """Test every cone check passes."""
        results = run_suite("cone", SuiteParams())
        assert all(r.status == "pass" for r in results), [r for r in results if not r.ok]
