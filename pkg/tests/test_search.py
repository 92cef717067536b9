"""Tests for close-match suggestions."""

import pytest

from pyhardy.search import suggest, unknown_name

FAMILIES = ["classical", "omega_phi_prime", "log_weights", "gaussian_counterexample"]


class TestSuggest:
    def test_typo(self):
        assert suggest("clasical", FAMILIES)[0] == "classical"

    def test_case_and_whitespace_fold(self):
        assert suggest("  Log_Weights ", FAMILIES)[0] == "log_weights"

    def test_nothing_close(self):
        assert suggest("zzzz", FAMILIES) == []

    def test_empty_inputs(self):
        assert suggest("", FAMILIES) == []
        assert suggest("classical", []) == []

    def test_limit(self):
        assert len(suggest("a", ["a", "aa", "aaa", "aaaa"], limit=2)) <= 2


class TestUnknownName:
    def test_message(self):
        exc = unknown_name("catalog entry", "gausian", FAMILIES)
        assert isinstance(exc, KeyError)
        message = exc.args[0]
        assert message.startswith("Unknown catalog entry 'gausian'.")
        assert "Close matches: gaussian_counterexample" in message
        assert message.endswith(
            "Available: classical, gaussian_counterexample, log_weights, omega_phi_prime"
        )

    def test_no_close_match(self):
        message = unknown_name("builtin function", "qqq", ["laplace"]).args[0]
        assert "Close matches" not in message

    def test_raises_cleanly(self):
        with pytest.raises(KeyError, match="Unknown probe key 'rmax'"):
            raise unknown_name("probe key", "rmax", ("r_min", "r_max"))
