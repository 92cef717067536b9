"""Tests for the tolerance ledger and config loading."""

import dataclasses
import re
from textwrap import dedent

import pytest

from pyhardy.config import DEFAULTS, Settings, load_settings, settings_from_mapping


class TestDefaults:
    def test_documented_values(self):
        ledger = DEFAULTS.ledger()
        assert ledger["probe.r_min"] == 1e-8
        assert ledger["probe.r_max"] == 1e8
        assert ledger["probe.points"] == 4001
        assert ledger["quad.rel_tol"] == 1e-10
        assert ledger["classify.terms"] == 40
        assert ledger["classify.theta_abs_tol"] == 1e-6
        assert ledger["verify.rel_tol"] == 1e-6
        assert ledger["bk.B_range"] == [1e-6, 1e6]
        assert ledger["sharpness.budget"] == 10_000

    def test_ledger_is_sorted_and_flat(self):
        keys = list(DEFAULTS.ledger())
        assert keys == sorted(keys)
        assert len(keys) == len(dataclasses.fields(Settings))

    def test_bk_grids(self):
        assert len(DEFAULTS.bk_eps_grid) == 7
        assert DEFAULTS.bk_eps_grid[0] == pytest.approx(1e-2)
        assert DEFAULTS.bk_y_grid[3] == pytest.approx(1.0)
        assert DEFAULTS.bk_y_grid[-1] == pytest.approx(1e2)

    def test_probe_grid(self):
        grid = DEFAULTS.probe_grid(5)
        assert len(grid) == 5
        assert grid[0] == pytest.approx(1e-8)
        assert grid[2] == pytest.approx(1.0)
        assert len(DEFAULTS.probe_grid()) == 4001


class TestValidation:
    def test_window(self):
        with pytest.raises(ValueError, match="0 < r_min < r_max"):
            Settings(probe_r_min=1.0, probe_r_max=0.5)

    def test_rel_tol(self):
        with pytest.raises(ValueError, match=re.escape("quad.rel_tol must lie in")):
            Settings(quad_rel_tol=0.1)

    def test_B_range(self):
        with pytest.raises(ValueError, match="bk.B_range"):
            Settings(bk_B_range=(1.0, 0.5))

    def test_divergence_factor(self):
        with pytest.raises(ValueError, match="must exceed 1"):
            Settings(quad_divergence_factor=1.0)

    def test_theta_floor(self):
        with pytest.raises(ValueError, match="classify.theta_abs_tol must be non-negative"):
            Settings(classify_theta_abs_tol=-1e-9)


class TestMapping:
    def test_overrides(self):
        s = settings_from_mapping({"quad.rel_tol": "1e-8", "classify.terms": 20.0})
        assert s.quad_rel_tol == 1e-8
        assert s.classify_terms == 20
        assert isinstance(s.classify_terms, int)
        assert s.verify_rel_tol == DEFAULTS.verify_rel_tol

    def test_empty_mapping_keeps_defaults(self):
        assert settings_from_mapping({}) == DEFAULTS

    def test_list_values(self):
        s = settings_from_mapping({"bk.eps_grid": [0.1, 1], "bk.y_grid": "[0.5, 2.0]"})
        assert s.bk_eps_grid == (0.1, 1.0)
        assert s.bk_y_grid == (0.5, 2.0)

    def test_unknown_key_suggests(self):
        with pytest.raises(KeyError, match="Unknown config key 'quad.rel_tl'") as exc:
            settings_from_mapping({"quad.rel_tl": 1e-9})
        assert "Close matches: quad.rel_tol" in str(exc.value)

    def test_integer_key_rejects_fraction(self):
        with pytest.raises(ValueError, match="expects an integer"):
            settings_from_mapping({"classify.terms": 20.5})

    def test_number_key_rejects_text(self):
        with pytest.raises(ValueError, match="expects a number"):
            settings_from_mapping({"verify.rel_tol": "tight"})

    def test_empty_list(self):
        with pytest.raises(ValueError, match="non-empty list"):
            settings_from_mapping({"bk.eps_grid": []})


class TestLoadSettings:
    def test_toml_tables(self, tmp_path):
        path = tmp_path / "ledger.toml"
        path.write_text(
            dedent(
                """
                [quad]
                rel_tol = 1e-9

                [bk]
                eps_grid = [0.1, 1.0]
                B_range = [1e-3, 1e3]
                """
            )
        )
        s = load_settings(path)
        assert s.quad_rel_tol == 1e-9
        assert s.bk_eps_grid == (0.1, 1.0)
        assert s.bk_B_range == (1e-3, 1e3)

    def test_key_value_lines(self, tmp_path):
        path = tmp_path / "ledger.cfg"
        path.write_text(
            dedent(
                """
                # looser verification
                verify.rel_tol = 1e-4
                bk.y_grid = 0.5, 2.0   # two points
                """
            )
        )
        s = load_settings(path)
        assert s.verify_rel_tol == 1e-4
        assert s.bk_y_grid == (0.5, 2.0)

    def test_key_value_line_without_equals(self, tmp_path):
        path = tmp_path / "ledger.cfg"
        path.write_text("verify.rel_tol 1e-4\n")
        with pytest.raises(ValueError, match="expected 'key=value'"):
            load_settings(path)

    def test_unknown_key_in_file(self, tmp_path):
        path = tmp_path / "ledger.toml"
        path.write_text("[probe]\npoint = 11\n")
        with pytest.raises(KeyError, match="Unknown config key 'probe.point'"):
            load_settings(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError, match="Config file not found"):
            load_settings(tmp_path / "absent.toml")
