"""Pin the content of user-facing error messages.

Every error path echoes the exact text the user supplied (expression,
catalog name, config key, file path) and, where a close match exists,
suggests it. Expressions are full of regex specials (``^``, ``(``, ``*``),
so matches always go through ``re.escape``.
"""

from __future__ import annotations

import re

import pytest

import pyhardy
from pyhardy.catalog import load
from pyhardy.config import settings_from_mapping
from pyhardy.expr import DomainError, ExpressionSyntaxError, parse
from pyhardy.loader import load_triple
from pyhardy.nfunction import parse_nfunction
from pyhardy.weights import AssumptionError, WeightTriple

_PUBLIC_ERROR_VOCAB = frozenset(
    {"KeyError", "ValueError", "TypeError", "AttributeError", "FileNotFoundError"}
)


def _assert_input_echoed(msg: str, user_input: str) -> None:
    assert user_input in msg or repr(user_input) in msg, (
        f"user input {user_input!r} not echoed in error message:\n  {msg!r}"
    )


def _public_base(exc: BaseException) -> str:
    for cls in type(exc).__mro__:
        if cls.__name__ in _PUBLIC_ERROR_VOCAB:
            return cls.__name__
    return type(exc).__name__


class TestExpressions:
    @pytest.mark.parametrize("text", ["r^(r+1)", "2**r", "sqrt(r)", "r + * 2"])
    def test_syntax_error_echoes_text(self, text):
        with pytest.raises(ExpressionSyntaxError) as exc:
            parse(text)
        assert exc.value.text == text
        assert 0 <= exc.value.offset <= len(text.encode("utf-8"))
        assert _public_base(exc.value) == "ValueError"

    def test_unknown_identifier_is_named(self):
        with pytest.raises(ExpressionSyntaxError, match=re.escape("'sqrt'")):
            parse("sqrt(r)")

    def test_domain_error_names_point_and_expression(self):
        e = parse("ln(r - 2)")
        with pytest.raises(DomainError) as exc:
            e(1.0)
        assert exc.value.at == 1.0
        _assert_input_echoed(str(exc.value), e.text)


class TestNames:
    @pytest.mark.parametrize("name", ["clasical", "Gaussian counter-example", "log weights"])
    def test_catalog_miss_echoes_input(self, name):
        with pytest.raises(KeyError) as exc:
            load(name)
        _assert_input_echoed(exc.value.args[0], name)

    def test_catalog_parameter_miss(self):
        with pytest.raises(KeyError, match=re.escape("'alfa'")) as exc:
            load("classical:alfa=2")
        assert "Close matches: alpha" in exc.value.args[0]

    def test_subscript_uses_the_same_message(self):
        with pytest.raises(KeyError, match=re.escape("'classical:q=1'")):
            pyhardy["classical:q=1"]

    def test_config_key(self):
        with pytest.raises(KeyError, match=re.escape("'bk.eps_grd'")) as exc:
            settings_from_mapping({"bk.eps_grd": [1.0]})
        assert "bk.eps_grid" in exc.value.args[0]

    def test_malformed_n_function(self):
        with pytest.raises(ValueError, match=re.escape("'power:p=two'")):
            parse_nfunction("power:p=two")


class TestTriples:
    def test_assumption_error_names_expression(self):
        with pytest.raises(AssumptionError) as exc:
            WeightTriple.build("power:p=2", "-4*ln(r)", "r - 1")
        _assert_input_echoed(str(exc.value), "(r - 1.0)")
        assert _public_base(exc.value) == "ValueError"

    def test_missing_file_echoes_path(self, tmp_path):
        path = tmp_path / "no such triple.toml"
        with pytest.raises(FileNotFoundError, match=re.escape(str(path))):
            load_triple(path)

    def test_invalid_toml_echoes_path(self, tmp_path):
        path = tmp_path / "triple.toml"
        path.write_text("M = [\n", encoding="utf-8")
        with pytest.raises(ValueError, match=re.escape(str(path))):
            load_triple(path)
