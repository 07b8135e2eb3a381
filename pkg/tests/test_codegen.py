"""Lowering to C++: capture record collection, mangling, determinism,
and agreement between emitted records and the typechecker's scopes."""

import re

import hypothesis.strategies as st
import pytest
from hypothesis import given

from conftest import CORPUS
from sfc.codegen import (
    CodegenError,
    collect_capture_records,
    lower_program,
    mangle,
)
from sfc.parser import parse_program
from sfc.typecheck import DeltaLog, check_program


def _load(name):
    return parse_program((CORPUS / f"{name}.sfc").read_text())


def test_compose_records():
    recs = collect_capture_records(_load("compose"))
    sets = [r.field_names for r in recs]
    assert ("f",) in sets and ("f", "g") in sets
    assert len(sets) == 2


def test_capture_free_program_has_no_records():
    assert collect_capture_records(_load("id41")) == []


def test_same_name_set_deduplicates():
    # two different lambdas both capturing exactly {t} share one record
    recs = collect_capture_records(_load("shared_capture"))
    assert [r.field_names for r in recs] == [("t",)]
    text = lower_program(_load("shared_capture")).text
    assert text.count("struct closuret_") == 1


def test_records_match_typechecker_deltas():
    for path in sorted(CORPUS.glob("*.sfc")):
        p = parse_program(path.read_text())
        log: DeltaLog = []
        check_program(p, delta_log=log)
        by_names = {frozenset(r.field_names) for r in collect_capture_records(p)}
        for _, _, scope in log:
            if scope.entries:
                assert frozenset(scope.names) in by_names, path.name


def test_lowering_is_deterministic():
    for name in ["compose_inc_dbl", "snapshot", "cond_true"]:
        a = lower_program(_load(name)).text
        b = lower_program(_load(name)).text
        assert a == b


def test_compose_emits_two_field_record_construction():
    text = lower_program(_load("compose_inc_dbl")).text
    # the innermost lambda builds its record from the two enclosing locals
    assert re.search(r"closuret_\d+<.*>\(ju_f, ju_g\)", text)


def test_capture_free_lambda_lowers_without_scope_argument():
    text = lower_program(_load("id41")).text
    assert "rt::function<void, int(int)>" in text
    assert "closuret" not in text


def test_library_only_translation_unit_without_main():
    text = lower_program(_load("compose")).text
    assert "int main" not in text


def test_scope_extraction_binds_fields_to_locals():
    text = lower_program(_load("make_adder")).text
    assert "auto ju_n = env.ju_n;" in text


def test_no_allocation_constructs_in_output():
    for name in ["compose_inc_dbl", "snapshot", "cond_true", "make_adder"]:
        text = lower_program(_load(name)).text
        for pat in [r"\bnew\b", r"\bmalloc\b", r"\bstd::function\b", r"\bstd::vector\b"]:
            assert not re.search(pat, text), (name, pat)


def test_unlowerable_construct_rejected():
    with pytest.raises(CodegenError):
        lower_program(parse_program("let id = /\\'a. \\x: 'a. x\nlet partial = id"))


# -- mangling ----------------------------------------------------------------


def test_mangle_passthrough():
    assert mangle("compose") == "ju_compose"


def test_mangle_prime():
    assert mangle("f'") == "ju_f_prime"


def test_mangle_underscore_keeps_injectivity():
    assert mangle("f_prime") != mangle("f'")


IDENT = st.from_regex(r"[A-Za-z_][A-Za-z0-9_']*", fullmatch=True)


@given(st.tuples(IDENT, IDENT))
def test_mangle_injective(pair):
    a, b = pair
    if a != b:
        assert mangle(a) != mangle(b)


@given(IDENT)
def test_mangle_output_is_valid_cxx_identifier(name):
    assert re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", mangle(name))
