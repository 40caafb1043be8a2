from __future__ import annotations

import random

import pytest

from tkd.errors import ParseError, VersionMismatchError
from tkd.model import CellPath, CellValue, ContinuationSpec, append_record, new_table, set_cell, validate_template
from tkd.structure import load_module, parse_structure, save_module, serialize_structure

from conftest import build_explication_module, random_module, random_template, read_fixture


def test_minimal_source():
    t = parse_structure('table "T" { leaf "Поз" width 10 }')
    assert t.root.is_leaf
    assert t.root.graph_id == "Поз"
    assert t.root.width_mm == 10


def test_flange_fixture_shape(flange_template):
    assert validate_template(flange_template) == []
    assert len(flange_template.root.children) == 4
    from tkd.model import enumerate_graphs

    assert len(enumerate_graphs(flange_template)) == 16


def test_width_zero_is_structural_diagnostic():
    t = parse_structure('table "T" { leaf "A" width 0 }')
    diags = validate_template(t)
    assert any("positive" in d.message for d in diags)


def test_syntax_error_position():
    with pytest.raises(ParseError) as err:
        parse_structure('table "T"\n  cols {\n    leaf 42\n  }')
    assert err.value.line == 3
    assert err.value.column >= 5


def test_unknown_unit_rejected():
    with pytest.raises(ParseError) as err:
        parse_structure('table "T" { leaf "A" [width=10, unit=вёдра] }')
    assert "unknown unit" in str(err.value)


def test_bracketed_and_bare_attrs_agree():
    a = parse_structure('table "T" { leaf "A" [width=10, prop=3] }')
    b = parse_structure('table "T" { leaf "A" width 10 prop 3 }')
    assert a == b


def test_serialize_parse_identity(spec_template, explication_template, flange_template, pipes_template):
    for t in (spec_template, explication_template, flange_template, pipes_template):
        text = serialize_structure(t)
        assert parse_structure(text) == t
        assert serialize_structure(parse_structure(text)) == text


def test_serialization_deterministic(spec_template):
    assert serialize_structure(spec_template) == serialize_structure(spec_template)


def test_fuzz_structure_round_trip():
    rng = random.Random(99)
    for _ in range(500):
        t = random_template(rng)
        text = serialize_structure(t)
        back = parse_structure(text)
        assert back == t
        assert serialize_structure(back) == text


def test_module_round_trip_explication(explication_module):
    text = save_module(explication_module)
    back = load_module(text)
    assert back == explication_module
    assert save_module(back) == text


def test_module_round_trip_header_only(spec_template):
    m = new_table(spec_template)
    assert load_module(save_module(m)) == m


def test_module_round_trip_large(spec_template):
    rng = random.Random(7)
    m = new_table(spec_template)
    for _ in range(1000):
        m, idx = append_record(m)
        m = set_cell(m, CellPath(idx, (2,)), CellValue.of_text(f"Позиция {rng.randint(0, 10**6)}"))
    assert load_module(save_module(m)) == m


def test_module_round_trip_continuation(spec_template):
    m = new_table(
        spec_template,
        ContinuationSpec(chunk_height_mm=120.0, direction="left", repeat_header=True, number_row=True, first_graph_number=25),
    )
    back = load_module(save_module(m))
    assert back.continuation == m.continuation


def test_fuzz_module_round_trip():
    rng = random.Random(4242)
    for _ in range(500):
        m = random_module(rng)
        text = save_module(m)
        back = load_module(text)
        assert back == m
        assert save_module(back) == text


def test_version_mismatch():
    with pytest.raises(VersionMismatchError):
        load_module('tkd/2\ntable "T" { leaf "A" width 10 }\nrecord\n  cell . = ""\n')
    with pytest.raises(VersionMismatchError):
        load_module("nonsense")


def test_grammar_totality_fuzz():
    rng = random.Random(11)
    glyphs = 'table cols rows leaf arb fixed {}[]=,"# \n\t прочее 0 1 2 . / | @ \\ ° ²'
    for _ in range(400):
        junk = "".join(rng.choice(glyphs) for _ in range(rng.randint(0, 120)))
        try:
            parse_structure(junk)
        except ParseError as err:
            assert err.line >= 1 and err.column >= 1
    for _ in range(200):
        junk = bytes(rng.randrange(256) for _ in range(rng.randint(0, 60))).decode("utf-8", "replace")
        try:
            parse_structure(junk)
        except ParseError:
            pass


def test_error_position_inside_token():
    src = 'table "T"\n  cols {\n    leaf "A" [width=10]\n    leaf "B" [width=ten]\n  }'
    with pytest.raises(ParseError) as err:
        parse_structure(src)
    assert err.value.line == 4
    # column points inside the offending value token
    line = src.split("\n")[3]
    assert line[err.value.column - 1 :].startswith("ten")
