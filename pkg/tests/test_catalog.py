from __future__ import annotations

import random

import pytest

from tkd.catalog import (
    ConstraintSet,
    apply_rules,
    fill_cells,
    gather_constraints,
    item_matches,
    load_catalog,
    load_rules,
    query,
    subject_class,
)
from tkd.errors import (
    DuplicatePropertyError,
    ParseError,
    UnitDimensionError,
    UnknownObjectClassError,
    UnresolvedPlaceholderError,
)
from tkd.model import CellPath, CellValue, append_record, graph_cells, new_table, resolve_cell
from tkd.units import convert

from conftest import num, read_fixture, set_row, text


@pytest.fixture
def pipes_catalog():
    return load_catalog(read_fixture("pipes.cat"))


@pytest.fixture
def pipes_rules():
    return load_rules(read_fixture("pipes.rules"))


def test_catalog_parses(pipes_catalog):
    assert pipes_catalog.object_class == "Трубы"
    assert [f.name for f in pipes_catalog.fields] == ["DN", "s", "gost", "Масса 1 м"]
    assert pipes_catalog.fields[3].property_id == 5
    assert pipes_catalog.fields[3].unit == "кг"
    assert len(pipes_catalog.items) == 8
    first = pipes_catalog.items[0]
    assert first.applicability.dn == frozenset({50})
    assert first.applicability.p_max == 1.0
    assert first.applicability.t_min == -40


def test_empty_items_section():
    cat = load_catalog('catalog "Арматура"\nfield "Тип"\n')
    assert cat.items == ()


def test_row_arity_mismatch_reports_line():
    src = 'catalog "X"\nfield "A"\nfield "B"\nitem "только одно"\n'
    with pytest.raises(ParseError) as err:
        load_catalog(src)
    assert err.value.line == 4


def test_rules_duplicate_property():
    with pytest.raises(DuplicatePropertyError):
        load_rules('rule 3 = "{A}"\nrule 3 = "{B}"\n')


def test_gather_constraints(pipes_template):
    m = new_table(pipes_template)
    m, idx = append_record(m)
    m = set_row(m, idx, {"p": num(1.6, "МПа"), "t": num(80, "°C"), "dn": num(100, "мм")})
    subject = CellPath(idx, graph_cells(m.template, m.records[idx], "Наименование")[0])
    assert subject_class(m, subject) == "Трубы"
    cs = gather_constraints(m, subject)
    assert cs.pressure == (1.6, "МПа")
    assert cs.temperature == (80, "°C")
    assert cs.dn == 100


def test_gather_constraints_empty(pipes_template):
    m = new_table(pipes_template)
    m, idx = append_record(m)
    subject = CellPath(idx, graph_cells(m.template, m.records[idx], "Наименование")[0])
    assert gather_constraints(m, subject).is_empty


def test_gather_constraints_blank_source(pipes_template):
    m = new_table(pipes_template)
    m, idx = append_record(m)
    m = set_row(m, idx, {"p": num(1.6, "МПа")})
    cs = gather_constraints(m, CellPath(idx, graph_cells(m.template, m.records[idx], "Наименование")[0]))
    assert cs.pressure is not None
    assert cs.temperature is None and cs.dn is None


def test_query_pressure_picks_higher_rating(pipes_catalog):
    got = query([pipes_catalog], "Трубы", ConstraintSet(pressure=(1.6, "МПа"), dn=50))
    gosts = [item.values[2].text for _, item in got]
    assert gosts == ["8732-78"]  # the 2.5 МПа item; the 1.0 МПа one is excluded


def test_query_empty_constraints_returns_class(pipes_catalog):
    got = query([pipes_catalog], "Трубы", ConstraintSet())
    assert len(got) == len(pipes_catalog.items)


def test_query_unknown_class(pipes_catalog):
    with pytest.raises(UnknownObjectClassError):
        query([pipes_catalog], "Арматура", ConstraintSet())


def test_query_converts_constraint_units(pipes_catalog):
    # 16 кгс/см² ≈ 1.57 МПа: must behave exactly like the converted constraint
    a = query([pipes_catalog], "Трубы", ConstraintSet(pressure=(16, "кгс/см²")))
    b = query([pipes_catalog], "Трубы", ConstraintSet(pressure=(convert(16, "кгс/см²", "МПа"), "МПа")))
    assert a == b


def test_query_equals_brute_force_randomized(pipes_catalog):
    rng = random.Random(1234)
    for _ in range(300):
        cs = ConstraintSet(
            temperature=(rng.uniform(-100, 500), "°C") if rng.random() < 0.7 else None,
            pressure=(rng.uniform(0, 8), rng.choice(["МПа", "кгс/см²", "м вод.ст."])) if rng.random() < 0.7 else None,
            dn=rng.choice([50, 100, 150, 200, 250]) if rng.random() < 0.5 else None,
        )
        got = query([pipes_catalog], "Трубы", cs)
        brute = [(pipes_catalog, item) for item in pipes_catalog.items if item_matches(item, cs)]
        assert got == brute


def test_apply_rules_name_template(pipes_catalog, pipes_rules):
    item = pipes_catalog.items[0]
    props = apply_rules(pipes_rules, pipes_catalog, item)
    assert props[3].text == "Труба 57×3.5 ГОСТ 10704-91"
    # mass passes through from the field binding with its unit
    assert props[5].numeric == 4.62
    assert props[5].unit == "кг"


def test_apply_rules_identity_numeric(pipes_catalog):
    rules = load_rules('rule 5 = "{Масса 1 м}" unit кг\n')
    props = apply_rules(rules, pipes_catalog, pipes_catalog.items[2])
    assert props[5].numeric == 10.26
    assert props[5].unit == "кг"


def test_apply_rules_unresolved_placeholder(pipes_catalog):
    rules = load_rules('rule 3 = "Труба {nope}"\n')
    with pytest.raises(UnresolvedPlaceholderError):
        apply_rules(rules, pipes_catalog, pipes_catalog.items[0])


def test_fill_cells_verbatim_and_converted(pipes_template):
    m = new_table(pipes_template)
    m, idx = append_record(m)
    m, ignored = fill_cells(
        m,
        idx,
        {
            5: CellValue.of_number(4.62, "кг"),
            3: CellValue.of_text("Труба 57×3.5 ГОСТ 10704-91"),
            7: CellValue.of_text("лишнее"),
        },
    )
    assert ignored == [7]
    mass_cell = graph_cells(m.template, m.records[idx], "mass")[0]
    assert resolve_cell(m, CellPath(idx, mass_cell)).numeric == 4.62
    name_cell = graph_cells(m.template, m.records[idx], "Наименование")[0]
    assert resolve_cell(m, CellPath(idx, name_cell)).text == "Труба 57×3.5 ГОСТ 10704-91"


def test_fill_cells_unit_conversion(pipes_template):
    m = new_table(pipes_template)
    m, idx = append_record(m)
    m, _ = fill_cells(m, idx, {5: CellValue.of_number(4620, "г")})
    mass_cell = graph_cells(m.template, m.records[idx], "mass")[0]
    got = resolve_cell(m, CellPath(idx, mass_cell))
    assert got.unit == "кг"
    assert got.numeric == pytest.approx(4.62, rel=1e-12)


def test_fill_cells_dimension_mismatch(pipes_template):
    m = new_table(pipes_template)
    m, idx = append_record(m)
    with pytest.raises(UnitDimensionError):
        fill_cells(m, idx, {5: CellValue.of_number(3, "мм")})


def test_fill_cells_leaves_other_graphs_alone(pipes_template):
    m = new_table(pipes_template)
    m, idx = append_record(m)
    m = set_row(m, idx, {"qty": num(12)})
    m2, _ = fill_cells(m, idx, {3: CellValue.of_text("Труба")})
    qty_cell = graph_cells(m2.template, m2.records[idx], "qty")[0]
    assert resolve_cell(m2, CellPath(idx, qty_cell)).numeric == 12
