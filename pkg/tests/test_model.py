from __future__ import annotations

import random

import pytest

from tkd.errors import (
    HeaderReadonlyError,
    HeaderRecordError,
    NotArbitrarySplitError,
    PathNotLeafError,
    PathOutOfRangeError,
    UnitDimensionError,
)
from tkd.model import (
    CellPath,
    CellValue,
    TableTemplate,
    append_record,
    delete_part,
    enumerate_graphs,
    graph_cells,
    insert_part,
    leaf,
    module_conforms,
    new_table,
    resolve_cell,
    set_cell,
    split,
    validate_template,
)

from conftest import build_flange_module, random_module, set_row


def test_single_leaf_template_is_valid():
    t = TableTemplate(name="T", root=leaf("Поз", 10))
    assert validate_template(t) == []


def test_split_needs_two_children():
    t = TableTemplate(name="T", root=split("cols", [leaf("A", 10)]))
    diags = validate_template(t)
    assert any("needs ≥2 children" in d.message and d.severity == "error" for d in diags)


def test_rows_fixed_unequal_widths():
    t = TableTemplate(name="T", root=split("rows", [leaf("A", 20), leaf("B", 30)]))
    diags = validate_template(t)
    assert any("unequal widths" in d.message for d in diags)


def test_arbitrary_on_columns_rejected():
    t = TableTemplate(name="T", root=split("cols", [leaf("A", 10)], arbitrary=True))
    diags = validate_template(t)
    assert any("rows-axis" in d.message for d in diags)


def test_duplicate_graph_ids():
    t = TableTemplate(name="T", root=split("cols", [leaf("A", 10), leaf("A", 10)]))
    diags = validate_template(t)
    assert any("duplicate graph id" in d.message for d in diags)


def test_new_table_header_from_texts(spec_template):
    m = new_table(spec_template)
    assert len(m.records) == 1
    texts = [resolve_cell(m, CellPath(0, (i,))).text for i in range(6)]
    assert texts == ["Поз", "Обозначение", "Наименование", "Кол", "Масса, кг", "Примечание"]


def test_new_table_flange_header(flange_template):
    m = new_table(flange_template)
    # 4 group title cells over 16 graph cells
    titles = [resolve_cell(m, CellPath(0, (g, 0, 0))).text for g in range(4)]
    assert titles == ["Фланцы", "Крепление деталей фланцевых соединений", "Прокладки", "Сварные стыки труб"]
    graph_headers = []
    for g in enumerate_graphs(m.template):
        for steps in graph_cells(m.template, m.records[0], g.graph_id):
            graph_headers.append(resolve_cell(m, CellPath(0, steps)).text)
    assert len(graph_headers) == 16
    assert graph_headers[:5] == ["Диаметр", "Ряд", "ГОСТ", "Материал", "Количество"]


def test_resolve_header_first_leaf(spec_template):
    m = new_table(spec_template)
    assert resolve_cell(m, CellPath(0, (0,))).text == "Поз"


def test_resolve_out_of_range(spec_template):
    m = new_table(spec_template)
    with pytest.raises(PathOutOfRangeError):
        resolve_cell(m, CellPath(5, (0,)))


def test_resolve_not_leaf(spec_template):
    m = new_table(spec_template)
    with pytest.raises(PathNotLeafError):
        resolve_cell(m, CellPath(0, ()))


def test_set_cell_roundtrip(spec_template):
    m = new_table(spec_template)
    m, idx = append_record(m)
    path = CellPath(idx, (3,))
    m = set_cell(m, path, CellValue.of_number(9))
    got = resolve_cell(m, path)
    assert got.numeric == 9
    assert got.text == "9"
    m2 = set_cell(m, path, got)
    assert resolve_cell(m2, path) == got


def test_set_cell_header_readonly(spec_template):
    m = new_table(spec_template)
    with pytest.raises(HeaderReadonlyError):
        set_cell(m, CellPath(0, (0,)), CellValue.of_text("x"))


def test_set_cell_unit_dimension_mismatch(pipes_template):
    m = new_table(pipes_template)
    m, idx = append_record(m)
    cells = graph_cells(m.template, m.records[idx], "p")
    with pytest.raises(UnitDimensionError):
        set_cell(m, CellPath(idx, cells[0]), CellValue.of_number(5, "кг"))


def test_insert_part_plain_row(flange_template):
    m = build_flange_module(flange_template)
    # weld items band: group 3, band 1
    weld = CellPath(1, (3, 1))
    before = len(m.records[1].children[3].children[1].children)
    m2, created = insert_part(m, weld, 0)
    after = len(m2.records[1].children[3].children[1].children)
    assert after == before + 1
    assert len(created) == 1


def test_insert_part_flange_group_act(flange_template):
    m = build_flange_module(flange_template)
    fl = CellPath(1, (0, 1))
    m2, created = insert_part(m, fl, 99)
    assert len(created) == 5  # 1 фланец + 3 крепёж + 1 прокладка
    counts = {
        "fl": len(m2.records[1].children[0].children[1].children),
        "fast": len(m2.records[1].children[1].children[1].children),
        "gask": len(m2.records[1].children[2].children[1].children),
        "weld": len(m2.records[1].children[3].children[1].children),
    }
    assert counts == {"fl": 2, "fast": 6, "gask": 2, "weld": 1}


def test_insert_delete_identity(flange_template):
    m = build_flange_module(flange_template)
    fl = CellPath(1, (0, 1))
    m2, _ = insert_part(m, fl, 0)
    m3 = delete_part(m2, fl, 0)
    assert m3 == m


def test_insert_head_twice_delete_once(spec_template):
    root = split("rows", [split("cols", [leaf("A", 10), leaf("B", 10)])], arbitrary=True)
    t = TableTemplate(name="R", root=root)
    m = new_table(t)
    m, idx = append_record(m)
    sp = CellPath(idx, ())
    m, _ = insert_part(m, sp, 0)
    m, _ = insert_part(m, sp, 0)
    parts = len(m.records[idx].children)
    m = delete_part(m, sp, 0)
    assert len(m.records[idx].children) == parts - 1


def test_insert_into_header_rejected(flange_template):
    m = build_flange_module(flange_template)
    with pytest.raises(HeaderRecordError):
        insert_part(m, CellPath(0, (0, 1)), 0)


def test_delete_from_fixed_split_rejected(flange_template):
    m = build_flange_module(flange_template)
    with pytest.raises(NotArbitrarySplitError):
        delete_part(m, CellPath(1, (0,)), 0)


def test_enumerate_graphs_spec(spec_template):
    graphs = enumerate_graphs(spec_template)
    assert [g.graph_id for g in graphs] == ["Поз", "Обозначение", "Наименование", "Кол", "Масса", "Примечание"]
    assert graphs[2].property_id == 3
    assert graphs[4].unit == "кг"


def test_enumerate_graphs_flange(flange_template):
    graphs = enumerate_graphs(flange_template)
    assert len(graphs) == 16
    assert graphs[0].graph_id == "d_fl"
    assert graphs[-1].graph_id == "gost_weld"
    # stable across calls
    assert [g.graph_id for g in enumerate_graphs(flange_template)] == [g.graph_id for g in graphs]


def test_enumerate_graphs_single_leaf():
    t = TableTemplate(name="T", root=leaf("X", 10))
    graphs = enumerate_graphs(t)
    assert len(graphs) == 1 and graphs[0].graph_id == "X"


def test_grouped_insert_units_property(flange_template):
    m = build_flange_module(flange_template)
    for at in (0, 1, 7):
        m2, created = insert_part(m, CellPath(1, (1, 1)), at)
        per_split = {}
        for p in created:
            per_split[p.steps[:2]] = per_split.get(p.steps[:2], 0) + 1
        assert per_split == {(0, 1): 1, (1, 1): 3, (2, 1): 1}


def test_random_operation_sequences_keep_conformance():
    rng = random.Random(20260808)
    for _ in range(60):
        m = random_module(rng)
        arb_paths = _arbitrary_split_paths(m)
        for _ in range(rng.randint(0, 6)):
            if len(m.records) > 1 and arb_paths and rng.random() < 0.6:
                rec = rng.randint(1, len(m.records) - 1)
                steps = rng.choice(arb_paths)
                try:
                    m, _ = insert_part(m, CellPath(rec, _instance_steps(m, rec, steps)), rng.randint(0, 5))
                except Exception:
                    pass
            elif len(m.records) > 1:
                m, _ = append_record(m)
        assert module_conforms(m)


def _arbitrary_split_paths(module):
    out = []

    def walk(node, steps):
        if node.is_leaf:
            return
        if node.arbitrary and node.axis == "rows" and node.visible_in_data:
            out.append(steps)
        for i, c in enumerate(node.children):
            walk(c, steps + (i,))

    walk(module.template.root, ())
    return out


def _instance_steps(module, rec, tsteps):
    from tkd.model import _instance_steps_for_template_steps

    isteps = _instance_steps_for_template_steps(module.template, module.records[rec], tsteps)
    if isteps is None:
        raise ValueError("unreachable")
    return isteps


def test_width_closure_under_ops(flange_template):
    m = build_flange_module(flange_template)
    w = flange_template.root.width()
    m2, _ = insert_part(m, CellPath(1, (0, 1)), 0)
    assert m2.template.root.width() == w


def test_header_immutable_under_data_ops(flange_template):
    m = build_flange_module(flange_template)
    header = m.records[0]
    m2, _ = insert_part(m, CellPath(1, (0, 1)), 0)
    m3 = delete_part(m2, CellPath(1, (0, 1)), 0)
    assert m3.records[0] == header
