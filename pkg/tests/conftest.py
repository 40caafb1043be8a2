from __future__ import annotations

import random
from pathlib import Path

import pytest

from tkd.model import (
    BlockNode,
    CellPath,
    CellValue,
    ContinuationSpec,
    InstanceNode,
    TableModule,
    TableTemplate,
    append_record,
    build_blank_instance,
    build_header_instance,
    graph_cells,
    leaf,
    new_table,
    set_cell,
    split,
)
from tkd.structure import parse_structure

FIXTURES = Path(__file__).parent / "fixtures"


def read_fixture(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


@pytest.fixture
def spec_template() -> TableTemplate:
    return parse_structure(read_fixture("spec.tks"))


@pytest.fixture
def explication_template() -> TableTemplate:
    return parse_structure(read_fixture("explication.tks"))


@pytest.fixture
def flange_template() -> TableTemplate:
    return parse_structure(read_fixture("flange.tks"))


@pytest.fixture
def pipes_template() -> TableTemplate:
    return parse_structure(read_fixture("pipes_spec.tks"))


def set_row(module: TableModule, record_index: int, values: dict[str, CellValue]) -> TableModule:
    """Write one value per graph id into the first cell of that graph."""
    for gid, value in values.items():
        cells = graph_cells(module.template, module.records[record_index], gid)
        assert cells, f"graph {gid!r} has no cell in record {record_index}"
        module = set_cell(module, CellPath(record_index, cells[0]), value)
    return module


def text(s: str) -> CellValue:
    return CellValue.of_text(s)


def num(x: float, unit: str | None = None) -> CellValue:
    return CellValue.of_number(x, unit)


EXPLICATION_ROWS = [
    {"№ п/п": text("1"), "Позиция": text("1"), "Наименование": text("Трубопровод пневмотранспорта"), "Примечание": text("Централизованно")},
    {"№ п/п": text("2"), "Позиция": text("4A1-3039-45"), "Наименование": text("Накопительный бункер"), "Кол.": num(9)},
    {"№ п/п": text("3"), "Позиция": text("3"), "Наименование": text("Ручная загрузка"), "Кол.": num(9)},
    {"№ п/п": text("4"), "Позиция": text("4C102-8"), "Наименование": text("Литьевая машина"), "Характеристика": text('"Engel"'), "Кол.": num(9)},
    {"№ п/п": text("5"), "Позиция": text("4A510"), "Наименование": text("Аспиратор (фильтр)"), "Кол.": num(1)},
    {"№ п/п": text("6"), "Позиция": text("588-9/8-12"), "Наименование": text("Ввод коммуникаций"), "Кол.": num(1)},
    {"№ п/п": text("7"), "Позиция": text("7"), "Наименование": text("Участок по первичной обработке фитингов"), "Кол.": num(9), "Примечание": text("У каждой машины")},
]


def build_explication_module(template: TableTemplate) -> TableModule:
    """Экспликация оборудования filled with a small production line."""
    module = new_table(template)
    for row in EXPLICATION_ROWS:
        module, idx = append_record(module)
        module = set_row(module, idx, row)
    return module


def build_flange_module(template: TableTemplate) -> TableModule:
    """Ведомость фланцевых соединений with one filled joint record."""
    module = new_table(
        template,
        ContinuationSpec(chunk_height_mm=120.0, number_row=True, first_graph_number=25),
    )
    module, idx = append_record(module)
    module = set_row(
        module,
        idx,
        {
            "d_fl": num(100, "мм"),
            "row_fl": text("1"),
            "gost_fl": text("12820-80"),
            "mat_fl": text("Ст3"),
            "qty_fl": num(2),
            "name_fast": text("Шпилька М16"),
            "size_fast": text("16×80"),
            "gost_fast": text("22032-76"),
            "mat_fast": text("Ст35"),
            "qty_fast": num(8),
            "code_gask": text("А-100"),
            "gost_gask": text("15180-86"),
            "mat_gask": text("паронит"),
            "qty_gask": num(1),
            "type_weld": text("С17"),
            "gost_weld": text("16037-80"),
        },
    )
    return module


@pytest.fixture
def explication_module(explication_template) -> TableModule:
    return build_explication_module(explication_template)


@pytest.fixture
def flange_module(flange_template) -> TableModule:
    return build_flange_module(flange_template)


# Random generators for fuzz sweeps; deterministic via explicit seeds.

_WORDS = ["Труба", "ГОСТ", "сталь", "узел", "Поз", "шов", "D57", "узел α", 'им "А"', "м²"]


def random_template(rng: random.Random, max_depth: int = 3) -> TableTemplate:
    counter = [0]

    def fresh_id() -> str:
        counter[0] += 1
        return f"g{counter[0]}"

    def gen(depth: int, must_cols: bool = False) -> BlockNode:
        if depth >= max_depth or (not must_cols and rng.random() < 0.45):
            return leaf(
                rng.choice(_WORDS) if rng.random() < 0.8 else "",
                rng.choice([8, 10, 12, 16, 20, 24, 30, 40]),
                graph_id=fresh_id(),
                prop=rng.choice([None, 1, 3, 4, 5, 6]),
                unit=rng.choice([None, None, "кг", "мм"]),
            )
        kind = rng.random()
        if kind < 0.45 or must_cols:
            n = rng.randint(2, 3)
            return split("cols", [gen(depth + 1) for _ in range(n)])
        if kind < 0.7:
            # rows fixed: children must share the width; use single leaves of one width
            w = rng.choice([12, 16, 20, 24])
            kids = [
                leaf(rng.choice(_WORDS), w, graph_id=fresh_id())
                for _ in range(rng.randint(2, 3))
            ]
            return split("rows", kids, header=rng.random() < 0.9, data=rng.random() < 0.9)
        proto = gen(depth + 1)
        return split(
            "rows",
            [proto],
            arbitrary=True,
            insert_unit=rng.randint(1, 3),
            header=rng.random() < 0.9,
            data=rng.random() < 0.95,
        )

    root = gen(0, must_cols=rng.random() < 0.6)
    return TableTemplate(name=f"T{rng.randint(0, 999)}", root=root, units_note=rng.choice(["", "вес в кг"]))


def _random_fill(rng: random.Random, node: BlockNode, inst: InstanceNode) -> InstanceNode:
    from tkd.model import template_child
    from dataclasses import replace as dc_replace

    if node.is_leaf:
        roll = rng.random()
        if roll < 0.3:
            return InstanceNode(value=CellValue.blank())
        if roll < 0.6 and node.unit is not None:
            return InstanceNode(value=CellValue.of_number(rng.randint(0, 500) / 10, node.unit))
        if roll < 0.6:
            return InstanceNode(value=CellValue.of_number(rng.randint(0, 99)))
        words = " ".join(rng.choice(_WORDS) for _ in range(rng.randint(1, 3)))
        return InstanceNode(value=CellValue.of_text(words))
    kids = inst.children or ()
    if node.arbitrary and node.visible_in_data:
        acts = rng.randint(0, 2)
        kids = tuple(build_blank_instance(node.children[0]) for _ in range(acts * node.insert_unit))
    return dc_replace(
        inst,
        children=tuple(_random_fill(rng, template_child(node, i), c) for i, c in enumerate(kids)),
    )


def random_module(rng: random.Random, template: TableTemplate | None = None) -> TableModule:
    template = template or random_template(rng)
    module = new_table(template)
    for _ in range(rng.randint(0, 4)):
        module, idx = append_record(module)
        records = list(module.records)
        records[idx] = _random_fill(rng, template.root, records[idx])
        from dataclasses import replace as dc_replace

        module = dc_replace(module, records=tuple(records))
    return module
