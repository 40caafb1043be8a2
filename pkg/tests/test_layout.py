from __future__ import annotations

import random

import pytest

from tkd.errors import ChunkTooSmallError, HeaderRecordError, NoArbitrarySplitOnPathError, OutsideTableError
from tkd.layout import (
    LayoutNode,
    char_budget,
    flat_region,
    hit_test,
    insert_at_point,
    layout,
    paginate,
    wrap_text,
)
from tkd.model import (
    CellPath,
    CellValue,
    TableModule,
    TableTemplate,
    append_record,
    enumerate_graphs,
    leaf,
    new_table,
    resolve_cell,
    set_cell,
)

from conftest import build_explication_module, build_flange_module, random_module, set_row, text, num


ROW = 8.0


def test_single_cell_height():
    m = new_table(TableTemplate(name="T", root=leaf("X", 10)))
    tree = layout(m, ROW)
    assert tree.height_mm == ROW
    assert tree.width_mm == 10


def test_flange_record_heights(flange_module):
    tree = layout(flange_module, ROW)
    header, record = tree.records
    assert header.rect.h == 2 * ROW  # group titles over graph names
    assert record.rect.h == 3 * ROW  # 3 fastener rows dominate the joint


def test_flange_padding_closes_groups(flange_module):
    tree = layout(flange_module, ROW)
    record = tree.records[1]
    fl_group = record.root.children[0]
    assert fl_group.rect.h == 3 * ROW
    items = fl_group.children[1]
    assert items.rect.h == ROW
    assert items.pad is None
    assert fl_group.pad is not None and fl_group.pad.h == 2 * ROW


def test_record_heights_sum_to_table_height():
    rng = random.Random(314)
    for _ in range(100):
        m = random_module(rng)
        tree = layout(m, ROW)
        assert sum(r.rect.h for r in tree.records) == pytest.approx(tree.height_mm)


def _check_tiling(node: LayoutNode) -> None:
    if node.is_leaf or not node.children:
        return
    covered = sum(c.rect.area for c in node.children)
    if node.pad is not None:
        covered += node.pad.area
    assert covered == pytest.approx(node.rect.area), f"tiling broken at {node.steps}"
    for c in node.children:
        _check_tiling(c)


def test_tiling_with_pads():
    rng = random.Random(2718)
    for _ in range(150):
        m = random_module(rng)
        tree = layout(m, ROW)
        for rec in tree.records:
            _check_tiling(rec.root)


def test_hit_test_centers_random_sweep():
    rng = random.Random(161803)
    for _ in range(200):
        m = random_module(rng)
        tree = layout(m, ROW)
        for box in tree.leaf_boxes():
            cx = box.rect.x + box.rect.w / 2
            cy = box.rect.y + box.rect.h / 2
            assert hit_test(tree, cx, cy) == box.path


def test_hit_test_outside():
    m = new_table(TableTemplate(name="T", root=leaf("X", 10)))
    with pytest.raises(OutsideTableError):
        hit_test(m, -1, 0)
    with pytest.raises(OutsideTableError):
        hit_test(m, 0, 100)


def test_hit_test_fastener_subrow(flange_module):
    tree = layout(flange_module, ROW)
    # second fastener sub-row: x inside the fastener group, y in the record's 2nd row
    x = 82 + 5.0
    y = 2 * ROW + ROW + ROW / 2
    path = hit_test(tree, x, y)
    assert path.record_index == 1
    assert path.steps[:2] == (1, 1)
    assert path.steps[2] == 1  # part index = sub-row 1


def test_insert_at_point_flange_joint(flange_module):
    x = 82 + 96 + 5.0  # gasket columns
    y = 2 * ROW + ROW / 2
    m2, created = insert_at_point(flange_module, x, y, ROW)
    assert len(created) == 5
    per_split = {}
    for p in created:
        per_split[p.steps[:2]] = per_split.get(p.steps[:2], 0) + 1
    assert per_split == {(0, 1): 1, (1, 1): 3, (2, 1): 1}
    t1 = layout(flange_module, ROW)
    t2 = layout(m2, ROW)
    assert t2.records[1].rect.h - t1.records[1].rect.h == 3 * ROW


def test_insert_at_point_plain_row(explication_module):
    tree = layout(explication_module, ROW)
    y = tree.records[2].rect.y + 1
    m2, created = insert_at_point(explication_module, 5.0, y, ROW)
    assert len(created) == 1
    assert created[0] == CellPath(3, ())
    assert len(m2.records) == len(explication_module.records) + 1
    # inserted record is blank
    assert resolve_cell(m2, CellPath(3, (2,))).is_blank


def test_insert_at_point_header_rejected(explication_module):
    with pytest.raises(HeaderRecordError):
        insert_at_point(explication_module, 5.0, 1.0, ROW)


def test_insert_at_point_fallback_disabled(explication_module):
    tree = layout(explication_module, ROW)
    y = tree.records[1].rect.y + 1
    with pytest.raises(NoArbitrarySplitOnPathError):
        insert_at_point(explication_module, 5.0, y, ROW, allow_record_fallback=False)


def test_insert_matches_explicit_insert_part(flange_module):
    from tkd.model import insert_part

    x, y = 82 + 5.0, 2 * ROW + ROW / 2  # first fastener sub-row
    auto, created_auto = insert_at_point(flange_module, x, y, ROW)
    manual, created_manual = insert_part(flange_module, CellPath(1, (1, 1)), 3)
    assert auto == manual
    assert created_auto == created_manual


def test_paginate_single_segment(explication_module):
    segs = paginate(explication_module, 1000.0)
    assert len(segs) == 1
    assert (segs[0].record_start, segs[0].record_stop) == (0, len(explication_module.records))


def test_paginate_partition_property():
    rng = random.Random(55)
    for _ in range(80):
        m = random_module(rng)
        tree = layout(m, ROW)
        tallest = max(r.rect.h for r in tree.records)
        # every record must fit a fresh segment even with header + number prefixes
        chunk = tree.records[0].rect.h + ROW + tallest
        segs = paginate(m, chunk, repeat_header=True, number_row=True)
        covered = []
        for s in segs:
            covered.extend(range(s.record_start, s.record_stop))
        assert covered == list(range(len(m.records)))


def test_paginate_chunk_too_small(explication_module):
    with pytest.raises(ChunkTooSmallError):
        paginate(explication_module, ROW)


def test_paginate_direction_left(explication_module):
    segs = paginate(explication_module, 4 * ROW, direction="left")
    placements = [s.placement for s in segs]
    assert placements == list(range(len(segs) - 1, -1, -1))


def test_flat_region_uniform_table(explication_module):
    seed = hit_test(explication_module, 5.0, 2 * ROW + 1)
    region = flat_region(explication_module, seed)
    assert (region.graph_start, region.graph_stop) == (0, 6)
    assert (region.record_start, region.record_stop) == (1, len(explication_module.records))


def test_flat_region_excludes_fastener_graphs(flange_module):
    tree = layout(flange_module, ROW)
    x = 82 + 96 + 5.0  # gasket
    seed = hit_test(tree, x, 2 * ROW + 1)
    region = flat_region(flange_module, seed)
    graphs = enumerate_graphs(flange_module.template)
    ids = [graphs[g].graph_id for g in range(region.graph_start, region.graph_stop)]
    assert ids == ["code_gask", "gost_gask", "mat_gask", "qty_gask", "type_weld", "gost_weld"]


def test_flat_region_single_cell():
    m = new_table(TableTemplate(name="T", root=leaf("X", 10)))
    m, idx = append_record(m)
    region = flat_region(m, CellPath(idx, ()))
    assert region.grid == ((CellPath(idx, ()),),)


def test_flat_region_matches_brute_force(flange_module):
    # record 1 holds two joints (gasket split count 2), records 2 and 3 hold one each
    m, _ = insert_at_point(flange_module, 82 + 5.0, 2 * ROW + 1, ROW)
    m, _ = append_record(m)
    m, _ = append_record(m)
    graphs = enumerate_graphs(m.template)
    from tkd.model import graph_cells

    def valid(g, r):
        return len(graph_cells(m.template, m.records[r], graphs[g].graph_id)) == 1

    tree = layout(m, ROW)
    seed = hit_test(tree, 82 + 96 + 5.0, tree.records[2].rect.y + 1)
    region = flat_region(m, seed)
    g0 = next(i for i, g in enumerate(graphs) if g.graph_id == "code_gask")
    r0 = seed.record_index
    assert r0 == 2

    best = None
    for a in range(0, g0 + 1):
        for b in range(g0 + 1, len(graphs) + 1):
            for lo in range(1, r0 + 1):
                for hi in range(r0 + 1, len(m.records) + 1):
                    if all(valid(g, r) for g in range(a, b) for r in range(lo, hi)):
                        cand = (b - a, hi - lo, -a, -lo, (a, b, lo, hi))
                        if best is None or cand > best:
                            best = cand
    assert best is not None
    assert (region.graph_start, region.graph_stop, region.record_start, region.record_stop) == best[4]


def test_wrap_text_budget():
    source = "Труба стальная электросварная прямошовная"
    lines = wrap_text(source, 15)
    assert all(len(line) <= 15 for line in lines)
    assert " ".join(lines).split() == source.split()
    # over-long words are hard-split but no characters are lost
    tight = wrap_text(source, 12)
    assert all(len(line) <= 12 for line in tight)
    assert "".join(tight).replace(" ", "") == source.replace(" ", "")


def test_char_budget_scale():
    assert char_budget(70) == 34
    assert char_budget(2) == 1
