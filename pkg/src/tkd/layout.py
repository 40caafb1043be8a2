"""Geometry derived from the parametric model: rectangles, hit-testing, insertion at a
point, pagination into fixed-height chunks and flat-region extraction.

Coordinates are millimetres, origin at the table's top-left corner, y growing
downward. All rectangles are right/bottom exclusive so shared borders never produce
hit-test ties. Columns-split children are stretched to the parent height (a leaf
simply becomes a taller cell); rows splits keep their parts at content height and
track the leftover as an explicit bottom pad, which is how a one-row flange part sits
beside a three-row fastener stack.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    ChunkTooSmallError,
    HeaderRecordError,
    NoArbitrarySplitOnPathError,
    OutsideTableError,
    PathNotLeafError,
    RecordTallerThanChunkError,
)
from .model import (
    BlockNode,
    CellPath,
    CellValue,
    InstanceNode,
    TableModule,
    _template_child,
    enumerate_graphs,
    graph_cells,
    insert_part,
    insert_record,
)

DEFAULT_ROW_HEIGHT_MM = 8.0
TEXT_SCALE_MM_PER_CHAR = 2.0


def char_budget(width_mm: float) -> int:
    """Characters that fit one cell line at the fixed text scale (borders excluded)."""
    return max(1, int(width_mm / TEXT_SCALE_MM_PER_CHAR) - 1)


def wrap_text(text: str, budget: int) -> tuple[str, ...]:
    """Greedy word wrap; words longer than the budget are hard-split."""
    if not text:
        return ()
    out: list[str] = []
    for logical in text.split("\n"):
        words = [w for w in logical.split(" ") if w]
        if not words:
            out.append("")
            continue
        line = ""
        for word in words:
            while len(word) > budget:
                if line:
                    out.append(line)
                    line = ""
                out.append(word[:budget])
                word = word[budget:]
            if not line:
                line = word
            elif len(line) + 1 + len(word) <= budget:
                line = f"{line} {word}"
            else:
                out.append(line)
                line = word
        out.append(line)
    return tuple(out)


@dataclass(frozen=True)
class Rect:
    x: float
    y: float
    w: float
    h: float

    @property
    def x2(self) -> float:
        return self.x + self.w

    @property
    def y2(self) -> float:
        return self.y + self.h

    def contains(self, px: float, py: float) -> bool:
        return self.x <= px < self.x2 and self.y <= py < self.y2

    @property
    def area(self) -> float:
        return self.w * self.h


@dataclass(frozen=True)
class Line:
    """One visible division segment; kind is thin or thick."""

    x1: float
    y1: float
    x2: float
    y2: float
    kind: str = "thin"


@dataclass
class LayoutNode:
    steps: tuple[int, ...]
    rect: Rect
    is_leaf: bool
    children: list["LayoutNode"] = field(default_factory=list)
    pad: Rect | None = None


@dataclass
class RecordLayout:
    index: int
    rect: Rect
    root: LayoutNode


@dataclass
class LeafBox:
    path: CellPath
    rect: Rect
    template: BlockNode
    value: CellValue


@dataclass
class LayoutTree:
    module: TableModule
    row_height_mm: float
    width_mm: float
    height_mm: float
    records: list[RecordLayout]
    lines: list[Line]

    def leaf_boxes(self) -> list[LeafBox]:
        out: list[LeafBox] = []
        for rec in self.records:
            record = self.module.records[rec.index]

            def walk(tnode: BlockNode, inst: InstanceNode, ln: LayoutNode) -> None:
                if ln.is_leaf:
                    out.append(LeafBox(CellPath(rec.index, ln.steps), ln.rect, tnode, inst.value or CellValue.blank()))
                    return
                for i, child in enumerate(ln.children):
                    walk(_template_child(tnode, i), (inst.children or ())[i], child)

            walk(self.module.template.root, record, rec.root)
        return out


def content_height(tnode: BlockNode, inst: InstanceNode, row_h: float) -> float:
    if tnode.is_leaf:
        lines = len((inst.value or CellValue.blank()).wrapped_lines)
        return max(1, lines) * row_h
    kids = inst.children or ()
    if tnode.axis == "rows" or tnode.arbitrary:
        return sum(content_height(_template_child(tnode, i), c, row_h) for i, c in enumerate(kids))
    if not kids:
        return 0.0
    return max(content_height(_template_child(tnode, i), c, row_h) for i, c in enumerate(kids))


def _build_node(
    tnode: BlockNode, inst: InstanceNode, steps: tuple[int, ...], x: float, y: float, w: float, h: float, row_h: float
) -> LayoutNode:
    if tnode.is_leaf:
        return LayoutNode(steps=steps, rect=Rect(x, y, w, h), is_leaf=True)
    node = LayoutNode(steps=steps, rect=Rect(x, y, w, h), is_leaf=False)
    kids = inst.children or ()
    if tnode.axis == "cols" and not tnode.arbitrary:
        cx = x
        for i, child in enumerate(kids):
            ct = _template_child(tnode, i)
            cw = ct.width()
            node.children.append(_build_node(ct, child, steps + (i,), cx, y, cw, h, row_h))
            cx += cw
    else:
        cy = y
        for i, child in enumerate(kids):
            ct = _template_child(tnode, i)
            ch = content_height(ct, child, row_h)
            node.children.append(_build_node(ct, child, steps + (i,), x, cy, w, ch, row_h))
            cy += ch
        if cy < y + h - 1e-9:
            node.pad = Rect(x, cy, w, (y + h) - cy)
    return node


def _division_lines(
    tnode: BlockNode, inst: InstanceNode, ln: LayoutNode, header_region: bool, out: list[Line]
) -> None:
    if tnode.is_leaf:
        return
    visible = tnode.visible_in_header if header_region else tnode.visible_in_data
    kids = ln.children
    if visible and kids:
        if tnode.axis == "cols" and not tnode.arbitrary:
            for child in kids[:-1]:
                xb = child.rect.x2
                out.append(Line(xb, ln.rect.y, xb, ln.rect.y2))
        else:
            # boundaries next to zero-height parts collapse onto other lines
            for i, child in enumerate(kids[:-1]):
                if child.rect.h > 0 and kids[i + 1].rect.h > 0:
                    yb = child.rect.y2
                    out.append(Line(ln.rect.x, yb, ln.rect.x2, yb))
            if ln.pad is not None and ln.pad.h > 0 and kids and kids[-1].rect.h > 0:
                yb = kids[-1].rect.y2
                out.append(Line(ln.rect.x, yb, ln.rect.x2, yb))
    for i, child in enumerate(kids):
        _division_lines(_template_child(tnode, i), (inst.children or ())[i], child, header_region, out)


def _style_overrides(
    tnode: BlockNode, inst: InstanceNode, ln: LayoutNode, add: list[Line], suppress: list[Line]
) -> None:
    if tnode.is_leaf:
        r = ln.rect
        edges = (
            ("left", Line(r.x, r.y, r.x, r.y2)),
            ("top", Line(r.x, r.y, r.x2, r.y)),
            ("right", Line(r.x2, r.y, r.x2, r.y2)),
            ("bottom", Line(r.x, r.y2, r.x2, r.y2)),
        )
        for name, seg in edges:
            kind = getattr(tnode.style, name)
            if kind == "thick":
                add.append(Line(seg.x1, seg.y1, seg.x2, seg.y2, "thick"))
            elif kind == "none":
                suppress.append(seg)
        return
    for i, child in enumerate(ln.children):
        _style_overrides(_template_child(tnode, i), (inst.children or ())[i], child, add, suppress)


def _subtract_intervals(lo: float, hi: float, cuts: list[tuple[float, float]]) -> list[tuple[float, float]]:
    spans = [(lo, hi)]
    for c1, c2 in cuts:
        nxt: list[tuple[float, float]] = []
        for a, b in spans:
            if c2 <= a + 1e-9 or c1 >= b - 1e-9:
                nxt.append((a, b))
                continue
            if c1 > a + 1e-9:
                nxt.append((a, c1))
            if c2 < b - 1e-9:
                nxt.append((c2, b))
        spans = nxt
    return spans


def _apply_suppressions(lines: list[Line], suppress: list[Line]) -> list[Line]:
    if not suppress:
        return lines
    h_cuts: dict[float, list[tuple[float, float]]] = {}
    v_cuts: dict[float, list[tuple[float, float]]] = {}
    for s in suppress:
        if s.y1 == s.y2:
            h_cuts.setdefault(round(s.y1, 6), []).append((s.x1, s.x2))
        else:
            v_cuts.setdefault(round(s.x1, 6), []).append((s.y1, s.y2))
    out: list[Line] = []
    for seg in lines:
        if seg.y1 == seg.y2:
            cuts = h_cuts.get(round(seg.y1, 6), [])
            for a, b in _subtract_intervals(seg.x1, seg.x2, cuts):
                out.append(Line(a, seg.y1, b, seg.y2, seg.kind))
        else:
            cuts = v_cuts.get(round(seg.x1, 6), [])
            for a, b in _subtract_intervals(seg.y1, seg.y2, cuts):
                out.append(Line(seg.x1, a, seg.x2, b, seg.kind))
    return out


def layout(module: TableModule, row_height_mm: float = DEFAULT_ROW_HEIGHT_MM) -> LayoutTree:
    """Compute rectangles and visible division lines for the whole module."""
    template = module.template
    width = template.root.width()
    records: list[RecordLayout] = []
    y = 0.0
    for idx, record in enumerate(module.records):
        h = content_height(template.root, record, row_height_mm)
        root = _build_node(template.root, record, (), 0.0, y, width, h, row_height_mm)
        records.append(RecordLayout(index=idx, rect=Rect(0.0, y, width, h), root=root))
        y += h
    height = y

    lines: list[Line] = []
    add: list[Line] = []
    suppress: list[Line] = []
    for rec in records:
        record = module.records[rec.index]
        _division_lines(template.root, record, rec.root, rec.index == 0, lines)
        _style_overrides(template.root, record, rec.root, add, suppress)
    # record separators: thick under the header, thin between data records
    for rec in records[:-1]:
        kind = "thick" if rec.index == 0 else "thin"
        lines.append(Line(0.0, rec.rect.y2, width, rec.rect.y2, kind))
    lines = _apply_suppressions(lines, suppress)
    lines.extend(add)
    # outer border
    lines.append(Line(0.0, 0.0, width, 0.0, "thick"))
    lines.append(Line(0.0, height, width, height, "thick"))
    lines.append(Line(0.0, 0.0, 0.0, height, "thick"))
    lines.append(Line(width, 0.0, width, height, "thick"))

    dedup: dict[tuple[float, float, float, float], Line] = {}
    for seg in lines:
        key = (round(seg.x1, 6), round(seg.y1, 6), round(seg.x2, 6), round(seg.y2, 6))
        old = dedup.get(key)
        if old is None or (old.kind == "thin" and seg.kind == "thick"):
            dedup[key] = seg
    ordered = sorted(dedup.values(), key=lambda s: (s.y1, s.x1, s.y2, s.x2, s.kind))
    return LayoutTree(
        module=module,
        row_height_mm=row_height_mm,
        width_mm=width,
        height_mm=height,
        records=records,
        lines=ordered,
    )


def hit_path(tree: LayoutTree, x: float, y: float) -> tuple[int, tuple[int, ...], bool]:
    """Descend to the deepest node containing the point.

    Returns (record index, steps, is_leaf); steps may stop above a leaf when the point
    falls into a padded region.
    """
    if not (0 <= x < tree.width_mm) or not (0 <= y < tree.height_mm):
        raise OutsideTableError(f"point ({x}, {y}) is outside the table")
    rec = None
    for candidate in tree.records:
        if candidate.rect.contains(x, y):
            rec = candidate
            break
    if rec is None:
        raise OutsideTableError(f"point ({x}, {y}) is outside every record")
    node = rec.root
    while not node.is_leaf:
        nxt = None
        for child in node.children:
            if child.rect.contains(x, y):
                nxt = child
                break
        if nxt is None:
            return rec.index, node.steps, False
        node = nxt
    return rec.index, node.steps, True


def hit_test(module_or_tree: TableModule | LayoutTree, x: float, y: float, row_height_mm: float = DEFAULT_ROW_HEIGHT_MM) -> CellPath:
    """Leaf cell containing the point; right/bottom edges are exclusive."""
    tree = module_or_tree if isinstance(module_or_tree, LayoutTree) else layout(module_or_tree, row_height_mm)
    idx, steps, is_leaf = hit_path(tree, x, y)
    if not is_leaf:
        raise OutsideTableError(f"point ({x}, {y}) falls in a padded region without a cell")
    return CellPath(idx, steps)


def insert_at_point(
    module: TableModule,
    x: float,
    y: float,
    row_height_mm: float = DEFAULT_ROW_HEIGHT_MM,
    allow_record_fallback: bool = True,
) -> tuple[TableModule, list[CellPath]]:
    """Insert at the innermost arbitrary rows split on the hit path, after the hit part.

    Without an arbitrary split on the path a whole fresh record is inserted after the
    hit record (the record array being the outermost vertical division) unless the
    fallback is disabled.
    """
    tree = layout(module, row_height_mm)
    rec_idx, steps, _ = hit_path(tree, x, y)
    if rec_idx == 0:
        raise HeaderRecordError("cannot insert into the header record")

    node = module.template.root
    chain: list[BlockNode] = [node]
    for s in steps:
        node = _template_child(node, s)
        chain.append(node)
    for depth in range(len(chain) - 1, -1, -1):
        cand = chain[depth]
        if cand.kind == "split" and cand.arbitrary and cand.axis == "rows":
            split_steps = steps[:depth]
            inst = module.records[rec_idx]
            for s in split_steps:
                inst = (inst.children or ())[s]
            count = len(inst.children or ())
            if depth < len(steps):
                hit_part = steps[depth]
                act = hit_part // cand.insert_unit
                at_index = (act + 1) * cand.insert_unit
            else:
                at_index = count
            return insert_part(module, CellPath(rec_idx, split_steps), at_index)

    if not allow_record_fallback:
        raise NoArbitrarySplitOnPathError("no arbitrary rows-axis split on the hit path")
    updated = insert_record(module, rec_idx + 1)
    return updated, [CellPath(rec_idx + 1, ())]


@dataclass(frozen=True)
class PageSegment:
    """One continuation chunk: a slice of the record array plus its decorations."""

    index: int
    placement: int
    record_start: int
    record_stop: int
    header_prefix: bool
    number_row: bool
    height_mm: float
    first_number: int = 1


def paginate(
    module: TableModule,
    chunk_height_mm: float,
    *,
    direction: str = "right",
    repeat_header: bool = False,
    number_row: bool = False,
    first_number: int = 1,
    row_height_mm: float = DEFAULT_ROW_HEIGHT_MM,
) -> list[PageSegment]:
    """Greedy record packing; a record is never split across segments."""
    tree = layout(module, row_height_mm)
    header_h = tree.records[0].rect.h
    number_h = row_height_mm if number_row else 0.0
    if chunk_height_mm < header_h + row_height_mm:
        raise ChunkTooSmallError(
            f"chunk height {chunk_height_mm} is smaller than header ({header_h}) plus one row ({row_height_mm})"
        )
    segments: list[PageSegment] = []
    n = len(module.records)
    r = 0
    while r < n:
        first = len(segments) == 0
        prefix = (header_h if (repeat_header and not first) else 0.0) + number_h
        budget = chunk_height_mm - prefix
        start = r
        used = 0.0
        while r < n:
            rh = tree.records[r].rect.h
            if rh > chunk_height_mm - prefix:
                raise RecordTallerThanChunkError(f"record {r} ({rh} mm) does not fit a {chunk_height_mm} mm chunk")
            if used + rh > budget + 1e-9:
                break
            used += rh
            r += 1
        segments.append(
            PageSegment(
                index=len(segments),
                placement=0,
                record_start=start,
                record_stop=r,
                header_prefix=repeat_header and not first,
                number_row=number_row,
                height_mm=used + prefix,
                first_number=first_number,
            )
        )
    total = len(segments)
    out = []
    for seg in segments:
        placement = seg.index if direction == "right" else total - 1 - seg.index
        out.append(replace_placement(seg, placement))
    return out


def replace_placement(seg: PageSegment, placement: int) -> PageSegment:
    return PageSegment(
        index=seg.index,
        placement=placement,
        record_start=seg.record_start,
        record_stop=seg.record_stop,
        header_prefix=seg.header_prefix,
        number_row=seg.number_row,
        height_mm=seg.height_mm,
        first_number=seg.first_number,
    )


@dataclass(frozen=True)
class FlatRegion:
    """Maximal plain-grid region around a seed cell, for the flat table editor."""

    graph_start: int
    graph_stop: int
    record_start: int
    record_stop: int
    grid: tuple[tuple[CellPath, ...], ...]


def flat_region(module: TableModule, seed: CellPath) -> FlatRegion:
    """Widest, then longest rectangle of single-cell graph columns containing the seed."""
    template = module.template
    node = template.root
    for s in seed.steps:
        node = _template_child(node, s)
    if not node.is_leaf:
        raise PathNotLeafError(f"seed {seed} is not a leaf")
    graphs = enumerate_graphs(template)
    gindex = {g.steps: i for i, g in enumerate(graphs)}
    # template steps of the seed leaf
    tsteps: list[int] = []
    tnode = template.root
    for s in seed.steps:
        tsteps.append(0 if tnode.arbitrary else s)
        tnode = _template_child(tnode, s)
    g0 = gindex.get(tuple(tsteps))
    r0 = seed.record_index
    n_rec = len(module.records)

    if g0 is None or r0 == 0:
        return FlatRegion(0, 0, r0, r0 + 1, ((seed,),))

    cache: dict[tuple[int, int], list[tuple[int, ...]]] = {}

    def cells(g: int, r: int) -> list[tuple[int, ...]]:
        key = (g, r)
        if key not in cache:
            cache[key] = graph_cells(template, module.records[r], graphs[g].graph_id)
        return cache[key]

    def valid(g: int, r: int) -> bool:
        return len(cells(g, r)) == 1

    if not valid(g0, r0):
        return FlatRegion(g0, g0 + 1, r0, r0 + 1, ((seed,),))

    best: tuple[int, int, int, int] | None = None  # (width, runlen, -a, -start) ordering handled manually
    best_rect: tuple[int, int, int, int] | None = None
    for a in range(g0, -1, -1):
        if not valid(a, r0):
            break
        for b in range(g0 + 1, len(graphs) + 1):
            if b > g0 + 1 and not valid(b - 1, r0):
                break
            span = range(a, b)
            lo = r0
            while lo - 1 >= 1 and all(valid(g, lo - 1) for g in span):
                lo -= 1
            hi = r0 + 1
            while hi < n_rec and all(valid(g, hi) for g in span):
                hi += 1
            width = b - a
            runlen = hi - lo
            cand = (width, runlen, -a, -lo)
            if best is None or cand > best:
                best = cand
                best_rect = (a, b, lo, hi)
    assert best_rect is not None
    a, b, lo, hi = best_rect
    grid = tuple(
        tuple(CellPath(r, cells(g, r)[0]) for g in range(a, b))
        for r in range(lo, hi)
    )
    return FlatRegion(a, b, lo, hi, grid)
