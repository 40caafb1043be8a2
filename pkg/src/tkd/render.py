"""Deterministic renderers: a monospace text grid and an SVG 1.1 document.

The text grid maps 2 mm to one character column and one row unit (8 mm by default) to
one text line, drawing `+ - | =` borders only for visible divisions (`=` marks thick
horizontals). The SVG renderer emits one line element per division segment (thin 0.3,
thick 0.6 stroke) and one text element per wrapped cell line. Equal modules produce
byte-identical output.
"""

from __future__ import annotations

from .layout import (
    DEFAULT_ROW_HEIGHT_MM,
    TEXT_SCALE_MM_PER_CHAR,
    LayoutTree,
    Line,
    PageSegment,
    layout,
)
from .model import TableModule, enumerate_graphs


class _Canvas:
    def __init__(self, cols: int, rows: int):
        self.cols = cols
        self.rows = rows
        self.grid = [[" "] * (cols + 1) for _ in range(rows + 1)]

    def put(self, row: int, col: int, ch: str) -> None:
        if 0 <= row <= self.rows and 0 <= col <= self.cols:
            self.grid[row][col] = ch

    def get(self, row: int, col: int) -> str:
        if 0 <= row <= self.rows and 0 <= col <= self.cols:
            return self.grid[row][col]
        return " "

    def text(self) -> str:
        return "\n".join("".join(row).rstrip() for row in self.grid) + "\n"


def _col(x_mm: float) -> int:
    return round(x_mm / TEXT_SCALE_MM_PER_CHAR)


def _paint_lines(canvas: _Canvas, lines: list[Line], row_h: float, y_off_units: float = 0.0) -> None:
    def band(y_mm: float) -> int:
        return round(y_mm / row_h + y_off_units)

    horizontals = [s for s in lines if s.y1 == s.y2]
    # thick lines win shared positions
    for seg in sorted(horizontals, key=lambda s: s.kind == "thick"):
        row = 2 * band(seg.y1)
        ch = "=" if seg.kind == "thick" else "-"
        for c in range(_col(seg.x1), _col(seg.x2) + 1):
            prev = canvas.get(row, c)
            canvas.put(row, c, "+" if prev in "|+" else ch)
    for seg in lines:
        if seg.x1 == seg.x2:
            c = _col(seg.x1)
            for row in range(2 * band(seg.y1), 2 * band(seg.y2) + 1):
                prev = canvas.get(row, c)
                canvas.put(row, c, "+" if prev in "-=+" else "|")


def _paint_cells(canvas: _Canvas, tree: LayoutTree, row_h: float, y_off_units: float, records: set[int]) -> None:
    for box in tree.leaf_boxes():
        if box.path.record_index not in records:
            continue
        c1 = _col(box.rect.x)
        c2 = _col(box.rect.x2)
        start_band = round(box.rect.y / row_h + y_off_units)
        budget = max(0, c2 - c1 - 1)
        for i, line in enumerate(box.value.wrapped_lines):
            row = 2 * (start_band + i) + 1
            for j, ch in enumerate(line[:budget]):
                canvas.put(row, c1 + 1 + j, ch)


def render_text(module: TableModule, row_height_mm: float = DEFAULT_ROW_HEIGHT_MM) -> str:
    """Whole table as a text grid."""
    tree = layout(module, row_height_mm)
    units = round(tree.height_mm / row_height_mm)
    canvas = _Canvas(_col(tree.width_mm), 2 * units)
    _paint_lines(canvas, tree.lines, row_height_mm)
    _paint_cells(canvas, tree, row_height_mm, 0.0, set(range(len(module.records))))
    return canvas.text()


def _record_lines(tree: LayoutTree, rec) -> list[Line]:
    """Division lines clipped to one record's vertical band."""
    out: list[Line] = []
    y1, y2 = rec.rect.y, rec.rect.y2
    for s in tree.lines:
        if s.y1 == s.y2:
            if y1 - 1e-9 <= s.y1 <= y2 + 1e-9:
                out.append(s)
        else:
            lo = max(s.y1, y1)
            hi = min(s.y2, y2)
            if hi - lo > 1e-9:
                out.append(Line(s.x1, lo, s.x2, hi, s.kind))
    return out


def _segment_items(seg: PageSegment) -> list[tuple[str, int]]:
    """Bands of one segment: optional header prefix, number band and record slices.

    The number band goes right under the header when the segment carries one."""
    items: list[tuple[str, int]] = []
    if seg.header_prefix:
        items.append(("record", 0))
    rec_list = list(range(seg.record_start, seg.record_stop))
    if seg.number_row:
        if rec_list and rec_list[0] == 0:
            items.append(("record", 0))
            items.append(("numbers", 0))
            rec_list = rec_list[1:]
        else:
            items.append(("numbers", 0))
    items.extend(("record", r) for r in rec_list)
    return items


def render_text_segments(module: TableModule, segments: list[PageSegment], row_height_mm: float = DEFAULT_ROW_HEIGHT_MM) -> str:
    """Each segment as its own grid, in placement order, blank line between."""
    tree = layout(module, row_height_mm)
    graphs = enumerate_graphs(module.template)
    blocks: list[str] = []
    for seg in sorted(segments, key=lambda s: s.placement):
        items = _segment_items(seg)
        total_units = 0
        for kind, r in items:
            if kind == "record":
                total_units += round(tree.records[r].rect.h / row_height_mm)
            else:
                total_units += 1
        canvas = _Canvas(_col(tree.width_mm), 2 * total_units)
        y_units = 0
        for kind, r in items:
            if kind == "record":
                rec = tree.records[r]
                off = y_units - rec.rect.y / row_height_mm
                _paint_lines(canvas, _record_lines(tree, rec), row_height_mm, off)
                _paint_cells(canvas, tree, row_height_mm, off, {r})
                y_units += round(rec.rect.h / row_height_mm)
            else:
                row = 2 * y_units + 1
                for g_i, g in enumerate(graphs):
                    c1 = _col(g.x_mm)
                    c2 = _col(g.x_mm + g.width_mm)
                    label = str(seg.first_number + g_i)
                    width = max(1, c2 - c1 - 1)
                    start = c1 + 1 + max(0, (width - len(label)) // 2)
                    for j, ch in enumerate(label[:width]):
                        canvas.put(row, start + j, ch)
                    canvas.put(row, c1, "|")
                canvas.put(row, _col(tree.width_mm), "|")
                for c in range(0, _col(tree.width_mm) + 1):
                    if canvas.get(2 * y_units, c) == " ":
                        canvas.put(2 * y_units, c, "-")
                    if canvas.get(2 * y_units + 2, c) == " ":
                        canvas.put(2 * y_units + 2, c, "-")
                y_units += 1
        blocks.append(canvas.text())
    return "\n".join(blocks)


def _fmt(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return s if s else "0"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


_STROKES = {"thin": 0.3, "thick": 0.6}


def _svg_lines(lines: list[Line], x_off: float, y_off: float, out: list[str]) -> None:
    for seg in lines:
        out.append(
            f'<line x1="{_fmt(seg.x1 + x_off)}" y1="{_fmt(seg.y1 + y_off)}" '
            f'x2="{_fmt(seg.x2 + x_off)}" y2="{_fmt(seg.y2 + y_off)}" '
            f'stroke="black" stroke-width="{_fmt(_STROKES[seg.kind])}"/>'
        )


def _svg_cells(tree: LayoutTree, x_off: float, y_off: float, records: set[int], row_h: float, out: list[str]) -> None:
    for box in tree.leaf_boxes():
        if box.path.record_index not in records:
            continue
        style = box.template.style
        for i, line in enumerate(box.value.wrapped_lines):
            if not line:
                continue
            tx = box.rect.x + 1.0 + x_off
            ty = box.rect.y + i * row_h + row_h / 2 + style.text_height_mm * 0.35 + y_off
            out.append(
                f'<text x="{_fmt(tx)}" y="{_fmt(ty)}" font-family="{_esc(style.font_tag)}" '
                f'font-size="{_fmt(style.text_height_mm)}">{_esc(line)}</text>'
            )


def render_svg(module: TableModule, row_height_mm: float = DEFAULT_ROW_HEIGHT_MM) -> str:
    """Whole table as an SVG document."""
    tree = layout(module, row_height_mm)
    body: list[str] = []
    _svg_lines(tree.lines, 0.0, 0.0, body)
    _svg_cells(tree, 0.0, 0.0, set(range(len(module.records))), row_height_mm, body)
    w = _fmt(tree.width_mm)
    h = _fmt(tree.height_mm)
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}mm" height="{h}mm" '
        f'viewBox="0 0 {w} {h}">'
    )
    return head + "\n" + "\n".join(body) + "\n</svg>\n"


def render_svg_segments(
    module: TableModule, segments: list[PageSegment], row_height_mm: float = DEFAULT_ROW_HEIGHT_MM, gap_mm: float = 10.0
) -> str:
    """Segments placed side by side in placement order."""
    tree = layout(module, row_height_mm)
    graphs = enumerate_graphs(module.template)
    body: list[str] = []
    max_h = 0.0
    for seg in segments:
        x_off = seg.placement * (tree.width_mm + gap_mm)
        y = 0.0
        for kind, r in _segment_items(seg):
            if kind == "record":
                rec = tree.records[r]
                _svg_lines(_record_lines(tree, rec), x_off, y - rec.rect.y, body)
                _svg_cells(tree, x_off, y - rec.rect.y, {r}, row_height_mm, body)
                body.append(
                    f'<line x1="{_fmt(x_off)}" y1="{_fmt(y)}" x2="{_fmt(x_off + tree.width_mm)}" y2="{_fmt(y)}" '
                    'stroke="black" stroke-width="0.6"/>'
                )
                y += rec.rect.h
            else:
                band = [
                    Line(0.0, 0.0, tree.width_mm, 0.0, "thin"),
                    Line(0.0, row_height_mm, tree.width_mm, row_height_mm, "thin"),
                    Line(0.0, 0.0, 0.0, row_height_mm, "thin"),
                    Line(tree.width_mm, 0.0, tree.width_mm, row_height_mm, "thin"),
                ]
                for g in graphs:
                    if g.x_mm > 0:
                        band.append(Line(g.x_mm, 0.0, g.x_mm, row_height_mm, "thin"))
                _svg_lines(band, x_off, y, body)
                for g_i, g in enumerate(graphs):
                    label = str(seg.first_number + g_i)
                    tx = x_off + g.x_mm + g.width_mm / 2 - len(label) * 0.9
                    ty = y + row_height_mm / 2 + 1.2
                    body.append(f'<text x="{_fmt(tx)}" y="{_fmt(ty)}" font-family="gost_a" font-size="3.5">{_esc(label)}</text>')
                y += row_height_mm
        body.append(
            f'<line x1="{_fmt(x_off)}" y1="{_fmt(y)}" x2="{_fmt(x_off + tree.width_mm)}" y2="{_fmt(y)}" '
            'stroke="black" stroke-width="0.6"/>'
        )
        max_h = max(max_h, y)
    total_w = len(segments) * (tree.width_mm + gap_mm) - gap_mm if segments else 0.0
    w = _fmt(total_w)
    h = _fmt(max_h)
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}mm" height="{h}mm" '
        f'viewBox="0 0 {w} {h}">'
    )
    return head + "\n" + "\n".join(body) + "\n</svg>\n"
