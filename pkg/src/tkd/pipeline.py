"""Specification auto-generation from drawing-element properties, plus the designer's
row operations: packing (фасовка), ordering, merging identical rows and common-name
extraction.

Drawing-property files (`.dwgp`) are line-oriented UTF-8:

    element <type> qty <q> { prop <id> = <value> [unit] ... }
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

from .errors import ParseError, RangeOutOfBoundsError, UnknownElementTypeError, UnknownGraphError
from .layout import char_budget, wrap_text
from .model import (
    PROP_QUANTITY,
    CellPath,
    CellValue,
    InstanceNode,
    TableModule,
    append_record,
    build_blank_instance,
    check_data_range,
    enumerate_graphs,
    find_graph,
    graph_cells,
    insert_record,
    record_cell_value,
    resolve_cell,
    set_cell,
    template_child,
)
from .catalog import PropertySet, fill_cells
from .structure import TokenStream, tokenize
from .units import DEFAULT_REGISTRY, UnitRegistry

ELEMENT_TYPES = frozenset({"axonometric", "network_profile", "position_label"})


@dataclass(frozen=True)
class DrawingElement:
    element_type: str
    properties: tuple[tuple[int, CellValue], ...]
    quantity: float

    def property_map(self) -> PropertySet:
        return {pid: v for pid, v in self.properties}


@dataclass(frozen=True)
class DrawingFile:
    name: str
    elements: tuple[DrawingElement, ...]


@dataclass(frozen=True)
class CollectionScope:
    """Names of drawing files ("current" for the in-memory one) and element types."""

    files: tuple[str, ...]
    element_types: frozenset[str] = ELEMENT_TYPES


@dataclass(frozen=True)
class CollectedEntry:
    properties: PropertySet
    quantity: float


def load_drawing(text: str, name: str = "", element_types: frozenset[str] = ELEMENT_TYPES) -> DrawingFile:
    """Parse a `.dwgp` source."""
    ts = TokenStream(tokenize(text))
    elements: list[DrawingElement] = []
    while ts.peek().kind != "eof":
        tok = ts.next()
        if tok.kind != "ident" or tok.text != "element":
            raise ParseError(f"expected 'element', got {tok.text!r}", tok.line, tok.col)
        etype = ts.next()
        if etype.kind != "ident":
            raise ParseError("element expects a type tag", etype.line, etype.col)
        if etype.text not in element_types:
            raise UnknownElementTypeError(f"{etype.line}:{etype.col}: unknown element type {etype.text!r}")
        ts.expect_ident("qty")
        qty = ts.next()
        if qty.kind != "num" or qty.value < 0:  # type: ignore[operator]
            raise ParseError("qty expects a non-negative number", qty.line, qty.col)
        ts.expect_punct("{")
        props: list[tuple[int, CellValue]] = []
        while not (ts.peek().kind == "punct" and ts.peek().text == "}"):
            if ts.peek().kind == "eof":
                t = ts.peek()
                raise ParseError("unterminated element, expected '}'", t.line, t.col)
            ts.expect_ident("prop")
            pid_tok = ts.next()
            if pid_tok.kind != "num":
                raise ParseError("prop expects an integer id", pid_tok.line, pid_tok.col)
            ts.expect_punct("=")
            val_tok = ts.next()
            if val_tok.kind == "str":
                value = CellValue.of_text(val_tok.text)
            elif val_tok.kind == "num":
                unit = None
                nxt = ts.peek(skip_nl=False)
                if nxt.kind in ("ident", "str"):
                    ts.next(skip_nl=False)
                    if not DEFAULT_REGISTRY.knows(nxt.text):
                        raise ParseError(f"unknown unit {nxt.text!r}", nxt.line, nxt.col)
                    unit = DEFAULT_REGISTRY.canonical(nxt.text)
                value = CellValue.of_number(val_tok.value, unit)  # type: ignore[arg-type]
            else:
                raise ParseError(f"bad property value {val_tok.text!r}", val_tok.line, val_tok.col)
            props.append((int(pid_tok.value), value))  # type: ignore[arg-type]
        ts.expect_punct("}")
        elements.append(DrawingElement(etype.text, tuple(props), float(qty.value)))  # type: ignore[arg-type]
    return DrawingFile(name=name, elements=tuple(elements))


def _normalized_key(properties: PropertySet, reg: UnitRegistry) -> tuple:
    parts = []
    for pid in sorted(properties):
        v = properties[pid]
        if v.numeric is not None and v.unit is not None and reg.knows(v.unit):
            parts.append((pid, "n", reg.dimension(v.unit), round(reg.to_base(v.numeric, v.unit), 9)))
        elif v.numeric is not None:
            parts.append((pid, "n", "", round(v.numeric, 9)))
        else:
            parts.append((pid, "t", "", v.text))
    return tuple(parts)


def collect(
    scope: CollectionScope,
    base_dir: str | Path = ".",
    current: DrawingFile | None = None,
    registry: UnitRegistry | None = None,
) -> list[CollectedEntry]:
    """Merge equal property sets across the scope, summing quantities.

    Order is first appearance; equality ignores quantity and normalizes units.
    """
    reg = registry or DEFAULT_REGISTRY
    base = Path(base_dir)
    entries: dict[tuple, CollectedEntry] = {}
    order: list[tuple] = []
    for fname in scope.files:
        if fname == "current":
            if current is None:
                raise FileNotFoundError("scope names 'current' but no current drawing was given")
            drawing = current
        else:
            path = base / fname
            if not path.exists():
                raise FileNotFoundError(str(path))
            drawing = load_drawing(path.read_text(encoding="utf-8"), name=fname)
        for element in drawing.elements:
            if element.element_type not in scope.element_types:
                continue
            props = element.property_map()
            key = _normalized_key(props, reg)
            if key in entries:
                old = entries[key]
                entries[key] = CollectedEntry(old.properties, old.quantity + element.quantity)
            else:
                entries[key] = CollectedEntry(props, element.quantity)
                order.append(key)
    return [entries[k] for k in order]


@dataclass(frozen=True)
class AutofillReport:
    """Ignored property ids per appended record index."""

    ignored: tuple[tuple[int, tuple[int, ...]], ...]


def autofill(
    module: TableModule, collected: list[CollectedEntry], registry: UnitRegistry | None = None
) -> tuple[TableModule, AutofillReport]:
    """One data record per collected entry; quantity lands in the property-4 graph."""
    reg = registry or DEFAULT_REGISTRY
    report: list[tuple[int, tuple[int, ...]]] = []
    for entry in collected:
        module, idx = append_record(module)
        props = dict(entry.properties)
        props[PROP_QUANTITY] = CellValue.of_number(entry.quantity)
        module, ignored = fill_cells(module, idx, props, registry=reg)
        if ignored:
            report.append((idx, tuple(ignored)))
    return module, AutofillReport(tuple(report))


def _row_signature(module: TableModule, record_index: int, skip_quantity: bool) -> tuple:
    """Cell values of every graph, in graph order; quantity graphs optionally skipped."""
    sig = []
    for g in enumerate_graphs(module.template):
        if skip_quantity and g.property_id == PROP_QUANTITY:
            continue
        cells = graph_cells(module.template, module.records[record_index], g.graph_id)
        values = tuple(
            (v.text, v.numeric, v.unit)
            for v in (resolve_cell(module, CellPath(record_index, steps)) for steps in cells)
        )
        sig.append((g.graph_id, values))
    return tuple(sig)


def _section_runs(module: TableModule, start: int, stop: int) -> list[tuple[int, int]]:
    """Contiguous runs of plain records between group-header boundary rows."""
    runs: list[tuple[int, int]] = []
    i = start
    while i < stop:
        if module.records[i].group_header:
            i += 1
            continue
        j = i
        while j < stop and not module.records[j].group_header:
            j += 1
        runs.append((i, j))
        i = j
    return runs


def merge_identical(module: TableModule, start: int, stop: int) -> TableModule:
    """Collapse rows equal on all graphs except quantity, summing quantities.

    Survivors keep their relative order; group-header rows bound the merge. The
    operation is idempotent.
    """
    check_data_range(module, start, stop)
    qty_graph = next((g for g in enumerate_graphs(module.template) if g.property_id == PROP_QUANTITY), None)
    drop: set[int] = set()
    sums: dict[int, float | None] = {}
    for run_start, run_stop in _section_runs(module, start, stop):
        seen: dict[tuple, int] = {}
        for r in range(run_start, run_stop):
            sig = _row_signature(module, r, skip_quantity=True)
            qty = None
            if qty_graph is not None:
                v = record_cell_value(module, r, qty_graph.graph_id)
                qty = v.numeric if v is not None and v.numeric is not None else None
            if sig in seen:
                survivor = seen[sig]
                drop.add(r)
                if qty is not None:
                    sums[survivor] = (sums.get(survivor) or 0.0) + qty
            else:
                seen[sig] = r
                sums[survivor := r] = qty
    if not drop:
        return module
    if qty_graph is not None:
        for r, total in sums.items():
            if r in drop or total is None:
                continue
            cells = graph_cells(module.template, module.records[r], qty_graph.graph_id)
            if cells:
                module = set_cell(module, CellPath(r, cells[0]), CellValue.of_number(total))
    records = tuple(rec for i, rec in enumerate(module.records) if i not in drop)
    return replace(module, records=records)


def _sort_key(module: TableModule, record_index: int, graph_ids: list[str]) -> tuple:
    key = []
    for gid in graph_ids:
        v = record_cell_value(module, record_index, gid)
        if v is None:
            key.append((2, 0.0, ""))
        elif v.numeric is not None:
            key.append((0, v.numeric, ""))
        else:
            key.append((1, 0.0, v.text))
    return tuple(key)


def sort_records(module: TableModule, graph_sequence: list[str]) -> TableModule:
    """Stable sort of data rows by the given graphs; sections sort independently.

    Numeric cells compare numerically (before any text), text by codepoint.
    """
    for gid in graph_sequence:
        if find_graph(module.template, gid) is None:
            raise UnknownGraphError(f"unknown graph {gid!r}")
    records = list(module.records)
    for run_start, run_stop in _section_runs(module, 1, len(records)):
        chunk = list(range(run_start, run_stop))
        chunk.sort(key=lambda r: _sort_key(module, r, graph_sequence))
        records[run_start:run_stop] = [module.records[r] for r in chunk]
    return replace(module, records=tuple(records))


def _common_prefix(texts: list[str]) -> str:
    if not texts:
        return ""
    prefix = texts[0]
    for t in texts[1:]:
        n = 0
        limit = min(len(prefix), len(t))
        while n < limit and prefix[n] == t[n]:
            n += 1
        prefix = prefix[:n]
        if not prefix:
            return ""
    return prefix


_WORD_BOUNDARY = (" ", "×")


def extract_common_names(module: TableModule, start: int, stop: int, graph_id: str) -> TableModule:
    """Pull the common name prefix of a row range into an inserted group-header row.

    The prefix is trimmed to the last word boundary (space or ×) so that header text +
    member text reconstructs every original; prefixes shorter than two characters are
    treated as empty and the table is returned unchanged.
    """
    check_data_range(module, start, stop)
    if stop - start < 2:
        raise RangeOutOfBoundsError("common-name extraction needs at least 2 rows")
    if find_graph(module.template, graph_id) is None:
        raise UnknownGraphError(f"unknown graph {graph_id!r}")
    texts = []
    for r in range(start, stop):
        v = record_cell_value(module, r, graph_id)
        texts.append(v.text if v is not None else "")
    prefix = _common_prefix(texts)
    if not prefix:
        return module
    if any(len(t) > len(prefix) for t in texts):
        cut = max((prefix.rfind(b) for b in _WORD_BOUNDARY), default=-1)
        if cut < 0:
            return module
        prefix = prefix[: cut + 1]
    if len(prefix.strip()) < 2:
        return module

    for r in range(start, stop):
        cells = graph_cells(module.template, module.records[r], graph_id)
        if not cells:
            continue
        old = resolve_cell(module, CellPath(r, cells[0]))
        module = set_cell(module, CellPath(r, cells[0]), CellValue.of_text(old.text[len(prefix):]))

    header_record = replace(build_blank_instance(module.template.root), group_header=True)
    module = insert_record(module, start, header_record)
    cells = graph_cells(module.template, module.records[start], graph_id)
    if cells:
        module = set_cell(module, CellPath(start, cells[0]), CellValue.of_text(prefix))
    return module


def pack_rows(module: TableModule, start: int, stop: int) -> TableModule:
    """Re-wrap every cell in range to its graph width; contents stay the same strings."""
    check_data_range(module, start, stop)

    def repack(node, inst: InstanceNode) -> InstanceNode:
        if node.is_leaf:
            value = inst.value or CellValue.blank()
            lines = wrap_text(value.text, char_budget(node.width_mm))
            return InstanceNode(value=value.rewrapped(lines))
        return replace(
            inst,
            children=tuple(repack(template_child(node, i), c) for i, c in enumerate(inst.children or ())),
        )

    records = list(module.records)
    for r in range(start, stop):
        records[r] = replace(repack(module.template.root, records[r]), group_header=records[r].group_header)
    return replace(module, records=tuple(records))
