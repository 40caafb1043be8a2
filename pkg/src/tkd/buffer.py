"""The item buffer: rows as property-keyed value sets, transferable between tables of
different kinds. Matching is strictly by property id; `.tkb` files use the same
container style as `.tkm` (version line `tkb/1`, then `row` blocks of
`prop <id> = <value> [unit]` lines)."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import ParseError, VersionMismatchError
from .catalog import PropertySet, fill_cells
from .model import (
    CellPath,
    CellValue,
    TableModule,
    build_blank_instance,
    check_data_range,
    fmt_number,
    insert_record,
    iter_record_cells,
)
from .structure import TokenStream, _is_plain_ident, _quote, tokenize
from .units import DEFAULT_REGISTRY, UnitRegistry


@dataclass(frozen=True)
class ItemBuffer:
    rows: tuple[tuple[tuple[int, CellValue], ...], ...]

    @staticmethod
    def from_maps(rows: list[PropertySet]) -> ItemBuffer:
        return ItemBuffer(tuple(tuple(sorted(row.items())) for row in rows))

    def row_maps(self) -> list[PropertySet]:
        return [dict(row) for row in self.rows]

    def __len__(self) -> int:
        return len(self.rows)


def copy_to_buffer(module: TableModule, start: int, stop: int) -> ItemBuffer:
    """One buffer row per record; graphs without a property id are skipped, blank
    cells omitted, values keep their leaf units."""
    check_data_range(module, start, stop)
    rows: list[PropertySet] = []
    for r in range(start, stop):
        row: PropertySet = {}
        for node, _steps, value in iter_record_cells(module.template, module.records[r]):
            if node.property_id is None or node.property_id in row:
                continue
            if value.is_blank:
                continue
            if value.numeric is not None and value.unit is None and node.unit is not None:
                value = replace(value, unit=node.unit)
            row[node.property_id] = value
        rows.append(row)
    return ItemBuffer.from_maps(rows)


@dataclass(frozen=True)
class PasteReport:
    """Where the rows landed and which buffer properties had no target graph."""

    inserted_records: tuple[int, ...]
    dropped_properties: tuple[int, ...]


def paste_from_buffer(
    buffer: ItemBuffer,
    module: TableModule,
    at_index: int,
    registry: UnitRegistry | None = None,
) -> tuple[TableModule, PasteReport]:
    """Insert one record per buffer row after at_index, matching properties by id.

    Unmatched buffer properties are dropped and reported; target graphs without a
    buffer property stay blank.
    """
    reg = registry or DEFAULT_REGISTRY
    if at_index < 0 or at_index > len(module.records) - 1:
        at_index = len(module.records) - 1
    inserted: list[int] = []
    dropped: set[int] = set()
    pos = at_index + 1
    for row in buffer.row_maps():
        module = insert_record(module, pos, build_blank_instance(module.template.root))
        module, ignored = fill_cells(module, pos, row, registry=reg)
        dropped.update(ignored)
        inserted.append(pos)
        pos += 1
    return module, PasteReport(tuple(inserted), tuple(sorted(dropped)))


def save_buffer(buffer: ItemBuffer) -> str:
    """Canonical `.tkb` text."""
    out = ["tkb/1"]
    for row in buffer.rows:
        out.append("row")
        for pid, value in row:
            if value.numeric is not None:
                text = fmt_number(value.numeric)
                if value.unit is not None:
                    usym = value.unit if _is_plain_ident(value.unit) else _quote(value.unit)
                    out.append(f"  prop {pid} = {text} {usym}")
                else:
                    out.append(f"  prop {pid} = {text}")
            else:
                out.append(f"  prop {pid} = {_quote(value.text)}")
    return "\n".join(out) + "\n"


def load_buffer(text: str) -> ItemBuffer:
    """Parse a `.tkb` container."""
    ts = TokenStream(tokenize(text))
    head = ts.next()
    if head.kind != "ident" or head.text != "tkb":
        raise VersionMismatchError(f"not a tkb buffer (starts with {head.text!r})")
    ts.expect_punct("/")
    ver = ts.next(skip_nl=False)
    if ver.kind != "num" or int(ver.value) != 1:  # type: ignore[arg-type]
        raise VersionMismatchError(f"unsupported tkb version {ver.text!r}")
    rows: list[PropertySet] = []
    while ts.peek().kind != "eof":
        tok = ts.next()
        if tok.kind != "ident" or tok.text != "row":
            raise ParseError(f"expected 'row', got {tok.text!r}", tok.line, tok.col)
        row: PropertySet = {}
        while ts.peek().kind == "ident" and ts.peek().text == "prop":
            ts.next()
            pid_tok = ts.next()
            if pid_tok.kind != "num":
                raise ParseError("prop expects an integer id", pid_tok.line, pid_tok.col)
            pid = int(pid_tok.value)  # type: ignore[arg-type]
            if pid in row:
                raise ParseError(f"duplicate property {pid} in row", pid_tok.line, pid_tok.col)
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
            row[pid] = value
        rows.append(row)
    return ItemBuffer.from_maps(rows)
