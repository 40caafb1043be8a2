"""Parametric table model: template tree, record instances, cell addressing, structural edits.

A table is an ordered array of records; record 0 is the header. Every record shares one
block structure: a tree of rectangular blocks split by columns or rows, down to leaf
cells. Rows-axis splits may repeat an arbitrary number of parts; everything else is
fixed. The record array itself behaves as the outermost arbitrary vertical division, so
appending a record and inserting a part are the two faces of the same edit.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator, Literal

from .errors import (
    HeaderReadonlyError,
    HeaderRecordError,
    InvalidTemplateError,
    NotArbitrarySplitError,
    PathNotLeafError,
    PathOutOfRangeError,
    RangeOutOfBoundsError,
    UnitDimensionError,
)
from .units import DEFAULT_REGISTRY, UnitRegistry

Axis = Literal["cols", "rows"]
LineType = Literal["thin", "thick", "none"]

# Standard specifying-property numbers used by the stock fixtures.
PROP_POSITION = 1
PROP_DESIGNATION = 2
PROP_NAME = 3
PROP_QUANTITY = 4
PROP_UNIT_MASS = 5
PROP_NOTE = 6
PROP_CHARACTERISTIC = 7

STANDARD_PROPERTIES = {
    PROP_POSITION: "Поз",
    PROP_DESIGNATION: "Обозначение",
    PROP_NAME: "Наименование",
    PROP_QUANTITY: "Количество",
    PROP_UNIT_MASS: "Масса единицы, кг",
    PROP_NOTE: "Примечание",
    PROP_CHARACTERISTIC: "Характеристика",
}


def fmt_number(x: float) -> str:
    """Canonical text rendering of a numeric cell value."""
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


@dataclass(frozen=True)
class StyleSpec:
    """Per-cell line types (one per edge), font tag and text height."""

    left: LineType = "thin"
    top: LineType = "thin"
    right: LineType = "thin"
    bottom: LineType = "thin"
    font_tag: str = "gost_a"
    text_height_mm: float = 3.5

    def uniform_line(self) -> LineType | None:
        if self.left == self.top == self.right == self.bottom:
            return self.left
        return None


DEFAULT_STYLE = StyleSpec()


@dataclass(frozen=True)
class BlockNode:
    """One node of the record structure: a leaf cell or a split into parts.

    Split fields: axis, arbitrary (True = repeated vertical parts, children holds the
    single prototype), visibility of the division in header/data regions, insert_unit
    (parts created by one insertion act), insert_group (label joining parallel
    arbitrary splits into one act). Leaf fields: graph_id, header_text, width_mm and
    the catalog bindings (property_id, object_class, unit, constraint_role).
    """

    kind: Literal["leaf", "split"]
    axis: Axis | None = None
    arbitrary: bool = False
    visible_in_header: bool = True
    visible_in_data: bool = True
    insert_unit: int = 1
    insert_group: str | None = None
    children: tuple[BlockNode, ...] = ()
    graph_id: str = ""
    header_text: str = ""
    width_mm: float = 0.0
    property_id: int | None = None
    object_class: str | None = None
    unit: str | None = None
    constraint_role: Literal["source", "subject"] | None = None
    style: StyleSpec = DEFAULT_STYLE

    @property
    def is_leaf(self) -> bool:
        return self.kind == "leaf"

    def width(self) -> float:
        if self.is_leaf:
            return self.width_mm
        if self.axis == "cols":
            return sum(c.width() for c in self.children)
        return self.children[0].width() if self.children else 0.0


def leaf(
    header_text: str,
    width: float,
    *,
    graph_id: str | None = None,
    prop: int | None = None,
    object_class: str | None = None,
    unit: str | None = None,
    role: Literal["source", "subject"] | None = None,
    style: StyleSpec = DEFAULT_STYLE,
) -> BlockNode:
    return BlockNode(
        kind="leaf",
        graph_id=graph_id if graph_id is not None else header_text,
        header_text=header_text,
        width_mm=float(width),
        property_id=prop,
        object_class=object_class,
        unit=unit,
        constraint_role=role,
        style=style,
    )


def split(
    axis: Axis,
    children: list[BlockNode] | tuple[BlockNode, ...],
    *,
    arbitrary: bool = False,
    header: bool = True,
    data: bool = True,
    insert_unit: int = 1,
    group: str | None = None,
) -> BlockNode:
    return BlockNode(
        kind="split",
        axis=axis,
        arbitrary=arbitrary,
        visible_in_header=header,
        visible_in_data=data,
        insert_unit=insert_unit,
        insert_group=group,
        children=tuple(children),
    )


@dataclass(frozen=True)
class TableTemplate:
    """Shared structure of every record plus table-wide metadata."""

    name: str
    root: BlockNode
    units_note: str = ""
    style_defaults: StyleSpec = DEFAULT_STYLE


@dataclass(frozen=True)
class CellValue:
    """Cell content. numeric present ⇒ text is its rendering; wrapped_lines is the
    current line breaking (recomputed by pack_rows, defaults to explicit newlines)."""

    text: str = ""
    numeric: float | None = None
    unit: str | None = None
    wrapped_lines: tuple[str, ...] = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.wrapped_lines is None:
            lines = tuple(self.text.split("\n")) if self.text else ()
            object.__setattr__(self, "wrapped_lines", lines)

    @property
    def is_blank(self) -> bool:
        return self.text == "" and self.numeric is None

    @staticmethod
    def blank() -> CellValue:
        return CellValue()

    @staticmethod
    def of_text(text: str) -> CellValue:
        return CellValue(text=text)

    @staticmethod
    def of_number(value: float, unit: str | None = None) -> CellValue:
        return CellValue(text=fmt_number(value), numeric=float(value), unit=unit)

    def rewrapped(self, lines: tuple[str, ...]) -> CellValue:
        return replace(self, wrapped_lines=lines)


@dataclass(frozen=True)
class InstanceNode:
    """Instance side of a BlockNode: split → children, leaf → value.

    group_header is meaningful on record roots only; it marks common-name header rows
    that act as section boundaries for the row operations.
    """

    children: tuple[InstanceNode, ...] | None = None
    value: CellValue | None = None
    group_header: bool = False

    @property
    def is_leaf(self) -> bool:
        return self.children is None


@dataclass(frozen=True)
class CellPath:
    """Address of one cell: record index plus child indices down the instance tree."""

    record_index: int
    steps: tuple[int, ...] = ()

    def __str__(self) -> str:
        inner = "/".join(str(s) for s in self.steps) if self.steps else "."
        return f"{self.record_index}:{inner}"


@dataclass(frozen=True)
class ContinuationSpec:
    """How the table continues in chunks: height, direction, header/number options."""

    chunk_height_mm: float | None = None
    direction: Literal["right", "left"] = "right"
    repeat_header: bool = False
    number_row: bool = False
    first_graph_number: int = 1


@dataclass(frozen=True)
class TableModule:
    """Template plus the ordered record instances; records[0] is the header record."""

    template: TableTemplate
    records: tuple[InstanceNode, ...]
    continuation: ContinuationSpec = ContinuationSpec()

    @property
    def data_record_count(self) -> int:
        return len(self.records) - 1


@dataclass(frozen=True)
class Diagnostic:
    severity: Literal["error", "warning"]
    path: str
    message: str


@dataclass(frozen=True)
class GraphDescriptor:
    """One data-visible leaf column, in left-to-right template order."""

    graph_id: str
    header_text: str
    width_mm: float
    property_id: int | None
    unit: str | None
    object_class: str | None
    constraint_role: str | None
    steps: tuple[int, ...]
    x_mm: float


def _node_path(steps: tuple[int, ...]) -> str:
    return "root" if not steps else "root/" + "/".join(str(s) for s in steps)


def validate_template(template: TableTemplate) -> list[Diagnostic]:
    """Check every structural invariant; an empty list means the template is valid."""
    diags: list[Diagnostic] = []
    graph_ids: dict[str, tuple[int, ...]] = {}
    groups: dict[str, list[tuple[int, ...]]] = {}

    def err(steps: tuple[int, ...], message: str) -> None:
        diags.append(Diagnostic("error", _node_path(steps), message))

    def warn(steps: tuple[int, ...], message: str) -> None:
        diags.append(Diagnostic("warning", _node_path(steps), message))

    def walk(node: BlockNode, steps: tuple[int, ...], header_visible: bool) -> None:
        if node.is_leaf:
            if node.width_mm <= 0:
                err(steps, f"leaf width must be positive, got {node.width_mm}")
            if node.graph_id in graph_ids:
                err(steps, f"duplicate graph id {node.graph_id!r} (also at {_node_path(graph_ids[node.graph_id])})")
            else:
                graph_ids[node.graph_id] = steps
            if node.header_text and not header_visible:
                warn(steps, f"header text {node.header_text!r} is unreachable in the header region and will be ignored")
            return
        if node.arbitrary:
            if node.axis != "rows":
                err(steps, "arbitrary count is permitted only on rows-axis splits")
            if len(node.children) != 1:
                err(steps, f"arbitrary split must have exactly one prototype part, got {len(node.children)}")
            if node.insert_unit < 1:
                err(steps, f"insert_unit must be ≥ 1, got {node.insert_unit}")
            if node.insert_group is not None:
                groups.setdefault(node.insert_group, []).append(steps)
        else:
            if len(node.children) < 2:
                err(steps, f"split needs ≥2 children, got {len(node.children)}")
            if node.insert_group is not None:
                err(steps, "insert_group is permitted only on arbitrary rows-axis splits")
        if node.children:
            if node.axis == "rows":
                w0 = node.children[0].width()
                for i, c in enumerate(node.children):
                    if abs(c.width() - w0) > 1e-9:
                        err(steps + (i,), f"unequal widths in rows split: {c.width()} vs {w0}")
            for i, c in enumerate(node.children):
                walk(c, steps + (i,), header_visible and node.visible_in_header)

    walk(template.root, (), True)

    for label, members in groups.items():
        if len(members) < 2:
            continue
        # All members must sit under one common columns-axis split.
        prefix = members[0]
        for m in members[1:]:
            n = 0
            while n < len(prefix) and n < len(m) and prefix[n] == m[n]:
                n += 1
            prefix = prefix[:n]
        node = template.root
        found = node.kind == "split" and node.axis == "cols"
        for s in prefix:
            if not node.children:
                break
            node = node.children[s if not node.arbitrary else 0]
            if node.kind == "split" and node.axis == "cols":
                found = True
        if not found:
            diags.append(
                Diagnostic(
                    "error",
                    _node_path(prefix),
                    f"insert_group {label!r} members do not share a common columns-axis split",
                )
            )
    return diags


def template_child(node: BlockNode, index: int) -> BlockNode:
    """Template node governing instance child `index` (arbitrary parts share a prototype)."""
    return node.children[0] if node.arbitrary else node.children[index]


_template_child = template_child


def build_header_instance(node: BlockNode, visible: bool = True) -> InstanceNode:
    """Header record: leaf texts from the template; texts behind header-invisible
    divisions are ignored; header-invisible arbitrary splits get zero parts."""
    if node.is_leaf:
        return InstanceNode(value=CellValue.of_text(node.header_text if visible else ""))
    if node.arbitrary:
        if not node.visible_in_header:
            return InstanceNode(children=())
        return InstanceNode(children=(build_header_instance(node.children[0], visible),))
    below = visible and node.visible_in_header
    return InstanceNode(children=tuple(build_header_instance(c, below) for c in node.children))


def build_blank_instance(node: BlockNode) -> InstanceNode:
    """Fresh data instance: one insertion act per data-visible arbitrary split."""
    if node.is_leaf:
        return InstanceNode(value=CellValue.blank())
    if node.arbitrary:
        if not node.visible_in_data:
            return InstanceNode(children=())
        proto = node.children[0]
        return InstanceNode(children=tuple(build_blank_instance(proto) for _ in range(node.insert_unit)))
    return InstanceNode(children=tuple(build_blank_instance(c) for c in node.children))


def new_table(template: TableTemplate, continuation: ContinuationSpec | None = None) -> TableModule:
    """Create a module holding only the header record generated from header texts."""
    diags = [d for d in validate_template(template) if d.severity == "error"]
    if diags:
        raise InvalidTemplateError(
            f"template {template.name!r} is invalid: {diags[0].message} at {diags[0].path}",
            diagnostics=diags,
        )
    header = build_header_instance(template.root)
    return TableModule(
        template=template,
        records=(header,),
        continuation=continuation or ContinuationSpec(),
    )


def _descend(module: TableModule, path: CellPath) -> tuple[BlockNode, InstanceNode]:
    if not (0 <= path.record_index < len(module.records)):
        raise PathOutOfRangeError(f"record index {path.record_index} out of range (have {len(module.records)} records)")
    node = module.template.root
    inst = module.records[path.record_index]
    for depth, step in enumerate(path.steps):
        if inst.is_leaf or node.is_leaf:
            raise PathOutOfRangeError(f"path {path} descends below a leaf at depth {depth}")
        if not (0 <= step < len(inst.children)):
            raise PathOutOfRangeError(f"path {path}: child index {step} out of range at depth {depth}")
        node = _template_child(node, step)
        inst = inst.children[step]
    return node, inst


def resolve_cell(module: TableModule, path: CellPath) -> CellValue:
    """Return the value of the addressed leaf cell."""
    node, inst = _descend(module, path)
    if not inst.is_leaf:
        raise PathNotLeafError(f"path {path} stops at a split node")
    assert inst.value is not None
    return inst.value


def _rebuild(inst: InstanceNode, steps: tuple[int, ...], make: "callable") -> InstanceNode:
    if not steps:
        return make(inst)
    assert inst.children is not None
    i = steps[0]
    kids = list(inst.children)
    kids[i] = _rebuild(kids[i], steps[1:], make)
    return replace(inst, children=tuple(kids))


def _with_record(module: TableModule, index: int, record: InstanceNode) -> TableModule:
    records = list(module.records)
    records[index] = record
    return replace(module, records=tuple(records))


def set_cell(
    module: TableModule,
    path: CellPath,
    value: CellValue,
    registry: UnitRegistry | None = None,
) -> TableModule:
    """Write one data cell; the header record is read-only outside the template."""
    if path.record_index == 0:
        raise HeaderReadonlyError("record 0 is generated from the template and cannot be edited")
    node, inst = _descend(module, path)
    if not inst.is_leaf:
        raise PathNotLeafError(f"path {path} stops at a split node")
    reg = registry or DEFAULT_REGISTRY
    if value.unit is not None and node.unit is not None and value.numeric is not None:
        if not reg.same_dimension(value.unit, node.unit):
            raise UnitDimensionError(
                f"cell {path} expects {node.unit!r} ({reg.dimension(node.unit)}), got {value.unit!r} ({reg.dimension(value.unit)})"
            )
    record = _rebuild(module.records[path.record_index], path.steps, lambda _: InstanceNode(value=value))
    return _with_record(module, path.record_index, record)


def _locate_group_members(template: TableTemplate, label: str) -> list[tuple[int, ...]]:
    out: list[tuple[int, ...]] = []

    def walk(node: BlockNode, steps: tuple[int, ...]) -> None:
        if node.is_leaf:
            return
        if node.arbitrary and node.insert_group == label:
            out.append(steps)
        for i, c in enumerate(node.children):
            walk(c, steps + (i,))

    walk(template.root, ())
    return out


def _nodes_at(template: TableTemplate, record: InstanceNode, steps: tuple[int, ...]) -> tuple[BlockNode, InstanceNode]:
    node = template.root
    inst = record
    for depth, s in enumerate(steps):
        if inst.children is None or node.is_leaf:
            raise PathOutOfRangeError(f"steps {steps} descend below a leaf at depth {depth}")
        if not (0 <= s < len(inst.children)):
            raise PathOutOfRangeError(f"steps {steps}: child index {s} out of range at depth {depth}")
        node = _template_child(node, s)
        inst = inst.children[s]
    return node, inst


def _instance_steps_for_template_steps(
    template: TableTemplate, record: InstanceNode, tsteps: tuple[int, ...]
) -> tuple[int, ...] | None:
    """Map a template node path onto an instance, following part 0 of arbitrary splits.

    Returns None when a zero-part arbitrary split interrupts the walk.
    """
    node = template.root
    inst = record
    out: list[int] = []
    for s in tsteps:
        if inst.children is None:
            return None
        if node.arbitrary:
            # template step enters the prototype; the instance needs a part index
            if not inst.children:
                return None
            out.append(0)
            inst = inst.children[0]
        else:
            if not (0 <= s < len(inst.children)):
                return None
            out.append(s)
            inst = inst.children[s]
        node = node.children[s if not node.arbitrary else 0]
    return tuple(out)


def _group_targets(module: TableModule, record: InstanceNode, node: BlockNode, steps: tuple[int, ...]) -> list[tuple[int, ...]]:
    if node.insert_group is None:
        return [steps]
    members = _locate_group_members(module.template, node.insert_group)
    out = []
    for tsteps in members:
        isteps = _instance_steps_for_template_steps(module.template, record, tsteps)
        if isteps is not None:
            out.append(isteps)
    return sorted(out)


def insert_part(module: TableModule, split_path: CellPath, at_index: int) -> tuple[TableModule, list[CellPath]]:
    """Insert one act of blank parts into an arbitrary rows split of a data record.

    at_index is floored to an act boundary. When the split carries an insert_group,
    every split sharing the label in the same record receives its own insert_unit
    parts at the aligned act position. Returns the updated module and the paths of
    every created part.
    """
    if split_path.record_index == 0:
        raise HeaderRecordError("cannot insert parts into the header record")
    node, inst = _descend(module, split_path)
    if node.is_leaf or not node.arbitrary or node.axis != "rows":
        raise NotArbitrarySplitError(f"path {split_path} does not address an arbitrary rows-axis split")

    record = module.records[split_path.record_index]
    act = max(0, min(at_index, len(inst.children or ()))) // node.insert_unit
    created: list[CellPath] = []

    for steps in _group_targets(module, record, node, split_path.steps):
        mnode, minst = _nodes_at(module.template, record, steps)
        unit = mnode.insert_unit
        pos = min(act * unit, len(minst.children or ()))
        blanks = tuple(build_blank_instance(mnode.children[0]) for _ in range(unit))

        def make(old: InstanceNode, _pos=pos, _blanks=blanks) -> InstanceNode:
            kids = list(old.children or ())
            kids[_pos:_pos] = _blanks
            return replace(old, children=tuple(kids))

        record = _rebuild(record, steps, make)
        created.extend(CellPath(split_path.record_index, steps + (pos + k,)) for k in range(unit))

    return _with_record(module, split_path.record_index, record), created


def delete_part(module: TableModule, split_path: CellPath, index: int) -> TableModule:
    """Remove the insertion act containing `index`; mirrors insert_part across groups."""
    if split_path.record_index == 0:
        raise HeaderRecordError("cannot delete parts of the header record")
    node, inst = _descend(module, split_path)
    if node.is_leaf or not node.arbitrary or node.axis != "rows":
        raise NotArbitrarySplitError(f"path {split_path} does not address an arbitrary rows-axis split")
    count = len(inst.children or ())
    if count == 0 or not (0 <= index < count):
        raise PathOutOfRangeError(f"part index {index} out of range (split has {count} parts)")
    act = index // node.insert_unit

    record = module.records[split_path.record_index]
    for steps in _group_targets(module, record, node, split_path.steps):
        mnode, _ = _nodes_at(module.template, record, steps)
        lo = act * mnode.insert_unit
        hi = lo + mnode.insert_unit

        def make(old: InstanceNode, _lo=lo, _hi=hi) -> InstanceNode:
            kids = list(old.children or ())
            del kids[_lo : min(len(kids), _hi)]
            return replace(old, children=tuple(kids))

        record = _rebuild(record, steps, make)

    return _with_record(module, split_path.record_index, record)


def enumerate_graphs(template: TableTemplate) -> list[GraphDescriptor]:
    """Data-visible leaf columns in left-to-right (document) order."""
    out: list[GraphDescriptor] = []

    def walk(node: BlockNode, steps: tuple[int, ...], x: float) -> None:
        if node.is_leaf:
            out.append(
                GraphDescriptor(
                    graph_id=node.graph_id,
                    header_text=node.header_text,
                    width_mm=node.width_mm,
                    property_id=node.property_id,
                    unit=node.unit,
                    object_class=node.object_class,
                    constraint_role=node.constraint_role,
                    steps=steps,
                    x_mm=x,
                )
            )
            return
        if not node.visible_in_data:
            return
        if node.axis == "cols":
            cx = x
            for i, c in enumerate(node.children):
                walk(c, steps + (i,), cx)
                cx += c.width()
        else:
            for i, c in enumerate(node.children):
                walk(c, steps + (i,), x)

    walk(template.root, (), 0.0)
    return out


def find_graph(template: TableTemplate, graph_id: str) -> GraphDescriptor | None:
    for g in enumerate_graphs(template):
        if g.graph_id == graph_id:
            return g
    return None


def iter_record_cells(
    template: TableTemplate, record: InstanceNode
) -> Iterator[tuple[BlockNode, tuple[int, ...], CellValue]]:
    """Yield (template leaf, instance steps, value) for every cell of one record."""

    def walk(node: BlockNode, inst: InstanceNode, steps: tuple[int, ...]) -> Iterator:
        if node.is_leaf:
            if inst.value is not None:
                yield node, steps, inst.value
            return
        for i, child in enumerate(inst.children or ()):
            yield from walk(_template_child(node, i), child, steps + (i,))

    yield from walk(template.root, record, ())


def graph_cells(template: TableTemplate, record: InstanceNode, graph_id: str) -> list[tuple[int, ...]]:
    """Instance step paths of every cell belonging to one graph, in document order."""
    return [steps for node, steps, _ in iter_record_cells(template, record) if node.graph_id == graph_id]


def record_cell_value(module: TableModule, record_index: int, graph_id: str) -> CellValue | None:
    """First cell value of a graph in one record; None when the graph has no cell there."""
    record = module.records[record_index]
    cells = graph_cells(module.template, record, graph_id)
    if not cells:
        return None
    return resolve_cell(module, CellPath(record_index, cells[0]))


def check_data_range(module: TableModule, start: int, stop: int) -> None:
    if not (1 <= start <= stop <= len(module.records)):
        raise RangeOutOfBoundsError(
            f"record range {start}..{stop} out of bounds (data records are 1..{len(module.records)})"
        )


# Record-level operations: the record array is the outermost vertical division.

def append_record(module: TableModule, group_header: bool = False) -> tuple[TableModule, int]:
    record = replace(build_blank_instance(module.template.root), group_header=group_header)
    return replace(module, records=module.records + (record,)), len(module.records)


def insert_record(module: TableModule, at_index: int, record: InstanceNode | None = None) -> TableModule:
    """Insert a record so it lands at `at_index` (must be ≥ 1; record 0 is the header)."""
    if at_index < 1:
        raise HeaderRecordError("cannot insert a record before the header")
    if at_index > len(module.records):
        raise RangeOutOfBoundsError(f"record index {at_index} out of bounds")
    rec = record if record is not None else build_blank_instance(module.template.root)
    records = list(module.records)
    records.insert(at_index, rec)
    return replace(module, records=tuple(records))


def delete_records(module: TableModule, start: int, stop: int) -> TableModule:
    check_data_range(module, start, stop)
    records = list(module.records)
    del records[start:stop]
    return replace(module, records=tuple(records))


def clear_records(module: TableModule, start: int, stop: int) -> TableModule:
    """Blank every cell of the records in range, keeping their shape."""
    check_data_range(module, start, stop)

    def blank(inst: InstanceNode) -> InstanceNode:
        if inst.is_leaf:
            return InstanceNode(value=CellValue.blank())
        return replace(inst, children=tuple(blank(c) for c in inst.children))

    records = list(module.records)
    for i in range(start, stop):
        records[i] = blank(records[i])
    return replace(module, records=tuple(records))


def copy_records(module: TableModule, start: int, stop: int, to_index: int) -> TableModule:
    check_data_range(module, start, stop)
    if not (1 <= to_index <= len(module.records)):
        raise RangeOutOfBoundsError(f"target index {to_index} out of bounds")
    chunk = module.records[start:stop]
    records = list(module.records)
    records[to_index:to_index] = chunk
    return replace(module, records=tuple(records))


def move_records(module: TableModule, start: int, stop: int, to_index: int) -> TableModule:
    check_data_range(module, start, stop)
    if not (1 <= to_index <= len(module.records)):
        raise RangeOutOfBoundsError(f"target index {to_index} out of bounds")
    if start <= to_index < stop:
        return module
    records = list(module.records)
    chunk = records[start:stop]
    del records[start:stop]
    if to_index > stop:
        to_index -= len(chunk)
    records[to_index:to_index] = chunk
    return replace(module, records=tuple(records))


def record_conforms(module: TableModule, index: int) -> bool:
    def walk(node: BlockNode, inst: InstanceNode) -> bool:
        if node.is_leaf:
            return inst.is_leaf and inst.value is not None
        if inst.children is None:
            return False
        if node.arbitrary:
            return all(walk(node.children[0], c) for c in inst.children)
        if len(inst.children) != len(node.children):
            return False
        return all(walk(n, c) for n, c in zip(node.children, inst.children))

    return walk(module.template.root, module.records[index])


def module_conforms(module: TableModule) -> bool:
    """Every record (header included) matches the template shape."""
    return all(record_conforms(module, i) for i in range(len(module.records)))
