"""Electronic catalogs: object-class stores, applicability filtering, property rules.

File grammars (same token set as the structure DSL, one statement per line,
`#` comments):

    catalog  := "catalog" STRING (field)* (item)*
    field    := "field" STRING ("prop" INT)? ("unit" SYMBOL)?
    item     := "item" value ("|" value)* ("@" clause ("," clause)*)?
    clause   := "T" range | "P" range | "DN" INT ("," INT)*
    range    := NUM ".." NUM | ".." NUM | NUM ".."

    rules    := (rule)*
    rule     := "rule" INT "=" STRING ("unit" SYMBOL)?

Applicability ranges are expressed in °C (T) and МПа (P); constraints are converted
to those units before the inclusive comparison. DN matches by set membership.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    DuplicatePropertyError,
    ParseError,
    UnitDimensionError,
    UnknownObjectClassError,
    UnresolvedPlaceholderError,
)
from .model import (
    CellPath,
    CellValue,
    TableModule,
    fmt_number,
    graph_cells,
    iter_record_cells,
    resolve_cell,
    set_cell,
    template_child,
)
from .structure import Token, TokenStream, tokenize
from .units import DEFAULT_REGISTRY, PRESSURE, TEMPERATURE, LENGTH, UnitRegistry

RANGE_TEMPERATURE_UNIT = "°C"
RANGE_PRESSURE_UNIT = "МПа"

PropertySet = dict[int, CellValue]


@dataclass(frozen=True)
class Applicability:
    """Optional working ranges; an absent bound accepts everything on that side."""

    t_min: float | None = None
    t_max: float | None = None
    p_min: float | None = None
    p_max: float | None = None
    dn: frozenset[int] | None = None


@dataclass(frozen=True)
class CatalogField:
    name: str
    property_id: int | None = None
    unit: str | None = None


@dataclass(frozen=True)
class CatalogItem:
    values: tuple[CellValue, ...]
    applicability: Applicability = Applicability()


@dataclass(frozen=True)
class Catalog:
    object_class: str
    fields: tuple[CatalogField, ...]
    items: tuple[CatalogItem, ...]

    def field_index(self, name: str) -> int | None:
        for i, f in enumerate(self.fields):
            if f.name == name:
                return i
        return None


@dataclass(frozen=True)
class PropertyRule:
    property_id: int
    template: str
    unit: str | None = None


@dataclass(frozen=True)
class PropertyRules:
    rules: tuple[PropertyRule, ...]


@dataclass(frozen=True)
class ConstraintSet:
    """Selection constraints sourced from designated cells."""

    temperature: tuple[float, str] | None = None
    pressure: tuple[float, str] | None = None
    dn: int | None = None

    @property
    def is_empty(self) -> bool:
        return self.temperature is None and self.pressure is None and self.dn is None


def _parse_value(ts: TokenStream) -> CellValue:
    tok = ts.next(skip_nl=False)
    if tok.kind == "str":
        return CellValue.of_text(tok.text)
    if tok.kind == "num":
        return CellValue.of_number(tok.value)  # type: ignore[arg-type]
    raise ParseError(f"expected an item value, got {tok.text or tok.kind!r}", tok.line, tok.col)


def _parse_range(ts: TokenStream, what: str, tok: Token) -> tuple[float | None, float | None]:
    lo = None
    nxt = ts.peek(skip_nl=False)
    if nxt.kind == "num":
        ts.next(skip_nl=False)
        lo = nxt.value
    ts.expect_punct(".", skip_nl=False)
    ts.expect_punct(".", skip_nl=False)
    hi = None
    nxt = ts.peek(skip_nl=False)
    if nxt.kind == "num":
        ts.next(skip_nl=False)
        hi = nxt.value
    if lo is None and hi is None:
        raise ParseError(f"{what} range needs at least one bound", tok.line, tok.col)
    if lo is not None and hi is not None and lo > hi:
        raise ParseError(f"{what} range bounds are out of order: {lo} > {hi}", tok.line, tok.col)
    return lo, hi  # type: ignore[return-value]


def load_catalog(text: str, registry: UnitRegistry | None = None) -> Catalog:
    """Parse a `.cat` source."""
    reg = registry or DEFAULT_REGISTRY
    ts = TokenStream(tokenize(text))
    ts.expect_ident("catalog")
    name = ts.expect_string()
    fields: list[CatalogField] = []
    seen_props: set[int] = set()
    while ts.peek().kind == "ident" and ts.peek().text == "field":
        ts.next()
        fname = ts.expect_string()
        prop = None
        unit = None
        while ts.peek(skip_nl=False).kind == "ident":
            key = ts.next(skip_nl=False)
            if key.text == "prop":
                num = ts.next(skip_nl=False)
                if num.kind != "num":
                    raise ParseError("prop expects an integer", num.line, num.col)
                prop = int(num.value)  # type: ignore[arg-type]
                if prop in seen_props:
                    raise DuplicatePropertyError(f"{num.line}:{num.col}: field property {prop} bound twice")
                seen_props.add(prop)
            elif key.text == "unit":
                sym = ts.next(skip_nl=False)
                if sym.kind not in ("ident", "str"):
                    raise ParseError("unit expects a symbol", sym.line, sym.col)
                if not reg.knows(sym.text):
                    raise ParseError(f"unknown unit {sym.text!r}", sym.line, sym.col)
                unit = reg.canonical(sym.text)
            else:
                raise ParseError(f"unexpected field attribute {key.text!r}", key.line, key.col)
        fields.append(CatalogField(fname.text, prop, unit))

    items: list[CatalogItem] = []
    while ts.peek().kind == "ident" and ts.peek().text == "item":
        item_tok = ts.next()
        values = [_parse_value(ts)]
        while ts.peek(skip_nl=False).kind == "punct" and ts.peek(skip_nl=False).text == "|":
            ts.next(skip_nl=False)
            values.append(_parse_value(ts))
        if len(values) != len(fields):
            raise ParseError(
                f"item has {len(values)} values, catalog declares {len(fields)} fields", item_tok.line, item_tok.col
            )
        app = Applicability()
        nxt = ts.peek(skip_nl=False)
        if nxt.kind == "punct" and nxt.text == "@":
            ts.next(skip_nl=False)
            t_min = t_max = p_min = p_max = None
            dn: frozenset[int] | None = None
            while True:
                clause = ts.peek(skip_nl=False)
                if clause.kind != "ident" or clause.text not in ("T", "P", "DN"):
                    break
                ts.next(skip_nl=False)
                if clause.text == "T":
                    t_min, t_max = _parse_range(ts, "T", clause)
                elif clause.text == "P":
                    p_min, p_max = _parse_range(ts, "P", clause)
                else:
                    nums = []
                    while ts.peek(skip_nl=False).kind == "num":
                        nums.append(int(ts.next(skip_nl=False).value))  # type: ignore[arg-type]
                        if ts.peek(skip_nl=False).kind == "punct" and ts.peek(skip_nl=False).text == ",":
                            ts.next(skip_nl=False)
                        else:
                            break
                    if not nums:
                        raise ParseError("DN expects at least one size", clause.line, clause.col)
                    dn = frozenset(nums)
                sep = ts.peek(skip_nl=False)
                if sep.kind == "punct" and sep.text == ",":
                    ts.next(skip_nl=False)
            app = Applicability(t_min=t_min, t_max=t_max, p_min=p_min, p_max=p_max, dn=dn)
        items.append(CatalogItem(tuple(values), app))

    tail = ts.peek()
    if tail.kind != "eof":
        raise ParseError(f"unexpected content {tail.text!r}", tail.line, tail.col)
    return Catalog(object_class=name.text, fields=tuple(fields), items=tuple(items))


def load_rules(text: str, registry: UnitRegistry | None = None) -> PropertyRules:
    """Parse a `.rules` source."""
    reg = registry or DEFAULT_REGISTRY
    ts = TokenStream(tokenize(text))
    rules: list[PropertyRule] = []
    seen: set[int] = set()
    while ts.peek().kind != "eof":
        tok = ts.next()
        if tok.kind != "ident" or tok.text != "rule":
            raise ParseError(f"expected 'rule', got {tok.text!r}", tok.line, tok.col)
        num = ts.next()
        if num.kind != "num":
            raise ParseError("rule expects a property number", num.line, num.col)
        pid = int(num.value)  # type: ignore[arg-type]
        if pid in seen:
            raise DuplicatePropertyError(f"{num.line}:{num.col}: rule for property {pid} defined twice")
        seen.add(pid)
        ts.expect_punct("=")
        tmpl = ts.expect_string()
        unit = None
        nxt = ts.peek(skip_nl=False)
        if nxt.kind == "ident" and nxt.text == "unit":
            ts.next(skip_nl=False)
            sym = ts.next(skip_nl=False)
            if sym.kind not in ("ident", "str"):
                raise ParseError("unit expects a symbol", sym.line, sym.col)
            if not reg.knows(sym.text):
                raise ParseError(f"unknown unit {sym.text!r}", sym.line, sym.col)
            unit = reg.canonical(sym.text)
        rules.append(PropertyRule(pid, tmpl.text, unit))
    return PropertyRules(tuple(rules))


def gather_constraints(
    module: TableModule, subject: CellPath, registry: UnitRegistry | None = None
) -> ConstraintSet:
    """Read constraint values from source-role cells of the subject's record.

    Missing kinds are looked up in the nearest preceding group-header record, which
    stands in for the enclosing section.
    """
    reg = registry or DEFAULT_REGISTRY
    temperature = pressure = None
    dn = None

    def scan(record_index: int):
        nonlocal temperature, pressure, dn
        record = module.records[record_index]
        for node, steps, value in iter_record_cells(module.template, record):
            if node.constraint_role != "source" or value.numeric is None:
                continue
            unit = value.unit or node.unit
            if unit is None or not reg.knows(unit):
                continue
            dim = reg.dimension(unit)
            if dim == TEMPERATURE and temperature is None:
                temperature = (value.numeric, reg.canonical(unit))
            elif dim == PRESSURE and pressure is None:
                pressure = (value.numeric, reg.canonical(unit))
            elif dim == LENGTH and dn is None:
                dn = int(round(reg.convert(value.numeric, unit, "мм")))

    scan(subject.record_index)
    if temperature is None or pressure is None or dn is None:
        for i in range(subject.record_index - 1, 0, -1):
            if module.records[i].group_header:
                scan(i)
                break
    return ConstraintSet(temperature=temperature, pressure=pressure, dn=dn)


def item_matches(item: CatalogItem, constraints: ConstraintSet, registry: UnitRegistry | None = None) -> bool:
    """Inclusive range check of one item against the constraints."""
    reg = registry or DEFAULT_REGISTRY
    app = item.applicability
    if constraints.temperature is not None:
        t = reg.convert(constraints.temperature[0], constraints.temperature[1], RANGE_TEMPERATURE_UNIT)
        if app.t_min is not None and t < app.t_min:
            return False
        if app.t_max is not None and t > app.t_max:
            return False
    if constraints.pressure is not None:
        p = reg.convert(constraints.pressure[0], constraints.pressure[1], RANGE_PRESSURE_UNIT)
        if app.p_min is not None and p < app.p_min:
            return False
        if app.p_max is not None and p > app.p_max:
            return False
    if constraints.dn is not None and app.dn is not None:
        if constraints.dn not in app.dn:
            return False
    return True


def query(
    catalogs: list[Catalog],
    object_class: str,
    constraints: ConstraintSet,
    registry: UnitRegistry | None = None,
) -> list[tuple[Catalog, CatalogItem]]:
    """Items of the class whose applicability accepts every present constraint."""
    matching = [c for c in catalogs if c.object_class == object_class]
    if not matching:
        raise UnknownObjectClassError(f"no catalog for object class {object_class!r}")
    out: list[tuple[Catalog, CatalogItem]] = []
    for cat in matching:
        for item in cat.items:
            if item_matches(item, constraints, registry):
                out.append((cat, item))
    return out


def apply_rules(
    rules: PropertyRules, catalog: Catalog, item: CatalogItem
) -> PropertySet:
    """Specifying properties for one picked item: rules first, then direct fields."""
    values_by_name = {f.name: v for f, v in zip(catalog.fields, item.values)}
    out: PropertySet = {}
    for rule in rules.rules:
        text = ""
        rest = rule.template
        while True:
            i = rest.find("{")
            if i < 0:
                text += rest
                break
            j = rest.find("}", i)
            if j < 0:
                text += rest
                break
            text += rest[:i]
            field_name = rest[i + 1 : j]
            if field_name not in values_by_name:
                raise UnresolvedPlaceholderError(
                    f"rule for property {rule.property_id} references unknown field {{{field_name}}}"
                )
            text += values_by_name[field_name].text
            rest = rest[j + 1 :]
        numeric = None
        if rule.unit is not None:
            try:
                numeric = float(text)
            except ValueError:
                numeric = None
        if numeric is not None:
            out[rule.property_id] = CellValue.of_number(numeric, rule.unit)
        else:
            out[rule.property_id] = CellValue.of_text(text)
    for f, v in zip(catalog.fields, item.values):
        if f.property_id is None or f.property_id in out:
            continue
        if v.numeric is not None:
            out[f.property_id] = CellValue.of_number(v.numeric, f.unit)
        else:
            out[f.property_id] = CellValue(text=v.text, numeric=None, unit=None)
    return out


def fill_cells(
    module: TableModule,
    record_index: int,
    properties: PropertySet,
    registry: UnitRegistry | None = None,
) -> tuple[TableModule, list[int]]:
    """Write properties into the record's graphs by property id.

    Values are converted to the leaf's declared unit; properties without a matching
    graph are left out and reported back as the second element.
    """
    reg = registry or DEFAULT_REGISTRY
    template = module.template
    record = module.records[record_index]
    targets: dict[int, tuple[tuple[int, ...], str | None]] = {}
    for node, steps, _ in iter_record_cells(template, record):
        if node.property_id is not None and node.property_id not in targets:
            targets[node.property_id] = (steps, node.unit)
    ignored: list[int] = []
    for pid in sorted(properties):
        value = properties[pid]
        slot = targets.get(pid)
        if slot is None:
            ignored.append(pid)
            continue
        steps, leaf_unit = slot
        if value.numeric is not None and value.unit is not None and leaf_unit is not None:
            if not reg.same_dimension(value.unit, leaf_unit):
                raise UnitDimensionError(
                    f"property {pid}: cannot place {value.unit!r} value into a {leaf_unit!r} graph"
                )
            converted = reg.convert(value.numeric, value.unit, leaf_unit)
            value = CellValue.of_number(converted, leaf_unit)
        module = set_cell(module, CellPath(record_index, steps), value, registry=reg)
    return module, ignored


def subject_class(module: TableModule, path: CellPath) -> str | None:
    """Object class bound to the leaf at `path`, if any."""
    node = module.template.root
    for s in path.steps:
        node = template_child(node, s)
    return node.object_class if node.is_leaf else None
