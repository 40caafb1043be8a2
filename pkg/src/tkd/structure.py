"""External file formats: `.tks` table structure and `.tkm` saved table module.

Grammar (EBNF, shared token set with the catalog formats):

    file   := "table" STRING attrs? node
    node   := split | leaf | "{" node "}"
    split  := ("cols" | "rows") ("fixed" INT | "arb")? attrs? "{" node+ "}"
    leaf   := "leaf" STRING attrs?
    attrs  := "[" pair ("," pair)* "]" | (KEY "="? value)*
    pair   := KEY "=" value

Keys: id, header, data, width, prop, object, unit, role, insert_unit, group, line,
font, h on nodes; note, line, font, h on the table line. Defaults: header=true,
data=true, insert_unit=1. Canonical form: two-space indentation, bracketed attrs in
the order above, defaults omitted, strings quoted, LF line endings.

A `.tkm` module is a versioned container: the line `tkd/1`, the structure text, a
`continuation [...]` line, then one `record` block per record with `cell <path> =
<value> [unit]` lines for every leaf cell (paths are child indices joined by `/`,
a lone `.` for a single-leaf root). Every arbitrary split additionally records its
part count as `parts <path> = <n>`, since empty parts carry no cells of their own.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import ParseError, VersionMismatchError
from .model import (
    BlockNode,
    CellValue,
    ContinuationSpec,
    InstanceNode,
    StyleSpec,
    TableModule,
    TableTemplate,
    DEFAULT_STYLE,
    fmt_number,
)
from .units import DEFAULT_REGISTRY

_PUNCT = set("{}[]=,/.|@")
_IDENT_STOP = set(' \t\r\n"#') | _PUNCT
_MAX_DEPTH = 64

NODE_KEYS = ("id", "header", "data", "width", "prop", "object", "unit", "role", "insert_unit", "group", "line", "font", "h")
TABLE_KEYS = ("note", "line", "font", "h")
_ALL_KEYS = set(NODE_KEYS) | set(TABLE_KEYS) | {"chunk", "direction", "repeat_header", "numbers", "first", "group_header"}


@dataclass(frozen=True)
class Token:
    kind: str  # str | num | ident | punct | nl | eof
    text: str
    value: object
    line: int
    col: int


def _is_digit(ch: str) -> bool:
    return "0" <= ch <= "9"


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            toks.append(Token("nl", "\n", None, line, col))
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
                col += 1
            continue
        start_line, start_col = line, col
        if ch == '"':
            i += 1
            col += 1
            out = []
            while True:
                if i >= n:
                    raise ParseError("unterminated string", start_line, start_col)
                c = text[i]
                if c == "\n":
                    raise ParseError("unterminated string", start_line, start_col)
                if c == "\\":
                    if i + 1 >= n:
                        raise ParseError("bad escape", line, col)
                    esc = text[i + 1]
                    out.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc))
                    if out[-1] is None:
                        raise ParseError(f"bad escape \\{esc}", line, col)
                    i += 2
                    col += 2
                    continue
                if c == '"':
                    i += 1
                    col += 1
                    break
                out.append(c)
                i += 1
                col += 1
            toks.append(Token("str", "".join(out), "".join(out), start_line, start_col))
            continue
        if _is_digit(ch) or (ch == "-" and i + 1 < n and _is_digit(text[i + 1])):
            j = i + 1
            while j < n and _is_digit(text[j]):
                j += 1
            if j < n and text[j] == "." and j + 1 < n and _is_digit(text[j + 1]):
                j += 1
                while j < n and _is_digit(text[j]):
                    j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and _is_digit(text[k]):
                    j = k
                    while j < n and _is_digit(text[j]):
                        j += 1
            raw = text[i:j]
            toks.append(Token("num", raw, float(raw), start_line, start_col))
            col += j - i
            i = j
            continue
        if ch in _PUNCT:
            toks.append(Token("punct", ch, ch, start_line, start_col))
            i += 1
            col += 1
            continue
        j = i
        while j < n and text[j] not in _IDENT_STOP:
            j += 1
        if j == i:
            raise ParseError(f"unexpected character {ch!r}", line, col)
        word = text[i:j]
        toks.append(Token("ident", word, word, start_line, start_col))
        col += j - i
        i = j
    toks.append(Token("eof", "", None, line, col))
    return toks


class TokenStream:
    def __init__(self, tokens: list[Token]):
        self._toks = tokens
        self._pos = 0

    def peek(self, skip_nl: bool = True) -> Token:
        pos = self._pos
        while skip_nl and self._toks[pos].kind == "nl":
            pos += 1
        return self._toks[pos]

    def next(self, skip_nl: bool = True) -> Token:
        while skip_nl and self._toks[self._pos].kind == "nl":
            self._pos += 1
        tok = self._toks[self._pos]
        if tok.kind != "eof":
            self._pos += 1
        return tok

    def expect_ident(self, word: str) -> Token:
        tok = self.next()
        if tok.kind != "ident" or tok.text != word:
            raise ParseError(f"expected {word!r}, got {tok.text!r}", tok.line, tok.col)
        return tok

    def expect_punct(self, ch: str, skip_nl: bool = True) -> Token:
        tok = self.next(skip_nl)
        if tok.kind != "punct" or tok.text != ch:
            raise ParseError(f"expected {ch!r}, got {tok.text or tok.kind!r}", tok.line, tok.col)
        return tok

    def expect_string(self) -> Token:
        tok = self.next()
        if tok.kind != "str":
            raise ParseError(f"expected a quoted string, got {tok.text or tok.kind!r}", tok.line, tok.col)
        return tok


def _parse_attrs(ts: TokenStream, allowed: tuple[str, ...]) -> dict[str, tuple[object, Token]]:
    """Bracketed `[k=v, ...]` or a run of bare `k v` pairs with keys from `allowed`."""
    attrs: dict[str, tuple[object, Token]] = {}

    def read_pair(require_eq: bool) -> None:
        key_tok = ts.next()
        if key_tok.kind != "ident":
            raise ParseError(f"expected attribute key, got {key_tok.text!r}", key_tok.line, key_tok.col)
        key = key_tok.text
        if key not in allowed:
            raise ParseError(f"unknown attribute {key!r}", key_tok.line, key_tok.col)
        if ts.peek().kind == "punct" and ts.peek().text == "=":
            ts.next()
        elif require_eq:
            tok = ts.peek()
            raise ParseError(f"expected '=' after {key!r}", tok.line, tok.col)
        val = ts.next()
        if val.kind not in ("str", "num", "ident"):
            raise ParseError(f"bad attribute value {val.text!r}", val.line, val.col)
        if key in attrs:
            raise ParseError(f"duplicate attribute {key!r}", key_tok.line, key_tok.col)
        attrs[key] = (val.value, val)

    if ts.peek().kind == "punct" and ts.peek().text == "[":
        ts.next()
        if not (ts.peek().kind == "punct" and ts.peek().text == "]"):
            read_pair(require_eq=True)
            while ts.peek().kind == "punct" and ts.peek().text == ",":
                ts.next()
                read_pair(require_eq=True)
        ts.expect_punct("]")
        return attrs

    while ts.peek().kind == "ident" and ts.peek().text in allowed:
        read_pair(require_eq=False)
    return attrs


def _as_bool(key: str, value: object, tok: Token) -> bool:
    if isinstance(value, str) and value in ("true", "false"):
        return value == "true"
    raise ParseError(f"{key} expects true/false, got {value!r}", tok.line, tok.col)


def _as_number(key: str, value: object, tok: Token) -> float:
    if isinstance(value, float):
        return value
    raise ParseError(f"{key} expects a number, got {value!r}", tok.line, tok.col)


def _as_text(value: object) -> str:
    return value if isinstance(value, str) else fmt_number(value)  # type: ignore[arg-type]


def _style_from_attrs(attrs: dict[str, tuple[object, Token]], base: StyleSpec) -> StyleSpec:
    style = base
    if "line" in attrs:
        raw, tok = attrs["line"]
        parts = _as_text(raw).split(":")
        if len(parts) == 1:
            parts = parts * 4
        if len(parts) != 4 or any(p not in ("thin", "thick", "none") for p in parts):
            raise ParseError(f"line expects thin|thick|none or l:t:r:b, got {raw!r}", tok.line, tok.col)
        style = replace(style, left=parts[0], top=parts[1], right=parts[2], bottom=parts[3])
    if "font" in attrs:
        style = replace(style, font_tag=_as_text(attrs["font"][0]))
    if "h" in attrs:
        raw, tok = attrs["h"]
        height = _as_number("h", raw, tok)
        if height <= 0:
            raise ParseError(f"h must be positive, got {height}", tok.line, tok.col)
        style = replace(style, text_height_mm=height)
    return style


def _parse_node(ts: TokenStream, defaults: StyleSpec, depth: int) -> BlockNode:
    if depth > _MAX_DEPTH:
        tok = ts.peek()
        raise ParseError("nesting too deep", tok.line, tok.col)
    tok = ts.peek()
    if tok.kind == "punct" and tok.text == "{":
        ts.next()
        node = _parse_node(ts, defaults, depth + 1)
        ts.expect_punct("}")
        return node
    if tok.kind != "ident":
        raise ParseError(f"expected cols, rows or leaf, got {tok.text or tok.kind!r}", tok.line, tok.col)
    if tok.text == "leaf":
        ts.next()
        name = ts.expect_string()
        attrs = _parse_attrs(ts, NODE_KEYS)
        width_attr = attrs.get("width")
        if width_attr is None:
            raise ParseError("leaf requires a width", name.line, name.col)
        width = _as_number("width", *width_attr)
        prop = None
        if "prop" in attrs:
            prop = int(_as_number("prop", *attrs["prop"]))
        unit = None
        if "unit" in attrs:
            raw, utok = attrs["unit"]
            sym = _as_text(raw)
            if not DEFAULT_REGISTRY.knows(sym):
                raise ParseError(f"unknown unit {sym!r}", utok.line, utok.col)
            unit = DEFAULT_REGISTRY.canonical(sym)
        role = None
        if "role" in attrs:
            raw, rtok = attrs["role"]
            if raw not in ("source", "subject"):
                raise ParseError(f"role expects source|subject, got {raw!r}", rtok.line, rtok.col)
            role = raw
        return BlockNode(
            kind="leaf",
            graph_id=_as_text(attrs["id"][0]) if "id" in attrs else name.text,
            header_text=name.text,
            width_mm=width,
            property_id=prop,
            object_class=_as_text(attrs["object"][0]) if "object" in attrs else None,
            unit=unit,
            constraint_role=role,
            style=_style_from_attrs(attrs, defaults),
        )
    if tok.text in ("cols", "rows"):
        ts.next()
        axis = tok.text
        arbitrary = False
        declared = None
        nxt = ts.peek()
        if nxt.kind == "ident" and nxt.text == "arb":
            ts.next()
            arbitrary = True
        elif nxt.kind == "ident" and nxt.text == "fixed":
            ts.next()
            count_tok = ts.next()
            if count_tok.kind != "num":
                raise ParseError("fixed expects a count", count_tok.line, count_tok.col)
            declared = int(count_tok.value)
        attrs = _parse_attrs(ts, NODE_KEYS)
        ts.expect_punct("{")
        children: list[BlockNode] = []
        while not (ts.peek().kind == "punct" and ts.peek().text == "}"):
            if ts.peek().kind == "eof":
                t = ts.peek()
                raise ParseError("unterminated block, expected '}'", t.line, t.col)
            children.append(_parse_node(ts, defaults, depth + 1))
        ts.expect_punct("}")
        if declared is not None and declared != len(children):
            raise ParseError(f"fixed {declared} does not match {len(children)} children", tok.line, tok.col)
        insert_unit = 1
        if "insert_unit" in attrs:
            insert_unit = int(_as_number("insert_unit", *attrs["insert_unit"]))
        return BlockNode(
            kind="split",
            axis=axis,  # type: ignore[arg-type]
            arbitrary=arbitrary,
            visible_in_header=_as_bool("header", *attrs["header"]) if "header" in attrs else True,
            visible_in_data=_as_bool("data", *attrs["data"]) if "data" in attrs else True,
            insert_unit=insert_unit,
            insert_group=_as_text(attrs["group"][0]) if "group" in attrs else None,
            children=tuple(children),
        )
    raise ParseError(f"expected cols, rows or leaf, got {tok.text!r}", tok.line, tok.col)


def _parse_table(ts: TokenStream) -> TableTemplate:
    ts.expect_ident("table")
    name = ts.expect_string()
    attrs = _parse_attrs(ts, TABLE_KEYS)
    defaults = _style_from_attrs(attrs, DEFAULT_STYLE)
    root = _parse_node(ts, defaults, 0)
    return TableTemplate(
        name=name.text,
        root=root,
        units_note=_as_text(attrs["note"][0]) if "note" in attrs else "",
        style_defaults=defaults,
    )


def parse_structure(text: str) -> TableTemplate:
    """Parse a `.tks` source into a template; structural checks live in validate_template."""
    ts = TokenStream(tokenize(text))
    template = _parse_table(ts)
    tail = ts.peek()
    if tail.kind != "eof":
        raise ParseError(f"unexpected trailing content {tail.text!r}", tail.line, tail.col)
    return template


def _quote(s: str) -> str:
    out = s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    return f'"{out}"'


def _is_plain_ident(s: str) -> bool:
    if not s or s[0].isdigit() or s[0] == "-":
        return False
    return all(c not in _IDENT_STOP for c in s)


def _attr_value(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return fmt_number(float(value))
    s = str(value)
    return s if _is_plain_ident(s) else _quote(s)


def _style_attrs(style: StyleSpec, base: StyleSpec) -> list[tuple[str, object]]:
    out: list[tuple[str, object]] = []
    if (style.left, style.top, style.right, style.bottom) != (base.left, base.top, base.right, base.bottom):
        uniform = style.uniform_line()
        out.append(("line", uniform if uniform else f"{style.left}:{style.top}:{style.right}:{style.bottom}"))
    if style.font_tag != base.font_tag:
        out.append(("font", style.font_tag))
    if style.text_height_mm != base.text_height_mm:
        out.append(("h", style.text_height_mm))
    return out


def _fmt_attrs(pairs: list[tuple[str, object]]) -> str:
    if not pairs:
        return ""
    body = ", ".join(f"{k}={_attr_value(v)}" for k, v in pairs)
    return f" [{body}]"


def _serialize_node(node: BlockNode, defaults: StyleSpec, indent: int, out: list[str]) -> None:
    pad = "  " * indent
    if node.is_leaf:
        pairs: list[tuple[str, object]] = []
        if node.graph_id != node.header_text:
            pairs.append(("id", node.graph_id))
        pairs.append(("width", node.width_mm))
        if node.property_id is not None:
            pairs.append(("prop", node.property_id))
        if node.object_class is not None:
            pairs.append(("object", node.object_class))
        if node.unit is not None:
            pairs.append(("unit", node.unit))
        if node.constraint_role is not None:
            pairs.append(("role", node.constraint_role))
        pairs.extend(_style_attrs(node.style, defaults))
        out.append(f"{pad}leaf {_quote(node.header_text)}{_fmt_attrs(pairs)}")
        return
    head = node.axis + (" arb" if node.arbitrary else "")
    pairs = []
    if not node.visible_in_header:
        pairs.append(("header", False))
    if not node.visible_in_data:
        pairs.append(("data", False))
    if node.insert_unit != 1:
        pairs.append(("insert_unit", node.insert_unit))
    if node.insert_group is not None:
        pairs.append(("group", node.insert_group))
    out.append(f"{pad}{head}{_fmt_attrs(pairs)} {{")
    for child in node.children:
        _serialize_node(child, defaults, indent + 1, out)
    out.append(f"{pad}}}")


def serialize_structure(template: TableTemplate) -> str:
    """Canonical `.tks` text; parse(serialize(t)) is structurally equal to t."""
    pairs: list[tuple[str, object]] = []
    if template.units_note:
        pairs.append(("note", template.units_note))
    pairs.extend(_style_attrs(template.style_defaults, DEFAULT_STYLE))
    out = [f"table {_quote(template.name)}{_fmt_attrs(pairs)}"]
    _serialize_node(template.root, template.style_defaults, 1, out)
    return "\n".join(out) + "\n"


def _fmt_steps(steps: tuple[int, ...]) -> str:
    return "/".join(str(s) for s in steps) if steps else "."


def _cell_lines(node: BlockNode, inst: InstanceNode, steps: tuple[int, ...], out: list[str]) -> None:
    if inst.is_leaf:
        v = inst.value or CellValue.blank()
        if v.numeric is not None:
            text = fmt_number(v.numeric)
            if v.unit is not None:
                usym = v.unit if _is_plain_ident(v.unit) else _quote(v.unit)
                out.append(f"  cell {_fmt_steps(steps)} = {text} {usym}")
            else:
                out.append(f"  cell {_fmt_steps(steps)} = {text}")
        else:
            out.append(f"  cell {_fmt_steps(steps)} = {_quote(v.text)}")
        return
    if node.arbitrary:
        out.append(f"  parts {_fmt_steps(steps)} = {len(inst.children or ())}")
    for i, child in enumerate(inst.children or ()):
        _cell_lines(node.children[0] if node.arbitrary else node.children[i], child, steps + (i,), out)


def save_module(module: TableModule) -> str:
    """Canonical `.tkm` text: version, structure, continuation, record cell triples."""
    out = ["tkd/1"]
    out.append(serialize_structure(module.template).rstrip("\n"))
    c = module.continuation
    pairs: list[tuple[str, object]] = []
    if c.chunk_height_mm is not None:
        pairs.append(("chunk", c.chunk_height_mm))
    pairs.append(("direction", c.direction))
    pairs.append(("repeat_header", c.repeat_header))
    pairs.append(("numbers", c.number_row))
    pairs.append(("first", c.first_graph_number))
    out.append(f"continuation{_fmt_attrs(pairs)}")
    for record in module.records:
        flags = " [group_header=true]" if record.group_header else ""
        out.append(f"record{flags}")
        _cell_lines(module.template.root, record, (), out)
    return "\n".join(out) + "\n"


def _parse_steps(ts: TokenStream) -> tuple[int, ...]:
    tok = ts.next()
    if tok.kind == "punct" and tok.text == ".":
        return ()
    if tok.kind != "num" or tok.value != int(tok.value):  # type: ignore[arg-type]
        raise ParseError(f"expected a cell path, got {tok.text!r}", tok.line, tok.col)
    steps = [int(tok.value)]  # type: ignore[arg-type]
    while ts.peek(skip_nl=False).kind == "punct" and ts.peek(skip_nl=False).text == "/":
        ts.next(skip_nl=False)
        nxt = ts.next(skip_nl=False)
        if nxt.kind != "num":
            raise ParseError(f"expected a path index, got {nxt.text!r}", nxt.line, nxt.col)
        steps.append(int(nxt.value))  # type: ignore[arg-type]
    return tuple(steps)


def _parse_cell_value(ts: TokenStream) -> CellValue:
    tok = ts.next()
    if tok.kind == "str":
        return CellValue.of_text(tok.text)
    if tok.kind == "num":
        unit = None
        nxt = ts.peek(skip_nl=False)
        if nxt.kind in ("ident", "str"):
            ts.next(skip_nl=False)
            sym = nxt.text
            if not DEFAULT_REGISTRY.knows(sym):
                raise ParseError(f"unknown unit {sym!r}", nxt.line, nxt.col)
            unit = DEFAULT_REGISTRY.canonical(sym)
        return CellValue.of_number(tok.value, unit)  # type: ignore[arg-type]
    raise ParseError(f"expected a cell value, got {tok.text or tok.kind!r}", tok.line, tok.col)


class _CellTree(dict):
    """Nested child-index map; leaf values and forced part counts ride alongside."""

    __slots__ = ("value", "has_value", "forced_count")

    def __init__(self):
        super().__init__()
        self.value = None
        self.has_value = False
        self.forced_count = None


def _build_instance(node: BlockNode, tree: _CellTree | None) -> InstanceNode:
    if node.is_leaf:
        if tree is not None and tree.has_value:
            return InstanceNode(value=tree.value)
        return InstanceNode(value=CellValue.blank())
    if node.arbitrary:
        if tree is not None and tree.forced_count is not None:
            count = tree.forced_count
        else:
            count = (max(tree.keys()) + 1) if tree else 0
        return InstanceNode(
            children=tuple(_build_instance(node.children[0], tree.get(i) if tree else None) for i in range(count))
        )
    return InstanceNode(
        children=tuple(_build_instance(c, tree.get(i) if tree else None) for i, c in enumerate(node.children))
    )


def load_module(text: str) -> TableModule:
    """Parse a `.tkm` container back into a module."""
    ts = TokenStream(tokenize(text))
    head = ts.next()
    if head.kind != "ident" or head.text != "tkd":
        raise VersionMismatchError(f"not a tkd module (starts with {head.text!r})")
    ts.expect_punct("/")
    ver = ts.next(skip_nl=False)
    if ver.kind != "num" or int(ver.value) != 1:  # type: ignore[arg-type]
        raise VersionMismatchError(f"unsupported tkd version {ver.text!r}")
    template = _parse_table(ts)

    continuation = ContinuationSpec()
    tok = ts.peek()
    if tok.kind == "ident" and tok.text == "continuation":
        ts.next()
        attrs = _parse_attrs(ts, ("chunk", "direction", "repeat_header", "numbers", "first"))
        chunk = None
        if "chunk" in attrs:
            chunk = _as_number("chunk", *attrs["chunk"])
        direction = "right"
        if "direction" in attrs:
            raw, dtok = attrs["direction"]
            if raw not in ("right", "left"):
                raise ParseError(f"direction expects right|left, got {raw!r}", dtok.line, dtok.col)
            direction = raw
        continuation = ContinuationSpec(
            chunk_height_mm=chunk,
            direction=direction,  # type: ignore[arg-type]
            repeat_header=_as_bool("repeat_header", *attrs["repeat_header"]) if "repeat_header" in attrs else False,
            number_row=_as_bool("numbers", *attrs["numbers"]) if "numbers" in attrs else False,
            first_graph_number=int(_as_number("first", *attrs["first"])) if "first" in attrs else 1,
        )

    records: list[InstanceNode] = []
    while True:
        tok = ts.peek()
        if tok.kind == "eof":
            break
        if tok.kind != "ident" or tok.text != "record":
            raise ParseError(f"expected 'record', got {tok.text!r}", tok.line, tok.col)
        ts.next()
        attrs = _parse_attrs(ts, ("group_header",))
        group_header = _as_bool("group_header", *attrs["group_header"]) if "group_header" in attrs else False
        root = _CellTree()
        while True:
            nxt = ts.peek()
            if nxt.kind == "ident" and nxt.text == "cell":
                ts.next()
                steps = _parse_steps(ts)
                ts.expect_punct("=", skip_nl=False)
                value = _parse_cell_value(ts)
                tree = root
                for s in steps:
                    tree = tree.setdefault(s, _CellTree())
                tree.value = value
                tree.has_value = True
                continue
            if nxt.kind == "ident" and nxt.text == "parts":
                ts.next()
                steps = _parse_steps(ts)
                ts.expect_punct("=", skip_nl=False)
                count_tok = ts.next(skip_nl=False)
                if count_tok.kind != "num" or count_tok.value < 0:  # type: ignore[operator]
                    raise ParseError("parts expects a non-negative count", count_tok.line, count_tok.col)
                tree = root
                for s in steps:
                    tree = tree.setdefault(s, _CellTree())
                tree.forced_count = int(count_tok.value)  # type: ignore[arg-type]
                continue
            break
        record = _build_instance(template.root, root)
        records.append(replace(record, group_header=group_header))

    if not records:
        raise ParseError("module has no records", 1, 1)
    tail = ts.peek()
    if tail.kind != "eof":
        raise ParseError(f"unexpected trailing content {tail.text!r}", tail.line, tail.col)
    return TableModule(template=template, records=tuple(records), continuation=continuation)
