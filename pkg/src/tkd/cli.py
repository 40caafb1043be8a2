"""Batch command line: validate/new/render/paginate, spec generation, catalog queries,
buffer transfer and the HTTP service. Exit codes: 0 success, 1 domain error, 2 usage."""

from __future__ import annotations

import argparse
import os
import re
import sys
from pathlib import Path

from .buffer import copy_to_buffer, load_buffer, paste_from_buffer, save_buffer
from .catalog import ConstraintSet, load_catalog, load_rules, query
from .errors import TkdError
from .layout import paginate
from .model import new_table, validate_template
from .pipeline import ELEMENT_TYPES, CollectionScope, autofill, collect
from .render import render_svg, render_svg_segments, render_text, render_text_segments
from .structure import load_module, parse_structure, save_module
from .units import DEFAULT_REGISTRY


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _load_any_module(path: str):
    text = _read(path)
    if path.endswith(".tks"):
        return new_table(parse_structure(text))
    return load_module(text)


_QUANTITY_RE = re.compile(r"^(-?\d+(?:\.\d+)?)\s*(.*)$")


def parse_quantity(literal: str, default_unit: str) -> tuple[float, str]:
    """Split literals like `1.6МПа`, `80C` or `16 кгс/см²` into value and unit."""
    m = _QUANTITY_RE.match(literal.strip())
    if not m:
        raise TkdError(f"cannot parse quantity {literal!r}")
    value = float(m.group(1))
    unit = m.group(2).strip() or default_unit
    return value, DEFAULT_REGISTRY.canonical(unit)


def cmd_validate(args) -> int:
    template = parse_structure(_read(args.source))
    diags = validate_template(template)
    for d in diags:
        print(f"{d.severity}: {d.path}: {d.message}")
    if any(d.severity == "error" for d in diags):
        return 1
    print(f"ok: {template.name}")
    return 0


def cmd_new(args) -> int:
    module = new_table(parse_structure(_read(args.source)))
    _write(args.output, save_module(module))
    return 0


def cmd_render(args) -> int:
    module = _load_any_module(args.module)
    if args.fmt == "text":
        _write(args.output, render_text(module))
    else:
        _write(args.output, render_svg(module))
    return 0


def cmd_paginate(args) -> int:
    module = _load_any_module(args.module)
    segs = paginate(
        module,
        args.height,
        direction=args.direction,
        repeat_header=args.repeat_header,
        number_row=args.numbers is not None,
        first_number=args.numbers if args.numbers is not None else 1,
    )
    if args.fmt == "text":
        _write(args.output, render_text_segments(module, segs))
    else:
        _write(args.output, render_svg_segments(module, segs))
    return 0


def cmd_spec_gen(args) -> int:
    scope = CollectionScope(
        files=tuple(args.scope.split(",")),
        element_types=frozenset(args.types.split(",")) if args.types else ELEMENT_TYPES,
    )
    unknown = scope.element_types - ELEMENT_TYPES
    if unknown:
        raise TkdError(f"unknown element types: {', '.join(sorted(unknown))}")
    entries = collect(scope, base_dir=args.data_dir)
    module = new_table(parse_structure(_read(args.template)))
    module, report = autofill(module, entries)
    for record_index, dropped in report.ignored:
        print(f"record {record_index}: dropped properties {', '.join(map(str, dropped))}", file=sys.stderr)
    _write(args.output, save_module(module))
    return 0


def cmd_catalog_query(args) -> int:
    catalogs = []
    for path in args.catalogs.split(","):
        catalogs.append(load_catalog(_read(path)))
    constraints = ConstraintSet(
        pressure=parse_quantity(args.p, "МПа") if args.p else None,
        temperature=parse_quantity(args.t, "°C") if args.t else None,
        dn=args.dn,
    )
    matches = query(catalogs, args.object_class, constraints)
    for cat, item in matches:
        cells = " | ".join(v.text for v in item.values)
        print(f"{cat.object_class}: {cells}")
    print(f"{len(matches)} item(s)")
    return 0


def cmd_buffer_copy(args) -> int:
    module = _load_any_module(args.module)
    buf = copy_to_buffer(module, args.start, args.stop if args.stop is not None else len(module.records))
    _write(args.output, save_buffer(buf))
    return 0


def cmd_buffer_paste(args) -> int:
    module = _load_any_module(args.module)
    buf = load_buffer(_read(args.buffer))
    module, report = paste_from_buffer(buf, module, args.at)
    if report.dropped_properties:
        dropped = ", ".join(map(str, report.dropped_properties))
        print(f"dropped properties without a target graph: {dropped}", file=sys.stderr)
    _write(args.output, save_module(module))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import Workspace, create_app

    data_dir = args.data_dir or os.environ.get("TKD_DATA_DIR")
    app = create_app(Workspace.open(data_dir))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tkd", description="Tabular design document engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a .tks structure file")
    p.add_argument("source")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("new", help="create a module from a structure file")
    p.add_argument("source")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_new)

    p = sub.add_parser("render", help="render a module (or bare structure)")
    p.add_argument("module")
    p.add_argument("--fmt", choices=("text", "svg"), default="text")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("paginate", help="split a module into fixed-height chunks")
    p.add_argument("module")
    p.add_argument("--height", type=float, required=True)
    p.add_argument("--repeat-header", action="store_true")
    p.add_argument("--numbers", type=int, default=None, metavar="FIRST", help="add a graph-number row starting at FIRST")
    p.add_argument("--direction", choices=("right", "left"), default="right")
    p.add_argument("--fmt", choices=("text", "svg"), default="text")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_paginate)

    p = sub.add_parser("spec-gen", help="collect drawing properties and fill a table")
    p.add_argument("--scope", required=True, help="comma-separated .dwgp file names")
    p.add_argument("--types", default=None, help="comma-separated element types")
    p.add_argument("--template", required=True)
    p.add_argument("--data-dir", default=".")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_spec_gen)

    p = sub.add_parser("catalog", help="catalog operations")
    csub = p.add_subparsers(dest="catalog_command", required=True)
    q = csub.add_parser("query", help="constraint-filtered item search")
    q.add_argument("--catalogs", required=True, help="comma-separated .cat files")
    q.add_argument("--class", dest="object_class", required=True)
    q.add_argument("--p", default=None, help="pressure, e.g. 1.6МПа or 16кгс/см²")
    q.add_argument("--t", default=None, help="temperature, e.g. 80C")
    q.add_argument("--dn", type=int, default=None)
    q.set_defaults(func=cmd_catalog_query)

    p = sub.add_parser("buffer", help="item buffer transfer")
    bsub = p.add_subparsers(dest="buffer_command", required=True)
    b = bsub.add_parser("copy", help="copy a record range into a .tkb file")
    b.add_argument("module")
    b.add_argument("--start", type=int, default=1)
    b.add_argument("--stop", type=int, default=None)
    b.add_argument("-o", "--output", default=None)
    b.set_defaults(func=cmd_buffer_copy)
    b = bsub.add_parser("paste", help="paste a .tkb file into a module")
    b.add_argument("module")
    b.add_argument("--buffer", required=True)
    b.add_argument("--at", type=int, default=0, help="insert after this record index")
    b.add_argument("-o", "--output", default=None)
    b.set_defaults(func=cmd_buffer_paste)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--port", type=int, default=8123)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--data-dir", default=None, help="catalogs/rules directory (or TKD_DATA_DIR)")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TkdError as err:
        print(f"error [{err.code}]: {err}", file=sys.stderr)
        return 1
    except FileNotFoundError as err:
        print(f"error [file-not-found]: {err}", file=sys.stderr)
        return 1
    except UnicodeDecodeError as err:
        print(f"error [encoding]: input is not valid UTF-8: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
