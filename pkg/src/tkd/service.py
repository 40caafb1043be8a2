"""HTTP/JSON facade over the document operations, for the companion editor UI.

Every mutation requires the client's last revision and answers with the new revision
plus fresh layout geometry, so clients never compute layout themselves. Optimistic
concurrency: stale revisions are rejected with 409. Error mapping: 400 malformed
request, 404 unknown document, 409 stale revision, 422 domain error (body carries the
module error code).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse, Response

from .buffer import ItemBuffer, copy_to_buffer, load_buffer, paste_from_buffer, save_buffer
from .catalog import (
    Catalog,
    ConstraintSet,
    PropertyRules,
    apply_rules,
    fill_cells,
    gather_constraints,
    load_catalog,
    load_rules,
    query,
    subject_class,
)
from .errors import (
    StaleRevisionError,
    TkdError,
    UnknownDocumentError,
)
from .layout import LayoutTree, flat_region, insert_at_point, layout, paginate
from .model import (
    BlockNode,
    CellPath,
    CellValue,
    InstanceNode,
    TableModule,
    clear_records,
    copy_records,
    delete_records,
    enumerate_graphs,
    insert_record,
    move_records,
    new_table,
    set_cell,
)
from .pipeline import extract_common_names, merge_identical, pack_rows, sort_records
from .render import render_svg, render_text
from .structure import load_module, parse_structure, save_module

MAX_SNAPSHOTS = 100


@dataclass
class Document:
    module: TableModule
    revision: int = 0
    snapshots: list[TableModule] = field(default_factory=list)


@dataclass
class Workspace:
    """Open documents, the loaded catalog store and the shared item buffer."""

    data_dir: Path | None = None
    documents: dict[int, Document] = field(default_factory=dict)
    catalogs: list[Catalog] = field(default_factory=list)
    rules: PropertyRules = PropertyRules(())
    buffer: ItemBuffer = ItemBuffer(())
    next_id: int = 1

    @staticmethod
    def open(data_dir: str | Path | None = None) -> Workspace:
        ws = Workspace(data_dir=Path(data_dir) if data_dir else None)
        if ws.data_dir and ws.data_dir.is_dir():
            for path in sorted(ws.data_dir.glob("*.cat")):
                ws.catalogs.append(load_catalog(path.read_text(encoding="utf-8")))
            rule_files = sorted(ws.data_dir.glob("*.rules"))
            if rule_files:
                merged = []
                for path in rule_files:
                    merged.extend(load_rules(path.read_text(encoding="utf-8")).rules)
                ws.rules = PropertyRules(tuple(merged))
        return ws

    def add(self, module: TableModule) -> tuple[int, Document]:
        doc_id = self.next_id
        self.next_id += 1
        doc = Document(module=module)
        self.documents[doc_id] = doc
        return doc_id, doc

    def get(self, doc_id: int) -> Document:
        doc = self.documents.get(doc_id)
        if doc is None:
            raise UnknownDocumentError(f"no open document {doc_id}")
        return doc

    def commit(self, doc: Document, module: TableModule) -> None:
        doc.snapshots.append(doc.module)
        del doc.snapshots[:-MAX_SNAPSHOTS]
        doc.module = module
        doc.revision += 1


def style_to_json(style) -> dict:
    return {
        "left": style.left,
        "top": style.top,
        "right": style.right,
        "bottom": style.bottom,
        "font_tag": style.font_tag,
        "text_height_mm": style.text_height_mm,
    }


def node_to_json(node: BlockNode) -> dict:
    if node.is_leaf:
        return {
            "kind": "leaf",
            "graph_id": node.graph_id,
            "header_text": node.header_text,
            "width_mm": node.width_mm,
            "property_id": node.property_id,
            "object_class": node.object_class,
            "unit": node.unit,
            "constraint_role": node.constraint_role,
            "style": style_to_json(node.style),
        }
    return {
        "kind": "split",
        "axis": node.axis,
        "arbitrary": node.arbitrary,
        "visible_in_header": node.visible_in_header,
        "visible_in_data": node.visible_in_data,
        "insert_unit": node.insert_unit,
        "insert_group": node.insert_group,
        "children": [node_to_json(c) for c in node.children],
    }


def value_to_json(value: CellValue) -> dict:
    return {
        "text": value.text,
        "numeric": value.numeric,
        "unit": value.unit,
        "wrapped_lines": list(value.wrapped_lines),
    }


def instance_to_json(inst: InstanceNode) -> dict:
    if inst.is_leaf:
        return {"value": value_to_json(inst.value or CellValue.blank())}
    return {"children": [instance_to_json(c) for c in inst.children or ()], "group_header": inst.group_header}


def module_to_json(module: TableModule) -> dict:
    c = module.continuation
    return {
        "template": {
            "name": module.template.name,
            "units_note": module.template.units_note,
            "style_defaults": style_to_json(module.template.style_defaults),
            "root": node_to_json(module.template.root),
        },
        "records": [instance_to_json(r) for r in module.records],
        "continuation": {
            "chunk_height_mm": c.chunk_height_mm,
            "direction": c.direction,
            "repeat_header": c.repeat_header,
            "number_row": c.number_row,
            "first_graph_number": c.first_graph_number,
        },
        "graphs": [
            {
                "graph_id": g.graph_id,
                "header_text": g.header_text,
                "width_mm": g.width_mm,
                "property_id": g.property_id,
                "unit": g.unit,
                "object_class": g.object_class,
                "constraint_role": g.constraint_role,
                "x_mm": g.x_mm,
            }
            for g in enumerate_graphs(module.template)
        ],
    }


def layout_to_json(tree: LayoutTree) -> dict:
    template = tree.module.template
    cells = []
    for box in tree.leaf_boxes():
        cells.append(
            {
                "record": box.path.record_index,
                "steps": list(box.path.steps),
                "x": box.rect.x,
                "y": box.rect.y,
                "w": box.rect.w,
                "h": box.rect.h,
                "graph_id": box.template.graph_id,
                "object_class": box.template.object_class,
                "text": box.value.text,
            }
        )
    return {
        "width_mm": tree.width_mm,
        "height_mm": tree.height_mm,
        "row_height_mm": tree.row_height_mm,
        "records": [{"index": r.index, "y": r.rect.y, "h": r.rect.h} for r in tree.records],
        "cells": cells,
        "lines": [{"x1": s.x1, "y1": s.y1, "x2": s.x2, "y2": s.y2, "kind": s.kind} for s in tree.lines],
        "template_name": template.name,
    }


def value_from_json(body: dict) -> CellValue:
    text = body.get("text", "")
    numeric = body.get("numeric")
    unit = body.get("unit")
    if numeric is not None:
        return CellValue.of_number(float(numeric), unit)
    return CellValue.of_text(str(text))


def _doc_response(doc_id: int, doc: Document, extra: dict | None = None) -> dict:
    out = {
        "id": doc_id,
        "revision": doc.revision,
        "layout": layout_to_json(layout(doc.module)),
        "module": module_to_json(doc.module),
    }
    if extra:
        out.update(extra)
    return out


class _BadRequest(Exception):
    def __init__(self, message: str):
        self.message = message


def _require(body: dict, *keys: str) -> list:
    out = []
    for key in keys:
        if key not in body:
            raise _BadRequest(f"missing field {key!r}")
        out.append(body[key])
    return out


def create_app(workspace: Workspace | None = None) -> FastAPI:
    ws = workspace or Workspace.open()
    app = FastAPI(title="tkd", docs_url=None, redoc_url=None)
    app.state.workspace = ws

    @app.exception_handler(TkdError)
    async def domain_error(_req: Request, err: TkdError):
        if isinstance(err, UnknownDocumentError):
            status = 404
        elif isinstance(err, StaleRevisionError):
            status = 409
        else:
            status = 422
        body = {"error": err.code, "message": str(err)}
        if isinstance(err, StaleRevisionError) and "revision" in err.context:
            body["revision"] = err.context["revision"]
        return JSONResponse(status_code=status, content=body)

    @app.exception_handler(_BadRequest)
    async def bad_request(_req: Request, err: _BadRequest):
        return JSONResponse(status_code=400, content={"error": "bad-request", "message": err.message})

    @app.exception_handler(RequestValidationError)
    async def invalid_request(_req: Request, err: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": "bad-request", "message": str(err)})

    def check_revision(doc: Document, body: dict) -> None:
        (revision,) = _require(body, "revision")
        if revision != doc.revision:
            raise StaleRevisionError(
                f"revision {revision} is stale (current {doc.revision})", revision=doc.revision
            )

    @app.post("/doc")
    async def open_doc(body: dict):
        (kind, text) = _require(body, "kind", "text")
        if kind == "tks":
            module = new_table(parse_structure(text))
        elif kind == "tkm":
            module = load_module(text)
        else:
            raise _BadRequest(f"kind must be tks or tkm, got {kind!r}")
        doc_id, doc = ws.add(module)
        return _doc_response(doc_id, doc)

    @app.get("/doc/{doc_id}")
    async def get_doc(doc_id: int):
        return _doc_response(doc_id, ws.get(doc_id))

    @app.get("/doc/{doc_id}/tkm", response_class=PlainTextResponse)
    async def get_tkm(doc_id: int):
        return save_module(ws.get(doc_id).module)

    @app.get("/doc/{doc_id}/render")
    async def render_doc(doc_id: int, fmt: str = "svg"):
        doc = ws.get(doc_id)
        if fmt == "svg":
            return Response(content=render_svg(doc.module), media_type="image/svg+xml")
        if fmt == "text":
            return PlainTextResponse(render_text(doc.module))
        raise _BadRequest(f"fmt must be svg or text, got {fmt!r}")

    @app.post("/doc/{doc_id}/cell")
    async def post_cell(doc_id: int, body: dict):
        doc = ws.get(doc_id)
        check_revision(doc, body)
        (record, steps, value) = _require(body, "record", "steps", "value")
        path = CellPath(int(record), tuple(int(s) for s in steps))
        updated = set_cell(doc.module, path, value_from_json(value))
        ws.commit(doc, updated)
        return _doc_response(doc_id, doc)

    @app.post("/doc/{doc_id}/insert-at-point")
    async def post_insert(doc_id: int, body: dict):
        doc = ws.get(doc_id)
        check_revision(doc, body)
        (x, y) = _require(body, "x", "y")
        updated, created = insert_at_point(doc.module, float(x), float(y))
        ws.commit(doc, updated)
        return _doc_response(
            doc_id, doc, {"created": [{"record": p.record_index, "steps": list(p.steps)} for p in created]}
        )

    @app.post("/doc/{doc_id}/op")
    async def post_op(doc_id: int, body: dict):
        doc = ws.get(doc_id)
        check_revision(doc, body)
        (op,) = _require(body, "op")
        module = doc.module
        extra: dict = {}
        if op == "merge":
            (start, stop) = _require(body, "start", "stop")
            module = merge_identical(module, int(start), int(stop))
        elif op == "sort":
            (graphs,) = _require(body, "graphs")
            module = sort_records(module, list(graphs))
        elif op == "extract":
            (start, stop, graph) = _require(body, "start", "stop", "graph")
            module = extract_common_names(module, int(start), int(stop), str(graph))
        elif op == "pack":
            (start, stop) = _require(body, "start", "stop")
            module = pack_rows(module, int(start), int(stop))
        elif op == "append_row":
            module = insert_record(module, len(module.records))
        elif op == "delete_rows":
            (start, stop) = _require(body, "start", "stop")
            module = delete_records(module, int(start), int(stop))
        elif op == "clear_rows":
            (start, stop) = _require(body, "start", "stop")
            module = clear_records(module, int(start), int(stop))
        elif op == "copy_rows":
            (start, stop, to) = _require(body, "start", "stop", "to")
            module = copy_records(module, int(start), int(stop), int(to))
        elif op == "move_rows":
            (start, stop, to) = _require(body, "start", "stop", "to")
            module = move_records(module, int(start), int(stop), int(to))
        else:
            raise _BadRequest(f"unknown op {op!r}")
        ws.commit(doc, module)
        return _doc_response(doc_id, doc, extra)

    @app.post("/doc/{doc_id}/undo")
    async def post_undo(doc_id: int, body: dict):
        doc = ws.get(doc_id)
        check_revision(doc, body)
        if not doc.snapshots:
            raise _BadRequest("nothing to undo")
        module = doc.snapshots.pop()
        doc.module = module
        doc.revision += 1
        return _doc_response(doc_id, doc)

    @app.get("/doc/{doc_id}/paginate")
    async def get_paginate(
        doc_id: int,
        height: float,
        repeat_header: bool = False,
        numbers: bool = False,
        first: int = 1,
        direction: str = "right",
    ):
        doc = ws.get(doc_id)
        segs = paginate(
            doc.module,
            height,
            direction=direction,
            repeat_header=repeat_header,
            number_row=numbers,
            first_number=first,
        )
        return {
            "segments": [
                {
                    "index": s.index,
                    "placement": s.placement,
                    "record_start": s.record_start,
                    "record_stop": s.record_stop,
                    "header_prefix": s.header_prefix,
                    "number_row": s.number_row,
                    "height_mm": s.height_mm,
                }
                for s in segs
            ]
        }

    @app.get("/doc/{doc_id}/flat-region")
    async def get_flat_region(doc_id: int, record: int, steps: str = ""):
        doc = ws.get(doc_id)
        seed = CellPath(record, tuple(int(s) for s in steps.split("/") if s != ""))
        region = flat_region(doc.module, seed)
        return {
            "graph_start": region.graph_start,
            "graph_stop": region.graph_stop,
            "record_start": region.record_start,
            "record_stop": region.record_stop,
            "grid": [
                [{"record": p.record_index, "steps": list(p.steps)} for p in row]
                for row in region.grid
            ],
        }

    @app.get("/doc/{doc_id}/constraints")
    async def get_constraints(doc_id: int, record: int, steps: str = ""):
        doc = ws.get(doc_id)
        path = CellPath(record, tuple(int(s) for s in steps.split("/") if s != ""))
        cs = gather_constraints(doc.module, path)
        return {
            "object_class": subject_class(doc.module, path),
            "temperature": {"value": cs.temperature[0], "unit": cs.temperature[1]} if cs.temperature else None,
            "pressure": {"value": cs.pressure[0], "unit": cs.pressure[1]} if cs.pressure else None,
            "dn": cs.dn,
        }

    @app.get("/catalogs/query")
    async def catalogs_query(
        object_class: str,
        p: float | None = None,
        p_unit: str = "МПа",
        t: float | None = None,
        t_unit: str = "°C",
        dn: int | None = None,
    ):
        cs = ConstraintSet(
            temperature=(t, t_unit) if t is not None else None,
            pressure=(p, p_unit) if p is not None else None,
            dn=dn,
        )
        matches = query(ws.catalogs, object_class, cs)
        out = []
        for cat, item in matches:
            out.append(
                {
                    "object_class": cat.object_class,
                    "item_index": cat.items.index(item),
                    "fields": {f.name: v.text for f, v in zip(cat.fields, item.values)},
                    "properties": {
                        str(pid): value_to_json(v) for pid, v in apply_rules(ws.rules, cat, item).items()
                    },
                }
            )
        return {"matches": out}

    @app.post("/doc/{doc_id}/pick-item")
    async def pick_item(doc_id: int, body: dict):
        doc = ws.get(doc_id)
        check_revision(doc, body)
        (object_class, item_index, record) = _require(body, "object_class", "item_index", "record")
        catalog = next((c for c in ws.catalogs if c.object_class == object_class), None)
        if catalog is None or not (0 <= int(item_index) < len(catalog.items)):
            raise _BadRequest(f"unknown catalog item {object_class!r}/{item_index}")
        properties = apply_rules(ws.rules, catalog, catalog.items[int(item_index)])
        updated, ignored = fill_cells(doc.module, int(record), properties)
        ws.commit(doc, updated)
        return _doc_response(doc_id, doc, {"ignored_properties": ignored})

    @app.post("/doc/{doc_id}/copy-to-buffer")
    async def copy_buffer(doc_id: int, body: dict):
        doc = ws.get(doc_id)
        (start, stop) = _require(body, "start", "stop")
        ws.buffer = copy_to_buffer(doc.module, int(start), int(stop))
        return {"rows": len(ws.buffer)}

    @app.post("/doc/{doc_id}/paste-buffer")
    async def paste_buffer(doc_id: int, body: dict):
        doc = ws.get(doc_id)
        check_revision(doc, body)
        (at_index,) = _require(body, "at_index")
        updated, report = paste_from_buffer(ws.buffer, doc.module, int(at_index))
        ws.commit(doc, updated)
        return _doc_response(
            doc_id,
            doc,
            {
                "inserted_records": list(report.inserted_records),
                "dropped_properties": list(report.dropped_properties),
            },
        )

    @app.get("/buffer", response_class=PlainTextResponse)
    async def get_buffer():
        return save_buffer(ws.buffer)

    @app.put("/buffer")
    async def put_buffer(body: dict):
        (text,) = _require(body, "text")
        ws.buffer = load_buffer(text)
        return {"rows": len(ws.buffer)}

    return app
