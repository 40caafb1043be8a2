"""Tabular design documents: recursive block tables, electronic catalogs and
specification generation, with layout, rendering, pagination and a row buffer."""

from .errors import TkdError
from .model import (
    BlockNode,
    CellPath,
    CellValue,
    ContinuationSpec,
    Diagnostic,
    GraphDescriptor,
    InstanceNode,
    StyleSpec,
    TableModule,
    TableTemplate,
    append_record,
    delete_part,
    enumerate_graphs,
    insert_part,
    leaf,
    new_table,
    resolve_cell,
    set_cell,
    split,
    validate_template,
)
from .structure import load_module, parse_structure, save_module, serialize_structure
from .layout import FlatRegion, LayoutTree, PageSegment, flat_region, hit_test, insert_at_point, layout, paginate
from .render import render_svg, render_svg_segments, render_text, render_text_segments
from .units import DEFAULT_REGISTRY, UnitRegistry, convert
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
)
from .pipeline import (
    CollectionScope,
    DrawingFile,
    autofill,
    collect,
    extract_common_names,
    load_drawing,
    merge_identical,
    pack_rows,
    sort_records,
)
from .buffer import ItemBuffer, copy_to_buffer, load_buffer, paste_from_buffer, save_buffer

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
