// Payload shapes of the tkd HTTP service; fields mirror the domain types.

export interface CellRef {
  record: number;
  steps: number[];
}

export interface LayoutCell extends CellRef {
  x: number;
  y: number;
  w: number;
  h: number;
  graph_id: string;
  object_class: string | null;
  text: string;
}

export interface LayoutLine {
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  kind: "thin" | "thick";
}

export interface LayoutRecordBand {
  index: number;
  y: number;
  h: number;
}

export interface LayoutGeometry {
  width_mm: number;
  height_mm: number;
  row_height_mm: number;
  records: LayoutRecordBand[];
  cells: LayoutCell[];
  lines: LayoutLine[];
  template_name: string;
}

export interface GraphInfo {
  graph_id: string;
  header_text: string;
  width_mm: number;
  property_id: number | null;
  unit: string | null;
  object_class: string | null;
  constraint_role: "source" | "subject" | null;
  x_mm: number;
}

export interface ModuleJson {
  template: { name: string; units_note: string; root: unknown; style_defaults: unknown };
  records: unknown[];
  continuation: unknown;
  graphs: GraphInfo[];
}

export interface DocResponse {
  id: number;
  revision: number;
  layout: LayoutGeometry;
  module: ModuleJson;
  created?: CellRef[];
  inserted_records?: number[];
  dropped_properties?: number[];
  ignored_properties?: number[];
}

export interface CellValueJson {
  text?: string;
  numeric?: number | null;
  unit?: string | null;
}

export interface CatalogMatch {
  object_class: string;
  item_index: number;
  fields: Record<string, string>;
  properties: Record<string, { text: string; numeric: number | null; unit: string | null }>;
}

export interface ConstraintsResponse {
  object_class: string | null;
  temperature: { value: number; unit: string } | null;
  pressure: { value: number; unit: string } | null;
  dn: number | null;
}

export type RowOp =
  | { op: "merge"; start: number; stop: number }
  | { op: "sort"; graphs: string[] }
  | { op: "extract"; start: number; stop: number; graph: string }
  | { op: "pack"; start: number; stop: number }
  | { op: "append_row" }
  | { op: "delete_rows"; start: number; stop: number }
  | { op: "clear_rows"; start: number; stop: number }
  | { op: "copy_rows"; start: number; stop: number; to: number }
  | { op: "move_rows"; start: number; stop: number; to: number };
