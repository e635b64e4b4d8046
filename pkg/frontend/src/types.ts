// Document shapes as the service emits them. Field names mirror the
// JSON exactly; nothing here is derived client-side.

export interface SpanDoc {
  start: number;
  end: number;
  start_line: number;
  start_col: number;
  end_line: number;
  end_col: number;
}

export type FactorKind = "invocation" | "accumulating" | "fixed";
export type Origin = "internal" | "external";

export interface FactorDecl {
  id: string;
  kind: FactorKind;
  origin: Origin;
  unit: string;
  quantity_spec: string;
  value_source: string;
  requires: string[];
}

export interface GraphNode {
  id: string;
  label: string;
  class: string;
  method: string | null;
  span: SpanDoc;
  factors: FactorDecl[];
}

export interface GraphEdge {
  src: string;
  dst: string;
  kind: string;
  weight: string;
}

export interface DiamondDoc {
  node: string;
  dominant: number[];
  secondary: number[];
}

export type Scalar = string | number | boolean;

export interface CatalogueRow {
  id: string;
  kind: FactorKind;
  origin: Origin;
  value_source: string;
  resolved: boolean;
  node: string;
  value: Scalar | null;
}

export interface GraphDoc {
  source_version: number;
  nodes: GraphNode[];
  edges: GraphEdge[];
  diamonds: DiamondDoc[];
  entry_points: string[];
  required_inputs: CatalogueRow[];
}

export interface SessionDoc {
  session: string;
  source_version: number;
  factors: CatalogueRow[];
  unresolved: string[];
  graph: GraphDoc;
}

export interface ReportFactor {
  id: string;
  kind: FactorKind;
  origin: Origin;
  unit: string;
  quantity: string;
  micro_usd: number;
  display: string;
}

export interface ReportNode {
  id: string;
  count: string;
  factors: ReportFactor[];
}

export interface CostReportDoc {
  currency: string;
  engine: string;
  month: number;
  vendor: string;
  source_version: number;
  nodes: ReportNode[];
  total_micro_usd: number;
  total_display: string;
  unresolved: string[];
}

export interface ComparisonEntry {
  vendor: string;
  total_micro_usd: number;
  total_display: string;
  node_deltas: Record<string, number>;
}

export interface CompareDoc {
  source_version: number;
  month: number;
  baseline: string | null;
  comparisons: ComparisonEntry[];
}

export interface AnnotationDoc {
  target: SpanDoc;
  wrapper: SpanDoc;
  entries: Record<string, Scalar>;
}

export interface SourceDoc {
  source_version: number;
  text: string;
  annotations: AnnotationDoc[];
}

export interface CatalogInfo {
  id: string;
  vendor_id: string;
  version: string;
  rules: number;
}

export interface VendorTotal {
  total_micro_usd: number;
  display: string;
}

export interface PatchResponse {
  session: string;
  source_version: number;
  factors: CatalogueRow[];
  unresolved: string[];
  totals: Record<string, VendorTotal | null>;
}

export interface ServiceErrorDoc {
  error: string;
  message: string;
  keys?: string[];
  [detail: string]: unknown;
}
