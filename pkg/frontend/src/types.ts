// Shapes of the read-only analysis API responses.

export interface WorksheetItem {
  name: string;
  usedRange: string | null;
  blockCount: number;
}

export interface ProcedureItem {
  name: string;
  kind: string;
  visibility: string;
  signature: string;
  span: [number, number];
}

export interface ModuleItem {
  name: string;
  kind: string;
  procedures: { count: number; items: ProcedureItem[] };
}

export interface ControlItem {
  name: string;
  type: string;
  caption: string | null;
}

export interface FormItem {
  name: string;
  controls: { count: number; items: ControlItem[] };
}

export interface StructureTree {
  workbook: string;
  worksheets: { count: number; items: WorksheetItem[] };
  vbProject: { moduleCount: number; procedureCount: number; modules: ModuleItem[] };
  userForms: { count: number; items: FormItem[] };
}

export interface Metrics {
  worksheets: number;
  codeModules: number;
  procedures: number;
  userForms: number;
  controls: number;
  eventHandlers: number;
  callEdges: number;
  readGroups: number;
  writeGroups: number;
}

export interface GraphNode {
  id: string;
  kind: "procedure" | "cellGroup" | "eventSource" | "unresolved";
  label: string;
  [key: string]: unknown;
}

export interface GraphEdge {
  source: string;
  target: string;
  kind: "call" | "read" | "write" | "handles";
  event?: string;
  line?: number;
}

export interface Graph {
  focus: string | null;
  nodes: GraphNode[];
  edges: GraphEdge[];
}

export interface GroupRef {
  id: string;
  label: string;
  dynamic: boolean;
}

export interface CalleeRef {
  id?: string;
  name?: string;
  resolved: boolean;
  reason?: string;
}

export interface EventBindingRef {
  sourceKind: string;
  sourceName: string;
  eventName: string;
}

export interface ProcedureDetail {
  procedure: {
    id: string;
    module: string;
    name: string;
    kind: string;
    visibility: string;
    signature: string;
    span: [number, number];
    moduleKind: string;
  };
  eventBindings: EventBindingRef[];
  callees: CalleeRef[];
  callers: string[];
  readGroups: GroupRef[];
  writeGroups: GroupRef[];
  graph: Graph;
}

export interface ClassAttribute {
  name: string;
  type: string;
  optional: boolean;
  source: number;
}

export interface ClassInfo {
  id: string;
  name: string;
  stereotype: string;
  attributes: ClassAttribute[];
  literals: string[];
  provenance: { kind: string; sheet?: string | null; ref?: string };
}

export interface RelationshipInfo {
  kind: string;
  source: string;
  target: string;
  sourceCard: string;
  targetCard: string;
  ruleId: string;
}

export interface ConceptualModel {
  classes: ClassInfo[];
  relationships: RelationshipInfo[];
}

export interface XrefResult {
  query: { sheet: string; row: number; col: number };
  readers: string[];
  writers: string[];
  groups: string[];
}
