// Editor state: a canvas mirror of the server session plus the assistance
// panels. Every state transition goes through the server edit endpoint; the
// canvas always reflects the last server-confirmed graph version, so an
// optimistic edit is rolled back the moment the server rejects it. Metric
// and recommendation values are stored verbatim from the last response and
// never recomputed client-side.

import { ApiClient } from './api.js';
import type {
  ClonePlanSummary,
  EditOp,
  MetricsPayload,
  NodeDoc,
  ProjectDoc,
  Recommendation,
} from './types.js';
import { ApiError } from './types.js';

export interface CanvasNode {
  id: string;
  kind: 'operator' | 'operand';
  type: string;
  inPorts: string[];
  outPorts: string[];
  x: number;
  y: number;
  width: number;
  height: number;
}

export interface CanvasEdge {
  src: [string, string];
  dst: [string, string];
}

export interface PaletteEntry {
  type: string;
  kind: 'operator' | 'operand';
  composite: boolean;
}

export interface DragState {
  paletteType: string;
  x: number;
  y: number;
}

export const BUILTIN_PALETTE: PaletteEntry[] = [
  { type: 'Pump', kind: 'operator', composite: false },
  { type: 'Valve', kind: 'operator', composite: false },
  { type: 'RampGenerator', kind: 'operator', composite: false },
  { type: 'Limiter', kind: 'operator', composite: false },
  { type: 'Mixer', kind: 'operator', composite: false },
  { type: 'PressureIn', kind: 'operand', composite: false },
  { type: 'FlowSet', kind: 'operand', composite: false },
  { type: 'Out', kind: 'operand', composite: false },
];

const NODE_WIDTH = 100;
const NODE_HEIGHT = 56;

export class EditorStore {
  sessionId: string | null = null;
  nodes: CanvasNode[] = [];
  edges: CanvasEdge[] = [];
  compositeTypes: string[] = [];
  selection: string | null = null;
  drag: DragState | null = null;

  /** Verbatim metric payload from the last server response (area 5). */
  metrics: MetricsPayload | null = null;
  version: string | null = null;

  /** Verbatim, order-preserved recommendation list (area 7). */
  recommendations: Recommendation[] = [];
  recommendationHint: string | null = null;

  clonePlans: ClonePlanSummary[] = [];
  previewPlanId: string | null = null;
  lastError: string | null = null;

  private editQueue: Promise<unknown> = Promise.resolve();
  private nodeCounter = 0;
  private listeners: Array<() => void> = [];

  constructor(private readonly api: ApiClient) {}

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  /** Serialize edits: at most one in-flight request that mutates state. */
  private enqueue<T>(work: () => Promise<T>): Promise<T> {
    const next = this.editQueue.then(work, work);
    this.editQueue = next.catch(() => undefined);
    return next;
  }

  get palette(): PaletteEntry[] {
    return [
      ...BUILTIN_PALETTE,
      ...this.compositeTypes.map(
        (type) => ({ type, kind: 'operator', composite: true }) as PaletteEntry,
      ),
    ];
  }

  // -- session lifecycle ----------------------------------------------------

  async openSession(project?: ProjectDoc): Promise<void> {
    const created = await this.api.createSession(project);
    this.sessionId = created.session_id;
    this.metrics = created.metrics;
    this.version = created.version;
    await this.syncProject();
    this.notify();
  }

  private requireSession(): string {
    if (this.sessionId === null) throw new Error('no open session');
    return this.sessionId;
  }

  /** Rebuild the canvas mirror from the server-confirmed document. */
  async syncProject(): Promise<void> {
    const doc = await this.api.getProject(this.requireSession());
    this.loadDocument(doc);
  }

  private loadDocument(doc: ProjectDoc): void {
    this.nodes = doc.nodes.map((n) => ({
      id: n.id,
      kind: n.kind,
      type: n.type,
      inPorts: n.in_ports ?? [],
      outPorts: n.out_ports ?? [],
      x: n.pos ? n.pos[0] : 0,
      y: n.pos ? n.pos[1] : 0,
      width: n.size ? n.size[0] : NODE_WIDTH,
      height: n.size ? n.size[1] : NODE_HEIGHT,
    }));
    this.edges = doc.edges.map((e) => ({ src: e.src, dst: e.dst }));
    this.compositeTypes = doc.composites.map((c) => c.type_id);
    if (this.selection !== null && !this.nodes.some((n) => n.id === this.selection)) {
      this.selection = null;
      this.recommendations = [];
      this.recommendationHint = null;
    }
    this.notify();
  }

  // -- edits ------------------------------------------------------------------

  private freshNodeId(prefix: string): string {
    let id = `${prefix}_${++this.nodeCounter}`;
    while (this.nodes.some((n) => n.id === id)) {
      id = `${prefix}_${++this.nodeCounter}`;
    }
    return id;
  }

  private async confirmedEdit(op: EditOp, rollback: () => void): Promise<boolean> {
    return this.enqueue(async () => {
      try {
        const state = await this.api.postEdit(this.requireSession(), op);
        this.metrics = state.metrics; // verbatim, no client recomputation
        this.version = state.version;
        this.lastError = null;
        this.notify();
        return true;
      } catch (error) {
        rollback();
        this.lastError = error instanceof ApiError ? error.detail : String(error);
        this.notify();
        return false;
      }
    });
  }

  /** Area 2+3: a palette block dropped on the canvas issues one add_node. */
  async dropBlock(entry: PaletteEntry, x: number, y: number): Promise<boolean> {
    const id = this.freshNodeId(entry.type.toLowerCase());
    const composite = entry.composite;
    const node: NodeDoc = {
      id,
      kind: entry.kind,
      type: entry.type,
      in_ports: composite ? [] : ['in'],
      out_ports: composite ? [] : ['out'],
      params: entry.kind === 'operand' ? { name: id } : {},
      pos: [x, y],
      size: [NODE_WIDTH, NODE_HEIGHT],
    };
    const optimistic: CanvasNode = {
      id,
      kind: entry.kind,
      type: entry.type,
      inPorts: node.in_ports,
      outPorts: node.out_ports,
      x,
      y,
      width: NODE_WIDTH,
      height: NODE_HEIGHT,
    };
    this.nodes = [...this.nodes, optimistic];
    this.notify();
    return this.confirmedEdit({ op: 'add_node', node }, () => {
      this.nodes = this.nodes.filter((n) => n.id !== id);
    });
  }

  async connect(src: [string, string], dst: [string, string]): Promise<boolean> {
    const edge = { src, dst };
    this.edges = [...this.edges, edge];
    this.notify();
    return this.confirmedEdit({ op: 'add_edge', edge }, () => {
      this.edges = this.edges.filter((e) => e !== edge);
    });
  }

  async moveNode(id: string, x: number, y: number): Promise<boolean> {
    const node = this.nodes.find((n) => n.id === id);
    if (!node) return false;
    const [oldX, oldY] = [node.x, node.y];
    node.x = x;
    node.y = y;
    this.notify();
    return this.confirmedEdit({ op: 'move_node', id, x, y }, () => {
      node.x = oldX;
      node.y = oldY;
    });
  }

  async removeNode(id: string): Promise<boolean> {
    const keptNodes = this.nodes;
    const keptEdges = this.edges;
    this.nodes = this.nodes.filter((n) => n.id !== id);
    this.edges = this.edges.filter((e) => e.src[0] !== id && e.dst[0] !== id);
    if (this.selection === id) this.selection = null;
    this.notify();
    return this.confirmedEdit({ op: 'remove_node', id }, () => {
      this.nodes = keptNodes;
      this.edges = keptEdges;
    });
  }

  // -- recommendations (area 7) ----------------------------------------------

  async selectNode(id: string | null): Promise<void> {
    this.selection = id;
    if (id === null) {
      this.recommendations = [];
      this.recommendationHint = null;
      this.notify();
      return;
    }
    const recs = await this.api.recommendations(this.requireSession(), id);
    this.recommendations = recs; // server order, verbatim
    this.recommendationHint = recs.length
      ? null
      : 'No recommendations: the structural table has no matching rules yet.';
    this.notify();
  }

  /**
   * Clicking a recommendation inserts the candidate block pre-wired to the
   * selected node, using the rule's edge template direction.
   */
  async applyRecommendation(rec: Recommendation): Promise<boolean> {
    const selected = this.selection;
    if (selected === null) return false;
    const anchor = this.nodes.find((n) => n.id === selected);
    const x = anchor ? anchor.x + anchor.width + 80 : 0;
    const y = anchor ? anchor.y : 0;
    const entry: PaletteEntry = {
      type: rec.candidate.type,
      kind: rec.candidate.kind as 'operator' | 'operand',
      composite: this.compositeTypes.includes(rec.candidate.type),
    };
    const before = this.nodes.length;
    const added = await this.dropBlock(entry, x, y);
    if (!added) return false;
    const newNode = this.nodes[this.nodes.length - 1];
    if (!newNode || this.nodes.length !== before + 1) return false;
    const template = rec.candidate.edges[0];
    const incoming = !template || template.dir === 'in';
    const src: [string, string] = incoming ? [selected, 'out'] : [newNode.id, 'out'];
    const dst: [string, string] = incoming ? [newNode.id, 'in'] : [selected, 'in'];
    return this.connect(src, dst);
  }

  // -- clone encapsulation (areas 3, 4) ---------------------------------------

  async fetchClonePlans(): Promise<void> {
    this.clonePlans = await this.api.clonePlans(this.requireSession());
    this.previewPlanId = this.clonePlans.length ? this.clonePlans[0]!.plan_id : null;
    this.notify();
  }

  previewPlan(planId: string | null): void {
    this.previewPlanId = planId;
    this.notify();
  }

  /** Node id -> occurrence index of the previewed plan (for hue highlights). */
  get previewHighlights(): Map<string, number> {
    const highlights = new Map<string, number>();
    const plan = this.clonePlans.find((p) => p.plan_id === this.previewPlanId);
    if (!plan) return highlights;
    plan.occurrences.forEach((occurrence, index) => {
      for (const nodeId of occurrence) highlights.set(nodeId, index);
    });
    return highlights;
  }

  async applyPlan(planId: string): Promise<boolean> {
    return this.enqueue(async () => {
      try {
        const result = await this.api.encapsulate(this.requireSession(), planId);
        this.metrics = result.metrics;
        this.version = result.version;
        this.clonePlans = [];
        this.previewPlanId = null;
        this.lastError = null;
        await this.syncProject(); // composite node + palette entry come from the doc
        return true;
      } catch (error) {
        this.lastError = error instanceof ApiError ? error.detail : String(error);
        this.notify();
        return false;
      }
    });
  }

  // -- layout + history --------------------------------------------------------

  async optimizeLayout(): Promise<boolean> {
    return this.enqueue(async () => {
      try {
        const result = await this.api.optimizeLayout(this.requireSession());
        this.metrics = result.metrics;
        this.version = result.version;
        await this.syncProject();
        return true;
      } catch (error) {
        this.lastError = error instanceof ApiError ? error.detail : String(error);
        this.notify();
        return false;
      }
    });
  }

  async undo(): Promise<boolean> {
    return this.historyStep((sid) => this.api.undo(sid));
  }

  async redo(): Promise<boolean> {
    return this.historyStep((sid) => this.api.redo(sid));
  }

  private async historyStep(
    call: (sessionId: string) => Promise<{ metrics: MetricsPayload; version: string }>,
  ): Promise<boolean> {
    return this.enqueue(async () => {
      try {
        const state = await call(this.requireSession());
        this.metrics = state.metrics;
        this.version = state.version;
        await this.syncProject();
        return true;
      } catch (error) {
        this.lastError = error instanceof ApiError ? error.detail : String(error);
        this.notify();
        return false;
      }
    });
  }
}
