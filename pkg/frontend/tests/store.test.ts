import { describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { EditorStore } from '../src/store.js';
import type { ClonePlanSummary, ProjectDoc, Recommendation } from '../src/types.js';
import { FakeServer, type FakeServerOptions } from './fakeServer.js';

function makeStore(options: FakeServerOptions = {}) {
  const server = new FakeServer(options);
  const store = new EditorStore(new ApiClient('', server.fetch));
  return { server, store };
}

function pairProject(): ProjectDoc {
  // the Pump->Valve pair appears twice: a clone situation
  return {
    project_id: 'fixture',
    nodes: [
      { id: 'a', kind: 'operator', type: 'Pump', in_ports: ['in'], out_ports: ['out'], pos: [0, 0], size: [100, 56] },
      { id: 'b', kind: 'operator', type: 'Valve', in_ports: ['in'], out_ports: ['out'], pos: [200, 0], size: [100, 56] },
      { id: 'c', kind: 'operator', type: 'Pump', in_ports: ['in'], out_ports: ['out'], pos: [0, 200], size: [100, 56] },
      { id: 'd', kind: 'operator', type: 'Valve', in_ports: ['in'], out_ports: ['out'], pos: [200, 200], size: [100, 56] },
    ],
    edges: [
      { src: ['a', 'out'], dst: ['b', 'in'] },
      { src: ['c', 'out'], dst: ['d', 'in'] },
    ],
    composites: [],
  };
}

const FIXTURE_RECS: Recommendation[] = [
  {
    candidate: { kind: 'operator', type: 'Limiter', edges: [{ dir: 'in', peer: 'n0' }] },
    min_ged: 0,
    summed_confidence: 1.4,
    contributing_rows: [0, 3],
  },
  {
    candidate: { kind: 'operator', type: 'Mixer', edges: [{ dir: 'in', peer: 'n0' }] },
    min_ged: 0,
    summed_confidence: 0.5,
    contributing_rows: [1],
  },
  {
    candidate: { kind: 'operator', type: 'Pump', edges: [{ dir: 'out', peer: 'n0' }] },
    min_ged: 2,
    summed_confidence: 0.9,
    contributing_rows: [2],
  },
];

const FIXTURE_PLAN: ClonePlanSummary = {
  plan_id: 'p0',
  composite_type: 'composite_1',
  pattern_nodes: 2,
  pattern_edges: 1,
  occurrences: [
    ['a', 'b'],
    ['c', 'd'],
  ],
  support: 2,
  predicted_node_delta: -2,
};

describe('session and canvas mirror', () => {
  it('opens a session and mirrors the server document', async () => {
    const { store } = makeStore();
    await store.openSession(pairProject());
    expect(store.sessionId).toBe('s1');
    expect(store.nodes.map((n) => n.id)).toEqual(['a', 'b', 'c', 'd']);
    expect(store.edges).toHaveLength(2);
    expect(store.metrics).not.toBeNull();
  });

  it('drop issues exactly one edit request and shows response metrics verbatim', async () => {
    const { server, store } = makeStore();
    await store.openSession(pairProject());
    const requestsBefore = server.editRequests();

    const ok = await store.dropBlock({ type: 'Pump', kind: 'operator', composite: false }, 40, 60);

    expect(ok).toBe(true);
    expect(server.editRequests()).toBe(requestsBefore + 1);
    expect(store.nodes).toHaveLength(5);
    // area-5 metrics come from the edit response body, not a recomputation
    const lastEdit = server.requests.filter((r) => r.path.endsWith('/edits')).at(-1);
    expect(lastEdit).toBeDefined();
    expect(store.metrics).toEqual(server.metricsFor(await sessionDoc(server, store)));
  });

  it('rolls back an optimistic drop when the server rejects it', async () => {
    const { store } = makeStore();
    await store.openSession(pairProject());
    // force a duplicate id: first drop takes pump_1, then mirror a collision
    await store.dropBlock({ type: 'Pump', kind: 'operator', composite: false }, 0, 0);
    const count = store.nodes.length;
    // direct connect to a ghost node gets rejected and rolled back
    const ok = await store.connect(['ghost', 'out'], ['a', 'in']);
    expect(ok).toBe(false);
    expect(store.nodes).toHaveLength(count);
    expect(store.edges.some((e) => e.src[0] === 'ghost')).toBe(false);
    expect(store.lastError).toContain('ghost');
  });

  it('serializes edits: at most one in flight at a time', async () => {
    const { server, store } = makeStore();
    await store.openSession(pairProject());
    await Promise.all([
      store.dropBlock({ type: 'Pump', kind: 'operator', composite: false }, 0, 0),
      store.dropBlock({ type: 'Valve', kind: 'operator', composite: false }, 10, 0),
      store.moveNode('a', 5, 5),
    ]);
    expect(server.maxConcurrentEdits).toBe(1);
    expect(store.nodes).toHaveLength(6);
  });
});

describe('recommendations (area 7)', () => {
  it('renders the server top-k in server order with min_ged 0 on top', async () => {
    const { store } = makeStore({ recommendationTable: { b: FIXTURE_RECS } });
    await store.openSession(pairProject());
    await store.selectNode('b');
    expect(store.recommendations).toEqual(FIXTURE_RECS); // verbatim, same order
    expect(store.recommendations[0]!.min_ged).toBe(0);
    expect(store.recommendationHint).toBeNull();
  });

  it('shows a hint when the table yields nothing', async () => {
    const { store } = makeStore();
    await store.openSession(pairProject());
    await store.selectNode('a');
    expect(store.recommendations).toEqual([]);
    expect(store.recommendationHint).toMatch(/no recommendations/i);
  });

  it('clicking a recommendation inserts the block pre-wired to the selection', async () => {
    const { server, store } = makeStore({ recommendationTable: { b: FIXTURE_RECS } });
    await store.openSession(pairProject());
    await store.selectNode('b');

    const ok = await store.applyRecommendation(store.recommendations[0]!);

    expect(ok).toBe(true);
    const added = store.nodes.at(-1)!;
    expect(added.type).toBe('Limiter');
    const wire = store.edges.at(-1)!;
    expect(wire.src[0]).toBe('b'); // "in" template: selection feeds the new block
    expect(wire.dst[0]).toBe(added.id);
    // exactly two edits: add_node + add_edge
    const editOps = server.requests
      .filter((r) => r.path.endsWith('/edits'))
      .map((r) => (r.body as { op: string }).op);
    expect(editOps).toEqual(['add_node', 'add_edge']);
  });

  it('an out-template wires the new block into the selection', async () => {
    const recs: Recommendation[] = [
      {
        candidate: { kind: 'operator', type: 'Source', edges: [{ dir: 'out', peer: 'n0' }] },
        min_ged: 1,
        summed_confidence: 0.4,
        contributing_rows: [5],
      },
    ];
    const { store } = makeStore({ recommendationTable: { a: recs } });
    await store.openSession(pairProject());
    await store.selectNode('a');
    await store.applyRecommendation(recs[0]!);
    const wire = store.edges.at(-1)!;
    expect(wire.dst[0]).toBe('a');
  });
});

describe('encapsulation flow (areas 3+4)', () => {
  it('applies a plan and the composite appears in the palette', async () => {
    const { store } = makeStore({ clonePlans: [FIXTURE_PLAN] });
    await store.openSession(pairProject());
    expect(store.palette.some((p) => p.composite)).toBe(false);

    await store.fetchClonePlans();
    expect(store.clonePlans).toHaveLength(1);

    const ok = await store.applyPlan('p0');
    expect(ok).toBe(true);
    expect(store.nodes).toHaveLength(2); // 4 - 2 per the predicted delta
    const composites = store.palette.filter((p) => p.composite);
    expect(composites.map((p) => p.type)).toEqual(['composite_1']);
  });

  it('preview highlights give each occurrence its own hue index', async () => {
    const { store } = makeStore({ clonePlans: [FIXTURE_PLAN] });
    await store.openSession(pairProject());
    await store.fetchClonePlans();
    store.previewPlan('p0');
    const highlights = store.previewHighlights;
    expect(highlights.get('a')).toBe(0);
    expect(highlights.get('b')).toBe(0);
    expect(highlights.get('c')).toBe(1);
    expect(highlights.get('d')).toBe(1);
    expect(new Set(highlights.values()).size).toBe(2);
  });

  it('apply then undo restores the previous canvas node count', async () => {
    const { store } = makeStore({ clonePlans: [FIXTURE_PLAN] });
    await store.openSession(pairProject());
    const before = store.nodes.length;
    await store.fetchClonePlans();
    await store.applyPlan('p0');
    expect(store.nodes.length).toBe(before - 2);
    await store.undo();
    expect(store.nodes.length).toBe(before);
  });

  it('a stale plan is rejected after an intervening edit', async () => {
    const { store } = makeStore({ clonePlans: [FIXTURE_PLAN] });
    await store.openSession(pairProject());
    await store.fetchClonePlans();
    await store.dropBlock({ type: 'Mixer', kind: 'operator', composite: false }, 500, 0);
    const ok = await store.applyPlan('p0');
    expect(ok).toBe(false);
    expect(store.lastError).toMatch(/changed since planning/);
  });
});

describe('layout and selection bookkeeping', () => {
  it('layout optimization re-syncs positions from the server', async () => {
    const { store } = makeStore();
    await store.openSession(pairProject());
    await store.optimizeLayout();
    expect(store.nodes.map((n) => n.x)).toEqual([0, 160, 320, 480]);
  });

  it('selection clears when the selected node disappears', async () => {
    const { store } = makeStore({ clonePlans: [FIXTURE_PLAN] });
    await store.openSession(pairProject());
    await store.selectNode('a');
    await store.fetchClonePlans();
    await store.applyPlan('p0'); // node 'a' was replaced by the composite
    expect(store.selection).toBeNull();
    expect(store.recommendations).toEqual([]);
  });
});

async function sessionDoc(server: FakeServer, store: EditorStore): Promise<ProjectDoc> {
  const response = await server.fetch(`/sessions/${store.sessionId}`, { method: 'GET' });
  return (await response.json()) as ProjectDoc;
}
