import { describe, expect, it } from 'vitest';

import type { CanvasNode } from '../src/store.js';
import {
  detailMetricPanel,
  occurrenceHue,
  recommendationChips,
  smallMetricPanel,
  wireSegments,
} from '../src/view.js';
import type { DetailMetricsPayload, Recommendation } from '../src/types.js';

const METRICS = {
  cyclomatic: 2,
  halstead_length: 9,
  halstead_vocabulary: 4,
  halstead_difficulty: 1.5,
  layout_quality: 0.0123456,
};

describe('metric panels', () => {
  it('area 5 shows the five default metrics with raw values', () => {
    const rows = smallMetricPanel(METRICS);
    expect(rows.map((r) => r.name)).toEqual([
      'cyclomatic',
      'halstead_length',
      'halstead_vocabulary',
      'halstead_difficulty',
      'layout_quality',
    ]);
    // raw values pass through untouched; formatting is a separate field
    expect(rows.map((r) => r.value)).toEqual([2, 9, 4, 1.5, 0.0123456]);
    expect(rows[0]!.display).toBe('2');
    expect(rows[4]!.display).toBe('0.01235');
  });

  it('missing layout renders n/a instead of a number', () => {
    const rows = smallMetricPanel({ ...METRICS, layout_quality: null });
    expect(rows[4]!.display).toBe('n/a');
  });

  it('area 6 appends the individual layout penalties', () => {
    const detail: DetailMetricsPayload = {
      ...METRICS,
      layout: { edge_overlaps: 3, concentration: 0.25 },
      halstead_counts: { n1: 2, N1: 4, n2: 3, N2: 5 },
    };
    const rows = detailMetricPanel(detail);
    const names = rows.map((r) => r.name);
    expect(names).toContain('layout.edge_overlaps');
    expect(names).toContain('layout.concentration');
    expect(rows.find((r) => r.name === 'layout.edge_overlaps')!.value).toBe(3);
  });

  it('returns nothing before the first server response', () => {
    expect(smallMetricPanel(null)).toEqual([]);
    expect(detailMetricPanel(null)).toEqual([]);
  });
});

describe('recommendation chips', () => {
  const recs: Recommendation[] = [
    {
      candidate: { kind: 'operator', type: 'Limiter', edges: [] },
      min_ged: 0,
      summed_confidence: 1.4,
      contributing_rows: [],
    },
    {
      candidate: { kind: 'operator', type: 'Mixer', edges: [] },
      min_ged: 2,
      summed_confidence: 0.7,
      contributing_rows: [],
    },
  ];

  it('keeps the server order and marks exact matches', () => {
    const chips = recommendationChips(recs);
    expect(chips.map((c) => c.label)).toEqual(['Limiter', 'Mixer']);
    expect(chips[0]!.exactMatch).toBe(true);
    expect(chips[1]!.exactMatch).toBe(false);
    expect(chips[1]!.gedLabel).toBe('GED 2');
  });

  it('scales confidence bars to the strongest entry', () => {
    const chips = recommendationChips(recs);
    expect(chips[0]!.confidencePercent).toBe(100);
    expect(chips[1]!.confidencePercent).toBe(50);
  });

  it('handles an empty list', () => {
    expect(recommendationChips([])).toEqual([]);
  });
});

describe('canvas geometry', () => {
  const nodes: CanvasNode[] = [
    { id: 'a', kind: 'operator', type: 'Pump', inPorts: ['in'], outPorts: ['out'],
      x: 0, y: 0, width: 100, height: 60 },
    { id: 'b', kind: 'operator', type: 'Valve', inPorts: ['in', 'set'], outPorts: ['out'],
      x: 300, y: 0, width: 100, height: 60 },
  ];

  it('anchors wires at the facing edges of the blocks', () => {
    const [segment] = wireSegments(nodes, [{ src: ['a', 'out'], dst: ['b', 'in'] }]);
    expect(segment).toBeDefined();
    expect(segment!.x1).toBe(50); // right edge of a
    expect(segment!.x2).toBe(250); // left edge of b
  });

  it('spaces multiple in-ports down the block edge', () => {
    const [toIn] = wireSegments(nodes, [{ src: ['a', 'out'], dst: ['b', 'in'] }]);
    const [toSet] = wireSegments(nodes, [{ src: ['a', 'out'], dst: ['b', 'set'] }]);
    expect(toIn!.y2).toBeLessThan(toSet!.y2);
  });

  it('skips wires whose endpoints are missing', () => {
    expect(wireSegments(nodes, [{ src: ['ghost', 'out'], dst: ['b', 'in'] }])).toEqual([]);
  });

  it('occurrence hues are distinct for small indexes', () => {
    const hues = new Set([0, 1, 2, 3, 4].map(occurrenceHue));
    expect(hues.size).toBe(5);
  });
});
