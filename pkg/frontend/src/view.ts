// Pure view-model builders: everything the DOM layer renders is prepared
// here so it can be unit-tested without a browser.

import type { CanvasEdge, CanvasNode } from './store.js';
import type { DetailMetricsPayload, MetricsPayload, Recommendation } from './types.js';

export interface MetricRow {
  name: string;
  label: string;
  /** Raw server value, untouched. */
  value: number | null;
  display: string;
}

const SMALL_PANEL: Array<[string, string]> = [
  ['cyclomatic', 'Cyclomatic complexity'],
  ['halstead_length', 'Halstead length'],
  ['halstead_vocabulary', 'Halstead vocabulary'],
  ['halstead_difficulty', 'Halstead difficulty'],
  ['layout_quality', 'Layout quality'],
];

function format(value: number | null): string {
  if (value === null) return 'n/a';
  if (Number.isInteger(value)) return String(value);
  return value.toPrecision(4);
}

/** Area 5: the small always-visible metric panel, values verbatim. */
export function smallMetricPanel(metrics: MetricsPayload | null): MetricRow[] {
  if (!metrics) return [];
  return SMALL_PANEL.map(([name, label]) => {
    const value = metrics[name] as number | null;
    return { name, label, value, display: format(value) };
  });
}

/** Area 6: expandable detail incl. the individual layout penalties. */
export function detailMetricPanel(detail: DetailMetricsPayload | null): MetricRow[] {
  if (!detail) return [];
  const rows = smallMetricPanel(detail);
  if (detail.layout) {
    for (const [name, value] of Object.entries(detail.layout)) {
      rows.push({
        name: `layout.${name}`,
        label: name.replaceAll('_', ' '),
        value,
        display: format(value),
      });
    }
  }
  return rows;
}

export interface RecommendationChip {
  label: string;
  gedLabel: string;
  /** 0..100, for the confidence bar width. */
  confidencePercent: number;
  exactMatch: boolean;
}

/** Area 7: ranked chips; order is exactly the server order. */
export function recommendationChips(recommendations: Recommendation[]): RecommendationChip[] {
  const cap = Math.max(1, ...recommendations.map((r) => r.summed_confidence));
  return recommendations.map((rec) => ({
    label: rec.candidate.type,
    gedLabel: `GED ${rec.min_ged}`,
    confidencePercent: Math.round((rec.summed_confidence / cap) * 100),
    exactMatch: rec.min_ged === 0,
  }));
}

/** Distinct hues for occurrence highlighting during clone preview. */
export function occurrenceHue(index: number): string {
  return `hsl(${(index * 67) % 360} 85% 72%)`;
}

export interface WireSegment {
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  key: string;
}

function portPoint(node: CanvasNode, port: string, side: 'in' | 'out'): [number, number] {
  const ports = side === 'in' ? node.inPorts : node.outPorts;
  const index = Math.max(0, ports.indexOf(port));
  const count = Math.max(1, ports.length);
  const y = node.y - node.height / 2 + ((index + 1) * node.height) / (count + 1);
  const x = side === 'in' ? node.x - node.width / 2 : node.x + node.width / 2;
  return [x, y];
}

/** Straight wire segments between port anchor points (area 2). */
export function wireSegments(nodes: CanvasNode[], edges: CanvasEdge[]): WireSegment[] {
  const byId = new Map(nodes.map((n) => [n.id, n]));
  const segments: WireSegment[] = [];
  for (const edge of edges) {
    const srcNode = byId.get(edge.src[0]);
    const dstNode = byId.get(edge.dst[0]);
    if (!srcNode || !dstNode) continue;
    const [x1, y1] = portPoint(srcNode, edge.src[1], 'out');
    const [x2, y2] = portPoint(dstNode, edge.dst[1], 'in');
    segments.push({
      x1,
      y1,
      x2,
      y2,
      key: `${edge.src[0]}:${edge.src[1]}->${edge.dst[0]}:${edge.dst[1]}`,
    });
  }
  return segments;
}
