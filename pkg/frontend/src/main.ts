// Browser entry: wires the editor store to the DOM. Area numbering follows
// the panel layout: 1 toolbar, 2 canvas, 3 palette, 4 assistance buttons,
// 5 metric panel, 6 metric detail, 7 recommendations.

import { ApiClient } from './api.js';
import { EditorStore } from './store.js';
import {
  detailMetricPanel,
  occurrenceHue,
  recommendationChips,
  smallMetricPanel,
  wireSegments,
} from './view.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const element = document.createElement(tag);
  if (className) element.className = className;
  if (text !== undefined) element.textContent = text;
  return element;
}

function must(id: string): HTMLElement {
  const element = document.getElementById(id);
  if (!element) throw new Error(`missing #${id}`);
  return element;
}

export function startApp(): void {
  const api = new ApiClient('');
  const store = new EditorStore(api);

  const canvas = must('canvas');
  const paletteBox = must('palette');
  const metricsBox = must('metrics');
  const detailBox = must('metrics-detail');
  const recsBox = must('recommendations');
  const clonesBox = must('clones');
  const statusBox = must('status');

  let detailOpen = false;

  function renderPalette(): void {
    paletteBox.replaceChildren();
    for (const entry of store.palette) {
      const chip = el('div', entry.composite ? 'palette-entry composite' : 'palette-entry');
      chip.textContent = entry.composite ? `▣ ${entry.type}` : entry.type;
      chip.draggable = true;
      chip.addEventListener('dragstart', (event) => {
        event.dataTransfer?.setData('text/block-type', JSON.stringify(entry));
      });
      paletteBox.appendChild(chip);
    }
  }

  function renderCanvas(): void {
    canvas.replaceChildren();
    const svg = document.createElementNS(SVG_NS, 'svg');
    svg.setAttribute('class', 'wires');
    for (const segment of wireSegments(store.nodes, store.edges)) {
      const line = document.createElementNS(SVG_NS, 'line');
      line.setAttribute('x1', String(segment.x1));
      line.setAttribute('y1', String(segment.y1));
      line.setAttribute('x2', String(segment.x2));
      line.setAttribute('y2', String(segment.y2));
      svg.appendChild(line);
    }
    canvas.appendChild(svg);

    const highlights = store.previewHighlights;
    for (const node of store.nodes) {
      const box = el('div', 'block');
      box.style.left = `${node.x - node.width / 2}px`;
      box.style.top = `${node.y - node.height / 2}px`;
      box.style.width = `${node.width}px`;
      box.style.height = `${node.height}px`;
      const hueIndex = highlights.get(node.id);
      if (hueIndex !== undefined) box.style.background = occurrenceHue(hueIndex);
      if (node.id === store.selection) box.classList.add('selected');
      box.appendChild(el('span', 'block-type', node.type));
      box.appendChild(el('span', 'block-id', node.id));
      box.addEventListener('click', () => void store.selectNode(node.id));
      canvas.appendChild(box);
    }
  }

  function renderMetrics(): void {
    metricsBox.replaceChildren();
    for (const row of smallMetricPanel(store.metrics)) {
      const line = el('div', 'metric-row');
      line.appendChild(el('span', 'metric-label', row.label));
      line.appendChild(el('span', 'metric-value', row.display));
      metricsBox.appendChild(line);
    }
  }

  async function renderDetail(): Promise<void> {
    detailBox.replaceChildren();
    if (!detailOpen || store.sessionId === null) return;
    const detail = await api.fullMetrics(store.sessionId);
    for (const row of detailMetricPanel(detail)) {
      const line = el('div', 'metric-row');
      line.appendChild(el('span', 'metric-label', row.label));
      line.appendChild(el('span', 'metric-value', row.display));
      detailBox.appendChild(line);
    }
  }

  function renderRecommendations(): void {
    recsBox.replaceChildren();
    if (store.recommendationHint) {
      recsBox.appendChild(el('div', 'hint', store.recommendationHint));
      return;
    }
    const chips = recommendationChips(store.recommendations);
    chips.forEach((chip, index) => {
      const rec = store.recommendations[index];
      if (!rec) return;
      const button = el('button', chip.exactMatch ? 'rec-chip exact' : 'rec-chip');
      button.appendChild(el('span', 'rec-label', chip.label));
      button.appendChild(el('span', 'rec-ged', chip.gedLabel));
      const bar = el('div', 'confidence-bar');
      const fill = el('div', 'confidence-fill');
      fill.style.width = `${chip.confidencePercent}%`;
      bar.appendChild(fill);
      button.appendChild(bar);
      button.addEventListener('click', () => void store.applyRecommendation(rec));
      recsBox.appendChild(button);
    });
  }

  function renderClones(): void {
    clonesBox.replaceChildren();
    for (const plan of store.clonePlans) {
      const row = el('div', 'clone-plan');
      row.appendChild(
        el(
          'span',
          'clone-label',
          `${plan.pattern_nodes}-block structure ×${plan.occurrences.length}`,
        ),
      );
      const preview = el('button', 'small', 'preview');
      preview.addEventListener('click', () => store.previewPlan(plan.plan_id));
      const apply = el('button', 'small primary', 'encapsulate');
      apply.addEventListener('click', () => void store.applyPlan(plan.plan_id));
      row.appendChild(preview);
      row.appendChild(apply);
      clonesBox.appendChild(row);
    }
  }

  function renderStatus(): void {
    statusBox.textContent = store.lastError
      ? `⚠ ${store.lastError}`
      : store.version
        ? `version ${store.version}`
        : '';
    statusBox.classList.toggle('error', store.lastError !== null);
  }

  store.onChange(() => {
    renderPalette();
    renderCanvas();
    renderMetrics();
    renderRecommendations();
    renderClones();
    renderStatus();
    void renderDetail();
  });

  canvas.addEventListener('dragover', (event) => event.preventDefault());
  canvas.addEventListener('drop', (event) => {
    event.preventDefault();
    const raw = event.dataTransfer?.getData('text/block-type');
    if (!raw) return;
    const rect = canvas.getBoundingClientRect();
    void store.dropBlock(JSON.parse(raw), event.clientX - rect.left, event.clientY - rect.top);
  });

  must('btn-encapsulate').addEventListener('click', () => void store.fetchClonePlans());
  must('btn-layout').addEventListener('click', () => void store.optimizeLayout());
  must('btn-undo').addEventListener('click', () => void store.undo());
  must('btn-redo').addEventListener('click', () => void store.redo());
  must('btn-detail').addEventListener('click', () => {
    detailOpen = !detailOpen;
    void renderDetail();
  });

  void store.openSession();
}

if (typeof document !== 'undefined' && document.getElementById('canvas')) {
  startApp();
}
