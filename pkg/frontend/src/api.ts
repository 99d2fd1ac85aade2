// Thin typed client for the assistance service. The fetch function is
// injectable so tests can run against a scripted fake server.

import type {
  ClonePlanSummary,
  CreateSessionResponse,
  DetailMetricsPayload,
  EditOp,
  EncapsulateResponse,
  LayoutResponse,
  ProjectDoc,
  Recommendation,
  SessionState,
} from './types.js';
import { ApiError } from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: { 'Content-Type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json();
    if (!response.ok) {
      const detail =
        payload && typeof payload === 'object' && 'detail' in payload
          ? String((payload as { detail: unknown }).detail)
          : response.statusText;
      throw new ApiError(response.status, detail);
    }
    return payload as T;
  }

  createSession(project?: ProjectDoc): Promise<CreateSessionResponse> {
    return this.request('POST', '/sessions', project ? { project } : {});
  }

  getProject(sessionId: string): Promise<ProjectDoc> {
    return this.request('GET', `/sessions/${sessionId}`);
  }

  postEdit(sessionId: string, op: EditOp): Promise<SessionState> {
    return this.request('POST', `/sessions/${sessionId}/edits`, op);
  }

  undo(sessionId: string): Promise<SessionState> {
    return this.request('POST', `/sessions/${sessionId}/undo`);
  }

  redo(sessionId: string): Promise<SessionState> {
    return this.request('POST', `/sessions/${sessionId}/redo`);
  }

  recommendations(sessionId: string, nodeId: string, k?: number): Promise<Recommendation[]> {
    return this.request('POST', `/sessions/${sessionId}/recommendations`, {
      node_id: nodeId,
      ...(k === undefined ? {} : { k }),
    });
  }

  clonePlans(sessionId: string): Promise<ClonePlanSummary[]> {
    return this.request('GET', `/sessions/${sessionId}/clones`);
  }

  encapsulate(sessionId: string, planId: string): Promise<EncapsulateResponse> {
    return this.request('POST', `/sessions/${sessionId}/encapsulate`, { plan_id: planId });
  }

  optimizeLayout(sessionId: string): Promise<LayoutResponse> {
    return this.request('POST', `/sessions/${sessionId}/layout`);
  }

  fullMetrics(sessionId: string): Promise<DetailMetricsPayload> {
    return this.request('GET', `/sessions/${sessionId}/metrics?detail=full`);
  }
}
