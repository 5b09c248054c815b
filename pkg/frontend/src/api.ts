// Typed client for the /v1 HTTP API. The UI holds no authoritative state:
// everything rendered round-trips through these calls or the stream.

import type {
  AgentProfile,
  AssembledSpark,
  CalendarBucket,
  ConfigDocument,
  EventSpec,
  NpcProfile,
  RunStateInfo,
  TraceRecord,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public body: unknown,
  ) {
    super(message);
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let body: any = null;
  try {
    body = await response.json();
  } catch {
    /* not json */
  }
  const code = body?.error?.code ?? (body?.violations ? "VALIDATION_FAILED" : "HTTP_ERROR");
  const message =
    body?.error?.message ??
    body?.violations?.map((v: any) => `${v.code}: ${v.message}`).join("; ") ??
    response.statusText;
  return new ApiError(response.status, code, message, body);
}

export class ApiClient {
  constructor(public baseUrl: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  getConfig(): Promise<ConfigDocument> {
    return this.request("/v1/config");
  }

  putConfig(document: ConfigDocument): Promise<unknown> {
    return this.request("/v1/config", { method: "PUT", body: JSON.stringify(document) });
  }

  upsertAgent(agent: Partial<AgentProfile>): Promise<unknown> {
    return this.request("/v1/agents", { method: "POST", body: JSON.stringify(agent) });
  }

  upsertNpc(npc: Partial<NpcProfile>): Promise<unknown> {
    return this.request("/v1/npcs", { method: "POST", body: JSON.stringify(npc) });
  }

  addEvent(event: EventSpec): Promise<unknown> {
    return this.request("/v1/events", { method: "POST", body: JSON.stringify(event) });
  }

  removeEntity(entityId: string): Promise<unknown> {
    return this.request(`/v1/entities/${encodeURIComponent(entityId)}`, { method: "DELETE" });
  }

  start(): Promise<RunStateInfo> {
    return this.request("/v1/run/start", { method: "POST" });
  }

  pause(): Promise<RunStateInfo> {
    return this.request("/v1/run/pause", { method: "POST" });
  }

  resume(): Promise<RunStateInfo> {
    return this.request("/v1/run/resume", { method: "POST" });
  }

  reset(): Promise<RunStateInfo> {
    return this.request("/v1/run/reset", { method: "POST" });
  }

  runState(): Promise<RunStateInfo> {
    return this.request("/v1/run");
  }

  calendar(params: { agent?: string; min_importance?: number; kinds?: string } = {}): Promise<
    CalendarBucket[]
  > {
    const query = new URLSearchParams();
    if (params.agent) query.set("agent", params.agent);
    if (params.min_importance) query.set("min_importance", String(params.min_importance));
    if (params.kinds) query.set("kinds", params.kinds);
    const suffix = query.toString() ? `?${query}` : "";
    return this.request(`/v1/calendar${suffix}`);
  }

  sparks(cursor = 0, limit = 1000): Promise<{ items: AssembledSpark[]; total: number }> {
    return this.request(`/v1/sparks?cursor=${cursor}&limit=${limit}`);
  }

  sparkDetail(sparkId: string): Promise<AssembledSpark> {
    return this.request(`/v1/sparks/${encodeURIComponent(sparkId)}`);
  }

  reasoning(refId: string): Promise<TraceRecord> {
    return this.request(`/v1/reasoning/${encodeURIComponent(refId)}`);
  }

  hidden(sparkId: string): Promise<TraceRecord[]> {
    return this.request(`/v1/hidden/${encodeURIComponent(sparkId)}`);
  }

  network(atTick?: number): Promise<{ edges: any[]; agents: { agent_id: string; name: string; avatar: number }[] }> {
    const suffix = atTick === undefined ? "" : `?at_tick=${atTick}`;
    return this.request(`/v1/network${suffix}`);
  }
}
