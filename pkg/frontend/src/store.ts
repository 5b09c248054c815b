// The client-side read model. It is rebuilt entirely from the API plus the
// record stream, holds no authoritative state of its own, and applies
// stream events idempotently by sequence number, so duplicates and hard
// refreshes always converge to the same snapshot.

import type {
  AgentProfile,
  AssembledSpark,
  BehaviorRecord,
  CalendarBucket,
  ConfigChangeRecord,
  ConfigDocument,
  EdgeRecord,
  EventSpec,
  LogRecord,
  MemoryRecord,
  NpcProfile,
  RunStateInfo,
  SparkRecord,
  StreamEvent,
  TraceRecord,
  ViewState,
} from "./types.js";

export type Listener = () => void;

export class RunStore {
  runState: RunStateInfo | null = null;
  config: ConfigDocument | null = null;

  behaviors: BehaviorRecord[] = [];
  traces = new Map<string, TraceRecord>();
  sparks = new Map<string, AssembledSpark>();
  sparkOrder: string[] = [];
  edges: EdgeRecord[] = [];
  memories: MemoryRecord[] = [];
  notes: string[] = [];
  lastSeq = -1;

  view: ViewState = {
    selected_agent: null,
    hover_time: null,
    min_importance: 1,
    kind_filters: { daily: true, social: true },
    right_panel_mode: "FollowNetwork",
    focused_spark: null,
  };

  private listeners = new Set<Listener>();

  subscribe(listener: Listener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  notify(): void {
    this.listeners.forEach((listener) => listener());
  }

  setView(patch: Partial<ViewState>): void {
    this.view = { ...this.view, ...patch };
    this.notify();
  }

  setConfig(config: ConfigDocument): void {
    this.config = config;
    this.notify();
  }

  setRunState(state: RunStateInfo): void {
    this.runState = state;
    this.notify();
  }

  reset(): void {
    this.behaviors = [];
    this.traces.clear();
    this.sparks.clear();
    this.sparkOrder = [];
    this.edges = [];
    this.memories = [];
    this.notes = [];
    this.lastSeq = -1;
    this.notify();
  }

  handleStreamEvent(event: StreamEvent): void {
    if (event.event === "run_state_changed") {
      this.setRunState(event.data as RunStateInfo);
      return;
    }
    if (event.id === null) return;
    this.applyRecord(event.data as LogRecord);
  }

  applyRecord(record: LogRecord): void {
    if (record.seq <= this.lastSeq) return; // duplicate: no visual change
    this.lastSeq = record.seq;
    switch (record.type) {
      case "behavior":
        this.applyBehavior(record as BehaviorRecord);
        break;
      case "trace": {
        const trace = record as TraceRecord;
        this.traces.set(trace.trace_id, trace);
        break;
      }
      case "spark": {
        const spark = record as SparkRecord;
        this.sparks.set(spark.spark_id, {
          spark_id: spark.spark_id,
          author: spark.author,
          posted_at: spark.posted_at,
          content: spark.content,
          tick: spark.tick,
          likes: [],
          replies: [],
        });
        this.sparkOrder.push(spark.spark_id);
        break;
      }
      case "edge":
        this.edges.push(record as EdgeRecord);
        break;
      case "memory":
        this.memories.push(record as MemoryRecord);
        break;
      case "note":
        this.notes.push(String((record as any).text ?? ""));
        break;
      case "config_change":
        this.applyConfigChange(record as ConfigChangeRecord);
        break;
      default:
        break; // tick_begin / tick_commit / delivery need no view model
    }
    this.notify();
  }

  private applyBehavior(behavior: BehaviorRecord): void {
    this.behaviors.push(behavior);
    if (behavior.kind === "like" && behavior.target) {
      this.sparks.get(behavior.target)?.likes.push({
        agent: behavior.agent,
        tick: behavior.tick,
        reasoning_ref: behavior.reasoning_ref,
      });
    } else if (behavior.kind === "reply" && behavior.target) {
      this.sparks.get(behavior.target)?.replies.push({
        author: behavior.agent,
        replied_at: behavior.at,
        content: behavior.detail,
        reasoning_ref: behavior.reasoning_ref,
      });
    }
  }

  private applyConfigChange(change: ConfigChangeRecord): void {
    if (!this.config) return;
    const payload = change.payload as any;
    if (change.entity === "event") {
      if (change.action === "remove") {
        this.config.events = this.config.events.filter((e) => e.event_id !== change.entity_id);
      } else {
        this.config.events = this.config.events
          .filter((e) => e.event_id !== change.entity_id)
          .concat([payload as EventSpec]);
      }
    } else if (change.entity === "agent") {
      if (change.action === "remove") {
        this.config.agents = this.config.agents.filter((a) => a.agent_id !== change.entity_id);
      } else {
        this.config.agents = this.config.agents
          .filter((a) => a.agent_id !== change.entity_id)
          .concat([payload as AgentProfile]);
      }
    } else if (change.entity === "npc") {
      if (change.action === "remove") {
        this.config.npcs = this.config.npcs.filter((n) => n.npc_id !== change.entity_id);
      } else {
        this.config.npcs = this.config.npcs
          .filter((n) => n.npc_id !== change.entity_id)
          .concat([payload as NpcProfile]);
      }
    } else if (change.entity === "simulation" && payload) {
      this.config.simulation = payload;
    }
  }

  // -- selectors (these mirror the server's query semantics exactly) -----------

  feed(): AssembledSpark[] {
    return this.sparkOrder
      .map((id) => this.sparks.get(id)!)
      .sort((a, b) => (a.posted_at < b.posted_at ? -1 : a.posted_at > b.posted_at ? 1 : 0));
  }

  calendar(options: {
    agent?: string | null;
    minImportance?: number;
    kinds?: { daily: boolean; social: boolean };
  } = {}): CalendarBucket[] {
    const agent = options.agent ?? null;
    const minImportance = options.minImportance ?? 1;
    const kinds = options.kinds ?? { daily: true, social: true };
    // a continuous daily activity is shown only at its start bucket
    const lastDaily = new Map<string, { tick: number; detail: string }>();
    const buckets = new Map<string, CalendarBucket>();
    for (const behavior of this.behaviors) {
      let include = true;
      if (behavior.kind === "daily") {
        const previous = lastDaily.get(behavior.agent);
        if (previous && previous.tick === behavior.tick - 1 && previous.detail === behavior.detail) {
          include = false;
        }
        lastDaily.set(behavior.agent, { tick: behavior.tick, detail: behavior.detail });
      }
      if (!include) continue;
      if (agent && behavior.agent !== agent) continue;
      if (behavior.importance < minImportance) continue;
      const group = behavior.kind === "daily" ? "daily" : "social";
      if (group === "daily" && !kinds.daily) continue;
      if (group === "social" && !kinds.social) continue;
      const at = new Date(behavior.at);
      // bucket in AoE (UTC-12): shift then read UTC fields
      const aoe = new Date(at.getTime() - 12 * 3600 * 1000);
      const date = aoe.toISOString().slice(0, 10);
      const hour = aoe.getUTCHours();
      const key = `${date}|${hour}`;
      if (!buckets.has(key)) buckets.set(key, { date, hour, records: [] });
      buckets.get(key)!.records.push(behavior);
    }
    return [...buckets.values()].sort((a, b) =>
      a.date === b.date ? a.hour - b.hour : a.date < b.date ? -1 : 1,
    );
  }

  networkAt(tick: number | null): EdgeRecord[] {
    if (tick === null) return [...this.edges];
    return this.edges.filter((edge) => edge.created_at_tick <= tick);
  }

  hidden(sparkId: string): TraceRecord[] {
    return [...this.traces.values()]
      .filter(
        (trace) =>
          trace.spark_id === sparkId &&
          (trace.polarity === "declined" || trace.polarity === "skipped"),
      )
      .sort((a, b) => a.seq - b.seq);
  }

  agents(): AgentProfile[] {
    return this.config ? [...this.config.agents].sort((a, b) => a.agent_id.localeCompare(b.agent_id)) : [];
  }

  npcs(): NpcProfile[] {
    return this.config ? [...this.config.npcs].sort((a, b) => a.npc_id.localeCompare(b.npc_id)) : [];
  }

  events(): EventSpec[] {
    return this.config
      ? [...this.config.events].sort((a, b) => a.event_time.localeCompare(b.event_time))
      : [];
  }

  agentName(id: string): string {
    const agent = this.config?.agents.find((a) => a.agent_id === id);
    if (agent) return agent.name;
    const npc = this.config?.npcs.find((n) => n.npc_id === id);
    return npc ? npc.identity || npc.npc_id : id;
  }

  agentAvatar(id: string): number {
    return this.config?.agents.find((a) => a.agent_id === id)?.avatar ?? 0;
  }

  // tick index whose window contains the given instant, for hover scrubbing
  tickOf(timeIso: string): number | null {
    if (!this.config) return null;
    const start = new Date(this.config.simulation.start_time).getTime();
    const end = new Date(this.config.simulation.end_time).getTime();
    const interval = this.config.simulation.tick_interval * 60 * 1000;
    const at = new Date(timeIso).getTime();
    if (at < start || interval <= 0) return null;
    const tick = Math.floor((at - start) / interval);
    const count = Math.floor((end - start) / interval);
    return tick < count ? tick : null;
  }
}
