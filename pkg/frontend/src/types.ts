// Wire types for the /v1 API and the event stream.

export interface RunStateInfo {
  status: "Idle" | "Running" | "Paused" | "Finished";
  current_tick: number;
  tick_time: string;
  seed: number;
  run_id: string;
}

export interface SocialHabits {
  followers: string;
  post_frequency: string;
  post_content: string;
  engagement: string;
}

export interface AgentProfile {
  agent_id: string;
  name: string;
  age: string;
  gender: string;
  residency: string;
  innate: string;
  job: string;
  lifestyle: string;
  avatar: number;
  habits: SocialHabits;
}

export interface NpcProfile {
  npc_id: string;
  identity: string;
  scheduled_posts: { post_time: string; content: string }[];
}

export interface EventSpec {
  event_id: string;
  event_time: string;
  description: string;
  audience: string; // "all" or an agent_id
}

export interface ConfigDocument {
  simulation: {
    start_time: string;
    end_time: string;
    tick_interval: number;
    recommendation_threshold: number;
    random_seed: number;
    retrieval_weights: number[];
    recency_decay: number;
    retrieval_top_k: number;
  };
  agents: AgentProfile[];
  npcs: NpcProfile[];
  events: EventSpec[];
}

// Log records arriving over the stream (subset of fields the UI uses).

export interface BehaviorRecord {
  seq: number;
  type: "behavior";
  record_id: string;
  agent: string;
  tick: number;
  at: string;
  kind: "daily" | "post" | "like" | "follow" | "reply";
  detail: string;
  target: string | null;
  importance: number;
  reasoning_ref: string;
}

export interface TraceRecord {
  seq: number;
  type: "trace";
  trace_id: string;
  subject: string;
  tick: number;
  action_kind: string;
  target: string | null;
  spark_id: string | null;
  polarity: "acted" | "declined" | "skipped";
  reasoning: string;
  prompt_hash: string;
}

export interface SparkRecord {
  seq: number;
  type: "spark";
  spark_id: string;
  author: string;
  posted_at: string;
  content: string;
  tick: number;
}

export interface DeliveryRecord {
  seq: number;
  type: "delivery";
  spark_id: string;
  recipient: string;
  cause: string;
  score: number | null;
  tick: number;
}

export interface EdgeRecord {
  seq: number;
  type: "edge";
  follower: string;
  followee: string;
  created_at_tick: number;
  reasoning_ref: string;
}

export interface MemoryRecord {
  seq: number;
  type: "memory";
  memory_id: string;
  owner: string;
  created_at: string;
  kind: string;
  text: string;
  importance: number;
}

export interface ConfigChangeRecord {
  seq: number;
  type: "config_change";
  action: string;
  entity: string;
  entity_id: string;
  payload: unknown;
  effective_tick: number;
}

export interface OtherRecord {
  seq: number;
  type: "tick_begin" | "tick_commit" | "note";
  tick: number;
  [key: string]: unknown;
}

export type LogRecord =
  | BehaviorRecord
  | TraceRecord
  | SparkRecord
  | DeliveryRecord
  | EdgeRecord
  | MemoryRecord
  | ConfigChangeRecord
  | OtherRecord;

export interface StreamEvent {
  id: number | null; // log sequence number; null for auxiliary events
  event: string; // record type, run_state_changed, or end
  data: unknown;
}

export interface AssembledSpark {
  spark_id: string;
  author: string;
  posted_at: string;
  content: string;
  tick: number;
  likes: { agent: string; tick: number; reasoning_ref: string }[];
  replies: { author: string; replied_at: string; content: string; reasoning_ref: string }[];
}

export interface CalendarBucket {
  date: string;
  hour: number;
  records: BehaviorRecord[];
}

export interface ViewState {
  selected_agent: string | null;
  hover_time: string | null;
  min_importance: number;
  kind_filters: { daily: boolean; social: boolean };
  right_panel_mode: "FollowNetwork" | "HiddenReasoning";
  focused_spark: string | null;
}
