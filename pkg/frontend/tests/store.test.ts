import { describe, expect, it } from "vitest";

import { RunStore } from "../src/store.js";
import type {
  BehaviorRecord,
  ConfigDocument,
  EdgeRecord,
  SparkRecord,
  TraceRecord,
} from "../src/types.js";

let seqCounter = 0;

function behavior(partial: Partial<BehaviorRecord>): BehaviorRecord {
  return {
    seq: seqCounter++,
    type: "behavior",
    record_id: `b-${seqCounter}`,
    agent: "ana",
    tick: 0,
    at: "2024-07-01T00:00:00-12:00",
    kind: "daily",
    detail: "sleeping",
    target: null,
    importance: 1,
    reasoning_ref: "",
    ...partial,
  };
}

function spark(partial: Partial<SparkRecord>): SparkRecord {
  return {
    seq: seqCounter++,
    type: "spark",
    spark_id: "s-000000",
    author: "ana",
    posted_at: "2024-07-01T09:00:00-12:00",
    content: "hello",
    tick: 9,
    ...partial,
  };
}

function atTick(tick: number): string {
  return `2024-07-01T${String(tick).padStart(2, "0")}:00:00-12:00`;
}

const baseConfig: ConfigDocument = {
  simulation: {
    start_time: "2024-07-01T00:00:00-12:00",
    end_time: "2024-07-02T00:00:00-12:00",
    tick_interval: 60,
    recommendation_threshold: 7,
    random_seed: 1,
    retrieval_weights: [1, 1, 1],
    recency_decay: 0.995,
    retrieval_top_k: 5,
  },
  agents: [
    {
      agent_id: "ana",
      name: "Ana",
      age: "",
      gender: "",
      residency: "",
      innate: "",
      job: "",
      lifestyle: "",
      avatar: 2,
      habits: { followers: "", post_frequency: "", post_content: "", engagement: "" },
    },
  ],
  npcs: [],
  events: [],
};

describe("idempotent stream application", () => {
  it("duplicate events cause no visual change", () => {
    const store = new RunStore();
    const record = behavior({ seq: 0 });
    store.applyRecord(record);
    store.applyRecord(record); // duplicate by sequence
    expect(store.behaviors).toHaveLength(1);
  });

  it("likes and replies fold into their spark exactly once", () => {
    const store = new RunStore();
    store.applyRecord(spark({ seq: 0, spark_id: "s-1" }));
    const like = behavior({ seq: 1, kind: "like", target: "s-1", agent: "bob" });
    store.applyRecord(like);
    store.applyRecord(like);
    const reply = behavior({ seq: 2, kind: "reply", target: "s-1", agent: "cara", detail: "nice" });
    store.applyRecord(reply);
    const assembled = store.sparks.get("s-1")!;
    expect(assembled.likes).toHaveLength(1);
    expect(assembled.replies).toEqual([
      { author: "cara", replied_at: reply.at, content: "nice", reasoning_ref: "" },
    ]);
  });
});

describe("calendar selector", () => {
  it("shows a continuous activity only at its start bucket", () => {
    const store = new RunStore();
    for (let tick = 0; tick < 4; tick++) {
      store.applyRecord(
        behavior({ seq: tick, tick, at: atTick(tick), detail: "sleeping", record_id: `b-${tick}` }),
      );
    }
    store.applyRecord(
      behavior({ seq: 9, tick: 4, at: atTick(4), detail: "breakfast", record_id: "b-wake" }),
    );
    const buckets = store.calendar();
    const details = buckets.flatMap((b) => b.records.map((r) => r.detail));
    expect(details).toEqual(["sleeping", "breakfast"]);
  });

  it("a repeated activity after a gap shows again", () => {
    const store = new RunStore();
    store.applyRecord(behavior({ seq: 0, tick: 0, at: atTick(0), detail: "working" }));
    store.applyRecord(behavior({ seq: 1, tick: 1, at: atTick(1), detail: "lunch" }));
    store.applyRecord(behavior({ seq: 2, tick: 2, at: atTick(2), detail: "working" }));
    expect(store.calendar().flatMap((b) => b.records.map((r) => r.detail))).toEqual([
      "working",
      "lunch",
      "working",
    ]);
  });

  it("min importance and kind filters match the server semantics", () => {
    const store = new RunStore();
    store.applyRecord(behavior({ seq: 0, tick: 0, at: atTick(0), detail: "mundane", importance: 1 }));
    store.applyRecord(
      behavior({
        seq: 1,
        tick: 1,
        at: atTick(1),
        kind: "post",
        detail: "big news",
        target: "s-1",
        importance: 8,
      }),
    );
    const important = store.calendar({ minImportance: 8 });
    expect(important.flatMap((b) => b.records.map((r) => r.detail))).toEqual(["big news"]);
    const dailyOnly = store.calendar({ kinds: { daily: true, social: false } });
    expect(dailyOnly.flatMap((b) => b.records.map((r) => r.detail))).toEqual(["mundane"]);
  });

  it("buckets by AoE date and hour", () => {
    const store = new RunStore();
    store.applyRecord(behavior({ seq: 0, tick: 23, at: "2024-07-01T23:30:00-12:00", detail: "late" }));
    const [bucket] = store.calendar();
    expect(bucket.date).toBe("2024-07-01");
    expect(bucket.hour).toBe(23);
  });
});

describe("network and hidden selectors", () => {
  it("network_at filters by creation tick and grows monotonically", () => {
    const store = new RunStore();
    const edge = (seq: number, tick: number): EdgeRecord => ({
      seq,
      type: "edge",
      follower: `f${seq}`,
      followee: "star",
      created_at_tick: tick,
      reasoning_ref: "",
    });
    store.applyRecord(edge(0, 2));
    store.applyRecord(edge(1, 5));
    expect(store.networkAt(0)).toHaveLength(0);
    expect(store.networkAt(2)).toHaveLength(1);
    expect(store.networkAt(9)).toHaveLength(2);
    expect(store.networkAt(null)).toHaveLength(2);
  });

  it("hidden lists declined and skipped traces for the spark", () => {
    const store = new RunStore();
    const trace = (seq: number, polarity: TraceRecord["polarity"]): TraceRecord => ({
      seq,
      type: "trace",
      trace_id: `t-${seq}`,
      subject: "bob",
      tick: 3,
      action_kind: "like",
      target: "s-1",
      spark_id: "s-1",
      polarity,
      reasoning: "because",
      prompt_hash: "",
    });
    store.applyRecord(trace(0, "declined"));
    store.applyRecord(trace(1, "acted"));
    store.applyRecord(trace(2, "skipped"));
    expect(store.hidden("s-1").map((t) => t.trace_id)).toEqual(["t-0", "t-2"]);
  });
});

describe("config changes from the stream", () => {
  it("injected events become visible in the timeline data", () => {
    const store = new RunStore();
    store.setConfig(JSON.parse(JSON.stringify(baseConfig)));
    store.applyRecord({
      seq: 0,
      type: "config_change",
      action: "upsert",
      entity: "event",
      entity_id: "surprise",
      effective_tick: 3,
      payload: {
        event_id: "surprise",
        event_time: "2024-07-01T10:00:00-12:00",
        description: "surprise parade",
        audience: "all",
      },
    } as any);
    expect(store.events().map((e) => e.event_id)).toEqual(["surprise"]);
  });

  it("tickOf maps times to tick windows", () => {
    const store = new RunStore();
    store.setConfig(JSON.parse(JSON.stringify(baseConfig)));
    expect(store.tickOf("2024-07-01T00:30:00-12:00")).toBe(0);
    expect(store.tickOf("2024-07-01T10:00:00-12:00")).toBe(10);
    expect(store.tickOf("2024-06-30T10:00:00-12:00")).toBeNull();
    expect(store.tickOf("2024-07-02T10:00:00-12:00")).toBeNull();
  });
});
