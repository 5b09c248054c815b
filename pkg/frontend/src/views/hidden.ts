// Hidden Reasoning: why agents did NOT like / follow / reply to the
// focused spark, one row per (agent, kind).

import type { RunStore } from "../store.js";
import { avatarGlyph, element } from "../format.js";

export function renderHidden(root: HTMLElement, store: RunStore): void {
  root.replaceChildren();
  root.append(element("h2", "panel-title", "Hidden Reasoning"));
  const sparkId = store.view.focused_spark;
  if (!sparkId) {
    root.append(element("p", "hint", "Click a social behavior in the calendar (or a spark) to see why others stayed away."));
    return;
  }
  const spark = store.sparks.get(sparkId);
  if (spark) {
    root.append(element("p", "hint", `“${spark.content.slice(0, 80)}${spark.content.length > 80 ? "…" : ""}”`));
  }
  const traces = store.hidden(sparkId);
  if (!traces.length) {
    root.append(element("p", "hint", "No declined decisions recorded for this spark."));
    return;
  }
  for (const trace of traces) {
    const row = element("div", "hidden-row");
    const head = element("div", "hidden-head");
    head.append(
      element("span", "avatar tiny", avatarGlyph(store.agentAvatar(trace.subject))),
      element("strong", "", store.agentName(trace.subject)),
      element("span", `chip ${trace.polarity}`, `no ${trace.action_kind}`),
    );
    row.append(head, element("p", "trace-text", trace.reasoning));
    root.append(row);
  }
}
