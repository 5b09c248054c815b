// Reasoning view: the rationale behind one behavior, fetched on demand.

import type { ApiClient } from "../api.js";
import type { RunStore } from "../store.js";
import { element } from "../format.js";

let panel: HTMLElement | null = null;

export function mountReasoning(root: HTMLElement): void {
  panel = root;
  root.append(element("h2", "panel-title", "Reasoning"));
  root.append(element("p", "hint", "Click a like/reply avatar or a follow entry to see why."));
}

export async function showReasoning(api: ApiClient, store: RunStore, refId: string): Promise<void> {
  if (!panel) return;
  panel.replaceChildren(element("h2", "panel-title", "Reasoning"));
  try {
    const trace = refId ? await api.reasoning(refId) : null;
    if (!trace) {
      panel.append(element("p", "hint", "No recorded reasoning for this item."));
      return;
    }
    const meta = element("div", "trace-meta");
    meta.append(
      element("span", "chip", store.agentName(trace.subject)),
      element("span", "chip", trace.action_kind),
      element("span", `chip ${trace.polarity}`, trace.polarity),
      element("span", "chip", `tick ${trace.tick}`),
    );
    panel.append(meta, element("p", "trace-text", trace.reasoning));
  } catch (err: any) {
    panel.append(element("p", "inline-error", String(err.message)));
  }
}
