// Timeline: run progress, event markers (orange rectangles for public
// events, avatar markers for private ones), event creation at a clicked
// time, hover scrubbing, and the play/pause/reset controls.

import type { ApiClient } from "../api.js";
import type { RunStore } from "../store.js";
import { avatarGlyph, element, shortTime } from "../format.js";

export function renderTimeline(root: HTMLElement, store: RunStore, api: ApiClient): void {
  root.replaceChildren();
  const config = store.config;
  if (!config) return;
  const start = new Date(config.simulation.start_time).getTime();
  const end = new Date(config.simulation.end_time).getTime();
  const span = Math.max(end - start, 1);

  const header = element("div", "timeline-header");
  header.append(element("h2", "panel-title", "Timeline"));
  const hoverLabel = element("span", "hover-label", store.view.hover_time ? shortTime(store.view.hover_time) : "");
  header.append(hoverLabel);

  // play toggles to pause; reset clears the run
  const controls = element("div", "run-controls");
  const status = store.runState?.status ?? "Idle";
  const play = element("button", "primary play", status === "Running" ? "❚❚" : "▶");
  play.title = status === "Running" ? "pause" : "play";
  play.onclick = async () => {
    try {
      if (status === "Running") await api.pause();
      else if (status === "Paused") await api.resume();
      else if (status === "Idle") await api.start();
      store.setRunState(await api.runState());
    } catch (err: any) {
      hoverLabel.textContent = String(err.message);
    }
  };
  const reset = element("button", "secondary", "⟲");
  reset.title = "reset";
  reset.onclick = async () => {
    await api.reset();
    store.reset();
    store.setRunState(await api.runState());
    store.setConfig(await api.getConfig());
  };
  controls.append(play, reset, element("span", "status-chip", status));
  header.append(controls);
  root.append(header);

  const bar = element("div", "timeline-bar");
  const progress = element("div", "timeline-progress");
  const tickTime = store.runState ? new Date(store.runState.tick_time).getTime() : start;
  progress.style.width = `${Math.min(Math.max(((tickTime - start) / span) * 100, 0), 100)}%`;
  bar.append(progress);

  for (const event of store.events()) {
    const at = new Date(event.event_time).getTime();
    const left = ((at - start) / span) * 100;
    const marker =
      event.audience === "all"
        ? element("div", "event-marker public")
        : element("div", "event-marker private", avatarGlyph(store.agentAvatar(event.audience)));
    marker.style.left = `${left}%`;
    marker.title = `${shortTime(event.event_time)} — ${event.description}`;
    bar.append(marker);
  }

  bar.onmousemove = (mouse) => {
    const rect = bar.getBoundingClientRect();
    const ratio = Math.min(Math.max((mouse.clientX - rect.left) / rect.width, 0), 1);
    const at = new Date(start + ratio * span).toISOString();
    store.setView({ hover_time: at });
  };
  bar.onmouseleave = () => store.setView({ hover_time: null });
  bar.onclick = (mouse) => {
    const rect = bar.getBoundingClientRect();
    const ratio = Math.min(Math.max((mouse.clientX - rect.left) / rect.width, 0), 1);
    const at = new Date(start + ratio * span);
    openEventForm(root, store, api, at.toISOString());
  };
  root.append(bar);
}

function openEventForm(root: HTMLElement, store: RunStore, api: ApiClient, atIso: string): void {
  root.querySelector(".event-form")?.remove();
  const form = element("div", "event-form");
  form.append(element("strong", "", `New event at ${shortTime(atIso)}`));
  const description = element("input") as HTMLInputElement;
  description.placeholder = "describe the event";
  form.append(description);

  // audience checkbox: all agents, or one specific agent
  const allBox = element("input") as HTMLInputElement;
  allBox.type = "checkbox";
  allBox.checked = true;
  const allLabel = element("label", "audience");
  allLabel.append(allBox, element("span", "", "perceived by all agents"));
  const agentSelect = element("select") as HTMLSelectElement;
  for (const agent of store.agents()) {
    const option = element("option") as HTMLOptionElement;
    option.value = agent.agent_id;
    option.textContent = agent.name;
    agentSelect.append(option);
  }
  agentSelect.disabled = true;
  allBox.onchange = () => (agentSelect.disabled = allBox.checked);
  form.append(allLabel, agentSelect);

  const error = element("div", "inline-error");
  const save = element("button", "primary", "Add event");
  save.onclick = async () => {
    error.textContent = "";
    try {
      await api.addEvent({
        event_id: `event-${Date.now()}`,
        event_time: atIso,
        description: description.value || "(unnamed event)",
        audience: allBox.checked ? "all" : agentSelect.value,
      });
      store.setConfig(await api.getConfig());
      form.remove();
    } catch (err: any) {
      error.textContent =
        err.status === 409 ? `rejected: ${err.message}` : String(err.message);
    }
  };
  const cancel = element("button", "secondary", "Cancel");
  cancel.onclick = () => form.remove();
  form.append(save, cancel, error);
  root.append(form);
}
