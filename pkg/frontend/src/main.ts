// Wiring: one store, one resumable stream subscription, views re-render on
// store changes. A hard refresh rebuilds the identical view from the API
// and the stream alone.

import { ApiClient } from "./api.js";
import { element } from "./format.js";
import { subscribeStream } from "./sse.js";
import { RunStore } from "./store.js";
import { renderAvatars } from "./views/avatars.js";
import { renderCalendar } from "./views/calendar.js";
import { renderFeed } from "./views/feed.js";
import { renderHidden } from "./views/hidden.js";
import { renderNetwork } from "./views/network.js";
import { mountReasoning } from "./views/reasoning.js";
import { renderSettings } from "./views/settings.js";
import { renderTimeline } from "./views/timeline.js";

const api = new ApiClient("");
const store = new RunStore();

const app = document.getElementById("app")!;
const settingsPanel = element("section", "panel settings-panel");
const avatarsPanel = element("section", "panel avatars-panel");
const timelinePanel = element("section", "panel timeline-panel");
const calendarPanel = element("section", "panel calendar-panel");
const feedPanel = element("section", "panel feed-panel");
const reasoningPanel = element("section", "panel reasoning-panel");
const rightPanel = element("section", "panel right-panel");
app.append(settingsPanel, avatarsPanel, timelinePanel, calendarPanel, feedPanel, reasoningPanel, rightPanel);
mountReasoning(reasoningPanel);

function renderRightPanel(): void {
  rightPanel.replaceChildren();
  const toggle = element("div", "panel-toggle");
  const networkButton = element("button", "tab", "Follow Network");
  const hiddenButton = element("button", "tab", "Hidden Reasoning");
  (store.view.right_panel_mode === "FollowNetwork" ? networkButton : hiddenButton).classList.add("active");
  networkButton.onclick = () => store.setView({ right_panel_mode: "FollowNetwork" });
  hiddenButton.onclick = () => store.setView({ right_panel_mode: "HiddenReasoning" });
  toggle.append(networkButton, hiddenButton);
  rightPanel.append(toggle);
  const body = element("div", "right-body");
  rightPanel.append(body);
  if (store.view.right_panel_mode === "FollowNetwork") renderNetwork(body, store);
  else renderHidden(body, store);
}

let scheduled = false;
function renderAll(): void {
  if (scheduled) return;
  scheduled = true;
  requestAnimationFrame(() => {
    scheduled = false;
    renderSettings(settingsPanel, store, api);
    renderAvatars(avatarsPanel, store, api);
    renderTimeline(timelinePanel, store, api);
    renderCalendar(calendarPanel, store, api);
    renderFeed(feedPanel, store, api);
    renderRightPanel();
  });
}

store.subscribe(renderAll);

let streamHandle: { close(): void; done: Promise<void> } | null = null;
let streamOpen = false;

function openStream(): void {
  if (streamOpen) return;
  streamOpen = true;
  streamHandle = subscribeStream("", store.lastSeq + 1, (event) => {
    if (event.event === "run_state_changed") {
      const previous = store.runState?.run_id;
      store.handleStreamEvent(event);
      const next = store.runState?.run_id;
      if (previous && next && previous !== next) {
        // reset happened: rebuild from scratch
        store.reset();
        void bootstrap();
      }
    } else {
      store.handleStreamEvent(event);
    }
  });
  void streamHandle.done.then(() => {
    streamOpen = false;
  });
}

// the stream ends when the run is Finished or Idle; reopen whenever the
// run is live again (dedup by sequence makes reopening idempotent)
store.subscribe(() => {
  if (store.runState?.status === "Running") openStream();
});

async function bootstrap(): Promise<void> {
  store.setConfig(await api.getConfig());
  store.setRunState(await api.runState());
  openStream();
}

void bootstrap();
