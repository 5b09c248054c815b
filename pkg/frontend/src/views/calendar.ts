// Calendar: dates across, hours down; daily activities plain, social
// behaviors gray-backed; importance slider + numeric input; daily/social
// checkboxes; hovering the timeline highlights the matching cells; clicking
// a social cell focuses its spark in the Sparkle view.

import type { ApiClient } from "../api.js";
import type { RunStore } from "../store.js";
import { aoeParts, element } from "../format.js";
import { showReasoning } from "./reasoning.js";

export function renderCalendar(root: HTMLElement, store: RunStore, api: ApiClient): void {
  root.replaceChildren();
  const header = element("div", "calendar-header");
  header.append(element("h2", "panel-title", "Calendar"));

  // agent filter: all agents or one
  const agentSelect = element("select") as HTMLSelectElement;
  const allOption = element("option") as HTMLOptionElement;
  allOption.value = "";
  allOption.textContent = "all agents";
  agentSelect.append(allOption);
  for (const agent of store.agents()) {
    const option = element("option") as HTMLOptionElement;
    option.value = agent.agent_id;
    option.textContent = agent.name;
    agentSelect.append(option);
  }
  agentSelect.value = store.view.selected_agent ?? "";
  agentSelect.onchange = () => store.setView({ selected_agent: agentSelect.value || null });
  header.append(agentSelect);

  // importance slider with a numeric twin
  const slider = element("input") as HTMLInputElement;
  slider.type = "range";
  slider.min = "1";
  slider.max = "10";
  slider.value = String(store.view.min_importance);
  const number = element("input", "importance-number") as HTMLInputElement;
  number.type = "number";
  number.min = "1";
  number.max = "10";
  number.value = String(store.view.min_importance);
  slider.oninput = () => store.setView({ min_importance: Number(slider.value) });
  number.onchange = () => store.setView({ min_importance: Number(number.value) });
  const importance = element("label", "importance");
  importance.append(element("span", "field-label", "importance ≥"), slider, number);
  header.append(importance);

  const dailyBox = element("input") as HTMLInputElement;
  dailyBox.type = "checkbox";
  dailyBox.checked = store.view.kind_filters.daily;
  dailyBox.onchange = () =>
    store.setView({ kind_filters: { ...store.view.kind_filters, daily: dailyBox.checked } });
  const socialBox = element("input") as HTMLInputElement;
  socialBox.type = "checkbox";
  socialBox.checked = store.view.kind_filters.social;
  socialBox.onchange = () =>
    store.setView({ kind_filters: { ...store.view.kind_filters, social: socialBox.checked } });
  const boxes = element("span", "kind-filters");
  const dailyLabel = element("label", "");
  dailyLabel.append(dailyBox, element("span", "", "daily"));
  const socialLabel = element("label", "");
  socialLabel.append(socialBox, element("span", "", "social"));
  boxes.append(dailyLabel, socialLabel);
  header.append(boxes);
  root.append(header);

  const buckets = store.calendar({
    agent: store.view.selected_agent,
    minImportance: store.view.min_importance,
    kinds: store.view.kind_filters,
  });
  const dates = [...new Set(buckets.map((b) => b.date))].sort();
  if (!dates.length) {
    root.append(element("p", "hint", "No behaviors yet."));
    return;
  }
  const byKey = new Map(buckets.map((b) => [`${b.date}|${b.hour}`, b]));
  const hover = store.view.hover_time ? aoeParts(store.view.hover_time) : null;

  const grid = element("table", "calendar-grid");
  const head = element("tr", "");
  head.append(element("th", "", "hour"));
  for (const date of dates) head.append(element("th", "", date.slice(5)));
  grid.append(head);

  for (let hour = 0; hour < 24; hour++) {
    const row = element("tr", "");
    row.append(element("th", "", String(hour).padStart(2, "0")));
    for (const date of dates) {
      const cell = element("td", "calendar-cell");
      if (hover && hover.date === date && hover.hour === hour) cell.classList.add("hovered");
      const bucket = byKey.get(`${date}|${hour}`);
      if (bucket) {
        for (const record of bucket.records) {
          const chip = element(
            "div",
            record.kind === "daily" ? "cal-entry daily" : "cal-entry social",
            `${store.agentName(record.agent)}: ${record.kind === "daily" ? record.detail : record.kind}`,
          );
          chip.title = record.detail;
          if (record.kind === "follow") {
            // a follow cell opens the rationale behind the edge
            chip.onclick = () => void showReasoning(api, store, record.reasoning_ref);
          } else if (record.kind !== "daily" && record.target) {
            // post/like/reply cells focus their spark in the Sparkle view
            const spark = record.target;
            chip.onclick = () =>
              store.setView({ focused_spark: spark, right_panel_mode: "HiddenReasoning" });
          }
          cell.append(chip);
        }
      }
      row.append(cell);
    }
    grid.append(row);
  }
  root.append(grid);
}
