// Setting Panel: environment timing, interval, threshold, seed.

import type { ApiClient } from "../api.js";
import type { RunStore } from "../store.js";
import { element, fromAoeIso, toAoeIso } from "../format.js";

export function renderSettings(root: HTMLElement, store: RunStore, api: ApiClient): void {
  root.replaceChildren();
  const config = store.config;
  if (!config) return;
  const running = store.runState?.status === "Running";

  root.append(element("h2", "panel-title", "Settings"));
  const form = element("div", "settings-form");

  const fields: [string, HTMLInputElement][] = [];
  const addField = (label: string, input: HTMLInputElement) => {
    const row = element("label", "field");
    row.append(element("span", "field-label", label), input);
    form.append(row);
    fields.push([label, input]);
    return input;
  };

  const start = element("input") as HTMLInputElement;
  start.type = "datetime-local";
  start.value = fromAoeIso(config.simulation.start_time);
  addField("Start (AoE)", start);

  const end = element("input") as HTMLInputElement;
  end.type = "datetime-local";
  end.value = fromAoeIso(config.simulation.end_time);
  addField("End (AoE)", end);

  const interval = element("input") as HTMLInputElement;
  interval.type = "number";
  interval.min = "1";
  interval.value = String(config.simulation.tick_interval);
  addField("Interval (min)", interval);

  const threshold = element("input") as HTMLInputElement;
  threshold.type = "number";
  threshold.min = "1";
  threshold.max = "10";
  threshold.value = String(config.simulation.recommendation_threshold);
  addField("Recommendation threshold", threshold);

  const seed = element("input") as HTMLInputElement;
  seed.type = "number";
  seed.value = String(config.simulation.random_seed);
  addField("Seed", seed);

  const error = element("div", "inline-error");
  const save = element("button", "primary", "Save settings");
  save.disabled = running;
  if (running) save.title = "pause first";
  save.onclick = async () => {
    error.textContent = "";
    const document: typeof config = {
      ...config,
      simulation: {
        ...config.simulation,
        start_time: toAoeIso(start.value),
        end_time: toAoeIso(end.value),
        tick_interval: Number(interval.value),
        recommendation_threshold: Number(threshold.value),
        random_seed: Number(seed.value),
      },
    };
    try {
      await api.putConfig(document);
      store.setConfig(await api.getConfig());
    } catch (err: any) {
      error.textContent = err.status === 409 ? "pause first, then edit" : String(err.message);
    }
  };
  form.append(save, error);
  root.append(form);
}
