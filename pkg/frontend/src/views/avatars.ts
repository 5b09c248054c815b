// Avatar Panel and Basic Information Panel: pick an agent (darker border on
// selection), edit its natural-language fields, add regular agents and NPCs
// with the two "+" buttons.

import type { ApiClient } from "../api.js";
import type { RunStore } from "../store.js";
import type { AgentProfile, NpcProfile } from "../types.js";
import { AVATARS, avatarGlyph, element } from "../format.js";

export function renderAvatars(root: HTMLElement, store: RunStore, api: ApiClient): void {
  root.replaceChildren();
  root.append(element("h2", "panel-title", "Agents"));
  const strip = element("div", "avatar-strip");

  for (const agent of store.agents()) {
    const button = element("button", "avatar", avatarGlyph(agent.avatar));
    button.title = agent.name;
    if (store.view.selected_agent === agent.agent_id) button.classList.add("selected");
    button.onclick = () =>
      store.setView({
        selected_agent: store.view.selected_agent === agent.agent_id ? null : agent.agent_id,
      });
    strip.append(button);
  }
  for (const npc of store.npcs()) {
    const button = element("button", "avatar npc", "📢");
    button.title = npc.identity || npc.npc_id;
    if (store.view.selected_agent === npc.npc_id) button.classList.add("selected");
    button.onclick = () =>
      store.setView({
        selected_agent: store.view.selected_agent === npc.npc_id ? null : npc.npc_id,
      });
    strip.append(button);
  }

  const addAgent = element("button", "avatar add", "+");
  addAgent.title = "new agent";
  addAgent.onclick = () => {
    const id = `agent-${Date.now() % 100000}`;
    store.setView({ selected_agent: id });
    draft = { agent_id: id, name: "New Agent" };
    renderAvatars(root, store, api);
  };
  const addNpc = element("button", "avatar add npc", "+");
  addNpc.title = "new NPC";
  addNpc.onclick = () => {
    const id = `npc-${Date.now() % 100000}`;
    store.setView({ selected_agent: id });
    npcDraft = { npc_id: id, identity: "" };
    renderAvatars(root, store, api);
  };
  strip.append(addAgent, addNpc);
  root.append(strip);

  const info = element("div", "basic-info");
  const selected = store.view.selected_agent;
  const agent =
    store.agents().find((a) => a.agent_id === selected) ??
    (draft && draft.agent_id === selected ? (draft as AgentProfile) : undefined);
  const npc =
    store.npcs().find((n) => n.npc_id === selected) ??
    (npcDraft && npcDraft.npc_id === selected ? (npcDraft as NpcProfile) : undefined);
  if (agent) renderAgentForm(info, agent, store, api);
  else if (npc) renderNpcForm(info, npc, store, api);
  else info.append(element("p", "hint", "Select an avatar to edit its profile."));
  root.append(info);
}

let draft: Partial<AgentProfile> | null = null;
let npcDraft: Partial<NpcProfile> | null = null;

function textInput(value: string): HTMLInputElement {
  const input = element("input") as HTMLInputElement;
  input.type = "text";
  input.value = value;
  return input;
}

function renderAgentForm(root: HTMLElement, agent: AgentProfile | Partial<AgentProfile>, store: RunStore, api: ApiClient): void {
  root.append(element("h3", "panel-subtitle", agent.name || "New agent"));
  const habits = agent.habits ?? { followers: "", post_frequency: "", post_content: "", engagement: "" };
  const inputs: Record<string, HTMLInputElement> = {
    name: textInput(agent.name ?? ""),
    age: textInput(agent.age ?? ""),
    gender: textInput(agent.gender ?? ""),
    residency: textInput(agent.residency ?? ""),
    innate: textInput(agent.innate ?? ""),
    job: textInput(agent.job ?? ""),
    lifestyle: textInput(agent.lifestyle ?? ""),
    followers: textInput(habits.followers),
    post_frequency: textInput(habits.post_frequency),
    post_content: textInput(habits.post_content),
    engagement: textInput(habits.engagement),
  };
  for (const [label, input] of Object.entries(inputs)) {
    const row = element("label", "field");
    row.append(element("span", "field-label", label.replace("_", " ")), input);
    root.append(row);
  }

  const picker = element("div", "avatar-picker");
  let avatar = agent.avatar ?? 0;
  AVATARS.forEach((glyph, index) => {
    const choice = element("button", "avatar small", glyph);
    if (index === avatar) choice.classList.add("selected");
    choice.onclick = () => {
      avatar = index;
      picker.querySelectorAll(".selected").forEach((n) => n.classList.remove("selected"));
      choice.classList.add("selected");
    };
    picker.append(choice);
  });
  root.append(element("span", "field-label", "avatar"), picker);

  const error = element("div", "inline-error");
  const save = element("button", "primary", "Save agent");
  save.onclick = async () => {
    error.textContent = "";
    try {
      await api.upsertAgent({
        agent_id: agent.agent_id!,
        name: inputs.name.value,
        age: inputs.age.value,
        gender: inputs.gender.value,
        residency: inputs.residency.value,
        innate: inputs.innate.value,
        job: inputs.job.value,
        lifestyle: inputs.lifestyle.value,
        avatar,
        habits: {
          followers: inputs.followers.value,
          post_frequency: inputs.post_frequency.value,
          post_content: inputs.post_content.value,
          engagement: inputs.engagement.value,
        },
      });
      draft = null;
      store.setConfig(await api.getConfig());
    } catch (err: any) {
      error.textContent = err.status === 409 ? "pause first" : String(err.message);
    }
  };
  root.append(save, error);
}

function renderNpcForm(root: HTMLElement, npc: NpcProfile | Partial<NpcProfile>, store: RunStore, api: ApiClient): void {
  root.append(element("h3", "panel-subtitle", npc.identity || "New NPC"));
  const identity = textInput(npc.identity ?? "");
  const identityRow = element("label", "field");
  identityRow.append(element("span", "field-label", "identity"), identity);
  root.append(identityRow);

  const posts = element("textarea", "npc-posts") as HTMLTextAreaElement;
  posts.rows = 4;
  posts.placeholder = "2024-07-01T10:00 | post content";
  posts.value = (npc.scheduled_posts ?? [])
    .map((p) => `${p.post_time.slice(0, 16)} | ${p.content}`)
    .join("\n");
  root.append(element("span", "field-label", "scheduled posts (time | content)"), posts);

  const error = element("div", "inline-error");
  const save = element("button", "primary", "Save NPC");
  save.onclick = async () => {
    error.textContent = "";
    const scheduled = posts.value
      .split("\n")
      .map((line) => line.trim())
      .filter(Boolean)
      .map((line) => {
        const [time, ...rest] = line.split("|");
        return { post_time: `${time.trim()}:00-12:00`, content: rest.join("|").trim() };
      });
    try {
      await api.upsertNpc({ npc_id: npc.npc_id!, identity: identity.value, scheduled_posts: scheduled });
      npcDraft = null;
      store.setConfig(await api.getConfig());
    } catch (err: any) {
      error.textContent = err.status === 409 ? "pause first" : String(err.message);
    }
  };
  root.append(save, error);
}
