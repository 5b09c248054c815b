// Follow Network: a small force-directed node graph on canvas. Hovering
// the timeline scrubs which edges exist (edges appear at their creation
// tick), so the network's growth can be watched over time.

import type { RunStore } from "../store.js";
import { avatarGlyph, element } from "../format.js";

interface NodeState {
  id: string;
  x: number;
  y: number;
  vx: number;
  vy: number;
}

const nodeStates = new Map<string, NodeState>();

export function renderNetwork(root: HTMLElement, store: RunStore): void {
  root.replaceChildren();
  root.append(element("h2", "panel-title", "Follow Network"));

  const hoverTick = store.view.hover_time ? store.tickOf(store.view.hover_time) : null;
  const tickCap = hoverTick ?? store.runState?.current_tick ?? null;
  const edges = store.networkAt(tickCap);
  const caption = element(
    "p",
    "hint",
    tickCap === null
      ? `${edges.length} follow edge(s)`
      : `${edges.length} follow edge(s) at tick ${tickCap}`,
  );
  root.append(caption);

  const ids = new Set<string>();
  for (const agent of store.agents()) ids.add(agent.agent_id);
  for (const edge of edges) {
    ids.add(edge.follower);
    ids.add(edge.followee);
  }

  const canvas = element("canvas", "network-canvas") as HTMLCanvasElement;
  canvas.width = 360;
  canvas.height = 280;
  root.append(canvas);

  // seed positions deterministically on a circle, then relax
  const list = [...ids].sort();
  list.forEach((id, index) => {
    if (!nodeStates.has(id)) {
      const angle = (index / Math.max(list.length, 1)) * 2 * Math.PI;
      nodeStates.set(id, {
        id,
        x: 180 + 100 * Math.cos(angle),
        y: 140 + 100 * Math.sin(angle),
        vx: 0,
        vy: 0,
      });
    }
  });

  const nodes = list.map((id) => nodeStates.get(id)!);
  for (let step = 0; step < 120; step++) relax(nodes, edges);
  draw(canvas, store, nodes, edges);
}

function relax(nodes: NodeState[], edges: { follower: string; followee: string }[]): void {
  const byId = new Map(nodes.map((n) => [n.id, n]));
  for (const a of nodes) {
    for (const b of nodes) {
      if (a === b) continue;
      const dx = a.x - b.x;
      const dy = a.y - b.y;
      const d2 = Math.max(dx * dx + dy * dy, 25);
      const push = 1800 / d2;
      a.vx += (dx / Math.sqrt(d2)) * push;
      a.vy += (dy / Math.sqrt(d2)) * push;
    }
  }
  for (const edge of edges) {
    const a = byId.get(edge.follower);
    const b = byId.get(edge.followee);
    if (!a || !b) continue;
    const dx = b.x - a.x;
    const dy = b.y - a.y;
    const d = Math.max(Math.sqrt(dx * dx + dy * dy), 1);
    const pull = (d - 90) * 0.02;
    a.vx += (dx / d) * pull;
    a.vy += (dy / d) * pull;
    b.vx -= (dx / d) * pull;
    b.vy -= (dy / d) * pull;
  }
  for (const node of nodes) {
    node.vx += (180 - node.x) * 0.002;
    node.vy += (140 - node.y) * 0.002;
    node.x += node.vx * 0.4;
    node.y += node.vy * 0.4;
    node.vx *= 0.5;
    node.vy *= 0.5;
    node.x = Math.min(Math.max(node.x, 20), 340);
    node.y = Math.min(Math.max(node.y, 20), 260);
  }
}

function draw(
  canvas: HTMLCanvasElement,
  store: RunStore,
  nodes: NodeState[],
  edges: { follower: string; followee: string }[],
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const byId = new Map(nodes.map((n) => [n.id, n]));

  ctx.strokeStyle = "#7a8aa6";
  ctx.fillStyle = "#7a8aa6";
  for (const edge of edges) {
    const a = byId.get(edge.follower);
    const b = byId.get(edge.followee);
    if (!a || !b) continue;
    ctx.beginPath();
    ctx.moveTo(a.x, a.y);
    ctx.lineTo(b.x, b.y);
    ctx.stroke();
    // arrowhead toward the followee
    const angle = Math.atan2(b.y - a.y, b.x - a.x);
    const tipX = b.x - 16 * Math.cos(angle);
    const tipY = b.y - 16 * Math.sin(angle);
    ctx.beginPath();
    ctx.moveTo(tipX, tipY);
    ctx.lineTo(tipX - 7 * Math.cos(angle - 0.4), tipY - 7 * Math.sin(angle - 0.4));
    ctx.lineTo(tipX - 7 * Math.cos(angle + 0.4), tipY - 7 * Math.sin(angle + 0.4));
    ctx.fill();
  }

  ctx.font = "16px sans-serif";
  ctx.textAlign = "center";
  ctx.textBaseline = "middle";
  for (const node of nodes) {
    ctx.fillStyle = "#ffffff";
    ctx.beginPath();
    ctx.arc(node.x, node.y, 14, 0, 2 * Math.PI);
    ctx.fill();
    ctx.strokeStyle = "#44506a";
    ctx.stroke();
    ctx.fillStyle = "#000000";
    ctx.fillText(avatarGlyph(store.agentAvatar(node.id)), node.x, node.y);
  }
}
