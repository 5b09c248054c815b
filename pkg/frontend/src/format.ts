// Display helpers. Simulation timestamps stay in AoE (UTC-12) everywhere;
// only the rendered text converts.

export const AVATARS = [
  "🦊", "🐼", "🦉", "🐙", "🦁", "🐧", "🦋", "🐢",
  "🐳", "🦜", "🐝", "🦔", "🐸", "🦩", "🐺", "🦥",
];

export function avatarGlyph(index: number): string {
  return AVATARS[((index % AVATARS.length) + AVATARS.length) % AVATARS.length];
}

export function aoeParts(iso: string): { date: string; hour: number; minute: number } {
  const shifted = new Date(new Date(iso).getTime() - 12 * 3600 * 1000);
  return {
    date: shifted.toISOString().slice(0, 10),
    hour: shifted.getUTCHours(),
    minute: shifted.getUTCMinutes(),
  };
}

export function shortTime(iso: string): string {
  const { date, hour, minute } = aoeParts(iso);
  return `${date} ${String(hour).padStart(2, "0")}:${String(minute).padStart(2, "0")} AoE`;
}

export function toAoeIso(localValue: string): string {
  // datetime-local input value interpreted as an AoE wall-clock time
  return `${localValue}:00-12:00`;
}

export function fromAoeIso(iso: string): string {
  const { date, hour, minute } = aoeParts(iso);
  return `${date}T${String(hour).padStart(2, "0")}:${String(minute).padStart(2, "0")}`;
}

export function element<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}
