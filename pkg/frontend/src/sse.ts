// Server-sent-events client over fetch streaming. Implemented by hand so
// the same code runs in the browser and in node-based tests (node has no
// EventSource). Resumes from the last applied sequence and leaves
// duplicate suppression to the store.

import type { StreamEvent } from "./types.js";

export interface StreamHandle {
  close(): void;
  done: Promise<void>;
}

function parseBlock(block: string): StreamEvent | null {
  let id: number | null = null;
  let event = "message";
  const dataLines: string[] = [];
  for (const line of block.split("\n")) {
    if (line.startsWith("id: ")) id = Number(line.slice(4));
    else if (line.startsWith("event: ")) event = line.slice(7);
    else if (line.startsWith("data: ")) dataLines.push(line.slice(6));
    else if (line.startsWith(":")) continue; // comment / keepalive
  }
  if (!dataLines.length && event === "message") return null;
  let data: unknown = null;
  if (dataLines.length) {
    try {
      data = JSON.parse(dataLines.join("\n"));
    } catch {
      data = dataLines.join("\n");
    }
  }
  return { id, event, data };
}

export function subscribeStream(
  baseUrl: string,
  fromSequence: number,
  onEvent: (event: StreamEvent) => void,
  options: { reconnect?: boolean } = {},
): StreamHandle {
  const controller = new AbortController();
  let lastSeq = fromSequence - 1;
  let closed = false;

  const done = (async () => {
    while (!closed) {
      let response: Response;
      try {
        response = await fetch(`${baseUrl}/v1/stream?from_sequence=${lastSeq + 1}`, {
          signal: controller.signal,
          headers: { Accept: "text/event-stream" },
        });
      } catch {
        if (closed || !options.reconnect) return;
        await new Promise((resolve) => setTimeout(resolve, 500));
        continue;
      }
      if (!response.ok || !response.body) return;
      const reader = response.body.getReader();
      const decoder = new TextDecoder();
      let buffer = "";
      let ended = false;
      try {
        for (;;) {
          const { value, done: eof } = await reader.read();
          if (eof) break;
          buffer += decoder.decode(value, { stream: true });
          let boundary;
          while ((boundary = buffer.indexOf("\n\n")) !== -1) {
            const block = buffer.slice(0, boundary);
            buffer = buffer.slice(boundary + 2);
            const parsed = parseBlock(block);
            if (!parsed) continue;
            if (parsed.id !== null) lastSeq = Math.max(lastSeq, parsed.id);
            if (parsed.event === "end") {
              ended = true;
              break;
            }
            onEvent(parsed);
          }
          if (ended) break;
        }
      } catch {
        /* aborted or dropped; fall through to reconnect */
      }
      if (ended || closed || !options.reconnect) return;
      await new Promise((resolve) => setTimeout(resolve, 300));
    }
  })();

  return {
    close() {
      closed = true;
      controller.abort();
    },
    done,
  };
}
