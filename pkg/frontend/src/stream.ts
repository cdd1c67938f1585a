// Server-sent events over fetch streaming (works in browsers and node alike),
// with a staleness flag the UI surfaces when the connection drops.

import type { StreamEvent } from './types.js';

export interface StreamHandle {
  close(): void;
}

export interface StreamCallbacks {
  onEvent(event: StreamEvent): void;
  onStale?(stale: boolean): void;
}

export function parseSseChunk(buffer: string): { events: { event: string; data: string }[]; rest: string } {
  const events: { event: string; data: string }[] = [];
  let rest = buffer;
  for (;;) {
    const sep = rest.indexOf('\n\n');
    if (sep < 0) break;
    const block = rest.slice(0, sep);
    rest = rest.slice(sep + 2);
    let eventType = 'message';
    const dataLines: string[] = [];
    for (const line of block.split('\n')) {
      if (line.startsWith('event:')) eventType = line.slice(6).trim();
      else if (line.startsWith('data:')) dataLines.push(line.slice(5).trim());
    }
    if (dataLines.length) events.push({ event: eventType, data: dataLines.join('\n') });
  }
  return { events, rest };
}

export function openEventStream(url: string, callbacks: StreamCallbacks): StreamHandle {
  const controller = new AbortController();
  let closed = false;

  const run = async () => {
    while (!closed) {
      try {
        const resp = await fetch(url, { signal: controller.signal });
        if (!resp.ok || !resp.body) throw new Error(`stream failed: ${resp.status}`);
        callbacks.onStale?.(false);
        const reader = resp.body.getReader();
        const decoder = new TextDecoder();
        let buffer = '';
        for (;;) {
          const { done, value } = await reader.read();
          if (done) break;
          buffer += decoder.decode(value, { stream: true });
          const { events, rest } = parseSseChunk(buffer);
          buffer = rest;
          for (const ev of events) {
            try {
              callbacks.onEvent({ event: ev.event, data: JSON.parse(ev.data) } as StreamEvent);
            } catch {
              // ignore undecodable frames; keep the stream alive
            }
          }
        }
      } catch {
        if (closed) return;
      }
      callbacks.onStale?.(true);
      if (!closed) await new Promise(r => setTimeout(r, 2000));
    }
  };
  void run();

  return {
    close() {
      closed = true;
      controller.abort();
    },
  };
}
