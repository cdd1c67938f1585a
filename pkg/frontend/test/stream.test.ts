import { describe, expect, it } from 'vitest';
import { openEventStream, parseSseChunk } from '../src/stream.js';
import { startStubServer } from './stub-server.js';
import type { StreamEvent } from '../src/types.js';

describe('sse parsing', () => {
  it('splits complete blocks and keeps the remainder', () => {
    const { events, rest } = parseSseChunk(
      'event: reading\ndata: {"a":1}\n\nevent: alert\ndata: {"b":2}\n\nevent: meal\ndata: {"c"',
    );
    expect(events).toEqual([
      { event: 'reading', data: '{"a":1}' },
      { event: 'alert', data: '{"b":2}' },
    ]);
    expect(rest).toContain('event: meal');
  });

  it('ignores comment keep-alives', () => {
    const { events } = parseSseChunk(': keep-alive\n\n');
    expect(events).toEqual([]);
  });
});

describe('event stream', () => {
  it('delivers pushed events live', async () => {
    const stub = await startStubServer();
    const received: StreamEvent[] = [];
    const handle = openEventStream(`${stub.url}/patients/p1/events`, {
      onEvent: e => received.push(e),
    });
    try {
      await new Promise(r => setTimeout(r, 150)); // let the stream connect
      stub.pushEvent('reading', { device_id: 'S1', seq: 0, timestamp: 't', glucose: 123 });
      stub.pushEvent('alert', { severity: 'high' });
      await waitFor(() => received.length >= 2);
      expect(received[0].event).toBe('reading');
      expect((received[0].data as { glucose: number }).glucose).toBe(123);
      expect(received[1].event).toBe('alert');
    } finally {
      handle.close();
      await stub.close();
    }
  });

  it('flags staleness when the server goes away', async () => {
    const stub = await startStubServer();
    const staleChanges: boolean[] = [];
    const handle = openEventStream(`${stub.url}/patients/p1/events`, {
      onEvent: () => undefined,
      onStale: s => staleChanges.push(s),
    });
    try {
      await waitFor(() => staleChanges.includes(false));
      await stub.close();
      await waitFor(() => staleChanges[staleChanges.length - 1] === true);
    } finally {
      handle.close();
    }
    expect(staleChanges[0]).toBe(false);
    expect(staleChanges[staleChanges.length - 1]).toBe(true);
  });
});

async function waitFor(cond: () => boolean, timeoutMs = 5000): Promise<void> {
  const start = Date.now();
  while (!cond()) {
    if (Date.now() - start > timeoutMs) throw new Error('timed out waiting for condition');
    await new Promise(r => setTimeout(r, 25));
  }
}
