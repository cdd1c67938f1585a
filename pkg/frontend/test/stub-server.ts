// Minimal in-process stand-in for the tracker service API, used to test the
// client, chart consistency, and the confirmation round-trip.

import { createServer, type IncomingMessage, type Server, type ServerResponse } from 'node:http';
import type { AddressInfo } from 'node:net';
import type { MealRecord, ReadingRecord } from '../src/types.js';

export interface StubState {
  readings: ReadingRecord[];
  meals: MealRecord[];
  confirmations: { mealId: string; category: string }[];
  events: { event: string; data: unknown }[];
}

export interface StubHandle {
  url: string;
  state: StubState;
  pushEvent(event: string, data: unknown): void;
  close(): Promise<void>;
}

function json(res: ServerResponse, status: number, payload: unknown): void {
  const body = JSON.stringify(payload);
  res.writeHead(status, { 'Content-Type': 'application/json' });
  res.end(body);
}

async function readBody(req: IncomingMessage): Promise<Record<string, unknown>> {
  const chunks: Buffer[] = [];
  for await (const chunk of req) chunks.push(chunk as Buffer);
  return chunks.length ? JSON.parse(Buffer.concat(chunks).toString()) : {};
}

export function makeReadings(count: number, startIso = '2024-05-01T00:00:00Z'): ReadingRecord[] {
  const t0 = Date.parse(startIso);
  return Array.from({ length: count }, (_, i) => ({
    device_id: 'S1',
    seq: i,
    timestamp: new Date(t0 + i * 15 * 60_000).toISOString().replace('.000Z', 'Z'),
    glucose: 100 + 30 * Math.sin(i / 4),
  }));
}

export async function startStubServer(state: Partial<StubState> = {}): Promise<StubHandle> {
  const full: StubState = {
    readings: state.readings ?? [],
    meals: state.meals ?? [],
    confirmations: [],
    events: [],
  };
  const sseClients: ServerResponse[] = [];

  const server: Server = createServer(async (req, res) => {
    const url = new URL(req.url ?? '/', 'http://localhost');
    const path = url.pathname;

    if (req.method === 'GET' && /^\/patients\/[^/]+\/timeline$/.test(path)) {
      const from = Date.parse(url.searchParams.get('from') ?? '');
      const to = Date.parse(url.searchParams.get('to') ?? '');
      json(res, 200, {
        readings: full.readings.filter(r => {
          const t = Date.parse(r.timestamp);
          return t >= from && t <= to;
        }),
        meals: full.meals.filter(m => {
          const t = Date.parse(m.timestamp);
          return t >= from && t <= to;
        }),
      });
      return;
    }
    if (req.method === 'POST' && /^\/patients\/[^/]+\/meals$/.test(path)) {
      const body = await readBody(req);
      const meal: MealRecord = {
        meal_id: `m-${(full.meals.length + 1).toString().padStart(6, '0')}`,
        patient_id: path.split('/')[2],
        timestamp: String(body.timestamp),
        predicted_category: 'mandi-kabsa',
        confidence: 0.81,
        disambiguation: ['mandi', 'kabsa'],
        confirmed_category: null,
        category: 'mandi-kabsa',
      };
      full.meals.push(meal);
      json(res, 201, meal);
      return;
    }
    if (req.method === 'PUT' && /^\/meals\/[^/]+\/category$/.test(path)) {
      const mealId = path.split('/')[2];
      const body = await readBody(req);
      const meal = full.meals.find(m => m.meal_id === mealId);
      if (!meal) {
        json(res, 404, { error: { code: 'unknown_meal', message: 'no such meal' } });
        return;
      }
      const category = String(body.category);
      if (!meal.disambiguation.includes(category) && category !== meal.predicted_category) {
        json(res, 400, { error: { code: 'invalid_choice', message: 'not in list' } });
        return;
      }
      meal.confirmed_category = category;
      meal.category = category;
      full.confirmations.push({ mealId, category });
      json(res, 200, meal);
      return;
    }
    if (req.method === 'GET' && /^\/patients\/[^/]+\/events$/.test(path)) {
      res.writeHead(200, { 'Content-Type': 'text/event-stream' });
      res.write('retry: 1000\n\n');
      sseClients.push(res);
      return;
    }
    json(res, 404, { error: { code: 'invalid', message: `no stub for ${req.method} ${path}` } });
  });

  await new Promise<void>(resolve => server.listen(0, '127.0.0.1', resolve));
  const { port } = server.address() as AddressInfo;
  return {
    url: `http://127.0.0.1:${port}`,
    state: full,
    pushEvent(event, data) {
      full.events.push({ event, data });
      for (const client of sseClients) {
        client.write(`event: ${event}\ndata: ${JSON.stringify(data)}\n\n`);
      }
    },
    async close() {
      for (const client of sseClients) client.end();
      await new Promise<void>((resolve, reject) =>
        server.close(err => (err ? reject(err) : resolve())),
      );
    },
  };
}
