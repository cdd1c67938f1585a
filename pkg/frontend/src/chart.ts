// Timeline chart: maps readings and meal markers into SVG space.
// The point model is exposed separately from the markup so tests can verify
// that what gets drawn is exactly what the service returned.

import type { MealRecord, ReadingRecord } from './types.js';

export interface ChartPoint {
  x: number;
  y: number;
  timestamp: string;
  glucose: number;
}

export interface MealMarker {
  x: number;
  timestamp: string;
  label: string;
  mealId: string;
}

export interface ChartModel {
  points: ChartPoint[];
  markers: MealMarker[];
  width: number;
  height: number;
  yMin: number;
  yMax: number;
}

const PAD = { left: 44, right: 12, top: 10, bottom: 24 };

export function buildChartModel(
  readings: ReadingRecord[],
  meals: MealRecord[],
  windowFromIso: string,
  windowToIso: string,
  width = 860,
  height = 300,
): ChartModel {
  const t0 = Date.parse(windowFromIso);
  const t1 = Date.parse(windowToIso);
  const span = Math.max(t1 - t0, 1);
  const innerW = width - PAD.left - PAD.right;
  const innerH = height - PAD.top - PAD.bottom;

  const values = readings.map(r => r.glucose);
  const yMin = Math.min(60, ...(values.length ? [Math.min(...values) - 10] : []));
  const yMax = Math.max(220, ...(values.length ? [Math.max(...values) + 10] : []));

  const xOf = (iso: string) => PAD.left + ((Date.parse(iso) - t0) / span) * innerW;
  const yOf = (v: number) => PAD.top + innerH - ((v - yMin) / (yMax - yMin)) * innerH;

  return {
    points: readings.map(r => ({
      x: xOf(r.timestamp),
      y: yOf(r.glucose),
      timestamp: r.timestamp,
      glucose: r.glucose,
    })),
    markers: meals.map(m => ({
      x: xOf(m.timestamp),
      timestamp: m.timestamp,
      label: m.category,
      mealId: m.meal_id,
    })),
    width,
    height,
    yMin,
    yMax,
  };
}

export function renderChartSvg(model: ChartModel): string {
  const { width, height } = model;
  const path = model.points
    .map((p, i) => `${i === 0 ? 'M' : 'L'}${p.x.toFixed(1)},${p.y.toFixed(1)}`)
    .join(' ');
  const dots = model.points
    .map(p => `<circle cx="${p.x.toFixed(1)}" cy="${p.y.toFixed(1)}" r="2.5" class="pt"><title>${p.timestamp}: ${p.glucose} mg/dl</title></circle>`)
    .join('');
  const markers = model.markers
    .map(
      m =>
        `<g class="meal" data-meal-id="${m.mealId}">` +
        `<line x1="${m.x.toFixed(1)}" y1="10" x2="${m.x.toFixed(1)}" y2="${height - 24}"/>` +
        `<text x="${(m.x + 4).toFixed(1)}" y="22">${escapeXml(m.label)}</text></g>`,
    )
    .join('');
  const axis =
    `<text x="4" y="${height - 24}" class="axis">${model.yMin.toFixed(0)}</text>` +
    `<text x="4" y="16" class="axis">${model.yMax.toFixed(0)}</text>`;
  return (
    `<svg viewBox="0 0 ${width} ${height}" xmlns="http://www.w3.org/2000/svg">` +
    `${axis}<path d="${path}" class="trace" fill="none"/>${dots}${markers}</svg>`
  );
}

export function escapeXml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}
