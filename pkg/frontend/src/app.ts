// Dashboard entry point: home, dashboard (alerts), patient profile, and the
// combined CGM + meal view, all fed exclusively by the tracker service API.

import { TrackerClient } from './api.js';
import { toAlertRows, emptyStateMessage } from './alerts.js';
import { buildChartModel, renderChartSvg } from './chart.js';
import { cancel, confirmChoice, initialState, submitMeal, submitMealImage, type MealFlowState } from './mealflow.js';
import { openEventStream, type StreamHandle } from './stream.js';
import type { ReadingRecord, Role, TimelineResponse } from './types.js';

interface AppState {
  client: TrackerClient;
  patientId: string;
  role: Role;
  view: 'home' | 'dashboard' | 'profile' | 'cgm';
  windowHours: number;
  timeline: TimelineResponse;
  windowFrom: string;
  windowTo: string;
  mealFlow: MealFlowState;
  stale: boolean;
  stream: StreamHandle | null;
}

const $ = <T extends HTMLElement>(sel: string): T => {
  const el = document.querySelector<T>(sel);
  if (!el) throw new Error(`missing element ${sel}`);
  return el;
};

function apiBase(): string {
  const params = new URLSearchParams(location.search);
  return params.get('api') ?? location.origin;
}

const state: AppState = {
  client: new TrackerClient(apiBase()),
  patientId: '',
  role: 'patient',
  view: 'home',
  windowHours: 10,
  timeline: { readings: [], meals: [] },
  windowFrom: '',
  windowTo: '',
  mealFlow: initialState(),
  stale: false,
  stream: null,
};

function isoNow(): string {
  return new Date().toISOString().replace(/\.\d{3}Z$/, 'Z');
}

function isoHoursAgo(hours: number): string {
  return new Date(Date.now() - hours * 3600_000).toISOString().replace(/\.\d{3}Z$/, 'Z');
}

async function refreshTimeline(): Promise<void> {
  state.windowFrom = isoHoursAgo(state.windowHours);
  state.windowTo = isoNow();
  state.timeline = await state.client.getTimeline(state.patientId, state.windowFrom, state.windowTo);
  renderCgmView();
}

function connectStream(): void {
  state.stream?.close();
  state.stream = openEventStream(state.client.eventsUrl(state.patientId), {
    onEvent(event) {
      if (event.event === 'reading') {
        appendReading(event.data);
      } else if (event.event === 'meal' || event.event === 'alert') {
        void refreshTimeline();
        void renderAlerts();
      }
    },
    onStale(stale) {
      state.stale = stale;
      const banner = document.querySelector<HTMLElement>('#stale-banner');
      if (banner) banner.style.display = stale ? 'block' : 'none';
    },
  });
}

function appendReading(reading: ReadingRecord): void {
  // extend the open window without a full reload
  state.timeline.readings.push(reading);
  state.windowTo = isoNow();
  renderCgmView();
}

function renderCgmView(): void {
  const host = document.querySelector<HTMLElement>('#chart-host');
  if (!host) return;
  const model = buildChartModel(
    state.timeline.readings,
    state.timeline.meals,
    state.windowFrom,
    state.windowTo,
  );
  host.innerHTML = renderChartSvg(model);
  const list = document.querySelector<HTMLElement>('#meal-list');
  if (list) {
    list.innerHTML = state.timeline.meals
      .map(m => `<li>${m.timestamp} — <strong>${m.category}</strong> (${(m.confidence * 100).toFixed(0)}%)</li>`)
      .join('');
  }
}

async function renderAlerts(): Promise<void> {
  const host = document.querySelector<HTMLElement>('#alert-feed');
  if (!host) return;
  const { alerts } = await state.client.getAlerts(state.patientId);
  const rows = toAlertRows(alerts);
  host.innerHTML = rows.length
    ? rows
        .map(
          r =>
            `<div class="alert ${r.severity}"><strong>${r.heading}</strong>` +
            `<div>${r.detail}</div><div class="rec">Recommendation: ${r.recommendation}</div></div>`,
        )
        .join('')
    : `<p class="empty">${emptyStateMessage()}</p>`;
}

async function renderProfile(): Promise<void> {
  const host = document.querySelector<HTMLElement>('#profile-host');
  if (!host) return;
  const profile = await state.client.getPatient(state.patientId);
  const stateResp = await state.client.getState(state.patientId);
  const glucose = stateResp.state
    ? `${stateResp.state.band} (${stateResp.state.context})`
    : 'no readings yet';
  host.innerHTML = `
    <dl>
      <dt>Patient</dt><dd>${profile.name} (${profile.patient_id})</dd>
      <dt>Status</dt><dd>${profile.status}</dd>
      <dt>Device</dt><dd>${profile.device_id ?? 'not linked'}</dd>
      <dt>Current glucose state</dt><dd>${glucose}</dd>
    </dl>`;
}

function renderMealFlow(): void {
  const host = document.querySelector<HTMLElement>('#mealflow-host');
  if (!host) return;
  const flow = state.mealFlow;
  if (flow.phase === 'idle') {
    host.innerHTML = `
      <textarea id="feature-input" rows="3"
        placeholder="Feature vectors as JSON, e.g. [[...model1...], [...model2...]]"></textarea>
      <button id="submit-meal">Recognize meal</button>
      <label>or server-side image path
        <input id="image-ref-input" placeholder="photos/meal.jpg"/></label>
      <button id="submit-meal-image">Recognize photo</button>
      <span id="meal-error" class="error"></span>`;
    $('#submit-meal').addEventListener('click', () => void onSubmitMeal());
    $('#submit-meal-image').addEventListener('click', () => void onSubmitMealImage());
    return;
  }
  if (flow.phase === 'error') {
    host.innerHTML = `<p class="error">${flow.error}</p><button id="meal-retry">Retry</button>`;
    $('#meal-retry').addEventListener('click', () => {
      state.mealFlow = initialState();
      renderMealFlow();
    });
    return;
  }
  const meal = flow.meal!;
  const confidence = `${(meal.confidence * 100).toFixed(0)}%`;
  if (flow.phase === 'confirmed') {
    host.innerHTML = `<p>Recorded <strong>${meal.category}</strong> at ${meal.timestamp}.</p>`;
    return;
  }
  if (flow.options.length > 0) {
    const options = flow.options.map(o => `<option value="${o}">${o}</option>`).join('');
    host.innerHTML = `
      <p>Predicted <strong>${meal.predicted_category}</strong> (${confidence}) — which one exactly?</p>
      <select id="category-select">${options}</select>
      <button id="confirm-meal">Confirm</button>
      <button id="cancel-meal">Cancel</button>
      <span class="error">${flow.error ?? ''}</span>`;
    $('#confirm-meal').addEventListener('click', () => void onConfirm());
    $('#cancel-meal').addEventListener('click', () => {
      state.mealFlow = cancel(state.mealFlow);
      renderMealFlow();
    });
  } else {
    host.innerHTML = `
      <p>Predicted <strong>${meal.predicted_category}</strong> (${confidence}).</p>
      <button id="confirm-meal">Looks right</button>
      <span class="error">${flow.error ?? ''}</span>`;
    $('#confirm-meal').addEventListener('click', () => void onConfirmSingle());
  }
}

async function onSubmitMeal(): Promise<void> {
  let features: number[][] | number[];
  try {
    features = JSON.parse($('#feature-input').textContent === null ? '[]' : ($('#feature-input') as unknown as HTMLTextAreaElement).value);
  } catch {
    $('#meal-error').textContent = 'feature vector is not valid JSON';
    return;
  }
  state.mealFlow = await submitMeal(state.client, state.patientId, isoNow(), features);
  renderMealFlow();
  await refreshTimeline();
}

async function onSubmitMealImage(): Promise<void> {
  const ref = ($('#image-ref-input') as unknown as HTMLInputElement).value.trim();
  if (!ref) {
    $('#meal-error').textContent = 'image path required';
    return;
  }
  state.mealFlow = await submitMealImage(state.client, state.patientId, isoNow(), ref);
  renderMealFlow();
  await refreshTimeline();
}

async function onConfirm(): Promise<void> {
  const choice = ($('#category-select') as unknown as HTMLSelectElement).value;
  state.mealFlow = await confirmChoice(state.client, state.mealFlow, choice);
  renderMealFlow();
  await refreshTimeline();
}

async function onConfirmSingle(): Promise<void> {
  const meal = state.mealFlow.meal!;
  state.mealFlow = await confirmChoice(state.client, state.mealFlow, meal.predicted_category);
  renderMealFlow();
}

function show(view: AppState['view']): void {
  state.view = view;
  for (const name of ['home', 'dashboard', 'profile', 'cgm'] as const) {
    $(`#view-${name}`).style.display = name === view ? 'block' : 'none';
  }
  if (view === 'dashboard') void renderAlerts();
  if (view === 'profile') void renderProfile();
  if (view === 'cgm') void refreshTimeline();
}

function boot(): void {
  $('#open-patient').addEventListener('click', () => {
    state.patientId = ($('#patient-input') as unknown as HTMLInputElement).value.trim();
    state.role = ($('#role-select') as unknown as HTMLSelectElement).value as Role;
    state.client = new TrackerClient(apiBase(), state.role);
    state.mealFlow = initialState();
    connectStream();
    show('cgm');
    renderMealFlow();
  });
  for (const name of ['home', 'dashboard', 'profile', 'cgm'] as const) {
    $(`#nav-${name}`).addEventListener('click', () => show(name));
  }
  show('home');
}

document.addEventListener('DOMContentLoaded', boot);
