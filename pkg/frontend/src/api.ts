// Typed client for the tracker service. Every value shown in the UI comes
// from these calls; the dashboard holds no business logic of its own.

import type {
  AlertRecord,
  GlucoseStateResponse,
  MealRecord,
  PatientProfile,
  Role,
  TimelineResponse,
} from './types.js';

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export class TrackerClient {
  constructor(
    private baseUrl: string,
    private role: Role = 'patient',
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await fetch(this.baseUrl + path, {
      method,
      headers: {
        'Content-Type': 'application/json',
        'X-Role': this.role,
      },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await resp.json();
    if (!resp.ok) {
      const err = (payload as { error?: { code?: string; message?: string } }).error ?? {};
      throw new ApiError(resp.status, err.code ?? 'unknown', err.message ?? resp.statusText);
    }
    return payload as T;
  }

  getPatient(patientId: string): Promise<PatientProfile> {
    return this.request('GET', `/patients/${encodeURIComponent(patientId)}`);
  }

  getTimeline(patientId: string, fromIso: string, toIso: string): Promise<TimelineResponse> {
    const query = `from=${encodeURIComponent(fromIso)}&to=${encodeURIComponent(toIso)}`;
    return this.request('GET', `/patients/${encodeURIComponent(patientId)}/timeline?${query}`);
  }

  getAlerts(patientId: string): Promise<{ alerts: AlertRecord[] }> {
    return this.request('GET', `/patients/${encodeURIComponent(patientId)}/alerts`);
  }

  getState(patientId: string): Promise<GlucoseStateResponse> {
    return this.request('GET', `/patients/${encodeURIComponent(patientId)}/state`);
  }

  submitMeal(patientId: string, timestampIso: string, features: number[][] | number[]): Promise<MealRecord> {
    return this.request('POST', `/patients/${encodeURIComponent(patientId)}/meals`, {
      timestamp: timestampIso,
      features,
    });
  }

  submitMealByImage(patientId: string, timestampIso: string, imageRef: string): Promise<MealRecord> {
    return this.request('POST', `/patients/${encodeURIComponent(patientId)}/meals`, {
      timestamp: timestampIso,
      image_ref: imageRef,
    });
  }

  confirmMealCategory(mealId: string, category: string): Promise<MealRecord> {
    return this.request('PUT', `/meals/${encodeURIComponent(mealId)}/category`, { category });
  }

  eventsUrl(patientId: string): string {
    return `${this.baseUrl}/patients/${encodeURIComponent(patientId)}/events`;
  }
}
