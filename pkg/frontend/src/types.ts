// Shapes exchanged with the tracker service API.

export type Role = 'patient' | 'doctor' | 'family';

export interface ReadingRecord {
  device_id: string;
  seq: number;
  timestamp: string; // RFC3339 UTC
  glucose: number;
}

export interface MealRecord {
  meal_id: string;
  patient_id: string;
  timestamp: string;
  predicted_category: string;
  confidence: number;
  disambiguation: string[];
  confirmed_category: string | null;
  category: string; // confirmed if present, else predicted
}

export interface TimelineResponse {
  readings: ReadingRecord[];
  meals: MealRecord[];
}

export interface AlertRecord {
  alert_id: string;
  patient_id: string;
  severity: 'high' | 'very-high';
  value: number;
  context: string;
  threshold: number;
  created_at: string;
  recipients: Role[];
  recommendation: string;
}

export interface GlucoseStateResponse {
  state: { context: string; band: string } | null;
}

export interface PatientProfile {
  patient_id: string;
  name: string;
  status: string;
  device_id: string | null;
  doctor_contact: string;
  family_contact: string;
}

export type StreamEvent =
  | { event: 'reading'; data: ReadingRecord }
  | { event: 'meal'; data: MealRecord }
  | { event: 'alert'; data: AlertRecord };
