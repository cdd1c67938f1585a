// Alert feed shaping. The service already filters by role via the X-Role
// header; this module only formats what came back.

import type { AlertRecord } from './types.js';

export interface AlertRow {
  id: string;
  severity: string;
  heading: string;
  detail: string;
  recommendation: string;
}

export function toAlertRows(alerts: AlertRecord[]): AlertRow[] {
  return [...alerts]
    .sort((a, b) => (a.created_at < b.created_at ? 1 : -1))
    .map(a => ({
      id: a.alert_id,
      severity: a.severity,
      heading: a.severity === 'very-high' ? 'Very high glucose' : 'High glucose',
      detail: `${a.value.toFixed(1)} mg/dl (${a.context}, threshold ${a.threshold.toFixed(0)}) at ${a.created_at}`,
      recommendation: a.recommendation,
    }));
}

export function emptyStateMessage(): string {
  return 'No alerts.';
}
