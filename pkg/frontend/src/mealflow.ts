// Meal submission and disambiguation flow, kept free of DOM concerns so the
// drop-down and confirmation behavior is directly testable.

import { ApiError, type TrackerClient } from './api.js';
import type { MealRecord } from './types.js';

function describe(err: unknown): string {
  return err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
}

export interface MealFlowState {
  phase: 'idle' | 'predicted' | 'confirmed' | 'error';
  meal: MealRecord | null;
  // drop-down options; empty when the prediction is not a merged group
  options: string[];
  error: string | null;
}

export function initialState(): MealFlowState {
  return { phase: 'idle', meal: null, options: [], error: null };
}

export function dropdownOptions(meal: MealRecord): string[] {
  // a merged category lists its member names; single-name lists need no menu
  return meal.disambiguation.length > 1 ? [...meal.disambiguation] : [];
}

export async function submitMeal(
  client: TrackerClient,
  patientId: string,
  timestampIso: string,
  features: number[][] | number[],
): Promise<MealFlowState> {
  try {
    const meal = await client.submitMeal(patientId, timestampIso, features);
    return { phase: 'predicted', meal, options: dropdownOptions(meal), error: null };
  } catch (err) {
    return { phase: 'error', meal: null, options: [], error: describe(err) };
  }
}

export async function submitMealImage(
  client: TrackerClient,
  patientId: string,
  timestampIso: string,
  imageRef: string,
): Promise<MealFlowState> {
  try {
    const meal = await client.submitMealByImage(patientId, timestampIso, imageRef);
    return { phase: 'predicted', meal, options: dropdownOptions(meal), error: null };
  } catch (err) {
    return { phase: 'error', meal: null, options: [], error: describe(err) };
  }
}

export async function confirmChoice(
  client: TrackerClient,
  state: MealFlowState,
  choice: string,
): Promise<MealFlowState> {
  if (state.meal === null) return state;
  try {
    const meal = await client.confirmMealCategory(state.meal.meal_id, choice);
    return { phase: 'confirmed', meal, options: state.options, error: null };
  } catch (err) {
    // keep the prediction; surface the error inline with retry available
    return { ...state, phase: 'predicted', error: describe(err) };
  }
}

export function cancel(state: MealFlowState): MealFlowState {
  // cancelling issues no confirmation request; the predicted label stands
  return { ...state, phase: state.meal ? 'predicted' : 'idle', error: null };
}
