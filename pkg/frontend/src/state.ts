export interface Candidate {
  text: string;
  source: "query" | "suffix";
  frequency: number;
  score?: number;
}

export interface CompletionResponse {
  prefix: string;
  candidates: Candidate[];
  gen_us: number;
  rank_us: number;
}

export type Generator = "mpc" | "lwg" | "mcg";
export type Ranking = "frequency" | "neural" | "hybrid";
export type Scorer = "unnormalized" | "lstm_emb";

export interface UiConfig {
  generator: Generator;
  ranking: Ranking;
  scorer: Scorer;
  k: number;
}

export function defaultConfig(): UiConfig {
  return { generator: "mcg", ranking: "frequency", scorer: "unnormalized", k: 10 };
}

export interface UiState {
  input: string;
  suggestions: Candidate[];
  selected: number; // -1 means no selection
  latency: { gen_us: number; rank_us: number } | null;
  error: string | null;
  config: UiConfig;
}

// Hard cap on what the dropdown will ever show, whatever the server sent.
export const MAX_RENDERED = 10;

export function clampSuggestions(candidates: Candidate[]): Candidate[] {
  return candidates.slice(0, MAX_RENDERED);
}

/** Move the highlighted row, clamping at the ends. -1 (nothing highlighted)
 * plus a downward move lands on the first row. */
export function moveSelection(current: number, delta: number, length: number): number {
  if (length === 0) return -1;
  const next = current + delta;
  if (next < -1) return -1;
  return Math.min(length - 1, Math.max(-1, next));
}
