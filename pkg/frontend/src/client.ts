import type { CompletionResponse, UiConfig } from "./state.js";

/** Build the /complete URL. encodeURIComponent keeps a trailing space as
 * %20 instead of the form-style "+", so the server sees the prefix verbatim
 * (trailing whitespace is semantic: it marks the last word as complete). */
export function buildCompleteUrl(base: string, prefix: string, config: UiConfig): string {
  const parts = [
    `prefix=${encodeURIComponent(prefix)}`,
    `k=${config.k}`,
    `generator=${config.generator}`,
    `ranking=${config.ranking}`,
    `scorer=${config.scorer}`,
  ];
  return `${base}/complete?${parts.join("&")}`;
}

export async function fetchCompletions(url: string): Promise<CompletionResponse> {
  const resp = await fetch(url);
  if (!resp.ok) {
    throw new Error(`completion request failed: HTTP ${resp.status}`);
  }
  return (await resp.json()) as CompletionResponse;
}
