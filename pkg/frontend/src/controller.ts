import { buildCompleteUrl, fetchCompletions } from "./client.js";
import {
  CompletionResponse,
  UiState,
  clampSuggestions,
  defaultConfig,
  moveSelection,
} from "./state.js";

export interface ControllerOpts {
  baseUrl?: string;
  debounceMs?: number;
  fetchJson?: (url: string) => Promise<CompletionResponse>;
  onRender?: (state: UiState) => void;
}

/** Drives the typeahead: debounces keystrokes, tags every request with a
 * sequence number and drops any response that arrives after a newer one has
 * already rendered. The controller never reorders candidates; it is a view
 * of the server's list. */
export class TypeaheadController {
  readonly state: UiState;

  private readonly baseUrl: string;
  private readonly debounceMs: number;
  private readonly fetchJson: (url: string) => Promise<CompletionResponse>;
  private readonly onRender: (state: UiState) => void;

  private nextSeq = 0;
  private renderedSeq = 0;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private pending: Promise<void>[] = [];

  constructor(opts: ControllerOpts = {}) {
    this.baseUrl = opts.baseUrl ?? "";
    this.debounceMs = opts.debounceMs ?? 50;
    this.fetchJson = opts.fetchJson ?? fetchCompletions;
    this.onRender = opts.onRender ?? (() => {});
    this.state = {
      input: "",
      suggestions: [],
      selected: -1,
      latency: null,
      error: null,
      config: defaultConfig(),
    };
  }

  /** Sequence number of the response currently on screen. */
  get lastRenderedSeq(): number {
    return this.renderedSeq;
  }

  setInput(text: string): void {
    this.state.input = text;
    if (this.timer !== null) clearTimeout(this.timer);
    if (text === "") {
      this.timer = null;
      this.state.suggestions = [];
      this.state.selected = -1;
      this.state.error = null;
      this.render();
      return;
    }
    this.timer = setTimeout(() => {
      this.timer = null;
      this.fire();
    }, this.debounceMs);
  }

  setConfig(partial: Partial<UiState["config"]>): void {
    Object.assign(this.state.config, partial);
    this.state.latency = null;
    if (this.state.input !== "") this.fire();
    this.render();
  }

  moveSelection(delta: number): void {
    this.state.selected = moveSelection(
      this.state.selected, delta, this.state.suggestions.length);
    this.render();
  }

  confirmSelection(): void {
    this.choose(this.state.selected);
  }

  choose(index: number): void {
    const cand = this.state.suggestions[index];
    if (!cand) return;
    this.state.input = cand.text;
    this.state.selected = -1;
    this.render();
    this.fire();
  }

  /** Await every request issued so far (test hook). */
  async settled(): Promise<void> {
    while (this.pending.length > 0) {
      const batch = this.pending;
      this.pending = [];
      await Promise.all(batch);
    }
  }

  private fire(): void {
    this.pending.push(this.request());
  }

  private async request(): Promise<void> {
    const seq = ++this.nextSeq;
    const prefix = this.state.input;
    const url = buildCompleteUrl(this.baseUrl, prefix, this.state.config);
    let resp: CompletionResponse;
    try {
      resp = await this.fetchJson(url);
    } catch (err) {
      if (seq <= this.renderedSeq) return;
      this.renderedSeq = seq;
      this.state.suggestions = [];
      this.state.selected = -1;
      this.state.error = err instanceof Error ? err.message : String(err);
      this.render();
      return;
    }
    if (seq <= this.renderedSeq) return; // a newer response already rendered
    if (!this.state.input.startsWith(prefix)) return; // input moved on
    this.renderedSeq = seq;
    this.state.suggestions = clampSuggestions(resp.candidates);
    this.state.selected = -1;
    this.state.latency = { gen_us: resp.gen_us, rank_us: resp.rank_us };
    this.state.error = null;
    this.render();
  }

  private render(): void {
    this.onRender(this.state);
  }
}
