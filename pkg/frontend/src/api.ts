// Typed client for the perfadvisor service. The UI never computes
// metrics; everything rendered comes straight out of these payloads.

export interface LineMetrics {
  line_no: number;
  cpu_python_pct: number;
  cpu_native_pct: number;
  cpu_system_pct: number;
  mem_avg_mb: number;
  mem_peak_mb: number;
  copy_mb_per_s: number;
  gpu_pct: number;
}

export interface FunctionSpan {
  name: string;
  start_line: number;
  end_line: number;
}

export interface FileProfile {
  source_digest: string;
  line_count: number;
  functions: FunctionSpan[];
  lines: LineMetrics[];
}

export interface ProfileDoc {
  format_version: number;
  program: string;
  elapsed_s: number;
  max_footprint_mb: number;
  producer: string;
  files: Record<string, FileProfile>;
}

export interface Region {
  path: string;
  start_line: number;
  end_line: number;
  reason: string;
  score: number;
  context_start: number;
  context_end: number;
}

export interface Candidate {
  original_text: string;
  replacement_text: string;
  unified_diff: string;
}

export interface Suggestion {
  id: string;
  region: Region;
  model: string;
  raw_text: string;
  rationale: string;
  candidates: Candidate[];
}

export interface ValidationResult {
  syntax_ok: boolean;
  correct: boolean;
  t_original_s: number | null;
  t_candidate_s: number | null;
  spread_original: number | null;
  spread_candidate: number | null;
  speedup: number | null;
  failure: { stage: string; message: string } | null;
  skipped: boolean;
}

export interface EndpointInfo {
  name: string;
  model: string;
  protocol: string;
  reachable: boolean;
  model_present: boolean;
}

export type OptimizeFrame =
  | { type: "chunk"; text: string }
  | { type: "done"; suggestion: Suggestion }
  | { type: "error"; code: string; message: string };

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function getJson<T>(url: string): Promise<T> {
  const resp = await fetch(url);
  const body = await resp.json();
  if (!resp.ok) {
    throw new ApiError(resp.status, body.code ?? "error", body.message ?? resp.statusText);
  }
  return body as T;
}

export class ApiClient {
  constructor(readonly base: string = "") {}

  profile(): Promise<ProfileDoc> {
    return getJson(`${this.base}/api/profile`);
  }

  async hotspots(): Promise<Region[]> {
    const body = await getJson<{ hotspots: Region[] }>(`${this.base}/api/hotspots`);
    return body.hotspots;
  }

  source(path: string): Promise<{ path: string; digest: string; text: string }> {
    return getJson(`${this.base}/api/source?path=${encodeURIComponent(path)}`);
  }

  async models(): Promise<EndpointInfo[]> {
    const body = await getJson<{ endpoints: EndpointInfo[] }>(`${this.base}/api/models`);
    return body.endpoints;
  }

  async validate(suggestionId: string, candidateIndex: number): Promise<ValidationResult> {
    const resp = await fetch(`${this.base}/api/validate`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ suggestion_id: suggestionId, candidate_index: candidateIndex }),
    });
    const body = await resp.json();
    if (!resp.ok) {
      throw new ApiError(resp.status, body.code ?? "error", body.message ?? resp.statusText);
    }
    return body as ValidationResult;
  }

  // Streams /api/optimize server-sent events, invoking onFrame per frame
  // in arrival order. Resolves after the terminal done/error frame.
  async optimize(
    req: { path: string; start_line: number; end_line: number; model: string },
    onFrame: (frame: OptimizeFrame) => void,
  ): Promise<void> {
    const resp = await fetch(`${this.base}/api/optimize`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
    });
    if (!resp.ok) {
      const body = await resp.json().catch(() => ({}));
      throw new ApiError(resp.status, body.code ?? "error", body.message ?? resp.statusText);
    }
    if (!resp.body) {
      throw new ApiError(0, "no-stream", "response has no body");
    }
    const reader = resp.body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      buffer = emitFrames(buffer, onFrame);
    }
    emitFrames(buffer + decoder.decode(), onFrame);
  }
}

function emitFrames(buffer: string, onFrame: (frame: OptimizeFrame) => void): string {
  const events = buffer.split("\n\n");
  const rest = events.pop() ?? "";
  for (const event of events) {
    for (const line of event.split("\n")) {
      if (!line.startsWith("data:")) continue;
      const payload = line.slice("data:".length).trim();
      if (!payload) continue;
      onFrame(JSON.parse(payload) as OptimizeFrame);
    }
  }
  return rest;
}
