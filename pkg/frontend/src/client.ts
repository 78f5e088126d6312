import type {
  ConvergencePayload,
  DiscoveryScore,
  Envelope,
  GateEvaluation,
  Finding,
  LensEntry,
  MatrixPayload,
  ProjectSnapshot,
} from "./types.js";
import { SUPPORTED_SCHEMA_VERSION } from "./types.js";

export class ApiRequestError extends Error {
  constructor(
    public readonly code: string,
    message: string,
    public readonly details: Record<string, unknown> = {},
  ) {
    super(message);
  }
}

export class SchemaMismatchError extends Error {
  constructor(public readonly serverVersion: number) {
    super(`server schema_version ${serverVersion} is newer than this client supports`);
  }
}

/**
 * Unwrap one API envelope: surface API errors as typed exceptions and flag
 * payloads written by a newer engine so the UI can degrade to read-only.
 */
export function unwrap<T>(envelope: Envelope<T>): T {
  if (envelope.schema_version > SUPPORTED_SCHEMA_VERSION) {
    throw new SchemaMismatchError(envelope.schema_version);
  }
  if (envelope.status === "error" || envelope.error) {
    const err = envelope.error ?? { code: "UNKNOWN", message: "unknown error", details: {} };
    throw new ApiRequestError(err.code, err.message, err.details);
  }
  return envelope.data as T;
}

type FetchLike = (url: string, init?: RequestInit) => Promise<{ json(): Promise<unknown> }>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}/api/v1${path}`, init);
    return unwrap((await response.json()) as Envelope<T>);
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  getProject(): Promise<ProjectSnapshot> {
    return this.request("/project");
  }

  getLenses(): Promise<LensEntry[]> {
    return this.request("/lenses");
  }

  getScore(): Promise<DiscoveryScore | null> {
    return this.request("/score");
  }

  getMatrix(): Promise<MatrixPayload | null> {
    return this.request("/matrix");
  }

  getConvergence(): Promise<ConvergencePayload> {
    return this.request("/convergence");
  }

  submitScore(awards: number[], operatorConfirmed: boolean): Promise<DiscoveryScore> {
    return this.post("/score", { awards, operator_confirmed: operatorConfirmed });
  }

  submitGateDecision(gateId: string, approve: boolean | null, note = ""): Promise<GateEvaluation> {
    const body: Record<string, unknown> = { note };
    if (approve !== null) body.approve = approve;
    return this.post(`/gates/${gateId}`, body);
  }

  triageFinding(findingId: string, decision: string, rationale = ""): Promise<Finding> {
    return this.post(`/findings/${findingId}/triage`, { decision, rationale });
  }

  advance(toPhase: number): Promise<ProjectSnapshot> {
    return this.post("/transitions", { to_phase: toPhase });
  }

  setContextFlag(flag: string, value: boolean, rationale: string): Promise<unknown> {
    return this.request(`/context/${flag}`, {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ value, rationale }),
    });
  }
}
