/** Payload shapes of the /api/v1 JSON surface consumed by the dashboard. */

export const SUPPORTED_SCHEMA_VERSION = 1;

export interface Envelope<T> {
  status: "ok" | "error";
  engine_version: string;
  schema_version: number;
  data?: T;
  error?: ApiError;
}

export interface ApiError {
  code: string;
  message: string;
  details: Record<string, unknown>;
}

export interface PhaseTransition {
  from_phase: number;
  to_phase: number;
  gate_ref: string;
  timestamp: string;
}

export interface VaVerdict {
  va_id: string;
  verdict: "approved" | "rejected";
  evidence: string;
}

export interface GateEvaluation {
  eval_id: string;
  gate_id: string;
  per_va: VaVerdict[];
  result: "approved" | "rejected";
  feedback: { gate_id: string; items: { va_id: string; message: string }[] } | null;
  timestamp: string;
  details: Record<string, unknown>;
}

export interface RubricCriterion {
  criterion_id: number;
  name: string;
  max_points: number;
  awarded: number;
}

export interface DiscoveryScore {
  criteria: RubricCriterion[];
  total: number;
  operator_confirmed: boolean;
}

export interface ProjectSnapshot {
  project_id: string;
  name: string;
  current_phase: number;
  phase_name: string;
  iteration_count: number;
  pending_gate: string;
  open_findings: number;
  architecture_versions: number[];
  transitions: PhaseTransition[];
  gate_log: GateEvaluation[];
  score: DiscoveryScore | null;
}

export interface LensEntry {
  lens_id: string;
  name: string;
  category: "universal" | "situational" | "domain_transfer";
  central_question: string;
  failure_class: string;
  activation_condition: string | null;
  active: boolean;
  rationale: string;
}

export type Severity = "critical" | "important" | "suggestion";

export interface Finding {
  finding_id: string;
  module_ref: string;
  lens_ref: string;
  severity: Severity;
  description: string;
  decision: string;
  decision_rationale: string;
  status: string;
}

export interface MatrixCell {
  module_ref: string;
  lens_ref: string;
  outcome: "findings" | "explicit_none";
  finding_ids: string[];
  assessed_at: string;
}

export interface MatrixPayload {
  modules: string[];
  active_lenses: string[];
  cells: MatrixCell[];
  findings: Finding[];
}

export interface ConvergencePayload {
  latest_version: number;
  complexity: { module_count: number; interface_count: number; total: number };
  previous_version?: number;
  previous_complexity?: { module_count: number; interface_count: number; total: number };
  diff?: { change_ratio: number; [k: string]: unknown };
  g4_preview?: { approved: boolean; reasons: string[]; details: Record<string, unknown> };
}
