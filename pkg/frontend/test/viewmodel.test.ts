import { describe, expect, it } from "vitest";

import { unwrap } from "../src/client.js";
import type {
  ConvergencePayload,
  DiscoveryScore,
  LensEntry,
  MatrixPayload,
  ProjectSnapshot,
} from "../src/types.js";
import {
  buildViewModel,
  legalDecisions,
  rationaleRequired,
  rubricTotal,
} from "../src/viewmodel.js";
import { loadFixture } from "./contract.test.js";

function fixtureViewModel() {
  const project = unwrap(loadFixture("get_project").body) as ProjectSnapshot;
  const lenses = unwrap(loadFixture("get_lenses").body) as LensEntry[];
  const matrix = unwrap(loadFixture("get_matrix").body) as MatrixPayload;
  const score = unwrap(loadFixture("get_score").body) as DiscoveryScore;
  const convergence = unwrap(loadFixture("get_convergence").body) as ConvergencePayload;
  return buildViewModel(project, lenses, matrix, score, convergence);
}

describe("view model projection", () => {
  it("timeline has 8 phases with the current one highlighted", () => {
    const vm = fixtureViewModel();
    expect(vm.timeline).toHaveLength(8);
    expect(vm.timeline.filter((t) => t.current).map((t) => t.phase)).toEqual([2]);
    expect(vm.timeline.filter((t) => t.visited).map((t) => t.phase)).toEqual([0, 1, 2]);
  });

  it("matrix view holds exactly |modules| x |active lenses| cells", () => {
    const vm = fixtureViewModel();
    expect(vm.matrix).not.toBeNull();
    expect(vm.matrix!.cells).toHaveLength(vm.matrix!.modules.length * vm.matrix!.lenses.length);
    expect(vm.matrix!.cells).toHaveLength(14);
  });

  it("cell states mirror the recorded assessments", () => {
    const vm = fixtureViewModel();
    const byKey = new Map(vm.matrix!.cells.map((c) => [`${c.module}/${c.lens}`, c.state]));
    expect(byKey.get("store/security")).toEqual({
      kind: "findings",
      worstSeverity: "critical",
      count: 1,
    });
    expect(byKey.get("api/performance")).toEqual({
      kind: "findings",
      worstSeverity: "important",
      count: 1,
    });
    expect(byKey.get("api/security")!.kind).toBe("clean");
    const clean = vm.matrix!.cells.filter((c) => c.state.kind === "clean");
    expect(clean).toHaveLength(12);
  });

  it("rubric total matches the server-computed value and the client-side sum", () => {
    const vm = fixtureViewModel();
    const score = unwrap(loadFixture("get_score").body) as DiscoveryScore;
    expect(vm.rubric.total).toBe(score.total);
    expect(rubricTotal(score)).toBe(score.total);
    expect(vm.rubric.total).toBe(92);
    expect(vm.rubric.operatorConfirmed).toBe(true);
  });

  it("active lenses come straight from the API payload", () => {
    const vm = fixtureViewModel();
    expect(vm.activeLenses).toHaveLength(7);
    expect(vm.activeLenses).toContain("security");
  });

  it("triage queue lists open findings with only their legal actions", () => {
    const vm = fixtureViewModel();
    const bySeverity = new Map(vm.triageQueue.map((q) => [q.finding.severity, q.actions]));
    expect(bySeverity.get("critical")).toEqual(["carried_to_phase3"]);
    expect(bySeverity.get("important")).toEqual([
      "resolve_in_phase3",
      "accept_risk",
      "deferred",
    ]);
  });

  it("convergence panel reflects the preview payload", () => {
    const vm = fixtureViewModel();
    expect(vm.convergence.latestVersion).toBe(1);
    expect(vm.convergence.changeRatio).toBeNull(); // single version, nothing to diff
    expect(vm.convergence.threshold).toBe(0.15);
    expect(vm.convergence.openCriticals).toBe(1);
  });

  it("fresh project projects to an empty dashboard", () => {
    const project = unwrap(loadFixture("get_project").body) as ProjectSnapshot;
    const lenses = unwrap(loadFixture("get_lenses").body) as LensEntry[];
    const fresh: ProjectSnapshot = {
      ...project,
      current_phase: 0,
      iteration_count: 0,
      transitions: [],
      gate_log: [],
      score: null,
    };
    const vm = buildViewModel(fresh, lenses, null, null, null);
    expect(vm.timeline.filter((t) => t.current).map((t) => t.phase)).toEqual([0]);
    expect(vm.matrix).toBeNull();
    expect(vm.rubric.total).toBe(0);
    expect(vm.triageQueue).toEqual([]);
  });
});

describe("triage legality table", () => {
  it("criticals can only be carried", () => {
    expect(legalDecisions("critical")).toEqual(["carried_to_phase3"]);
    expect(legalDecisions("critical")).not.toContain("accept_risk");
  });

  it("importants and suggestions share the three-way choice", () => {
    for (const severity of ["important", "suggestion"] as const) {
      expect(legalDecisions(severity)).toEqual([
        "resolve_in_phase3",
        "accept_risk",
        "deferred",
      ]);
    }
  });

  it("accept_risk and deferred gate submission on a rationale", () => {
    expect(rationaleRequired("accept_risk")).toBe(true);
    expect(rationaleRequired("deferred")).toBe(true);
    expect(rationaleRequired("resolve_in_phase3")).toBe(false);
    expect(rationaleRequired("carried_to_phase3")).toBe(false);
  });
});
