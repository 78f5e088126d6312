import { describe, expect, it } from "vitest";

import { unwrap } from "../src/client.js";
import type {
  ConvergencePayload,
  DiscoveryScore,
  LensEntry,
  MatrixPayload,
  ProjectSnapshot,
} from "../src/types.js";
import { buildViewModel } from "../src/viewmodel.js";
import {
  renderConvergence,
  renderDashboard,
  renderMatrix,
  renderRubric,
  renderTimeline,
  renderTriageQueue,
} from "../src/render.js";
import { loadFixture } from "./contract.test.js";

function project(): ProjectSnapshot {
  return unwrap(loadFixture("get_project").body) as ProjectSnapshot;
}

function fixtureViewModel(overrides: Partial<ProjectSnapshot> = {}) {
  return buildViewModel(
    { ...project(), ...overrides },
    unwrap(loadFixture("get_lenses").body) as LensEntry[],
    unwrap(loadFixture("get_matrix").body) as MatrixPayload,
    unwrap(loadFixture("get_score").body) as DiscoveryScore,
    unwrap(loadFixture("get_convergence").body) as ConvergencePayload,
  );
}

describe("renderTimeline", () => {
  it("renders all 8 phases and highlights the current one", () => {
    const html = renderTimeline(fixtureViewModel());
    for (let phase = 0; phase < 8; phase++) {
      expect(html).toContain(`data-phase="${phase}"`);
    }
    expect(html).toContain('class="phase current visited" data-phase="2"');
    expect(html).not.toContain("loop-arc");
  });

  it("draws a loop arc once a 4->2 transition is recorded", () => {
    const withLoop = fixtureViewModel({
      transitions: [
        ...project().transitions,
        { from_phase: 2, to_phase: 3, gate_ref: "eval-x", timestamp: "" },
        { from_phase: 3, to_phase: 4, gate_ref: "eval-y", timestamp: "" },
        { from_phase: 4, to_phase: 2, gate_ref: "eval-z", timestamp: "" },
      ],
    });
    const html = renderTimeline(withLoop);
    expect(html).toContain('loop-arc');
    expect(html).toContain('data-edge="4-2"');
  });
});

describe("renderMatrix", () => {
  it("renders exactly 14 data cells with the severity palette", () => {
    const html = renderMatrix(fixtureViewModel());
    expect((html.match(/<td class="cell/g) ?? []).length).toBe(14);
    expect((html.match(/cell clean/g) ?? []).length).toBe(12);
    expect(html).toContain("findings critical");
    expect(html).toContain("findings important");
    expect(html).toContain("#c62828"); // critical red
    expect(html).toContain("#f9a825"); // important yellow
  });
});

describe("renderRubric", () => {
  it("shows all 10 criteria and the server total", () => {
    const html = renderRubric(fixtureViewModel());
    for (let id = 1; id <= 10; id++) {
      expect(html).toContain(`name="criterion-${id}"`);
    }
    expect(html).toContain('<span id="rubric-total">92</span>/100');
    expect(html).toContain('name="operator-confirmed" checked');
  });
});

describe("renderTriageQueue", () => {
  it("never offers accept_risk on a critical finding", () => {
    const html = renderTriageQueue(fixtureViewModel());
    const criticalCard = html.split('<div class="finding ').find((c) => c.startsWith("critical"))!;
    expect(criticalCard).toContain('data-decision="carried_to_phase3"');
    expect(criticalCard).not.toContain("accept_risk");
    const importantCard = html.split('<div class="finding ').find((c) => c.startsWith("important"))!;
    expect(importantCard).toContain('data-decision="accept_risk"');
    expect(importantCard).toContain('data-needs-rationale="true"');
  });

  it("escapes finding text", () => {
    const vm = fixtureViewModel();
    vm.triageQueue[0].finding.description = '<img src=x onerror="pwn()">';
    const html = renderTriageQueue(vm);
    expect(html).not.toContain("<img");
    expect(html).toContain("&lt;img");
  });
});

describe("renderConvergence", () => {
  it("single version shows nothing to diff plus open criticals", () => {
    const html = renderConvergence(fixtureViewModel());
    expect(html).toContain("nothing to diff");
    expect(html).toContain("open criticals: 1");
  });

  it("with a diff it shows the ratio against the 15% threshold", () => {
    const vm = fixtureViewModel();
    vm.convergence.changeRatio = 0.0833;
    vm.convergence.g4Approved = true;
    const html = renderConvergence(vm);
    expect(html).toContain("change ratio 8.33%");
    expect(html).toContain("threshold 15%");
    expect(html).toContain("G4 preview: approved");
  });
});

describe("renderDashboard", () => {
  it("composes every section", () => {
    const html = renderDashboard(fixtureViewModel());
    for (const id of ["timeline", "rubric", "matrix", "triage", "convergence"]) {
      expect(html).toContain(`<section id="${id}">`);
    }
    expect(html).toContain("pending gate G2");
  });
});
