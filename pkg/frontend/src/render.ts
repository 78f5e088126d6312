import type { ProjectViewModel, MatrixViewCell } from "./viewmodel.js";
import { rationaleRequired } from "./viewmodel.js";

/** Severity palette: red / yellow / green convention. */
const SEVERITY_COLOR: Record<string, string> = {
  critical: "#c62828",
  important: "#f9a825",
  suggestion: "#2e7d32",
};

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderTimeline(vm: ProjectViewModel): string {
  const steps = vm.timeline
    .map((entry) => {
      const classes = ["phase"];
      if (entry.current) classes.push("current");
      if (entry.visited) classes.push("visited");
      return (
        `<li class="${classes.join(" ")}" data-phase="${entry.phase}">` +
        `${entry.phase}: ${escapeHtml(entry.name)}</li>`
      );
    })
    .join("");
  const loop =
    vm.loopCount > 0
      ? `<div class="loop-arc" data-edge="4-2">loop 4&rarr;2 &times;${vm.loopCount}</div>`
      : "";
  return `<ol class="timeline">${steps}</ol>${loop}`;
}

function cellMarkup(cell: MatrixViewCell): string {
  const title = `${cell.module} / ${cell.lens}`;
  if (cell.state.kind === "unassessed") {
    return `<td class="cell unassessed" title="${escapeHtml(title)}"></td>`;
  }
  if (cell.state.kind === "clean") {
    return `<td class="cell clean" title="${escapeHtml(title)}">&middot;</td>`;
  }
  const color = SEVERITY_COLOR[cell.state.worstSeverity];
  return (
    `<td class="cell findings ${cell.state.worstSeverity}" style="background:${color}" ` +
    `title="${escapeHtml(title)}">${cell.state.count}</td>`
  );
}

export function renderMatrix(vm: ProjectViewModel): string {
  if (!vm.matrix) return `<p class="empty">no coverage matrix yet</p>`;
  const { modules, lenses, cells } = vm.matrix;
  const byModule = new Map<string, MatrixViewCell[]>();
  for (const cell of cells) {
    const row = byModule.get(cell.module) ?? [];
    row.push(cell);
    byModule.set(cell.module, row);
  }
  const header = `<tr><th></th>${lenses.map((l) => `<th>${escapeHtml(l)}</th>`).join("")}</tr>`;
  const rows = modules
    .map((m) => `<tr><th>${escapeHtml(m)}</th>${(byModule.get(m) ?? []).map(cellMarkup).join("")}</tr>`)
    .join("");
  return `<table class="matrix">${header}${rows}</table>`;
}

export function renderRubric(vm: ProjectViewModel): string {
  const rows = vm.rubric.criteria
    .map(
      (c) =>
        `<tr><td>${c.id}</td><td>${escapeHtml(c.name)}</td>` +
        `<td><input type="number" name="criterion-${c.id}" min="0" max="${c.max}" value="${c.awarded}"></td>` +
        `<td>/ ${c.max}</td></tr>`,
    )
    .join("");
  const confirmed = vm.rubric.operatorConfirmed ? "checked" : "";
  return (
    `<form class="rubric"><table>${rows}</table>` +
    `<p class="total">total: <span id="rubric-total">${vm.rubric.total}</span>/100</p>` +
    `<label><input type="checkbox" name="operator-confirmed" ${confirmed}> operator confirmation</label>` +
    `</form>`
  );
}

export function renderTriageQueue(vm: ProjectViewModel): string {
  if (vm.triageQueue.length === 0) return `<p class="empty">no open findings</p>`;
  const cards = vm.triageQueue
    .map(({ finding, actions }) => {
      const buttons = actions
        .map(
          (a) =>
            `<button data-finding="${finding.finding_id}" data-decision="${a}"` +
            `${rationaleRequired(a) ? ' data-needs-rationale="true"' : ""}>${a}</button>`,
        )
        .join("");
      return (
        `<div class="finding ${finding.severity}" data-id="${finding.finding_id}">` +
        `<span class="where">${escapeHtml(finding.module_ref)}/${escapeHtml(finding.lens_ref)}</span> ` +
        `<span class="severity">${finding.severity}</span> ` +
        `<span class="description">${escapeHtml(finding.description)}</span>` +
        `<div class="actions">${buttons}</div></div>`
      );
    })
    .join("");
  return `<div class="triage-queue">${cards}</div>`;
}

export function renderConvergence(vm: ProjectViewModel): string {
  const c = vm.convergence;
  const ratio =
    c.changeRatio === null
      ? `<p class="ratio">only v${c.latestVersion} registered; nothing to diff</p>`
      : `<p class="ratio">change ratio ${(c.changeRatio * 100).toFixed(2)}% ` +
        `(threshold ${(c.threshold * 100).toFixed(0)}%)</p>`;
  const verdict =
    c.g4Approved === null
      ? ""
      : `<p class="g4 ${c.g4Approved ? "approved" : "rejected"}">G4 preview: ${c.g4Approved ? "approved" : "rejected"}</p>`;
  return (
    `<div class="convergence">${ratio}` +
    `<p class="complexity">complexity trend: ${c.complexityTrend.join(" &rarr; ") || "n/a"}</p>` +
    `<p class="criticals">open criticals: ${c.openCriticals}</p>${verdict}</div>`
  );
}

export function renderDashboard(vm: ProjectViewModel): string {
  return (
    `<header><h1>${escapeHtml(vm.name)}</h1>` +
    `<p>phase ${vm.currentPhase}, iteration ${vm.iterationCount}, pending gate ${vm.pendingGate}</p></header>` +
    `<section id="timeline">${renderTimeline(vm)}</section>` +
    `<section id="rubric">${renderRubric(vm)}</section>` +
    `<section id="matrix">${renderMatrix(vm)}</section>` +
    `<section id="triage">${renderTriageQueue(vm)}</section>` +
    `<section id="convergence">${renderConvergence(vm)}</section>`
  );
}
