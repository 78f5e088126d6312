import { ApiClient, ApiRequestError, SchemaMismatchError } from "./client.js";
import { buildViewModel } from "./viewmodel.js";
import { renderDashboard } from "./render.js";

const POLL_INTERVAL_MS = 2000;

const client = new ApiClient();

async function refresh(rootEl: HTMLElement): Promise<void> {
  try {
    const [project, lenses, matrix, score] = await Promise.all([
      client.getProject(),
      client.getLenses(),
      client.getMatrix(),
      client.getScore(),
    ]);
    // convergence is a 422 until the first architecture version exists
    const convergence = await client.getConvergence().catch((err) => {
      if (err instanceof ApiRequestError) return null;
      throw err;
    });
    const vm = buildViewModel(project, lenses, matrix, score, convergence);
    rootEl.innerHTML = renderDashboard(vm);
    rootEl.classList.remove("degraded", "unreachable");
  } catch (err) {
    if (err instanceof SchemaMismatchError) {
      rootEl.classList.add("degraded");
      rootEl.innerHTML =
        `<div class="banner schema-mismatch">engine schema v${err.serverVersion} is newer ` +
        `than this dashboard; running read-only degraded mode</div>` + rootEl.innerHTML;
      return;
    }
    rootEl.classList.add("unreachable");
    const banner = `<div class="banner retry">API unreachable; retrying…</div>`;
    if (!rootEl.innerHTML.includes("banner retry")) {
      rootEl.innerHTML = banner + rootEl.innerHTML;
    }
  }
}

export function start(): void {
  const rootEl = document.getElementById("app");
  if (!rootEl) throw new Error("missing #app container");

  rootEl.addEventListener("click", async (event) => {
    const target = event.target as HTMLElement;
    const findingId = target.dataset.finding;
    const decision = target.dataset.decision;
    if (findingId && decision) {
      let rationale = "";
      if (target.dataset.needsRationale) {
        rationale = window.prompt(`rationale for ${decision} on ${findingId}:`) ?? "";
        if (!rationale.trim()) return; // submit stays disabled without a rationale
      }
      try {
        await client.triageFinding(findingId, decision, rationale);
      } catch (err) {
        if (err instanceof ApiRequestError) window.alert(`${err.code}: ${err.message}`);
      }
      await refresh(rootEl);
    }
  });

  void refresh(rootEl);
  setInterval(() => void refresh(rootEl), POLL_INTERVAL_MS);
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  start();
}
