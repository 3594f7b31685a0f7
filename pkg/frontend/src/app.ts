// Dashboard wiring. All numbers shown here come from service responses; the
// client validates form entries and renders, nothing more.

import {
  ApiError,
  createSession,
  fetchAsk,
  fetchHistory,
  fetchState,
  submitTell,
} from "./api.js";
import type { HistoryStep, StateResponse } from "./api.js";
import { renderChart } from "./chart.js";
import { pageMarkup } from "./page.js";
import {
  forgetSession,
  loadBaseUrl,
  loadSessions,
  rememberSession,
  saveBaseUrl,
} from "./storage.js";

const DEFAULT_BASE = "http://127.0.0.1:8033";

interface DashboardState {
  base: string;
  sessionId: string | null;
  tags: string[];
  tellBusy: boolean;
  epoch: number;
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function formatPoint(point: number[]): string {
  return `(${point.map((v) => shorten(v)).join(", ")})`;
}

function shorten(value: number): string {
  const text = String(value);
  return text.length <= 8 ? text : value.toPrecision(6);
}

export function initDashboard(doc: Document): void {
  const root = doc.querySelector("#app");
  if (root === null) throw new Error("missing #app mount point");
  root.innerHTML = pageMarkup();

  const win = doc.defaultView;
  if (win === null) throw new Error("document is not attached to a window");
  const storage = win.localStorage;

  const pick = <T extends Element>(selector: string): T => {
    const el = doc.querySelector<T>(selector);
    if (el === null) throw new Error(`missing element ${selector}`);
    return el;
  };

  const baseInput = pick<HTMLInputElement>("#base-url");
  const banner = pick<HTMLElement>("#banner");
  const bannerMessage = pick<HTMLElement>("#banner-message");
  const bannerRetry = pick<HTMLButtonElement>("#banner-retry");
  const createForm = pick<HTMLFormElement>("#create-form");
  const createLower = pick<HTMLInputElement>("#create-lower");
  const createUpper = pick<HTMLInputElement>("#create-upper");
  const createSeed = pick<HTMLInputElement>("#create-seed");
  const createN0 = pick<HTMLInputElement>("#create-n0");
  const createAcquisition = pick<HTMLSelectElement>("#create-acquisition");
  const createBatch = pick<HTMLInputElement>("#create-batch");
  const createError = pick<HTMLElement>("#create-error");
  const createSubmit = pick<HTMLButtonElement>("#create-submit");
  const sessionList = pick<HTMLElement>("#session-list");
  const notFound = pick<HTMLElement>("#notfound");
  const notFoundMessage = pick<HTMLElement>("#notfound-message");
  const notFoundForget = pick<HTMLButtonElement>("#notfound-forget");
  const sessionPanel = pick<HTMLElement>("#session-panel");
  const sessionId = pick<HTMLElement>("#session-id");
  const sessionStatus = pick<HTMLElement>("#session-status");
  const sessionSpace = pick<HTMLElement>("#session-space");
  const sessionRule = pick<HTMLElement>("#session-rule");
  const sessionSeed = pick<HTMLElement>("#session-seed");
  const sessionStep = pick<HTMLElement>("#session-step");
  const sessionBest = pick<HTMLElement>("#session-best");
  const sessionError = pick<HTMLElement>("#session-error");
  const refreshButton = pick<HTMLButtonElement>("#refresh");
  const askPanel = pick<HTMLElement>("#ask-panel");
  const askHead = pick<HTMLElement>("#ask-head");
  const askBody = pick<HTMLElement>("#ask-body");
  const tellForm = pick<HTMLFormElement>("#tell-form");
  const tellError = pick<HTMLElement>("#tell-error");
  const tellSubmit = pick<HTMLButtonElement>("#tell-submit");
  const chart = pick<SVGSVGElement>("#chart");
  const historyHead = pick<HTMLElement>("#history-head");
  const historyBody = pick<HTMLElement>("#history-body");
  const placeholder = pick<HTMLElement>("#placeholder");

  const state: DashboardState = {
    base: loadBaseUrl(storage, DEFAULT_BASE),
    sessionId: null,
    tags: [],
    tellBusy: false,
    epoch: 0,
  };
  baseInput.value = state.base;

  // -- small render helpers --------------------------------------------------

  function setStatus(status: string): void {
    sessionStatus.textContent = status;
    sessionStatus.setAttribute("data-status", status);
  }

  function showBanner(message: string, retry: (() => void) | null): void {
    bannerMessage.textContent = message;
    banner.hidden = false;
    bannerRetry.hidden = retry === null;
    bannerRetry.onclick = retry;
  }

  function hideBanner(): void {
    banner.hidden = true;
    bannerRetry.onclick = null;
  }

  function showFormError(target: HTMLElement, message: string): void {
    target.textContent = message;
    target.hidden = false;
  }

  function clearFormError(target: HTMLElement): void {
    target.textContent = "";
    target.hidden = true;
  }

  function renderSessionList(): void {
    const sessions = loadSessions(storage);
    sessionList.innerHTML = sessions
      .map(
        (s) => `
        <li>
          <button type="button" data-id="${escapeHtml(s.id)}">
            <code>${escapeHtml(s.id.slice(0, 8))}</code>
            <span class="muted">${s.dim}d · ${escapeHtml(s.createdAt.slice(0, 10))}</span>
          </button>
        </li>`,
      )
      .join("");
    for (const button of sessionList.querySelectorAll<HTMLButtonElement>("button[data-id]")) {
      button.addEventListener("click", () => {
        void openSession(button.dataset.id ?? "");
      });
    }
  }

  function renderSummary(view: StateResponse): void {
    sessionId.textContent = view.id;
    sessionSpace.textContent = `[${view.space.lower.map(shorten).join(", ")}] to [${view.space.upper.map(shorten).join(", ")}]`;
    sessionRule.textContent = `${view.rule.kind} / ${view.rule.acquisition} / batch ${view.rule.batch_size}`;
    sessionSeed.textContent = String(view.seed);
    sessionStep.textContent = String(view.step_index);
    sessionBest.textContent = view.best_objective === null ? "—" : String(view.best_objective);
    if (view.error === null) {
      clearFormError(sessionError);
    } else {
      showFormError(sessionError, view.error);
    }
  }

  function renderAsk(points: number[][], tags: string[]): void {
    const dim = points.length > 0 ? points[0].length : 0;
    const coordHeads = Array.from({ length: dim }, (_, i) => `<th>x${i}</th>`).join("");
    const tagHeads = tags.map((t) => `<th>${escapeHtml(t)}</th>`).join("");
    askHead.innerHTML = `<tr><th>#</th>${coordHeads}${tagHeads}</tr>`;
    askBody.innerHTML = points
      .map((point, row) => {
        const coords = point
          .map((v) => `<td class="coord" data-row="${row}">${String(v)}</td>`)
          .join("");
        const cells = tags
          .map(
            (tag) =>
              `<td><input data-row="${row}" data-tag="${escapeHtml(tag)}" inputmode="decimal" autocomplete="off"></td>`,
          )
          .join("");
        return `<tr><td>${row}</td>${coords}${cells}</tr>`;
      })
      .join("");
    askPanel.hidden = false;
  }

  function clearAsk(): void {
    askHead.innerHTML = "";
    askBody.innerHTML = "";
    askPanel.hidden = true;
  }

  function renderHistory(steps: HistoryStep[], tags: string[]): void {
    const tagHeads = tags.map((t) => `<th>${escapeHtml(t)}</th>`).join("");
    historyHead.innerHTML = `<tr><th>step</th><th>points</th>${tagHeads}<th>best so far</th></tr>`;
    historyBody.innerHTML = steps
      .map((entry) => {
        const points = entry.query_points.map(formatPoint).join("; ");
        const cells = tags
          .map((tag) => {
            const values = entry.observations[tag] ?? [];
            return `<td>${values.map(shorten).join("; ")}</td>`;
          })
          .join("");
        return `
        <tr>
          <td>${entry.step}</td>
          <td>${escapeHtml(points)}</td>
          ${cells}
          <td class="best">${String(entry.best_so_far)}</td>
        </tr>`;
      })
      .join("");
    renderChart(chart, steps.map((s) => ({ step: s.step, best: s.best_so_far })));
  }

  function setTellBusy(busy: boolean): void {
    state.tellBusy = busy;
    tellSubmit.disabled = busy;
    for (const input of askBody.querySelectorAll<HTMLInputElement>("input[data-tag]")) {
      input.disabled = busy;
    }
  }

  // -- data flows ------------------------------------------------------------

  async function openSession(id: string): Promise<void> {
    const epoch = ++state.epoch;
    state.sessionId = id;
    hideBanner();
    notFound.hidden = true;
    placeholder.hidden = true;
    sessionPanel.hidden = false;
    clearFormError(tellError);
    setStatus("computing");
    sessionId.textContent = id;
    try {
      const view = await fetchState(state.base, id);
      if (epoch !== state.epoch) return;
      state.tags = view.tags;
      renderSummary(view);
      const history = await fetchHistory(state.base, id);
      if (epoch !== state.epoch) return;
      renderHistory(history.steps, view.tags);
      if (view.status === "error") {
        setStatus("error");
        clearAsk();
        return;
      }
      let pending = view.pending_ask;
      if (pending === null) {
        // server has no open recommendation: request one
        setStatus("computing");
        const ask = await fetchAsk(state.base, id);
        if (epoch !== state.epoch) return;
        pending = ask.points;
      }
      renderAsk(pending, view.tags);
      setTellBusy(false);
      setStatus("awaiting-tell");
    } catch (err) {
      if (epoch !== state.epoch) return;
      handleSessionError(err, id);
    }
  }

  function handleSessionError(err: unknown, id: string): void {
    if (err instanceof ApiError && err.status === 404) {
      sessionPanel.hidden = true;
      notFound.hidden = false;
      notFoundMessage.textContent = `Session ${id} was not found on the service.`;
      notFoundForget.onclick = () => {
        forgetSession(storage, id);
        renderSessionList();
        notFound.hidden = true;
        placeholder.hidden = false;
      };
      return;
    }
    setStatus("error");
    if (err instanceof ApiError) {
      showBanner(err.message, () => void openSession(id));
    } else {
      showBanner("Service unreachable. Check the service URL and retry.", () => void openSession(id));
    }
  }

  async function handleCreate(event: Event): Promise<void> {
    event.preventDefault();
    clearFormError(createError);
    const lower = parseVector(createLower.value);
    const upper = parseVector(createUpper.value);
    const seed = parseInteger(createSeed.value, 0);
    const batch = parseInteger(createBatch.value, 1);
    const n0 = createN0.value.trim() === "" ? null : parseInteger(createN0.value, null);
    const problems: string[] = [];
    if (lower === null) problems.push("lower bounds must be comma-separated numbers");
    if (upper === null) problems.push("upper bounds must be comma-separated numbers");
    if (lower !== null && upper !== null && lower.length !== upper.length) {
      problems.push("lower and upper bounds need the same length");
    }
    if (seed === null) problems.push("seed must be an integer");
    if (batch === null || batch < 1) problems.push("batch size must be a positive integer");
    if (n0 !== null && (Number.isNaN(n0) || n0 < 1)) problems.push("initial points must be a positive integer");
    if (problems.length > 0) {
      showFormError(createError, problems.join("; "));
      return;
    }
    createSubmit.disabled = true;
    try {
      const body = {
        space: { lower: lower as number[], upper: upper as number[] },
        seed: seed as number,
        rule: {
          kind: (batch as number) > 1 ? "batch-penalized" : "ego",
          batch_size: batch as number,
          acquisition: createAcquisition.value,
        },
        ...(n0 === null ? {} : { n0 }),
      };
      const created = await createSession(state.base, body);
      rememberSession(storage, {
        id: created.id,
        createdAt: new Date().toISOString(),
        dim: (lower as number[]).length,
        tags: created.tags,
      });
      renderSessionList();
      hideBanner();
      await openSession(created.id);
    } catch (err) {
      if (err instanceof ApiError) {
        showFormError(createError, err.field === null ? err.message : `${err.field}: ${err.message}`);
      } else {
        showBanner("Service unreachable. Check the service URL and retry.", null);
      }
    } finally {
      createSubmit.disabled = false;
    }
  }

  async function handleTell(event: Event): Promise<void> {
    event.preventDefault();
    if (state.tellBusy || state.sessionId === null) return;
    const inputs = [...askBody.querySelectorAll<HTMLInputElement>("input[data-tag]")];
    if (inputs.length === 0) return;

    // client-side gate: every cell numeric and finite before anything is sent
    let valid = true;
    for (const input of inputs) {
      const text = input.value.trim();
      const numeric = text !== "" && Number.isFinite(Number(text));
      input.classList.toggle("invalid", !numeric);
      if (!numeric) valid = false;
    }
    if (!valid) {
      showFormError(tellError, "Every cell needs a finite number before submitting.");
      return;
    }
    clearFormError(tellError);

    const observations: Record<string, number[]> = {};
    for (const tag of state.tags) observations[tag] = [];
    for (const input of inputs) {
      observations[input.dataset.tag as string][Number(input.dataset.row)] = Number(
        input.value.trim(),
      );
    }

    const id = state.sessionId;
    setTellBusy(true);
    setStatus("computing");
    try {
      await submitTell(state.base, id, observations);
      setTellBusy(false);
      await openSession(id);
    } catch (err) {
      setTellBusy(false);
      setStatus("awaiting-tell");
      if (err instanceof ApiError) {
        if (err.field !== null) {
          for (const input of inputs) {
            input.classList.toggle("invalid", input.dataset.tag === err.field);
          }
        }
        const hint = err.code === "conflict" ? " Press Refresh to resync this view." : "";
        showFormError(tellError, err.message + hint);
      } else {
        showBanner("Service unreachable. Check the service URL and retry.", () => void openSession(id));
      }
    }
  }

  // -- wiring ----------------------------------------------------------------

  baseInput.addEventListener("change", () => {
    state.base = baseInput.value.trim() || DEFAULT_BASE;
    baseInput.value = state.base;
    saveBaseUrl(storage, state.base);
  });
  createForm.addEventListener("submit", (event) => void handleCreate(event));
  tellForm.addEventListener("submit", (event) => void handleTell(event));
  refreshButton.addEventListener("click", () => {
    if (state.sessionId !== null) void openSession(state.sessionId);
  });

  renderSessionList();
}

function parseVector(text: string): number[] | null {
  const parts = text.split(",").map((p) => p.trim());
  if (parts.length === 0 || parts.some((p) => p === "")) return null;
  const values = parts.map(Number);
  return values.every(Number.isFinite) ? values : null;
}

function parseInteger(text: string, fallback: number | null): number | null {
  const trimmed = text.trim();
  if (trimmed === "") return fallback;
  if (!/^-?\d+$/.test(trimmed)) return null;
  return Number(trimmed);
}
