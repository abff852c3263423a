/** DOM wiring: renders the review flow and binds the keyboard-first
 * controls (digit keys score the focused criterion, A/R set the verdict,
 * Enter submits). */

import { ReviewApi } from "./api.js";
import { ReviewFlow, type FlowState } from "./reviewFlow.js";
import { CRITERIA, CRITERIA_LABELS, SCORE_MAX, SCORE_MIN } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function clueRow(label: string, text: string): string {
  const safe = text || "(empty)";
  return `<dt>${label}</dt><dd>${escapeHtml(safe)}</dd>`;
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

export function mount(root: Document, baseUrl = ""): ReviewFlow {
  const params = new URLSearchParams(root.defaultView?.location.search ?? "");
  const reviewerId = params.get("reviewer") ?? "anonymous";
  const api = new ReviewApi(baseUrl);
  let focusedCriterion = 0;

  const flow = new ReviewFlow(api, reviewerId, render);

  function render(state: FlowState): void {
    const banner = el<HTMLDivElement>("banner");
    banner.textContent = state.banner ?? "";
    banner.hidden = !state.banner;
    el<HTMLButtonElement>("retry").hidden = state.phase !== "connection-error";

    const panel = el<HTMLDivElement>("sample-panel");
    const tallyPanel = el<HTMLDivElement>("tally-panel");
    tallyPanel.hidden = state.phase !== "submitted";

    if (state.phase === "submitted" && state.lastTally) {
      tallyPanel.innerHTML =
        `<h2>Ballot recorded</h2>` +
        `<p>Decision: <strong>${state.lastTally.decision}</strong> · ` +
        `${state.lastTally.ballots.length} ballot(s) · ` +
        `mean score ${state.lastTally.mean_score.toFixed(2)}</p>` +
        `<button id="next-sample">Next sample (Enter)</button>`;
      el<HTMLButtonElement>("next-sample").onclick = () => void flow.advance();
    }

    if (!state.view || state.phase !== "reviewing") {
      panel.hidden = true;
      return;
    }
    panel.hidden = false;

    el<HTMLElement>("sample-id").textContent = state.view.sample_id;
    el<HTMLElement>("pseudo-label").textContent = state.view.pseudo_label;
    el<HTMLDListElement>("clues").innerHTML = [
      clueRow("Subtitle", state.view.subtitle),
      clueRow("Audio tone", state.view.audio_tone),
      clueRow("Visual expression", state.view.visual_expression),
      clueRow("Visual objective", state.view.visual_objective),
    ].join("");
    el<HTMLElement>("coarse").textContent = state.view.coarse_description;
    el<HTMLElement>("candidate").textContent =
      state.view.candidate_fine_description ?? "(no candidate)";

    CRITERIA.forEach((name, i) => {
      const slider = el<HTMLInputElement>(`score-${name}`);
      const value = state.scores[i];
      slider.value = value === null ? "" : String(value);
      const display = el<HTMLElement>(`score-${name}-value`);
      display.textContent = value === null ? "–" : String(value);
      const row = el<HTMLElement>(`row-${name}`);
      row.classList.toggle("field-error",
        state.fieldError?.index === i);
      row.classList.toggle("focused", focusedCriterion === i);
    });
    el<HTMLElement>("field-error-message").textContent =
      state.fieldError?.message ?? "";

    el<HTMLButtonElement>("verdict-accept").classList.toggle(
      "selected", state.verdict === "accept");
    el<HTMLButtonElement>("verdict-reject").classList.toggle(
      "selected", state.verdict === "reject");
    el<HTMLButtonElement>("submit").disabled = !flow.canSubmit();
  }

  function buildForm(): void {
    const form = el<HTMLDivElement>("criteria");
    form.innerHTML = CRITERIA.map(
      (name) => `
      <div class="criterion" id="row-${name}">
        <label for="score-${name}">${CRITERIA_LABELS[name]}</label>
        <input type="range" id="score-${name}" min="${SCORE_MIN}"
               max="${SCORE_MAX}" step="1" list="score-ticks">
        <output id="score-${name}-value">–</output>
      </div>`,
    ).join("");
    CRITERIA.forEach((name, i) => {
      const slider = el<HTMLInputElement>(`score-${name}`);
      slider.addEventListener("input", () => {
        focusedCriterion = i;
        flow.setScore(i, Number(slider.value));
      });
      slider.addEventListener("focus", () => {
        focusedCriterion = i;
      });
    });
  }

  function bindControls(): void {
    el<HTMLButtonElement>("retry").onclick = () => void flow.retry();
    el<HTMLButtonElement>("verdict-accept").onclick = () =>
      flow.setVerdict("accept");
    el<HTMLButtonElement>("verdict-reject").onclick = () =>
      flow.setVerdict("reject");
    el<HTMLButtonElement>("submit").onclick = () => void flow.submit();

    root.addEventListener("keydown", (event) => {
      const key = (event as KeyboardEvent).key;
      if (key >= "0" && key <= "5") {
        flow.setScore(focusedCriterion, Number(key));
        focusedCriterion = Math.min(focusedCriterion + 1, CRITERIA.length - 1);
        render(flow.getState());
      } else if (key === "a" || key === "A") {
        flow.setVerdict("accept");
      } else if (key === "r" || key === "R") {
        flow.setVerdict("reject");
      } else if (key === "Enter") {
        const phase = flow.getState().phase;
        if (phase === "submitted") void flow.advance();
        else if (flow.canSubmit()) void flow.submit();
      }
    });
  }

  buildForm();
  bindControls();
  void flow.loadNext();
  return flow;
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  mount(document);
}
