// Per-region suggestion panels: open a stream, append fragments as they
// arrive, then swap in the final card (rationale, candidate code, diff,
// validate / download-patch actions). One in-flight request per region.

import type { ApiClient, Candidate, OptimizeFrame, Region, Suggestion } from "./api";
import { renderDiff } from "./diffView";
import { el, num, regionKey } from "./format";
import type { ViewState } from "./state";
import { validationKey } from "./state";
import { pendingBadge, renderValidationBadge } from "./validateBadge";

export class PanelManager {
  constructor(
    private readonly api: ApiClient,
    private readonly container: HTMLElement,
    private readonly state: ViewState,
  ) {}

  // Returns the panel, or null when the region already streams (the
  // second click is ignored, per the single-in-flight invariant).
  request(region: Region, model: string): HTMLElement | null {
    const key = regionKey(region);
    if (this.state.panels.get(key)?.status === "streaming") {
      return null;
    }
    this.state.panels.set(key, {
      status: "streaming",
      region,
      model,
      streamedText: "",
    });

    const existing = this.container.querySelector(`[data-region-panel="${cssEscape(key)}"]`);
    existing?.remove();

    const panel = el("section", "panel");
    panel.dataset.regionPanel = key;
    panel.dataset.status = "streaming";
    panel.appendChild(
      el(
        "header",
        "panel-header",
        `${region.path}:${region.start_line}-${region.end_line} · ${region.reason} · score ${num(region.score)} · ${model}`,
      ),
    );
    const stream = el("pre", "stream-text");
    panel.appendChild(stream);
    this.container.prepend(panel);

    void this.run(panel, stream, region, model, key);
    return panel;
  }

  private async run(
    panel: HTMLElement,
    stream: HTMLElement,
    region: Region,
    model: string,
    key: string,
  ): Promise<void> {
    const entry = this.state.panels.get(key)!;
    const onFrame = (frame: OptimizeFrame) => {
      if (frame.type === "chunk") {
        entry.streamedText += frame.text;
        stream.textContent = entry.streamedText;
      } else if (frame.type === "done") {
        entry.status = "complete";
        entry.suggestion = frame.suggestion;
        this.renderFinal(panel, frame.suggestion);
      } else {
        entry.status = "failed";
        entry.error = { code: frame.code, message: frame.message };
        this.renderFailure(panel, region, model, frame.code, frame.message);
      }
    };
    try {
      await this.api.optimize(
        {
          path: region.path,
          start_line: region.start_line,
          end_line: region.end_line,
          model,
        },
        onFrame,
      );
    } catch (err) {
      entry.status = "failed";
      const message = err instanceof Error ? err.message : String(err);
      entry.error = { code: "request-failed", message };
      this.renderFailure(panel, region, model, "request-failed", message);
    }
  }

  private renderFinal(panel: HTMLElement, suggestion: Suggestion): void {
    panel.dataset.status = "complete";
    const card = el("div", "final-card");
    if (suggestion.rationale) {
      card.appendChild(el("p", "rationale", suggestion.rationale));
    }
    suggestion.candidates.forEach((candidate, index) => {
      card.appendChild(this.renderCandidate(suggestion, candidate, index));
    });
    if (!suggestion.candidates.length) {
      card.appendChild(el("p", "no-candidates", "the model returned no code block"));
    }
    panel.appendChild(card);
  }

  private renderCandidate(
    suggestion: Suggestion,
    candidate: Candidate,
    index: number,
  ): HTMLElement {
    const wrap = el("div", "candidate");
    wrap.dataset.candidate = String(index);
    wrap.appendChild(el("pre", "candidate-code", candidate.replacement_text));
    wrap.appendChild(renderDiff(candidate.unified_diff));

    const actions = el("div", "candidate-actions");
    const validateBtn = el("button", "validate-btn", "validate");
    const slot = el("span", "validation-slot");
    validateBtn.addEventListener("click", () => {
      void this.validate(suggestion, index, validateBtn, slot);
    });
    const downloadBtn = el("button", "download-btn", "download patch");
    downloadBtn.addEventListener("click", () => downloadPatch(suggestion, candidate, index));
    actions.appendChild(validateBtn);
    actions.appendChild(downloadBtn);
    actions.appendChild(slot);
    wrap.appendChild(actions);
    return wrap;
  }

  private async validate(
    suggestion: Suggestion,
    index: number,
    button: HTMLButtonElement,
    slot: HTMLElement,
  ): Promise<void> {
    button.disabled = true;
    slot.replaceChildren(pendingBadge());
    try {
      const result = await this.api.validate(suggestion.id, index);
      this.state.validations.set(validationKey(suggestion.id, index), result);
      slot.replaceChildren(renderValidationBadge(result));
    } catch (err) {
      const message = err instanceof Error ? err.message : String(err);
      slot.replaceChildren(el("span", "badge-validation badge-neutral", `failed: ${message}`));
    } finally {
      button.disabled = false;
    }
  }

  private renderFailure(
    panel: HTMLElement,
    region: Region,
    model: string,
    code: string,
    message: string,
  ): void {
    panel.dataset.status = "failed";
    const failure = el("div", "failure");
    failure.appendChild(el("p", "failure-text", `${code}: ${message}`));
    const retry = el("button", "retry-btn", "retry");
    retry.addEventListener("click", () => {
      this.state.panels.delete(regionKey(region));
      this.request(region, model);
    });
    failure.appendChild(retry);
    panel.appendChild(failure);
  }
}

function downloadPatch(suggestion: Suggestion, candidate: Candidate, index: number): void {
  const blob = new Blob([candidate.unified_diff], { type: "text/x-patch" });
  const url = URL.createObjectURL(blob);
  const a = document.createElement("a");
  a.href = url;
  const file = suggestion.region.path.split("/").pop() ?? "region";
  a.download = `${file}-L${suggestion.region.start_line}-${suggestion.model}-${index}.patch`;
  a.click();
  URL.revokeObjectURL(url);
}

function cssEscape(value: string): string {
  return value.replace(/["\\]/g, "\\$&");
}
