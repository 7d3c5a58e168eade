// Validation outcome badge: green with the exact speedup for a correct
// candidate, red for an incorrect one, neutral for skipped/failed runs.

import type { ValidationResult } from "./api";
import { el, num } from "./format";

export function renderValidationBadge(result: ValidationResult): HTMLElement {
  if (result.skipped) {
    const msg = result.failure?.message ?? "missing module";
    return el("span", "badge-validation badge-neutral", `skipped: ${msg}`);
  }
  if (result.failure) {
    return el(
      "span",
      "badge-validation badge-neutral",
      `failed at ${result.failure.stage}`,
    );
  }
  if (!result.correct) {
    return el("span", "badge-validation badge-bad", "incorrect");
  }
  const badge = el("span", "badge-validation badge-ok");
  badge.textContent =
    result.speedup !== null ? `correct · ${num(result.speedup)}x faster` : "correct";
  if (result.speedup !== null) badge.dataset.speedup = num(result.speedup);
  return badge;
}

export function pendingBadge(): HTMLElement {
  return el("span", "badge-validation badge-pending", "validating…");
}
