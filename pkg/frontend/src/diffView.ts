// Renders the service-provided unified diff verbatim: one row per diff
// line, classified by its prefix. No re-diffing happens client-side; the
// one diff algorithm in the system lives on the server.

import { el } from "./format";

function lineClass(line: string): string {
  if (line.startsWith("@@")) return "diff-hunk";
  if (line.startsWith("+++") || line.startsWith("---")) return "diff-meta";
  if (line.startsWith("+")) return "diff-add";
  if (line.startsWith("-")) return "diff-del";
  if (line.startsWith("\\")) return "diff-note";
  return "diff-ctx";
}

export function renderDiff(unifiedDiff: string): HTMLElement {
  const pre = el("pre", "diff-view");
  if (!unifiedDiff) {
    pre.appendChild(el("span", "diff-note diff-line", "(no changes)"));
    return pre;
  }
  const lines = unifiedDiff.split("\n");
  if (lines.length && lines[lines.length - 1] === "") lines.pop();
  let inHunks = false;
  for (const line of lines) {
    if (line.startsWith("@@")) inHunks = true;
    const cls = !inHunks && (line.startsWith("---") || line.startsWith("+++"))
      ? "diff-meta"
      : lineClass(line);
    const row = el("span", `diff-line ${cls}`, line);
    pre.appendChild(row);
    pre.appendChild(document.createTextNode("\n"));
  }
  return pre;
}
