// Numbers shown in the UI are service values verbatim: String(n) of the
// JSON number, never a recomputed or rounded copy. Contract tests compare
// the rendered text against the raw fixture fields.

export function num(n: number): string {
  return String(n);
}

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function regionKey(r: { path: string; start_line: number; end_line: number }): string {
  return `${r.path}:${r.start_line}-${r.end_line}`;
}
