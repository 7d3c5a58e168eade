// Annotated source listing: one row per line with a stacked CPU bar
// (python/native/system), memory and copy badges when nonzero, and a
// clickable optimize affordance on hotspot rows.

import type { FileProfile, LineMetrics, Region } from "./api";
import { el, num, regionKey } from "./format";

export interface SourceViewOptions {
  path: string;
  sourceText: string;
  fileProfile: FileProfile;
  hotspots: Region[];
  readOnly: boolean;
  onOptimize: (region: Region) => void;
}

function cpuBar(m: LineMetrics): HTMLElement | null {
  if (m.cpu_python_pct === 0 && m.cpu_native_pct === 0 && m.cpu_system_pct === 0) {
    return null;
  }
  const bar = el("span", "cpu-bar");
  const segments: Array<[string, number]> = [
    ["seg-python", m.cpu_python_pct],
    ["seg-native", m.cpu_native_pct],
    ["seg-system", m.cpu_system_pct],
  ];
  for (const [cls, value] of segments) {
    if (value === 0) continue;
    const seg = el("span", `seg ${cls}`);
    // The track is the whole run's wall time, so the field value is the
    // segment width directly.
    seg.style.width = `${num(value)}%`;
    seg.title = `${cls.replace("seg-", "")} ${num(value)}%`;
    bar.appendChild(seg);
  }
  return bar;
}

function badges(m: LineMetrics): HTMLElement | null {
  const wrap = el("span", "badges");
  if (m.mem_peak_mb !== 0) {
    wrap.appendChild(el("span", "badge badge-mem", `${num(m.mem_peak_mb)} MB`));
  }
  if (m.copy_mb_per_s !== 0) {
    wrap.appendChild(el("span", "badge badge-copy", `${num(m.copy_mb_per_s)} MB/s`));
  }
  return wrap.childNodes.length ? wrap : null;
}

export function renderSourceView(opts: SourceViewOptions): HTMLElement {
  const metricsByLine = new Map<number, LineMetrics>();
  for (const m of opts.fileProfile.lines) metricsByLine.set(m.line_no, m);
  const regions = opts.hotspots.filter((r) => r.path === opts.path);

  const container = el("div", "source-view");
  const lines = opts.sourceText.split("\n");
  // A trailing newline yields one phantom empty line; don't render it.
  if (lines.length > 1 && lines[lines.length - 1] === "") lines.pop();

  lines.forEach((text, i) => {
    const lineNo = i + 1;
    const row = el("div", "line-row");
    row.dataset.line = String(lineNo);

    const region = regions.find((r) => r.start_line <= lineNo && lineNo <= r.end_line);
    if (region) {
      row.classList.add("hotspot", `hotspot-${region.reason}`);
      row.dataset.region = regionKey(region);
    }

    row.appendChild(el("span", "line-no", String(lineNo)));

    const m = metricsByLine.get(lineNo);
    const bar = m ? cpuBar(m) : null;
    row.appendChild(bar ?? el("span", "cpu-bar cpu-bar-empty"));
    const badgeWrap = m ? badges(m) : null;
    if (badgeWrap) row.appendChild(badgeWrap);

    row.appendChild(el("code", "code-text", text));

    if (region && region.start_line === lineNo && !opts.readOnly) {
      const btn = el("button", "optimize-btn", `optimize · ${region.reason} ${num(region.score)}x`);
      btn.addEventListener("click", () => opts.onOptimize(region));
      row.appendChild(btn);
    }
    container.appendChild(row);
  });
  return container;
}

export function digestMismatchBanner(path: string): HTMLElement {
  const banner = el(
    "div",
    "banner banner-error",
    `${path} changed since it was profiled; showing profile only (optimize disabled). Re-profile to continue.`,
  );
  banner.dataset.kind = "digest-mismatch";
  return banner;
}
