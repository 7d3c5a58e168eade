// Single-page bootstrap: the service is the source of truth; every view
// below is rebuilt from fresh responses, so a reload loses nothing.

import { ApiClient, ApiError, type ProfileDoc } from "./api";
import { el, num } from "./format";
import { PanelManager } from "./optimizePanel";
import { newViewState } from "./state";
import { digestMismatchBanner, renderSourceView } from "./sourceView";

export async function initApp(root: HTMLElement, base = ""): Promise<void> {
  const api = new ApiClient(base);
  const state = newViewState();

  root.replaceChildren();
  const header = el("header", "app-header");
  const fileSelect = el("select", "file-select");
  const modelSelect = el("select", "model-select");
  const bannerSlot = el("div", "banner-slot");
  const sourceSlot = el("main", "source-slot");
  const panelSlot = el("aside", "panel-slot");
  const controls = el("div", "controls");
  controls.appendChild(fileSelect);
  controls.appendChild(modelSelect);
  const layout = el("div", "layout");
  layout.appendChild(sourceSlot);
  layout.appendChild(panelSlot);
  root.appendChild(header);
  root.appendChild(controls);
  root.appendChild(bannerSlot);
  root.appendChild(layout);

  const panels = new PanelManager(api, panelSlot, state);

  let profile: ProfileDoc;
  try {
    profile = await api.profile();
  } catch (err) {
    const message = err instanceof ApiError ? err.message : String(err);
    header.appendChild(el("h1", "title", "perfadvisor"));
    bannerSlot.appendChild(el("div", "banner banner-error", `no profile: ${message}`));
    return;
  }
  state.profile = profile;
  state.hotspots = await api.hotspots();

  header.appendChild(el("h1", "title", "perfadvisor"));
  header.appendChild(
    el(
      "p",
      "run-summary",
      `${profile.program} · ${num(profile.elapsed_s)} s · peak ${num(profile.max_footprint_mb)} MB · ${profile.producer}`,
    ),
  );

  for (const path of Object.keys(profile.files)) {
    const option = el("option", undefined, path);
    option.value = path;
    fileSelect.appendChild(option);
  }

  const endpoints = await api.models();
  for (const ep of endpoints) {
    const option = el("option", undefined, `${ep.model}${ep.reachable ? "" : " (unreachable)"}`);
    option.value = ep.model;
    option.disabled = !ep.reachable;
    modelSelect.appendChild(option);
  }
  const firstLive = endpoints.find((e) => e.reachable);
  if (firstLive) modelSelect.value = firstLive.model;
  modelSelect.addEventListener("change", () => {
    state.selectedModel = modelSelect.value;
  });
  state.selectedModel = modelSelect.value || undefined;

  async function showFile(path: string): Promise<void> {
    state.selectedFile = path;
    bannerSlot.replaceChildren();
    sourceSlot.replaceChildren();
    state.readOnly = false;
    let text = "";
    try {
      const body = await api.source(path);
      text = body.text;
    } catch (err) {
      if (err instanceof ApiError && err.code === "source-mismatch") {
        state.readOnly = true;
        bannerSlot.appendChild(digestMismatchBanner(path));
      } else {
        bannerSlot.appendChild(
          el("div", "banner banner-error", `cannot load source: ${String(err)}`),
        );
        return;
      }
    }
    if (state.readOnly) return;
    sourceSlot.appendChild(
      renderSourceView({
        path,
        sourceText: text,
        fileProfile: profile.files[path],
        hotspots: state.hotspots,
        readOnly: state.readOnly,
        onOptimize: (region) => {
          if (!state.selectedModel) return;
          panels.request(region, state.selectedModel);
        },
      }),
    );
  }

  fileSelect.addEventListener("change", () => void showFile(fileSelect.value));
  const first = Object.keys(profile.files)[0];
  if (first) {
    fileSelect.value = first;
    await showFile(first);
  }
}

declare global {
  interface Window {
    __PERFADVISOR_NO_AUTOBOOT?: boolean;
  }
}

if (typeof document !== "undefined" && !window.__PERFADVISOR_NO_AUTOBOOT) {
  const mount = document.getElementById("app");
  if (mount) void initApp(mount);
}
