// View state is a projection of service responses: nothing in here is
// computed client-side, so a refresh (refetch) always reproduces it.

import type { ProfileDoc, Region, Suggestion, ValidationResult } from "./api";

export type PanelStatus = "streaming" | "complete" | "failed";

export interface PanelState {
  status: PanelStatus;
  region: Region;
  model: string;
  streamedText: string;
  suggestion?: Suggestion;
  error?: { code: string; message: string };
}

export interface ViewState {
  profile?: ProfileDoc;
  selectedFile?: string;
  selectedModel?: string;
  hotspots: Region[];
  readOnly: boolean;
  // keyed by region key; at most one in-flight optimize per region
  panels: Map<string, PanelState>;
  // keyed by `${suggestionId}#${candidateIndex}`
  validations: Map<string, ValidationResult>;
}

export function newViewState(): ViewState {
  return {
    hotspots: [],
    readOnly: false,
    panels: new Map(),
    validations: new Map(),
  };
}

export function validationKey(suggestionId: string, candidateIndex: number): string {
  return `${suggestionId}#${candidateIndex}`;
}
