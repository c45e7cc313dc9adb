/**
 * The full view state, serializable to the URL fragment so any view can be
 * restored (and shared) from a link. Round trip is exact: applying a
 * serialized state reproduces the identical view.
 */

import type { GroupSelectorWire } from "./types.js";

export interface CameraState {
  cx: number;
  cy: number;
  zoom: number;
}

export interface FilterState {
  errorsOnly: boolean;
  confLo: number | null;
  confHi: number | null;
  labels: string[];
}

export interface OverlayState {
  show: boolean;
  freq: number;
  locality: number;
  quantile: number;
  mode: "words" | "concepts";
  stopwords: "keep" | "ignore";
}

export interface CompareState {
  active: boolean;
  sideA: GroupSelectorWire | null;
  sideB: GroupSelectorWire | null;
  itemKind: "word" | "concept" | "label";
}

export interface ViewState {
  dataset: string;
  camera: CameraState;
  filters: FilterState;
  selectedSample: string | null;
  overlay: OverlayState;
  compare: CompareState;
}

export function defaultState(dataset = ""): ViewState {
  return {
    dataset,
    camera: { cx: 0, cy: 0, zoom: 1 },
    filters: { errorsOnly: false, confLo: null, confHi: null, labels: [] },
    selectedSample: null,
    overlay: {
      show: true,
      freq: 5,
      locality: 0.5,
      quantile: 0.8,
      mode: "words",
      stopwords: "ignore",
    },
    compare: { active: false, sideA: null, sideB: null, itemKind: "word" },
  };
}

/** Encode the state into a URL fragment ("#v=..."). */
export function serializeState(state: ViewState): string {
  return "#v=" + encodeURIComponent(JSON.stringify(state));
}

/**
 * Decode a fragment produced by serializeState. Unknown or malformed input
 * yields the default state; missing sections fall back field by field so old
 * links keep working.
 */
export function parseState(fragment: string): ViewState {
  const base = defaultState();
  if (!fragment.startsWith("#v=")) {
    return base;
  }
  let raw: unknown;
  try {
    raw = JSON.parse(decodeURIComponent(fragment.slice(3)));
  } catch {
    return base;
  }
  if (typeof raw !== "object" || raw === null) {
    return base;
  }
  const partial = raw as Partial<ViewState>;
  return {
    dataset: partial.dataset ?? base.dataset,
    camera: { ...base.camera, ...partial.camera },
    filters: { ...base.filters, ...partial.filters },
    selectedSample: partial.selectedSample ?? null,
    overlay: { ...base.overlay, ...partial.overlay },
    compare: { ...base.compare, ...partial.compare },
  };
}
