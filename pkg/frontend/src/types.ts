/**
 * Wire types for the engine's JSON payloads. The UI renders these verbatim:
 * every number on screen comes from a payload field, never from client-side
 * analytics.
 */

export interface DatasetInfo {
  id: string;
  sample_count: number;
  label_count: number;
}

export interface PointRow {
  id: string;
  x: number;
  y: number;
  gold_label: string;
  pred_label: string;
  confidence: number;
  correct: boolean;
  domain: string | null;
}

export interface PointsPayload {
  dataset: string;
  layout_id: string;
  method: string;
  seed: number;
  sample_count: number;
  points: PointRow[];
}

export interface LocalWordRow {
  word: string;
  x: number;
  y: number;
  frequency: number;
  locality: number;
  scale_hint: number;
}

export interface LocalWordsPayload {
  dataset: string;
  mode: "words" | "concepts";
  params: {
    freq_threshold: number;
    locality_max: number;
    locality_quantile: number;
    stopwords: "keep" | "ignore";
  };
  words: LocalWordRow[];
}

export interface RankedItem {
  item: string;
  count: number;
  sample_share?: number;
  share?: number;
}

export interface ListsPayload {
  dataset: string;
  total_samples: number;
  words: RankedItem[];
  concepts: RankedItem[];
  gold_labels: RankedItem[];
  pred_labels: RankedItem[];
}

export interface ConfusionRow {
  gold: string;
  pred: string;
  frequency: number;
  sample_ids: string[];
}

export interface ConfusionsPayload {
  dataset: string;
  total_errors: number;
  entries: ConfusionRow[];
  error_shares: {
    total_errors: number;
    false_negatives: Record<string, number>;
    false_positives: Record<string, number>;
  };
}

export interface ClusterRow {
  cluster_id: number;
  members: string[];
  color_index: number;
}

export interface LabelClustersPayload {
  dataset: string;
  cut: number;
  clusters: ClusterRow[];
}

export interface HullRow {
  label: string;
  membership: "gold" | "pred";
  vertices: [number, number][];
}

export interface HullsPayload {
  dataset: string;
  hulls: HullRow[];
}

export interface GraphColumn {
  role: "query" | "closest" | "contrast";
  sample_id: string;
  label: string;
  header: string;
  text: string;
  tokens: string[];
}

export interface GraphEdge {
  pair: "query_closest" | "query_contrast";
  query_index: number;
  other_index: number;
  weight: number;
}

export interface ExplanationPayload {
  dataset: string;
  query: {
    id: string;
    text: string;
    tokens: string[];
    gold_label: string;
    pred_label: string;
    confidence: number;
  };
  triple: {
    query_id: string;
    closest_id: string;
    contrast_id: string;
    contrast_label: string;
  };
  importance: {
    metrics: string[];
    vectors: Record<string, number[]>;
  };
  graph: {
    tau: number;
    columns: GraphColumn[];
    edges: GraphEdge[];
    contributions: Record<string, number[]>;
    pair_similarity: Record<string, number>;
  };
  summary: { text: string; slots: Record<string, unknown> };
}

export interface DivergenceRow {
  item: string;
  kind: string;
  count_a: number;
  count_b: number;
  z: number;
  verdict: "shared" | "a_side" | "b_side";
}

export interface GroupSelectorWire {
  dataset: string;
  labels_gold?: string[];
  labels_pred?: string[];
  error_status?: "all" | "errors" | "correct";
  confidence?: [number, number];
  region?: number[];
}

export interface CompareSide {
  descriptor: Record<string, unknown>;
  layout_id: string;
  sample_ids: string[];
}

export interface ComparePayload {
  item_kind: string;
  items: DivergenceRow[];
  side_a: CompareSide;
  side_b: CompareSide;
}

export interface ApiError {
  error: { code: string; message: string };
}
