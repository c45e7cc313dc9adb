/**
 * Typed client for the engine's JSON API, plus the request gate that drops
 * stale in-flight responses (latest request per key wins).
 */

import type {
  ComparePayload,
  ConfusionsPayload,
  DatasetInfo,
  ExplanationPayload,
  GroupSelectorWire,
  HullsPayload,
  LabelClustersPayload,
  ListsPayload,
  LocalWordsPayload,
  PointsPayload,
} from "./types.js";
import type { FilterState, OverlayState } from "./state.js";

export class RequestGate {
  private generations = new Map<string, number>();

  /** Run a fetch; resolve to null when a newer request for `key` started. */
  async run<T>(key: string, fetcher: () => Promise<T>): Promise<T | null> {
    const generation = (this.generations.get(key) ?? 0) + 1;
    this.generations.set(key, generation);
    const result = await fetcher();
    return this.generations.get(key) === generation ? result : null;
  }
}

function filterQuery(filters: FilterState): string {
  const parts: string[] = [];
  if (filters.errorsOnly) parts.push("errors_only=true");
  if (filters.confLo !== null) parts.push(`conf_lo=${filters.confLo}`);
  if (filters.confHi !== null) parts.push(`conf_hi=${filters.confHi}`);
  if (filters.labels.length) parts.push(`labels=${filters.labels.map(encodeURIComponent).join(",")}`);
  return parts.join("&");
}

export class ApiClient {
  constructor(
    private readonly base = "",
    private readonly fetcher: typeof fetch = fetch.bind(globalThis),
  ) {}

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetcher(this.base + path);
    const body = await response.json();
    if (!response.ok) {
      const code = body?.error?.code ?? String(response.status);
      throw new Error(`${code}: ${body?.error?.message ?? "request failed"}`);
    }
    return body as T;
  }

  datasets(): Promise<{ datasets: DatasetInfo[] }> {
    return this.get("/api/datasets");
  }

  points(dataset: string, filters: FilterState): Promise<PointsPayload> {
    const query = filterQuery(filters);
    return this.get(`/api/datasets/${dataset}/points${query ? "?" + query : ""}`);
  }

  localWords(dataset: string, overlay: OverlayState, region?: number[]): Promise<LocalWordsPayload> {
    const parts = [
      `freq=${overlay.freq}`,
      `locality=${overlay.locality}`,
      `quantile=${overlay.quantile}`,
      `mode=${overlay.mode}`,
      `stopwords=${overlay.stopwords}`,
    ];
    if (region?.length) parts.push(`region=${region.join(",")}`);
    return this.get(`/api/datasets/${dataset}/local-words?${parts.join("&")}`);
  }

  lists(dataset: string, filters: FilterState, region?: number[]): Promise<ListsPayload> {
    const parts = [filterQuery(filters)].filter(Boolean);
    if (region?.length) parts.push(`region=${region.join(",")}`);
    return this.get(`/api/datasets/${dataset}/lists${parts.length ? "?" + parts.join("&") : ""}`);
  }

  confusions(dataset: string, sort = "freq", secondary?: string): Promise<ConfusionsPayload> {
    const query = `sort=${sort}` + (secondary ? `&secondary=${secondary}` : "");
    return this.get(`/api/datasets/${dataset}/confusions?${query}`);
  }

  labelClusters(dataset: string, cut?: number): Promise<LabelClustersPayload> {
    return this.get(`/api/datasets/${dataset}/label-clusters${cut !== undefined ? `?cut=${cut}` : ""}`);
  }

  hulls(dataset: string, labels: string[], membership: "gold" | "pred" = "gold"): Promise<HullsPayload> {
    const query = labels.length ? `labels=${labels.map(encodeURIComponent).join(",")}&` : "";
    return this.get(`/api/datasets/${dataset}/hulls?${query}membership=${membership}`);
  }

  explanation(
    dataset: string,
    sampleId: string,
    contrastLabel?: string,
    tau?: number,
  ): Promise<ExplanationPayload> {
    const parts: string[] = [];
    if (contrastLabel) parts.push(`contrast_label=${encodeURIComponent(contrastLabel)}`);
    if (tau !== undefined) parts.push(`tau=${tau}`);
    return this.get(
      `/api/datasets/${dataset}/samples/${encodeURIComponent(sampleId)}/explanation` +
        (parts.length ? "?" + parts.join("&") : ""),
    );
  }

  async compare(
    sideA: GroupSelectorWire,
    sideB: GroupSelectorWire,
    itemKind: string,
  ): Promise<ComparePayload> {
    const response = await this.fetcher(this.base + "/api/compare", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ side_a: sideA, side_b: sideB, item_kind: itemKind }),
    });
    const body = await response.json();
    if (!response.ok) {
      throw new Error(`${body?.error?.code}: ${body?.error?.message}`);
    }
    return body as ComparePayload;
  }
}
