// UI state machine: a pure projection of API responses plus the pending
// optimistic action, so reloading the page always reproduces server truth.

import { ApiClient, ApiError } from "./api.js";
import type {
  ClassifyResponse,
  ClusterCard,
  ClusterStatus,
  Decision,
  ListQuery,
} from "./types.js";

export interface ReviewState {
  runId: string;
  clusters: ClusterCard[];
  page: number;
  pages: number;
  total: number;
  filter: ClusterStatus | undefined;
  sort: "size" | "cluster_id";
  selected: number | null;
  banner: string | null;
  notice: string | null;
  probe: ClassifyResponse | null;
  aliases: Record<string, { canonical: string }>;
}

export type Listener = (state: ReviewState) => void;

export class ReviewStore {
  private state: ReviewState = {
    runId: "",
    clusters: [],
    page: 1,
    pages: 1,
    total: 0,
    filter: undefined,
    sort: "cluster_id",
    selected: null,
    banner: null,
    notice: null,
    probe: null,
    aliases: {},
  };
  private listeners: Listener[] = [];

  constructor(
    private readonly api: ApiClient,
    private readonly pageSize: number = 20,
  ) {}

  snapshot(): ReviewState {
    return { ...this.state, clusters: [...this.state.clusters] };
  }

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.snapshot());
  }

  private patch(partial: Partial<ReviewState>): void {
    this.state = { ...this.state, ...partial };
    this.emit();
  }

  async load(query: Partial<ListQuery> = {}): Promise<void> {
    const filter = "status" in query ? query.status : this.state.filter;
    const sort = query.sort ?? this.state.sort;
    const page = query.page ?? this.state.page;
    try {
      const response = await this.api.listClusters({
        status: filter,
        sort,
        page,
        page_size: this.pageSize,
      });
      this.patch({
        runId: response.run_id,
        clusters: response.clusters,
        page: response.page,
        pages: response.pages,
        total: response.total,
        filter,
        sort,
        banner: null,
      });
    } catch (err) {
      this.patch({ banner: describeFailure(err) });
    }
  }

  async loadAliases(): Promise<void> {
    try {
      const response = await this.api.aliases();
      this.patch({ aliases: response.aliases });
    } catch {
      // hover names are an enhancement; the card list works without them
    }
  }

  select(clusterId: number | null): void {
    this.patch({ selected: clusterId });
  }

  selectNextPending(direction: 1 | -1): number | null {
    const next = nextPending(this.state.clusters, this.state.selected, direction);
    if (next !== null) this.patch({ selected: next });
    return next;
  }

  /** Optimistic decision: flip the card, call the service, reconcile. */
  async decide(clusterId: number, decision: Decision, label?: string): Promise<void> {
    const index = this.state.clusters.findIndex((c) => c.cluster_id === clusterId);
    if (index < 0) return;
    const before = this.state.clusters[index];
    const optimistic: ClusterCard = {
      ...before,
      status: decision === "validate" ? "validated" : decision === "reject" ? "rejected" : "edited",
      final_label: decision === "edit" ? (label ?? before.label) : decision === "validate" ? before.label : "",
    };
    this.replaceCard(optimistic);
    try {
      const response = await this.api.annotate(clusterId, decision, label, before.version);
      const annotation = response.annotation;
      if (annotation.conflict) {
        // someone else wrote first; show server truth and ask again
        const fresh = await this.api.getCluster(clusterId);
        this.replaceCard(fresh.cluster);
        this.patch({ notice: `cluster ${clusterId} changed elsewhere, decision re-applied last` });
        return;
      }
      this.replaceCard({
        ...optimistic,
        status: annotation.status,
        final_label: annotation.final_label,
        version: annotation.version,
      });
      this.patch({ notice: null });
    } catch (err) {
      this.replaceCard(before);
      this.patch({ banner: describeFailure(err) });
    }
  }

  async probeText(text: string): Promise<void> {
    try {
      const probe = await this.api.classify(text);
      this.patch({ probe, banner: null });
    } catch (err) {
      this.patch({ probe: null, banner: describeFailure(err) });
    }
  }

  private replaceCard(card: ClusterCard): void {
    const clusters = this.state.clusters.map((c) =>
      c.cluster_id === card.cluster_id ? card : c,
    );
    this.patch({ clusters });
  }
}

export function describeFailure(err: unknown): string {
  if (err instanceof ApiError) {
    return err.status === 0
      ? "annotation service unreachable, retry when it is back"
      : `request failed (${err.status}): ${err.message}`;
  }
  return `unexpected failure: ${String(err)}`;
}

/** Next pending cluster id after `current` in list order, wrapping around. */
export function nextPending(
  clusters: ClusterCard[],
  current: number | null,
  direction: 1 | -1,
): number | null {
  const pending = clusters.filter((c) => c.status === "pending");
  if (pending.length === 0) return null;
  const ids = pending.map((c) => c.cluster_id);
  if (current === null || !ids.includes(current)) {
    return direction === 1 ? ids[0] : ids[ids.length - 1];
  }
  const at = ids.indexOf(current);
  return ids[(at + direction + ids.length) % ids.length];
}
