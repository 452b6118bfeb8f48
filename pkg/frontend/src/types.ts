// Wire types of the annotation service JSON API. The UI renders these
// verbatim; it never relabels or post-processes data on the client.

export type ClusterStatus = "pending" | "validated" | "edited" | "rejected";

export interface MemberSentence {
  instance_id: string;
  sent_id: string;
  text: string;
  subject: string;
  object: string;
}

export interface ClusterCard {
  cluster_id: number;
  label: string;
  summary: string;
  summary_source: string;
  size: number;
  status: ClusterStatus;
  final_label: string | null;
  version: number;
  members: MemberSentence[];
}

export interface ClusterListResponse {
  run_id: string;
  page: number;
  pages: number;
  total: number;
  clusters: ClusterCard[];
}

export interface ClusterResponse {
  run_id: string;
  cluster: ClusterCard;
}

export interface AnnotationResult {
  cluster_id: number;
  status: ClusterStatus;
  final_label: string;
  version: number;
  conflict: boolean;
}

export interface AnnotationResponse {
  run_id: string;
  annotation: AnnotationResult;
}

export interface ClassifyResponse {
  run_id: string;
  label: string;
  source: "validated" | "automatic";
  distance: number;
}

export interface ReportResponse {
  run_id: string;
  report: Record<string, unknown>;
}

export interface AliasEntry {
  canonical: string;
  aliases: string[];
  count: number;
}

export interface AliasResponse {
  run_id: string;
  aliases: Record<string, AliasEntry>;
}

export type Decision = "validate" | "edit" | "reject";

export interface ListQuery {
  status?: ClusterStatus;
  sort?: "size" | "cluster_id";
  page?: number;
  page_size?: number;
}
