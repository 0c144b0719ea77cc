// Payload shapes of the review-service HTTP API (all offsets are Unicode
// scalar offsets, not UTF-16 string indices).

export interface DocumentSummary {
  doc_id: string;
  language: string;
  pending_mismatches: number;
  pending_missing: number;
}

export interface RelationView {
  id: string;
  rel_type: string;
  source: string;
  target: string;
}

export interface SourceAnnotation {
  id: string;
  category: string;
  begin: number | null;
  end: number | null;
  text?: string | null;
  status?: string;
  attributes: Record<string, string>;
  relations?: RelationView[];
}

export interface AnnotationView {
  doc_id: string;
  id: string;
  category: string;
  original_status: string;
  source_id: string | null;
  attributes: Record<string, string>;
  decided: boolean;
  effective_action: string | null;
  rejected: boolean;
  begin: number | null;
  end: number | null;
  status: string | null;
  source?: SourceAnnotation | null;
}

export interface SourceDocument {
  text: string;
  annotations: SourceAnnotation[];
  relations: RelationView[];
}

export interface DocumentView {
  doc_id: string;
  language: string;
  text: string;
  annotations: AnnotationView[];
  relations: RelationView[];
  source: SourceDocument | null;
}

export interface RevisionStats {
  total_mismatches: number;
  checked: number;
  corrected: number;
  error_rate_on_checked: number;
  error_rate_pct: number;
  total_missing: number;
  created: number;
}

export type DecisionAction = "ACCEPT" | "CORRECT" | "ADD" | "REJECT";

export interface DecisionBody {
  doc_id: string;
  ann_id: string;
  action: DecisionAction;
  begin?: number | null;
  end?: number | null;
  note?: string | null;
  reviewer?: string;
}
