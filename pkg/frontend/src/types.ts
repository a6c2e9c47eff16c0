/** Wire types mirroring the service's JSONL schema. */

export interface AnswerPayload {
  text: string;
  confidence: string;
  source_id: string;
}

export interface ExamplePayload {
  question_id: string;
  image_id: string;
  image_uri: string;
  question: string;
  answers: AnswerPayload[];
}

export interface PrefillGroup {
  question: string;
  answer_indices: number[];
  answer_texts: string[];
}

export interface QueueResponse {
  example: ExamplePayload | null;
  prefill: PrefillGroup[];
  remaining: number;
  lease_expires_at: number | null;
}

export interface GroupRecord {
  rewritten_question: string;
  answer_indices: number[];
  labels: string[];
}

export interface SubmissionRecord {
  schema_version: number;
  question_id: string;
  annotator_id: string;
  ambiguous: boolean;
  skip_reason?: string;
  deleted_indices: number[];
  groups: GroupRecord[];
}

export interface ExportResponse {
  summary: Record<string, unknown>;
  records: Array<Record<string, unknown>>;
}

export interface ValidationFailure {
  invariant: string;
  detail: string;
}

export const ONTOLOGY_LABELS = [
  "Location",
  "Time",
  "Kind",
  "Cause",
  "Purpose",
  "Goal",
  "Direction",
  "Manner",
  "MultipleOptions",
  "Grouping",
  "Uncertainty",
  "AnnotatorMistake",
  "BadQuestionOrImage",
] as const;

export type OntologyLabel = (typeof ONTOLOGY_LABELS)[number];
