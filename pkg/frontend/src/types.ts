/** Wire types mirroring the annotation service's JSON schemas. */

export interface TaskArgument {
  source_index: number;
  role: string;
}

export interface TaskPredicate {
  source_index: number;
  sense: string;
  arguments: TaskArgument[];
}

export interface Task {
  task_id: string;
  sent_id: string;
  source_tokens: string[];
  target_tokens: string[];
  target_text: string;
  predicates: TaskPredicate[];
}

export interface Assignment {
  task: Task;
  version: number;
}

export const SPECIAL_FLAGS = [
  "nominalization",
  "light_verb",
  "separable_prefix",
  "mwe",
  "named_entity",
  "other",
] as const;

export type SpecialFlag = (typeof SPECIAL_FLAGS)[number];

/** One markable's wire value: selected 1-based target indices or "NONE". */
export interface MarkablePayload {
  selection: number[] | "NONE";
  flags: SpecialFlag[];
}

export interface ResponsePayload {
  quality: number;
  markables: Record<string, MarkablePayload>;
  edited_target_text: string | null;
}

export interface ProgressCounts {
  open: number;
  in_progress: number;
  submitted: number;
}

export type Progress = Record<string, ProgressCounts>;
