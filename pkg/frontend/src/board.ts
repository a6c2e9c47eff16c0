/**
 * Board state for the three annotation tasks: decide ambiguity, drag
 * answers between group columns, rewrite each group's question.
 *
 * All mutations are local and validated; nothing leaves the browser until
 * submit. Validation here is deliberately a strict subset of the server's:
 * any board this module accepts, the service accepts too.
 */

import type {
  ExamplePayload,
  GroupRecord,
  PrefillGroup,
  SubmissionRecord,
  ValidationFailure,
} from "./types.js";

export interface Column {
  question: string;
  members: number[]; // answer indices, display order
  labels: string[];
}

export interface BoardState {
  example: ExamplePayload;
  ambiguous: boolean;
  skipReason: string;
  columns: Column[];
  deleted: number[]; // the spam tray
  dirty: boolean;
}

export const DEFAULT_SKIP_REASON = "All answers to the same question";

export function boardFromPrefill(example: ExamplePayload, prefill: PrefillGroup[]): BoardState {
  const columns: Column[] =
    prefill.length > 0
      ? prefill.map((g) => ({
          question: g.question,
          members: [...g.answer_indices],
          labels: [],
        }))
      : [{ question: example.question, members: example.answers.map((_, i) => i), labels: [] }];
  return {
    example,
    ambiguous: true,
    skipReason: DEFAULT_SKIP_REASON,
    columns,
    deleted: [],
    dirty: false,
  };
}

function findColumnOf(board: BoardState, answerIndex: number): number {
  return board.columns.findIndex((c) => c.members.includes(answerIndex));
}

/** Move an answer chip into a column (or tray = -1). No-op when already there. */
export function dragAnswer(board: BoardState, answerIndex: number, targetColumn: number): BoardState {
  const from = findColumnOf(board, answerIndex);
  const inTray = board.deleted.includes(answerIndex);
  if (from === -1 && !inTray) {
    return board; // unknown chip
  }
  const columns = board.columns.map((c) => ({
    ...c,
    members: c.members.filter((m) => m !== answerIndex),
  }));
  let deleted = board.deleted.filter((m) => m !== answerIndex);
  if (targetColumn === -1) {
    deleted = [...deleted, answerIndex];
  } else if (targetColumn >= 0 && targetColumn < columns.length) {
    columns[targetColumn].members.push(answerIndex);
  } else {
    return board;
  }
  return { ...board, columns, deleted, dirty: true };
}

export function addGroup(board: BoardState): BoardState {
  const column: Column = { question: board.example.question, members: [], labels: [] };
  return { ...board, columns: [...board.columns, column], dirty: true };
}

/** Only empty groups may be deleted; chips must be moved out first. */
export function canDeleteGroup(board: BoardState, index: number): boolean {
  return index >= 0 && index < board.columns.length && board.columns[index].members.length === 0;
}

export function deleteGroup(board: BoardState, index: number): BoardState {
  if (!canDeleteGroup(board, index)) {
    return board;
  }
  const columns = board.columns.filter((_, i) => i !== index);
  return { ...board, columns, dirty: true };
}

export function deleteAnswer(board: BoardState, answerIndex: number): BoardState {
  return dragAnswer(board, answerIndex, -1);
}

export function restoreAnswer(board: BoardState, answerIndex: number, targetColumn: number): BoardState {
  if (!board.deleted.includes(answerIndex)) {
    return board;
  }
  return dragAnswer(board, answerIndex, targetColumn);
}

export function rewriteQuestion(board: BoardState, index: number, question: string): BoardState {
  if (index < 0 || index >= board.columns.length) {
    return board;
  }
  const columns = board.columns.map((c, i) => (i === index ? { ...c, question } : c));
  return { ...board, columns, dirty: true };
}

export function toggleLabel(board: BoardState, index: number, label: string): BoardState {
  const columns = board.columns.map((c, i) => {
    if (i !== index) return c;
    const labels = c.labels.includes(label)
      ? c.labels.filter((l) => l !== label)
      : [...c.labels, label];
    return { ...c, labels };
  });
  return { ...board, columns, dirty: true };
}

export function setAmbiguous(board: BoardState, ambiguous: boolean): BoardState {
  return { ...board, ambiguous, dirty: true };
}

export function setSkipReason(board: BoardState, reason: string): BoardState {
  return { ...board, skipReason: reason, dirty: true };
}

/**
 * Client-side invariant check; names match the server's 422 responses so
 * failures can be mapped back onto the offending element.
 */
export function validateBoard(board: BoardState): ValidationFailure[] {
  const failures: ValidationFailure[] = [];
  const n = board.example.answers.length;
  if (!board.ambiguous) {
    if (!board.skipReason.trim()) {
      failures.push({ invariant: "unambiguous-skip-reason", detail: "skip needs a reason" });
    }
    return failures;
  }
  if (board.columns.length < 2) {
    failures.push({
      invariant: "ambiguous-min-groups",
      detail: "an ambiguous example needs at least two groups",
    });
  }
  board.columns.forEach((column, i) => {
    if (column.members.length === 0) {
      failures.push({ invariant: "group-members-nonempty", detail: `group ${i + 1} is empty` });
    }
    if (!column.question.trim()) {
      failures.push({ invariant: "rewrite-nonempty", detail: `group ${i + 1} question is blank` });
    }
  });
  const seen = new Map<number, number>();
  board.columns.forEach((column, i) => {
    for (const m of column.members) {
      if (seen.has(m)) {
        failures.push({
          invariant: "groups-disjoint",
          detail: `answer ${m} is in groups ${seen.get(m)! + 1} and ${i + 1}`,
        });
      }
      seen.set(m, i);
    }
  });
  for (const m of board.deleted) {
    if (seen.has(m)) {
      failures.push({ invariant: "deleted-disjoint", detail: `answer ${m} grouped and deleted` });
    }
  }
  const all = [...seen.keys(), ...board.deleted];
  if (all.some((m) => m < 0 || m >= n)) {
    failures.push({ invariant: "indices-in-bounds", detail: "answer index out of range" });
  }
  const questions = board.columns.map((c) => c.question.trim());
  if (new Set(questions).size !== questions.length) {
    failures.push({
      invariant: "duplicate-rewrites",
      detail: "every group needs a distinct rewritten question",
    });
  }
  return failures;
}

export function canSubmit(board: BoardState): boolean {
  return validateBoard(board).length === 0;
}

export function toSubmission(board: BoardState, annotatorId: string): SubmissionRecord {
  if (!board.ambiguous) {
    return {
      schema_version: 1,
      question_id: board.example.question_id,
      annotator_id: annotatorId,
      ambiguous: false,
      skip_reason: board.skipReason,
      deleted_indices: [...board.deleted].sort((a, b) => a - b),
      groups: [],
    };
  }
  const groups: GroupRecord[] = board.columns.map((c) => ({
    rewritten_question: c.question,
    answer_indices: [...c.members].sort((a, b) => a - b),
    labels: [...c.labels].sort(),
  }));
  return {
    schema_version: 1,
    question_id: board.example.question_id,
    annotator_id: annotatorId,
    ambiguous: true,
    deleted_indices: [...board.deleted].sort((a, b) => a - b),
    groups,
  };
}
