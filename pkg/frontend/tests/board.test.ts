import { describe, expect, it } from "vitest";

import {
  addGroup,
  boardFromPrefill,
  canDeleteGroup,
  canSubmit,
  deleteAnswer,
  deleteGroup,
  dragAnswer,
  restoreAnswer,
  rewriteQuestion,
  setAmbiguous,
  toSubmission,
  validateBoard,
} from "../src/board.js";
import { MemoryStore, clearDraft, loadDraft, saveDraft } from "../src/draft.js";
import type { ExamplePayload, PrefillGroup } from "../src/types.js";

const FLOWERS: ExamplePayload = {
  question_id: "flowers",
  image_id: "img1",
  image_uri: "images/img1.jpg",
  question: "What kind of flowers are these?",
  answers: [
    { text: "daisy", confidence: "yes", source_id: "0" },
    { text: "tulip", confidence: "yes", source_id: "1" },
    { text: "purple", confidence: "yes", source_id: "2" },
  ],
};

const PREFILL: PrefillGroup[] = [
  { question: "What kind of flowers are these?", answer_indices: [0, 1, 2], answer_texts: ["daisy", "tulip", "purple"] },
];

function flowersBoard() {
  return boardFromPrefill(FLOWERS, PREFILL);
}

describe("boardFromPrefill", () => {
  it("seeds columns from the prefill with the original question", () => {
    const board = flowersBoard();
    expect(board.columns).toHaveLength(1);
    expect(board.columns[0].question).toBe("What kind of flowers are these?");
    expect(board.columns[0].members).toEqual([0, 1, 2]);
  });

  it("falls back to one column holding everything when prefill is empty", () => {
    const board = boardFromPrefill(FLOWERS, []);
    expect(board.columns[0].members).toEqual([0, 1, 2]);
  });
});

describe("drag and group operations", () => {
  it("moves a chip into a new group", () => {
    let board = addGroup(flowersBoard());
    board = dragAnswer(board, 2, 1);
    expect(board.columns[0].members).toEqual([0, 1]);
    expect(board.columns[1].members).toEqual([2]);
    expect(board.dirty).toBe(true);
  });

  it("every chip lives in exactly one column or the tray", () => {
    let board = addGroup(flowersBoard());
    board = dragAnswer(board, 2, 1);
    board = dragAnswer(board, 2, 0);
    const locations = board.columns.flatMap((c) => c.members).concat(board.deleted);
    expect([...locations].sort()).toEqual([0, 1, 2]);
  });

  it("refuses to delete a non-empty group", () => {
    const board = flowersBoard();
    expect(canDeleteGroup(board, 0)).toBe(false);
    expect(deleteGroup(board, 0)).toBe(board);
  });

  it("deletes an empty group", () => {
    let board = addGroup(flowersBoard());
    expect(canDeleteGroup(board, 1)).toBe(true);
    board = deleteGroup(board, 1);
    expect(board.columns).toHaveLength(1);
  });

  it("spam deletion moves the chip to the tray and back", () => {
    let board = deleteAnswer(flowersBoard(), 1);
    expect(board.deleted).toEqual([1]);
    expect(board.columns[0].members).toEqual([0, 2]);
    board = restoreAnswer(board, 1, 0);
    expect(board.deleted).toEqual([]);
    expect(board.columns[0].members).toContain(1);
  });
});

describe("validation", () => {
  it("single-column ambiguous board cannot submit", () => {
    const failures = validateBoard(flowersBoard());
    expect(failures.map((f) => f.invariant)).toContain("ambiguous-min-groups");
  });

  it("empty column blocks submit", () => {
    const board = addGroup(flowersBoard());
    const invariants = validateBoard(board).map((f) => f.invariant);
    expect(invariants).toContain("group-members-nonempty");
    expect(canSubmit(board)).toBe(false);
  });

  it("blank question blocks submit", () => {
    let board = addGroup(flowersBoard());
    board = dragAnswer(board, 2, 1);
    board = rewriteQuestion(board, 1, "   ");
    expect(validateBoard(board).map((f) => f.invariant)).toContain("rewrite-nonempty");
  });

  it("duplicate rewrites are flagged", () => {
    let board = addGroup(flowersBoard());
    board = dragAnswer(board, 2, 1);
    // both boxes still hold the original question
    expect(validateBoard(board).map((f) => f.invariant)).toContain("duplicate-rewrites");
    board = rewriteQuestion(board, 0, "What species of flowers are these?");
    board = rewriteQuestion(board, 1, "What color are these flowers?");
    expect(validateBoard(board)).toEqual([]);
  });

  it("valid two-group flowers board submits", () => {
    let board = addGroup(flowersBoard());
    board = dragAnswer(board, 2, 1);
    board = rewriteQuestion(board, 0, "What species of flowers are these?");
    board = rewriteQuestion(board, 1, "What color are these flowers?");
    expect(canSubmit(board)).toBe(true);
    const record = toSubmission(board, "ann1");
    expect(record.groups).toEqual([
      { rewritten_question: "What species of flowers are these?", answer_indices: [0, 1], labels: [] },
      { rewritten_question: "What color are these flowers?", answer_indices: [2], labels: [] },
    ]);
  });

  it("unambiguous boards submit as skips with a reason", () => {
    let board = setAmbiguous(flowersBoard(), false);
    expect(canSubmit(board)).toBe(true);
    const record = toSubmission(board, "ann1");
    expect(record.ambiguous).toBe(false);
    expect(record.groups).toEqual([]);
    expect(record.skip_reason).toBe("All answers to the same question");
  });
});

describe("draft persistence", () => {
  it("survives a reload and clears after submit", () => {
    const store = new MemoryStore();
    let board = addGroup(flowersBoard());
    board = dragAnswer(board, 2, 1);
    saveDraft(store, "ann1", board);
    const restored = loadDraft(store, "ann1", "flowers");
    expect(restored).not.toBeNull();
    expect(restored!.columns[1].members).toEqual([2]);
    clearDraft(store, "ann1", "flowers");
    expect(loadDraft(store, "ann1", "flowers")).toBeNull();
  });
});
