/**
 * Draft persistence: the in-progress board survives a page reload.
 * Backed by localStorage in the browser; tests inject a Map-based store.
 */

import type { BoardState } from "./board.js";

export interface KeyValueStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

const PREFIX = "vqaw-draft:";

export function saveDraft(store: KeyValueStore, annotator: string, board: BoardState): void {
  store.setItem(`${PREFIX}${annotator}:${board.example.question_id}`, JSON.stringify(board));
}

export function loadDraft(
  store: KeyValueStore,
  annotator: string,
  questionId: string,
): BoardState | null {
  const raw = store.getItem(`${PREFIX}${annotator}:${questionId}`);
  if (raw === null) {
    return null;
  }
  try {
    return JSON.parse(raw) as BoardState;
  } catch {
    return null;
  }
}

export function clearDraft(store: KeyValueStore, annotator: string, questionId: string): void {
  store.removeItem(`${PREFIX}${annotator}:${questionId}`);
}

export class MemoryStore implements KeyValueStore {
  private data = new Map<string, string>();

  getItem(key: string): string | null {
    return this.data.has(key) ? this.data.get(key)! : null;
  }

  setItem(key: string, value: string): void {
    this.data.set(key, value);
  }

  removeItem(key: string): void {
    this.data.delete(key);
  }
}
