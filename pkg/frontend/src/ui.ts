/**
 * DOM layer: renders the board, wires HTML5 drag & drop, maps server
 * validation errors back onto the offending element. State lives in
 * board.ts; this module only paints and dispatches.
 */

import { ApiError, WorkbenchClient } from "./api.js";
import {
  BoardState,
  addGroup,
  boardFromPrefill,
  canDeleteGroup,
  canSubmit,
  deleteGroup,
  dragAnswer,
  rewriteQuestion,
  setAmbiguous,
  setSkipReason,
  toSubmission,
  toggleLabel,
  validateBoard,
} from "./board.js";
import { clearDraft, KeyValueStore, loadDraft, saveDraft } from "./draft.js";
import { ONTOLOGY_LABELS } from "./types.js";

export interface UiConfig {
  annotator: string;
  vetter: boolean;
  instructionsVideoUrl: string | null;
}

export class BoardView {
  private board: BoardState | null = null;
  private errorInvariant: string | null = null;

  constructor(
    private root: HTMLElement,
    private client: WorkbenchClient,
    private store: KeyValueStore,
    private config: UiConfig,
  ) {}

  async loadNext(): Promise<void> {
    let response;
    try {
      response = await this.client.nextExample();
    } catch (err) {
      this.renderRetry(err as Error);
      return;
    }
    if (response.example === null) {
      this.renderDone();
      return;
    }
    const draft = loadDraft(this.store, this.config.annotator, response.example.question_id);
    this.board = draft ?? boardFromPrefill(response.example, response.prefill);
    this.errorInvariant = null;
    this.render();
  }

  private update(board: BoardState): void {
    this.board = board;
    saveDraft(this.store, this.config.annotator, board);
    this.render();
  }

  private async submit(): Promise<void> {
    if (!this.board || !canSubmit(this.board)) {
      return;
    }
    const record = toSubmission(this.board, this.config.annotator);
    try {
      await this.client.submit(record);
    } catch (err) {
      if (err instanceof ApiError) {
        this.errorInvariant = err.invariant;
        this.render();
        return;
      }
      this.renderRetry(err as Error);
      return;
    }
    clearDraft(this.store, this.config.annotator, this.board.example.question_id);
    await this.loadNext();
  }

  private async skip(): Promise<void> {
    if (!this.board) {
      return;
    }
    try {
      await this.client.skip(this.board.example.question_id, this.board.skipReason);
    } catch (err) {
      this.renderRetry(err as Error);
      return;
    }
    clearDraft(this.store, this.config.annotator, this.board.example.question_id);
    await this.loadNext();
  }

  private renderDone(): void {
    this.root.innerHTML = `<section class="done"><h2>All examples annotated</h2>
      <p>The queue is empty. Thank you!</p></section>`;
  }

  private renderRetry(err: Error): void {
    this.root.innerHTML = "";
    const banner = el("div", "retry-banner");
    banner.textContent = `Network problem: ${err.message}. Your work is saved locally.`;
    const button = el("button", "retry") as HTMLButtonElement;
    button.textContent = "Retry";
    button.addEventListener("click", () => void this.loadNext());
    banner.appendChild(button);
    this.root.appendChild(banner);
  }

  render(): void {
    const board = this.board;
    if (!board) {
      return;
    }
    this.root.innerHTML = "";
    this.root.appendChild(this.renderInstructions());

    const header = el("section", "example");
    const img = el("img", "example-image") as HTMLImageElement;
    img.src = board.example.image_uri;
    img.alt = `image ${board.example.image_id}`;
    header.appendChild(img);
    const q = el("h2", "original-question");
    q.textContent = board.example.question;
    header.appendChild(q);

    const toggle = el("label", "ambiguous-toggle");
    const checkbox = el("input") as HTMLInputElement;
    checkbox.type = "checkbox";
    checkbox.checked = board.ambiguous;
    checkbox.addEventListener("change", () => this.update(setAmbiguous(board, checkbox.checked)));
    toggle.appendChild(checkbox);
    toggle.appendChild(document.createTextNode(" answers address different questions (ambiguous)"));
    header.appendChild(toggle);
    this.root.appendChild(header);

    if (!board.ambiguous) {
      this.root.appendChild(this.renderSkip(board));
      return;
    }

    const columns = el("section", "columns");
    board.columns.forEach((column, i) => columns.appendChild(this.renderColumn(board, i)));
    const addBtn = el("button", "add-group") as HTMLButtonElement;
    addBtn.textContent = "+ new group";
    addBtn.addEventListener("click", () => this.update(addGroup(board)));
    columns.appendChild(addBtn);
    columns.appendChild(this.renderTray(board));
    this.root.appendChild(columns);

    const failures = validateBoard(board);
    const submit = el("button", "submit") as HTMLButtonElement;
    submit.textContent = "Submit";
    submit.disabled = failures.length > 0;
    submit.addEventListener("click", () => void this.submit());
    this.root.appendChild(submit);

    if (this.errorInvariant) {
      const msg = el("div", "server-error");
      msg.dataset.invariant = this.errorInvariant;
      msg.textContent = `Rejected by the server: ${this.errorInvariant}`;
      this.root.appendChild(msg);
    }
  }

  private renderInstructions(): HTMLElement {
    const panel = el("details", "instructions");
    const summary = el("summary");
    summary.textContent = "Instructions";
    panel.appendChild(summary);
    const text = el("p");
    text.textContent =
      "1) Decide whether the answers respond to different underlying questions. " +
      "2) If so, drag each answer into the group matching its question; spam goes to the tray. " +
      "3) Minimally edit each group's question so it uniquely fits that group.";
    panel.appendChild(text);
    if (this.config.instructionsVideoUrl) {
      const video = el("video", "instructions-video") as HTMLVideoElement;
      video.src = this.config.instructionsVideoUrl;
      video.controls = true;
      panel.appendChild(video);
    }
    return panel;
  }

  private renderSkip(board: BoardState): HTMLElement {
    const section = el("section", "skip");
    const reason = el("textarea", "skip-reason") as HTMLTextAreaElement;
    reason.value = board.skipReason;
    reason.addEventListener("input", () => this.update(setSkipReason(board, reason.value)));
    section.appendChild(reason);
    const button = el("button", "skip-submit") as HTMLButtonElement;
    button.textContent = "Skip example";
    button.disabled = !board.skipReason.trim();
    button.addEventListener("click", () => void this.skip());
    section.appendChild(button);
    return section;
  }

  private renderColumn(board: BoardState, index: number): HTMLElement {
    const column = board.columns[index];
    const box = el("div", "column");
    box.dataset.column = String(index);
    box.addEventListener("dragover", (e) => e.preventDefault());
    box.addEventListener("drop", (e) => {
      e.preventDefault();
      const idx = Number(e.dataTransfer?.getData("text/answer-index"));
      if (!Number.isNaN(idx)) {
        this.update(dragAnswer(board, idx, index));
      }
    });

    const question = el("input", "question-box") as HTMLInputElement;
    question.value = column.question;
    question.addEventListener("input", () => this.update(rewriteQuestion(board, index, question.value)));
    box.appendChild(question);

    for (const m of column.members) {
      box.appendChild(this.renderChip(board, m));
    }

    if (this.config.vetter) {
      const picker = el("div", "label-picker");
      for (const label of ONTOLOGY_LABELS) {
        const tag = el("button", column.labels.includes(label) ? "label on" : "label") as HTMLButtonElement;
        tag.textContent = label;
        tag.addEventListener("click", () => this.update(toggleLabel(board, index, label)));
        picker.appendChild(tag);
      }
      box.appendChild(picker);
    }

    const remove = el("button", "delete-group") as HTMLButtonElement;
    remove.textContent = "delete group";
    remove.disabled = !canDeleteGroup(board, index);
    remove.addEventListener("click", () => this.update(deleteGroup(board, index)));
    box.appendChild(remove);
    return box;
  }

  private renderTray(board: BoardState): HTMLElement {
    const tray = el("div", "tray");
    tray.textContent = "spam tray";
    tray.addEventListener("dragover", (e) => e.preventDefault());
    tray.addEventListener("drop", (e) => {
      e.preventDefault();
      const idx = Number(e.dataTransfer?.getData("text/answer-index"));
      if (!Number.isNaN(idx)) {
        this.update(dragAnswer(board, idx, -1));
      }
    });
    for (const m of board.deleted) {
      tray.appendChild(this.renderChip(board, m));
    }
    return tray;
  }

  private renderChip(board: BoardState, answerIndex: number): HTMLElement {
    const chip = el("span", "chip");
    chip.textContent = board.example.answers[answerIndex].text;
    chip.draggable = true;
    chip.dataset.answerIndex = String(answerIndex);
    chip.addEventListener("dragstart", (e) => {
      e.dataTransfer?.setData("text/answer-index", String(answerIndex));
    });
    return chip;
  }
}

function el(tag: string, className?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  return node;
}
