/** Editor state: one document under review, navigated and edited by keyboard.
 *
 * All mutations are optimistic: they apply locally first, then sync to the
 * server through a FIFO queue (at most one request in flight per document).
 * A failed sync rolls the local state back and raises a non-blocking error
 * banner; the document itself is never lost.
 */

import type { Api } from "./api.js";
import type { DiacritizeOptions } from "./api.js";
import type { DocumentData } from "./types.js";

interface UndoRecord {
  selections: number[];
  dirty: Set<number>;
}

export type Listener = () => void;

export class EditorState {
  doc: DocumentData | null = null;
  docId: string | null = null;
  /** Index into doc.words (Hebrew words only) — the reviewed word. */
  cursor = 0;
  /** Highlighted row in the alternatives listbox of the cursor word. */
  listboxIndex = 0;
  /** Pending "apply to the whole text" flag for the next commit. */
  applyAll = false;
  /** Morphology panel visibility. */
  morphology = false;
  /** Word indices the user has changed. */
  dirty = new Set<number>();
  /** Most recent error, shown as a banner; null when all is well. */
  error: string | null = null;
  /** Result of the last export action. */
  lastExport: string | null = null;
  /** Bumped on every visible change; cheap render invalidation. */
  version = 0;

  private undoStack: UndoRecord[] = [];
  private chain: Promise<void> = Promise.resolve();
  private pending = 0;
  private listeners: Listener[] = [];

  constructor(private readonly api: Api) {}

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private notify(): void {
    this.version += 1;
    for (const listener of this.listeners) listener();
  }

  /** Wait for every queued server interaction to settle (used by tests). */
  flush(): Promise<void> {
    return this.chain;
  }

  get pendingMutations(): number {
    return this.pending;
  }

  currentWord() {
    if (!this.doc || this.doc.words.length === 0) return null;
    return this.doc.words[this.cursor] ?? null;
  }

  canUndo(): boolean {
    return this.undoStack.length > 0;
  }

  private enqueue(task: () => Promise<void>): void {
    this.pending += 1;
    const run = async () => {
      try {
        await task();
      } finally {
        this.pending -= 1;
      }
    };
    this.chain = this.chain.then(run, run);
  }

  private selectionsSnapshot(): UndoRecord {
    return {
      selections: this.doc ? this.doc.words.map((w) => w.selected) : [],
      dirty: new Set(this.dirty),
    };
  }

  private restoreSnapshot(record: UndoRecord): void {
    if (!this.doc) return;
    record.selections.forEach((sel, i) => {
      const word = this.doc!.words[i];
      if (word) word.selected = sel;
    });
    this.dirty = new Set(record.dirty);
    const word = this.currentWord();
    if (word) this.listboxIndex = word.selected;
  }

  /** Diacritize new text and make it the reviewed document. */
  load(text: string, options: DiacritizeOptions = {}): void {
    this.enqueue(async () => {
      try {
        const response = await this.api.diacritize(text, options);
        this.doc = response.document;
        this.docId = response.doc_id;
        this.cursor = 0;
        this.listboxIndex = this.doc.words[0]?.selected ?? 0;
        this.applyAll = false;
        this.dirty = new Set();
        this.undoStack = [];
        this.lastExport = null;
        this.error = null;
      } catch (err) {
        this.error = errorMessage(err);
      }
      this.notify();
    });
  }

  /** Move the cursor across Hebrew words; clamped at both ends. */
  moveCursor(delta: number): void {
    if (!this.doc || this.doc.words.length === 0) return;
    const next = clamp(this.cursor + delta, 0, this.doc.words.length - 1);
    if (next === this.cursor) return;
    this.cursor = next;
    this.listboxIndex = this.doc.words[next]!.selected;
    this.notify();
  }

  /** Move the highlight inside the alternatives listbox; clamped. */
  moveListbox(delta: number): void {
    const word = this.currentWord();
    if (!word) return;
    const next = clamp(this.listboxIndex + delta, 0, word.alternatives.length - 1);
    if (next === this.listboxIndex) return;
    this.listboxIndex = next;
    this.notify();
  }

  toggleApplyAll(): void {
    this.applyAll = !this.applyAll;
    this.notify();
  }

  toggleMorphology(): void {
    this.morphology = !this.morphology;
    this.notify();
  }

  /** Commit the highlighted alternative for the cursor word.
   *
   * With apply-all armed, every word sharing the cursor word's surface
   * follows (mirroring the server's semantics: each one switches to its
   * alternative with the same diacritization, when it has one).
   */
  commit(): void {
    const doc = this.doc;
    const docId = this.docId;
    const word = this.currentWord();
    if (!doc || !docId || !word) return;
    const wordIndex = this.cursor;
    const altIndex = this.listboxIndex;
    const applyAll = this.applyAll;
    if (altIndex === word.selected && !applyAll) return;

    const snapshot = this.selectionsSnapshot();
    this.undoStack.push(snapshot);

    // Optimistic local application.
    if (word.selected !== altIndex) {
      word.selected = altIndex;
      this.dirty.add(wordIndex);
    }
    if (applyAll) {
      const wanted = word.alternatives[altIndex]!.diac;
      doc.words.forEach((other, i) => {
        if (i === wordIndex || other.surface !== word.surface) return;
        const j = other.alternatives.findIndex((alt) => alt.diac === wanted);
        if (j >= 0 && other.selected !== j) {
          other.selected = j;
          this.dirty.add(i);
        }
      });
    }
    this.applyAll = false;
    this.error = null;
    this.notify();

    this.enqueue(async () => {
      try {
        const response = await this.api.select(docId, wordIndex, altIndex, applyAll);
        // The server is authoritative; adopt its view once the queue drains
        // so a burst of edits does not flicker through stale intermediates.
        if (this.pending === 1 && this.docId === docId) {
          this.doc = response.document;
          const current = this.currentWord();
          if (current) this.listboxIndex = current.selected;
          this.notify();
        }
      } catch (err) {
        // Roll back: drop the undo record and restore the snapshot.
        const at = this.undoStack.indexOf(snapshot);
        if (at >= 0) this.undoStack.splice(at, 1);
        if (this.docId === docId) {
          this.restoreSnapshot(snapshot);
          this.error = errorMessage(err);
          this.notify();
        }
      }
    });
  }

  /** Restore the selection state exactly as it was before the last commit. */
  undo(): void {
    const doc = this.doc;
    const docId = this.docId;
    const record = this.undoStack.pop();
    if (!doc || !docId || !record) return;

    const before = doc.words.map((w) => w.selected);
    this.restoreSnapshot(record);
    this.error = null;
    this.notify();

    this.enqueue(async () => {
      try {
        for (let i = 0; i < record.selections.length; i += 1) {
          if (before[i] !== record.selections[i]) {
            await this.api.select(docId, i, record.selections[i]!, false);
          }
        }
      } catch (err) {
        // Re-sync from the server: it is the source of truth for exports.
        this.error = errorMessage(err);
        try {
          const response = await this.api.getDocument(docId);
          if (this.docId === docId) {
            this.doc = response.document;
            const current = this.currentWord();
            if (current) this.listboxIndex = current.selected;
          }
        } catch {
          // Server unreachable; keep the local view and the banner.
        }
        this.notify();
      }
    });
  }

  /** Fetch the plain-text export for the current selections. */
  exportPlain(): void {
    const docId = this.docId;
    if (!docId) return;
    this.enqueue(async () => {
      try {
        this.lastExport = await this.api.exportText(docId, "plain");
        this.error = null;
      } catch (err) {
        this.error = errorMessage(err);
      }
      this.notify();
    });
  }

  dismissError(): void {
    if (this.error === null) return;
    this.error = null;
    this.notify();
  }
}

function clamp(value: number, lo: number, hi: number): number {
  return Math.max(lo, Math.min(hi, value));
}

function errorMessage(err: unknown): string {
  if (err instanceof Error) return err.message;
  return String(err);
}
