/** Keyboard bindings: every editor action is reachable without a mouse.
 *
 * The text reads right-to-left, so the "next word" is the one to the LEFT
 * of the cursor on screen; ArrowLeft therefore advances and ArrowRight goes
 * back. All bindings live in one table and can be swapped out wholesale.
 */

import type { EditorState } from "./state.js";

export type Action =
  | "next-word"
  | "prev-word"
  | "listbox-up"
  | "listbox-down"
  | "commit"
  | "toggle-apply-all"
  | "toggle-morphology"
  | "undo"
  | "export"
  | "dismiss-error";

export interface KeyStroke {
  key: string;
  ctrlKey?: boolean;
}

export type Bindings = Record<Action, KeyStroke[]>;

export const DEFAULT_BINDINGS: Bindings = {
  "next-word": [{ key: "ArrowLeft" }],
  "prev-word": [{ key: "ArrowRight" }],
  "listbox-up": [{ key: "ArrowUp" }],
  "listbox-down": [{ key: "ArrowDown" }],
  commit: [{ key: "Enter" }],
  "toggle-apply-all": [{ key: "a" }, { key: "A" }],
  "toggle-morphology": [{ key: "m" }, { key: "M" }],
  undo: [{ key: "u" }, { key: "U" }, { key: "z", ctrlKey: true }],
  export: [{ key: "e" }, { key: "E" }],
  "dismiss-error": [{ key: "Escape" }],
};

export function actionFor(
  event: { key: string; ctrlKey?: boolean },
  bindings: Bindings = DEFAULT_BINDINGS,
): Action | null {
  for (const action of Object.keys(bindings) as Action[]) {
    for (const stroke of bindings[action]) {
      if (stroke.key === event.key && Boolean(stroke.ctrlKey) === Boolean(event.ctrlKey)) {
        return action;
      }
    }
  }
  return null;
}

/** Apply one keystroke to the editor; returns true when it was consumed. */
export function handleKey(
  state: EditorState,
  event: { key: string; ctrlKey?: boolean; preventDefault?: () => void },
  bindings: Bindings = DEFAULT_BINDINGS,
): boolean {
  const action = actionFor(event, bindings);
  if (action === null) return false;
  switch (action) {
    case "next-word":
      state.moveCursor(1);
      break;
    case "prev-word":
      state.moveCursor(-1);
      break;
    case "listbox-up":
      state.moveListbox(-1);
      break;
    case "listbox-down":
      state.moveListbox(1);
      break;
    case "commit":
      state.commit();
      break;
    case "toggle-apply-all":
      state.toggleApplyAll();
      break;
    case "toggle-morphology":
      state.toggleMorphology();
      break;
    case "undo":
      state.undo();
      break;
    case "export":
      state.exportPlain();
      break;
    case "dismiss-error":
      state.dismissError();
      break;
  }
  event.preventDefault?.();
  return true;
}
