/** Application entry point: wires the API client, editor state, keyboard
 * handling, and renderer into the page. */

import { Client } from "./api.js";
import { handleKey } from "./keyboard.js";
import { render } from "./render.js";
import { EditorState } from "./state.js";

export interface AppHandles {
  state: EditorState;
  input: HTMLTextAreaElement;
  genre: HTMLSelectElement;
  view: HTMLElement;
}

/** Build the full UI inside `root`; returns handles for tests. */
export function mountApp(root: HTMLElement, client: Client): AppHandles {
  const doc = root.ownerDocument;
  const state = new EditorState(client);

  const controls = doc.createElement("div");
  controls.className = "controls";
  root.appendChild(controls);

  const input = doc.createElement("textarea");
  input.className = "source-input";
  input.dir = "rtl";
  input.rows = 3;
  input.placeholder = "הדביקו כאן טקסט ללא ניקוד ולחצו Enter";
  controls.appendChild(input);

  const genre = doc.createElement("select");
  genre.className = "genre-select";
  for (const name of ["modern", "rabbinic", "poetry"]) {
    const option = doc.createElement("option");
    option.value = name;
    option.textContent = name;
    genre.appendChild(option);
  }
  controls.appendChild(genre);

  const view = doc.createElement("div");
  view.className = "view";
  root.appendChild(view);

  // Disable genres the service does not offer.
  client
    .health()
    .then((health) => {
      for (const option of Array.from(genre.options)) {
        option.disabled = !health.genres.includes(option.value);
      }
    })
    .catch(() => {
      // The first diacritize call will surface connectivity problems.
    });

  // Enter in the text box loads the document; everything else stays a
  // normal textarea interaction.
  input.addEventListener("keydown", (event) => {
    if (event.key === "Enter" && !event.shiftKey) {
      event.preventDefault();
      const text = input.value.trim();
      if (text) {
        state.load(text, { genre: genre.value });
        view.focus();
      }
    }
  });

  // Editor keys apply anywhere outside the text box.
  doc.addEventListener("keydown", (event) => {
    if (event.target === input || event.target === genre) return;
    handleKey(state, event);
  });

  view.tabIndex = 0; // focusable so keystrokes land after loading
  state.subscribe(() => render(state, view));
  render(state, view);
  return { state, input, genre, view };
}

declare global {
  interface Window {
    __nakdanApp?: AppHandles;
  }
}

// Auto-mount in the browser; tests import mountApp and drive it directly.
if (typeof document !== "undefined" && document.getElementById("app")) {
  const root = document.getElementById("app")!;
  window.__nakdanApp = mountApp(root, new Client(""));
}
