/** DOM rendering: right-to-left reading pane, alternatives listbox,
 * morphology panel, error banner, export output. Pure function of the
 * editor state — every call rebuilds the view.
 */

import type { EditorState } from "./state.js";
import type { WordInfo } from "./types.js";
import { displayForm } from "./types.js";

const HEBREW_LETTER = /[א-ת]/;

/** Rebuild a word's on-screen text: marks kept, `|` dropped, sigla glyph
 * runs reinserted before the letter at their recorded offsets. */
export function displayWord(diac: string, sigla: [number, string][]): string {
  const body = displayForm(diac);
  if (sigla.length === 0) return body;
  const runs = [...sigla].sort((a, b) => a[0] - b[0]);
  const out: string[] = [];
  let letterIndex = 0;
  let si = 0;
  for (const ch of body) {
    if (HEBREW_LETTER.test(ch)) {
      while (si < runs.length && runs[si]![0] === letterIndex) {
        out.push(runs[si]![1]);
        si += 1;
      }
      letterIndex += 1;
    }
    out.push(ch);
  }
  while (si < runs.length) {
    out.push(runs[si]![1]);
    si += 1;
  }
  return out.join("");
}

function analysisText(word: WordInfo, altIndex: number): string {
  const analysis = word.alternatives[altIndex]?.analysis;
  if (!analysis) return "—";
  const props = Object.entries(analysis.properties)
    .map(([key, value]) => `${key}=${value}`)
    .join(", ");
  return props ? `${analysis.pos} (${props})` : analysis.pos;
}

export function render(state: EditorState, root: HTMLElement): void {
  const doc = root.ownerDocument;
  root.textContent = "";

  const app = doc.createElement("div");
  app.className = "app";
  app.dir = "rtl";
  root.appendChild(app);

  if (state.error !== null) {
    const banner = doc.createElement("div");
    banner.className = "banner error";
    banner.setAttribute("role", "alert");
    banner.textContent = state.error;
    app.appendChild(banner);
  }

  const text = doc.createElement("div");
  text.className = "text";
  text.dir = "rtl";
  app.appendChild(text);

  if (state.doc) {
    const wordsByToken = new Map<number, { word: WordInfo; index: number }>();
    state.doc.words.forEach((word, index) => {
      wordsByToken.set(word.token_index, { word, index });
    });
    const quoteTokens = new Set<number>();
    for (const quote of state.doc.quotes) {
      for (const ti of quote.token_indices) quoteTokens.add(ti);
    }

    state.doc.tokens.forEach((token, ti) => {
      const entry = wordsByToken.get(ti);
      if (!entry) {
        text.appendChild(doc.createTextNode(token.surface));
        return;
      }
      const { word, index } = entry;
      const span = doc.createElement("span");
      span.className = "word";
      span.dataset["wordIndex"] = String(index);
      if (index === state.cursor) span.classList.add("current");
      if (state.dirty.has(index)) span.classList.add("changed");
      if (!word.known) span.classList.add("unknown");
      if (quoteTokens.has(ti)) span.classList.add("quote");
      const alt = word.alternatives[word.selected];
      span.textContent = alt ? displayWord(alt.diac, token.sigla) : token.surface;
      text.appendChild(span);
    });
  }

  const sidebar = doc.createElement("div");
  sidebar.className = "sidebar";
  app.appendChild(sidebar);

  const word = state.currentWord();
  if (word) {
    const meta = doc.createElement("div");
    meta.className = "word-meta";
    const badges = [
      word.surface,
      word.known ? "lexicon" : "unknown to the lexicon",
    ];
    if (state.applyAll) badges.push("apply to whole text: armed");
    meta.textContent = badges.join(" · ");
    sidebar.appendChild(meta);

    const list = doc.createElement("ul");
    list.className = "alternatives";
    list.setAttribute("role", "listbox");
    word.alternatives.forEach((alt, i) => {
      const item = doc.createElement("li");
      item.setAttribute("role", "option");
      item.setAttribute("aria-selected", String(i === state.listboxIndex));
      item.className = "alternative";
      if (i === state.listboxIndex) item.classList.add("highlighted");
      if (i === word.selected) item.classList.add("committed");
      const percent = (alt.probability * 100).toFixed(1);
      let label = `${displayForm(alt.diac)} — ${percent}%`;
      if (state.morphology) {
        label += ` — ${analysisText(word, i)}`;
      }
      item.textContent = label;
      list.appendChild(item);
    });
    sidebar.appendChild(list);
  }

  const status = doc.createElement("div");
  status.className = "status";
  app.appendChild(status);
  if (state.pendingMutations > 0) {
    const pending = doc.createElement("span");
    pending.className = "pending";
    pending.textContent = "syncing…";
    status.appendChild(pending);
  }
  if (state.lastExport !== null) {
    const exported = doc.createElement("pre");
    exported.className = "export-output";
    exported.dir = "rtl";
    exported.textContent = state.lastExport;
    status.appendChild(exported);
  }
}
