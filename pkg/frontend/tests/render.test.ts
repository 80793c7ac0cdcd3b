import { beforeEach, describe, expect, it } from "vitest";

import { displayWord, render } from "../src/render.js";
import { EditorState } from "../src/state.js";
import { FakeApi, makeDoc } from "./fake.js";

describe("displayWord", () => {
  it("drops mater-deletion markers but keeps the letters", () => {
    expect(displayWord("שִׁי|עוּר", [])).toBe("שִׁיעוּר");
  });

  it("reinserts sigla glyph runs at their letter offsets", () => {
    expect(displayWord("בָּצָל", [[1, "["], [2, "]"]])).toBe("בָּ[צָ]ל");
    expect(displayWord("בָּצָל", [[0, "("], [3, ")"]])).toBe("(בָּצָל)");
  });
});

describe("render", () => {
  let api: FakeApi;
  let state: EditorState;
  let root: HTMLElement;

  beforeEach(async () => {
    api = new FakeApi(
      makeDoc([
        { surface: "אחד", alts: ["אֶחָד", "אַחַד", "אֻחָד", "אִחֵד"] },
        { surface: "שתים", alts: ["שְׁתַּיִם"] },
        { surface: "שלש", alts: ["שָׁלֹשׁ"], quote: true },
        { surface: "ארבע", alts: ["אַרְבַּע"], known: false },
        { surface: "חמש", alts: ["חָמֵשׁ"] },
        { surface: "שש", alts: ["שֵׁשׁ"] },
        { surface: "שבע", alts: ["שֶׁבַע"] },
        { surface: "שמנה", alts: ["שְׁמֹנֶה"] },
        { surface: "תשע", alts: ["תֵּשַׁע"] },
        { surface: "עשר", alts: ["עֶשֶׂר"] },
      ]),
    );
    state = new EditorState(api);
    state.load("text");
    await state.flush();
    root = document.createElement("div");
    document.body.appendChild(root);
  });

  it("renders every word right-to-left with the cursor on the first", () => {
    render(state, root);
    const words = root.querySelectorAll(".word");
    expect(words).toHaveLength(10);
    expect(words[0]?.classList.contains("current")).toBe(true);
    expect(words[1]?.classList.contains("current")).toBe(false);
    expect(root.querySelector(".app")?.getAttribute("dir")).toBe("rtl");
    expect(words[0]?.textContent).toBe("אֶחָד");
  });

  it("shows one listbox row per alternative, the first highlighted", () => {
    render(state, root);
    const rows = root.querySelectorAll(".alternatives [role=option]");
    expect(rows).toHaveLength(4);
    expect(rows[0]?.getAttribute("aria-selected")).toBe("true");
    expect(rows[0]?.classList.contains("committed")).toBe(true);
    expect(rows[1]?.getAttribute("aria-selected")).toBe("false");
  });

  it("marks quote words, unknown words, and user-changed words", async () => {
    state.moveListbox(1);
    state.commit();
    await state.flush();
    render(state, root);
    const words = root.querySelectorAll(".word");
    expect(words[0]?.classList.contains("changed")).toBe(true);
    expect(words[2]?.classList.contains("quote")).toBe(true);
    expect(words[3]?.classList.contains("unknown")).toBe(true);
    expect(words[1]?.classList.contains("changed")).toBe(false);
  });

  it("shows morphology per alternative only when toggled on", () => {
    render(state, root);
    let rows = root.querySelectorAll(".alternatives [role=option]");
    expect(rows[0]?.textContent).not.toContain("Noun");
    state.toggleMorphology();
    render(state, root);
    rows = root.querySelectorAll(".alternatives [role=option]");
    expect(rows[0]?.textContent).toContain("Noun (Gender=M)");
  });

  it("shows the error banner only while an error is present", () => {
    render(state, root);
    expect(root.querySelector(".banner.error")).toBeNull();
    state.error = "something broke";
    render(state, root);
    expect(root.querySelector(".banner.error")?.textContent).toBe("something broke");
    state.dismissError();
    render(state, root);
    expect(root.querySelector(".banner.error")).toBeNull();
  });

  it("renders the export output right-to-left when present", async () => {
    state.exportPlain();
    await state.flush();
    render(state, root);
    const exported = root.querySelector(".export-output");
    expect(exported?.getAttribute("dir")).toBe("rtl");
    expect(exported?.textContent).toContain("אֶחָד");
  });

  it("re-renders through subscription on every state change", async () => {
    state.subscribe(() => render(state, root));
    state.moveCursor(1);
    const words = root.querySelectorAll(".word");
    expect(words[1]?.classList.contains("current")).toBe(true);
  });
});
