/** Document payloads exchanged with the diacritization service. */

export interface Analysis {
  pos: string;
  properties: Record<string, string>;
}

export interface Alternative {
  /** Diacritized form; a `|` marks a letter whose vowel carrier was deleted. */
  diac: string;
  probability: number;
  analysis: Analysis | null;
}

export interface WordInfo {
  token_index: number;
  /** Bare (undotted) letters of the word. */
  surface: string;
  /** True when the lexicon knows this surface. */
  known: boolean;
  /** Index into `alternatives` of the current selection. */
  selected: number;
  alternatives: Alternative[];
}

export type TokenKind = "WORD" | "PUNCT" | "OTHER" | "SPACE";

export interface TokenInfo {
  surface: string;
  span: [number, number];
  kind: TokenKind;
  sigla: [number, string][];
}

export interface QuoteInfo {
  token_indices: number[];
  reference: string;
  canonical: string[];
}

export interface DocumentData {
  format: number;
  text: string;
  matres: string;
  tokens: TokenInfo[];
  words: WordInfo[];
  quotes: QuoteInfo[];
}

export interface DiacritizeResponse {
  doc_id: string;
  document: DocumentData;
}

export interface SelectResponse {
  doc_id: string;
  changed: number[];
  document: DocumentData;
}

export interface HealthResponse {
  status: string;
  genres: string[];
}

/** Strip mater-deletion markers for on-screen text (letters stay). */
export function displayForm(diac: string): string {
  return diac.replace(/\|/g, "");
}
