/** Typed client for the diacritization HTTP API. */

import type {
  DiacritizeResponse,
  DocumentData,
  HealthResponse,
  SelectResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export interface DiacritizeOptions {
  genre?: string;
  matres?: string;
  beam?: number;
}

/** The surface the rest of the app depends on; tests substitute fakes. */
export interface Api {
  health(): Promise<HealthResponse>;
  diacritize(text: string, options?: DiacritizeOptions): Promise<DiacritizeResponse>;
  getDocument(docId: string): Promise<DiacritizeResponse>;
  select(
    docId: string,
    wordIndex: number,
    altIndex: number,
    applyAll: boolean,
  ): Promise<SelectResponse>;
  exportText(docId: string, format: "plain" | "html"): Promise<string>;
  exportStructured(docId: string): Promise<DocumentData>;
}

async function parseError(response: Response): Promise<ApiError> {
  let code = "http_error";
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = await response.json();
    if (body && typeof body === "object" && body.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
    }
  } catch {
    // Non-JSON error body; keep the status line.
  }
  return new ApiError(response.status, code, message);
}

export class Client implements Api {
  constructor(readonly baseUrl: string = "") {}

  private async requestJson<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, init);
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  private async requestText(path: string): Promise<string> {
    const response = await fetch(this.baseUrl + path);
    if (!response.ok) {
      throw await parseError(response);
    }
    return response.text();
  }

  health(): Promise<HealthResponse> {
    return this.requestJson("/api/health");
  }

  diacritize(text: string, options: DiacritizeOptions = {}): Promise<DiacritizeResponse> {
    return this.requestJson("/api/diacritize", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text, ...options }),
    });
  }

  getDocument(docId: string): Promise<DiacritizeResponse> {
    return this.requestJson(`/api/doc/${encodeURIComponent(docId)}`);
  }

  select(
    docId: string,
    wordIndex: number,
    altIndex: number,
    applyAll: boolean,
  ): Promise<SelectResponse> {
    return this.requestJson(`/api/doc/${encodeURIComponent(docId)}/select`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        word_index: wordIndex,
        alt_index: altIndex,
        apply_all: applyAll,
      }),
    });
  }

  exportText(docId: string, format: "plain" | "html"): Promise<string> {
    return this.requestText(
      `/api/doc/${encodeURIComponent(docId)}/export?format=${format}`,
    );
  }

  exportStructured(docId: string): Promise<DocumentData> {
    return this.requestJson(`/api/doc/${encodeURIComponent(docId)}/export?format=structured`);
  }
}
