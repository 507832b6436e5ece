/**
 * Typed client for the session service. Every UI write goes through here —
 * the canvas and widgets never mutate state except via these endpoints.
 */

import type {
  AlternativeSet,
  BoardSnapshot,
  DeckPayload,
  ImageSearchResult,
  Job,
  JobResult,
  Point,
  PreviewStatus,
  SessionPayload,
  SliderSpec,
  Tag,
} from './types';

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly status: number,
    public readonly code: string,
    public readonly rawReply?: string,
  ) {
    super(message);
    this.name = 'ApiError';
  }

  get isConflict(): boolean {
    return this.status === 409;
  }
}

export interface RequestOptions {
  signal?: AbortSignal;
  /** Optimistic-concurrency revision; server answers 409 when stale. */
  ifMatch?: number;
}

interface TagResponse {
  tag: Tag;
  board: BoardSnapshot;
}

export class ApiClient {
  constructor(private readonly baseUrl: string = '/api/v1') {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    options: RequestOptions = {},
  ): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers['Content-Type'] = 'application/json';
    if (options.ifMatch !== undefined) headers['If-Match'] = String(options.ifMatch);
    const response = await fetch(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
      signal: options.signal,
    });
    const text = await response.text();
    if (!response.ok) {
      let message = text;
      let code = 'unknown';
      let rawReply: string | undefined;
      try {
        const parsed = JSON.parse(text);
        message = parsed.error?.message ?? text;
        code = parsed.error?.code ?? code;
        rawReply = parsed.error?.rawReply;
      } catch {
        // non-JSON error body; keep the raw text as the message
      }
      throw new ApiError(message, response.status, code, rawReply);
    }
    const contentType = response.headers.get('content-type') ?? '';
    if (contentType.includes('text/html')) return text as T;
    return JSON.parse(text) as T;
  }

  // -- boards and tags -----------------------------------------------------

  createBoard(options?: RequestOptions): Promise<BoardSnapshot> {
    return this.request('POST', '/boards', {}, options);
  }

  getBoard(boardId: string, options?: RequestOptions): Promise<BoardSnapshot> {
    return this.request('GET', `/boards/${boardId}`, undefined, options);
  }

  createTag(
    boardId: string,
    body: { label?: string; value?: string; kind?: string; source?: string; group?: string | null; position?: Point },
    options?: RequestOptions,
  ): Promise<TagResponse> {
    return this.request('POST', `/boards/${boardId}/tags`, body, options);
  }

  editTag(
    boardId: string,
    tagId: string,
    label: string,
    value: string,
    options?: RequestOptions,
  ): Promise<TagResponse> {
    return this.request('PATCH', `/boards/${boardId}/tags/${tagId}`, { label, value }, options);
  }

  moveTag(
    boardId: string,
    tagId: string,
    position: Point,
    group: string | null | 'auto',
    options?: RequestOptions,
  ): Promise<TagResponse> {
    return this.request('POST', `/boards/${boardId}/tags/${tagId}/move`, { position, group }, options);
  }

  deleteTag(boardId: string, tagId: string, options?: RequestOptions): Promise<{ board: BoardSnapshot }> {
    return this.request('DELETE', `/boards/${boardId}/tags/${tagId}`, undefined, options);
  }

  selectSections(
    boardId: string,
    tagId: string,
    sectionIds: string[],
    options?: RequestOptions,
  ): Promise<TagResponse> {
    return this.request('POST', `/boards/${boardId}/tags/${tagId}/sections`, { sectionIds }, options);
  }

  groundText(
    boardId: string,
    text: string,
    options?: RequestOptions,
  ): Promise<{ tags: Tag[]; board: BoardSnapshot }> {
    return this.request('POST', `/boards/${boardId}/ground-text`, { text }, options);
  }

  // -- outline -------------------------------------------------------------

  getOutline(
    boardId: string,
    options?: RequestOptions,
  ): Promise<{ outlineRef: string; markdown: string; canonical: string; revision: number }> {
    return this.request('GET', `/boards/${boardId}/outline`, undefined, options);
  }

  putOutline(
    boardId: string,
    markdown: string,
    options?: RequestOptions,
  ): Promise<{ outlineRef: string; markdown: string; revision: number }> {
    return this.request('PUT', `/boards/${boardId}/outline`, { markdown }, options);
  }

  // -- jobs ----------------------------------------------------------------

  startJob(
    boardId: string,
    body: { kind: string; text?: string; template?: unknown },
    options?: RequestOptions,
  ): Promise<Job> {
    return this.request('POST', `/boards/${boardId}/jobs`, body, options);
  }

  getJob(jobId: string, options?: RequestOptions): Promise<Job> {
    return this.request('GET', `/jobs/${jobId}`, undefined, options);
  }

  getJobResult<T>(jobId: string, options?: RequestOptions): Promise<JobResult<T>> {
    return this.request('GET', `/jobs/${jobId}/result`, undefined, options);
  }

  cancelJob(jobId: string, options?: RequestOptions): Promise<Job> {
    return this.request('DELETE', `/jobs/${jobId}`, undefined, options);
  }

  // -- decks and slide sessions --------------------------------------------

  getDeck(deckId: string, options?: RequestOptions): Promise<DeckPayload> {
    return this.request('GET', `/decks/${deckId}`, undefined, options);
  }

  slideHtml(deckId: string, slideNumber: number, options?: RequestOptions): Promise<string> {
    return this.request('GET', `/decks/${deckId}/slides/${slideNumber}/html`, undefined, options);
  }

  openSlideSession(deckId: string, slideNumber: number, options?: RequestOptions): Promise<SessionPayload> {
    return this.request('POST', `/decks/${deckId}/slides/${slideNumber}/session`, {}, options);
  }

  getSession(sessionId: string, options?: RequestOptions): Promise<SessionPayload> {
    return this.request('GET', `/sessions/${sessionId}`, undefined, options);
  }

  startVariations(sessionId: string, count: number, options?: RequestOptions): Promise<Job> {
    return this.request('POST', `/sessions/${sessionId}/variations`, { count }, options);
  }

  applyVariation(
    sessionId: string,
    index: number,
    toDeck: boolean,
    options?: RequestOptions,
  ): Promise<DeckPayload> {
    return this.request('POST', `/sessions/${sessionId}/apply`, { index, toDeck }, options);
  }

  // -- previews ------------------------------------------------------------

  schedulePreviews(boardId: string, tagId: string, options?: RequestOptions): Promise<{ scheduled: string[] }> {
    return this.request('POST', `/boards/${boardId}/tags/${tagId}/previews`, {}, options);
  }

  getAlternatives(
    boardId: string,
    tagId: string,
    options?: RequestOptions,
  ): Promise<PreviewStatus<{ alternatives: AlternativeSet }>> {
    return this.request('GET', `/boards/${boardId}/tags/${tagId}/alternatives`, undefined, options);
  }

  getSlider(
    boardId: string,
    tagId: string,
    options?: RequestOptions,
  ): Promise<PreviewStatus<{ slider: SliderSpec }>> {
    return this.request('GET', `/boards/${boardId}/tags/${tagId}/slider`, undefined, options);
  }

  getPreview(boardId: string, tagId: string, value: string, options?: RequestOptions): Promise<string> {
    const query = new URLSearchParams({ value }).toString();
    return this.request('GET', `/boards/${boardId}/tags/${tagId}/preview?${query}`, undefined, options);
  }

  // -- images --------------------------------------------------------------

  searchImages(boardId: string, options?: RequestOptions): Promise<ImageSearchResult> {
    return this.request('POST', `/boards/${boardId}/images/search`, {}, options);
  }
}
