/** Wire types for the session-service /api/v1 surface. */

export interface Point {
  x: number;
  y: number;
}

export interface GroupCircle {
  name: string;
  center: Point;
  radius: number;
}

export interface Tag {
  id: string;
  /** "concept" for label:value tags, otherwise the reference kind. */
  kind: string;
  label?: string;
  value?: string;
  source?: string;
  selection?: string[] | null;
  group: string | null;
  position: Point;
  origin: string;
  revision: number;
}

export interface BoardSnapshot {
  schemaVersion: number;
  boardId: string;
  groups: GroupCircle[];
  tags: Tag[];
  outlineRef: string | null;
  deckRef: string | null;
  boardRevision: number;
}

export interface Job {
  jobId: string;
  kind: string;
  inputRevision: number;
  status: 'queued' | 'running' | 'done' | 'failed';
  error: string | null;
  stale: boolean;
}

export interface JobResult<T = unknown> {
  jobId: string;
  stale: boolean;
  result: T;
}

export interface Slide {
  slideNumber: number;
  layout: string;
  content: Record<string, unknown>;
  theme: { fonts: { header: string; text: string }; [key: string]: unknown };
}

export interface DeckPayload {
  deckId: string;
  revision: number;
  slides: Slide[];
  violations: Array<{ slideNumber: number; rule: string; detail: string }>;
}

export interface SessionPayload {
  sessionId: string;
  parentDeckId: string;
  slideNumber: number;
  mode: string;
  flaggedGroups: string[];
  scopedBoard: BoardSnapshot;
  variations: Slide[];
  status: string;
}

export interface SliderStep {
  value: string;
  description: string;
}

export interface SliderSpec {
  tagId: string;
  leftValue: string;
  rightValue: string;
  steps: SliderStep[];
  currentStep: number;
}

export interface AlternativeSet {
  tagId: string;
  tagRevision: number;
  options: string[];
  previews: Record<string, string | null>;
}

export type PreviewStatus<T> = { status: 'pending' } | ({ status: 'ready' } & T);

export interface ImageSearchResult {
  assets: Array<{ assetId: string; url: string; query: string }>;
  tags: Tag[];
  warning: string | null;
  board: BoardSnapshot;
}
