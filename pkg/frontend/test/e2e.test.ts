/**
 * End-to-end against the real session service running the replay backend.
 * The canned completions live in fixtures/replay.json (regenerate with
 * fixtures/generate_store.py if the flow below changes).
 */

import { type ChildProcess, spawn } from 'node:child_process';
import { fileURLToPath } from 'node:url';
import path from 'node:path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api';
import { pollJob } from '../src/jobs';
import { OverlayView } from '../src/overlay';
import type { BoardSnapshot, DeckPayload, Tag } from '../src/types';

const OUTLINE_MD = '## Why Kayak\n- scenic waters\n\n## Gear\n- paddle\n- vest\n';
const EDITED_MD = '## Why Kayak in Washington\n- scenic waters\n';

const PORT = 8123 + (process.pid % 800);
const BASE = `http://127.0.0.1:${PORT}/api/v1`;

let server: ChildProcess;
let api: ApiClient;
let board: BoardSnapshot;
let typography: Tag;
let deck: DeckPayload;

async function waitForHealth(): Promise<void> {
  const deadline = Date.now() + 20000;
  while (Date.now() < deadline) {
    try {
      const res = await fetch(`${BASE}/health`);
      if (res.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 100));
  }
  throw new Error('service did not come up');
}

beforeAll(async () => {
  const here = path.dirname(fileURLToPath(import.meta.url));
  const storePath = path.join(here, 'fixtures', 'replay.json');
  server = spawn(
    'tagdeck',
    ['serve', '--backend', 'replay', '--replay-store', storePath, '--port', String(PORT)],
    { stdio: 'ignore' },
  );
  await waitForHealth();
  api = new ApiClient(BASE);

  board = await api.createBoard();
  await api.createTag(board.boardId, { label: 'Topic', value: 'Kayaking', group: 'Narrative' });
  typography = (
    await api.createTag(board.boardId, { label: 'Typography', value: 'Modern', group: 'VisualStyle' })
  ).tag;
  await api.putOutline(board.boardId, OUTLINE_MD);
});

afterAll(() => {
  server?.kill();
});

describe('replay-backed studio flow', () => {
  it('generates a deck from the edited outline via the job API', async () => {
    const job = await api.startJob(board.boardId, { kind: 'deck' });
    await pollJob(api, job.jobId);
    deck = (await api.getJobResult<DeckPayload>(job.jobId)).result;
    expect(deck.slides).toHaveLength(3);
    expect(deck.violations).toEqual([]);
  });

  it('suggestions float outside every group circle', async () => {
    const job = await api.startJob(board.boardId, { kind: 'suggestions' });
    await pollJob(api, job.jobId);
    const { result } = await api.getJobResult<{ tags: Tag[] }>(job.jobId);
    expect(result.tags).toHaveLength(21);
    for (const tag of result.tags) {
      expect(tag.group).toBeNull();
      expect(tag.origin).toBe('suggested');
    }
  });

  it('serves slider and alternatives after pre-generation completes', async () => {
    await api.schedulePreviews(board.boardId, typography.id);
    const deadline = Date.now() + 10000;
    let slider = await api.getSlider(board.boardId, typography.id);
    let alts = await api.getAlternatives(board.boardId, typography.id);
    while (slider.status === 'pending' || alts.status === 'pending') {
      expect(Date.now()).toBeLessThan(deadline);
      await new Promise((r) => setTimeout(r, 50));
      slider = await api.getSlider(board.boardId, typography.id);
      alts = await api.getAlternatives(board.boardId, typography.id);
    }
    expect(slider.slider.steps).toHaveLength(5);
    expect(slider.slider.steps[0].value).toBe('Modern');
    expect(slider.slider.steps[4].value).toBe('Traditional');
    expect(alts.alternatives.options).toEqual(['Teal and Coral', 'Purple and Yellow', 'Green and Gold']);
  });

  it('hover previews render from the preview endpoint once a deck exists', async () => {
    const html = await api.getPreview(board.boardId, typography.id, 'Traditional');
    expect(html).toContain('<section');
  });

  it('runs the overlay loop: ground, vary, apply-to-slide, update-deck-from-slide', async () => {
    const root = document.createElement('div');
    document.body.appendChild(root);
    const overlay = new OverlayView(api, root);

    // open slide 2 -> grounded tags appear
    const session = await overlay.open(deck.deckId, 2);
    expect(session.mode).toBe('json');
    const grounded = [...overlay.tagList.querySelectorAll('.tag.grounded')];
    expect(grounded.length).toBe(6);
    const pairs = grounded.map((n) => n.textContent);
    expect(pairs).toContain('Layout:Two Column');
    expect(pairs).toContain('Text Style:Bullet List');

    // generate one variation
    const variations = await overlay.generateVariations(1);
    expect(variations).toHaveLength(1);
    expect(overlay.variationGrid.querySelectorAll('.variation')).toHaveLength(1);

    // apply to the slide: exactly one thumbnail changes
    const before = [...overlay.thumbnailStrip.children].map((n) => (n as HTMLElement).textContent);
    await overlay.applyToSlide(0);
    const after = [...overlay.thumbnailStrip.children].map((n) => (n as HTMLElement).textContent);
    expect(after.filter((t, i) => t !== before[i])).toHaveLength(1);
    expect(after[1]).toBe('Restyled');

    // update the whole deck from the slide: every thumbnail restyles
    await overlay.applyToDeck(0);
    const fonts = [...overlay.thumbnailStrip.children].map(
      (n) => (n as HTMLElement).dataset.headerFont,
    );
    expect(fonts).toEqual(['Montserrat', 'Montserrat', 'Montserrat']);
  });

  it('editing the outline changes the next generated deck', async () => {
    await api.putOutline(board.boardId, EDITED_MD);
    const job = await api.startJob(board.boardId, { kind: 'deck' });
    await pollJob(api, job.jobId);
    const edited = (await api.getJobResult<DeckPayload>(job.jobId)).result;
    expect(edited.slides).toHaveLength(2); // fixture deck for the edited outline
  });

  it('UI state is a pure projection: refetched board matches mutation responses', async () => {
    const created = await api.createTag(board.boardId, {
      label: 'Tone',
      value: 'Calm',
      group: null,
      position: { x: 40, y: -500 },
    });
    const moved = await api.moveTag(board.boardId, created.tag.id, { x: -300, y: 0 }, 'auto');
    expect(moved.tag.group).toBe('Narrative'); // server-side hit test agrees
    const refetched = await api.getBoard(board.boardId);
    expect(refetched).toEqual(moved.board);
  });
});
