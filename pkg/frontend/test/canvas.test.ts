import { beforeEach, describe, expect, it } from 'vitest';

import type { ApiClient } from '../src/api';
import { CanvasView } from '../src/canvas';
import { FakeApi, conceptTag, fixtureBoard } from './fakes';

let root: HTMLElement;

beforeEach(() => {
  document.body.innerHTML = '';
  root = document.createElement('div');
  document.body.appendChild(root);
});

function makeCanvas(api: FakeApi, onConflict?: (m: string) => void): CanvasView {
  return new CanvasView(root, api as unknown as ApiClient, api.board, onConflict);
}

describe('drag activation', () => {
  it('dragging a float inside a circle issues exactly one move call and renders active styling', async () => {
    const floating = conceptTag('t1', 'Tone', 'Calm', null, { x: 0, y: -400 });
    const api = new FakeApi(fixtureBoard([floating]));
    const canvas = makeCanvas(api);
    expect(canvas.nodeFor('t1')!.className).toContain('floating');

    canvas.beginDrag('t1');
    canvas.dragTo({ x: -350, y: 10 });
    canvas.dragTo({ x: -310, y: 5 });
    const moved = await canvas.endDrag();

    expect(api.callsTo('moveTag')).toHaveLength(1);
    expect(api.callsTo('moveTag')[0].args[2]).toBe('Narrative');
    expect(moved!.group).toBe('Narrative');
    expect(canvas.nodeFor('t1')!.className).toContain('active');
    expect(canvas.nodeFor('t1')!.className).not.toContain('floating');
  });

  it('dropping an active tag on empty canvas deactivates it', async () => {
    const active = conceptTag('t1', 'Tone', 'Calm', 'Narrative', { x: -300, y: 0 });
    const api = new FakeApi(fixtureBoard([active]));
    const canvas = makeCanvas(api);

    canvas.beginDrag('t1');
    canvas.dragTo({ x: 900, y: 900 });
    const moved = await canvas.endDrag();

    expect(api.callsTo('moveTag')).toHaveLength(1);
    expect(api.callsTo('moveTag')[0].args[2]).toBeNull();
    expect(moved!.group).toBeNull();
    expect(canvas.nodeFor('t1')!.className).toContain('floating');
  });

  it('snaps back and reports a toast on conflict', async () => {
    const floating = conceptTag('t1', 'Tone', 'Calm', null, { x: 0, y: -400 });
    const api = new FakeApi(fixtureBoard([floating]));
    const toasts: string[] = [];
    const canvas = makeCanvas(api, (m) => toasts.push(m));
    api.failNextMoveWithConflict = true;

    canvas.beginDrag('t1');
    canvas.dragTo({ x: -300, y: 0 });
    const moved = await canvas.endDrag();

    expect(moved).toBeNull();
    expect(toasts).toEqual(['board revision moved on']);
    const node = canvas.nodeFor('t1')!;
    expect(node.className).toContain('floating');
    const tag = canvas.board.tags[0];
    expect(tag.position).toEqual({ x: 0, y: -400 });
    expect(tag.group).toBeNull();
  });

  it('hit-tests in world coordinates even when panned and zoomed', async () => {
    const floating = conceptTag('t1', 'Tone', 'Calm', null, { x: 0, y: -400 });
    const api = new FakeApi(fixtureBoard([floating]));
    const canvas = makeCanvas(api);
    canvas.zoomBy(2, { x: 0, y: 0 });
    canvas.panBy(100, -50);

    canvas.beginDrag('t1');
    // screen point chosen so the world point lands on the Narrative center
    const view = canvas.viewport;
    canvas.dragTo({ x: (-300 - view.x) * view.zoom, y: (0 - view.y) * view.zoom });
    const moved = await canvas.endDrag();
    expect(moved!.group).toBe('Narrative');
    expect(moved!.position.x).toBeCloseTo(-300);
    expect(moved!.position.y).toBeCloseTo(0);
  });
});

describe('reconciliation', () => {
  it('a forced refetch renders identically to the optimistic state', async () => {
    const floating = conceptTag('t1', 'Tone', 'Calm', null, { x: 0, y: -400 });
    const api = new FakeApi(fixtureBoard([floating]));
    const canvas = makeCanvas(api);

    canvas.beginDrag('t1');
    canvas.dragTo({ x: -300, y: 0 });
    await canvas.endDrag();
    const optimistic = root.innerHTML;

    await canvas.refresh();
    expect(root.innerHTML).toBe(optimistic);
  });

  it('node positions mirror board positions after every mutation round trip', async () => {
    const tags = [
      conceptTag('t1', 'A', '1', null, { x: 10, y: 20 }),
      conceptTag('t2', 'B', '2', 'Narrative', { x: -280, y: 30 }),
    ];
    const api = new FakeApi(fixtureBoard(tags));
    const canvas = makeCanvas(api);
    canvas.beginDrag('t1');
    canvas.dragTo({ x: 300, y: 0 });
    await canvas.endDrag();

    for (const tag of canvas.board.tags) {
      const node = canvas.nodeFor(tag.id)!;
      expect(parseFloat(node.style.left)).toBeCloseTo(tag.position.x);
      expect(parseFloat(node.style.top)).toBeCloseTo(tag.position.y);
    }
  });
});
