/**
 * The steering canvas: three group circles, tag nodes, pan/zoom, and drag
 * activation. The view is a pure projection of the board snapshot — every
 * mutation round-trips through the API and re-renders from the response.
 */

import type { ApiClient, ApiError } from './api';
import { groupAt, screenToWorld, worldToScreen, zoomAt, type Viewport } from './geometry';
import type { BoardSnapshot, Point, Tag } from './types';

interface DragState {
  tagId: string;
  /** Position and group before the drag, for conflict rollback. */
  from: Point;
  fromGroup: string | null;
  current: Point;
}

export class CanvasView {
  viewport: Viewport = { x: 0, y: 0, zoom: 1 };
  private drag: DragState | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    public board: BoardSnapshot,
    /** Called with a message when an optimistic update is rolled back. */
    private readonly onConflict: (message: string) => void = () => {},
  ) {
    this.render();
  }

  // -- rendering -----------------------------------------------------------

  render(): void {
    this.root.innerHTML = '';
    for (const group of this.board.groups) {
      const circle = document.createElement('div');
      circle.className = 'group-circle';
      circle.dataset.group = group.name;
      const screen = worldToScreen(this.viewport, group.center);
      circle.style.left = `${screen.x}px`;
      circle.style.top = `${screen.y}px`;
      circle.style.width = `${group.radius * 2 * this.viewport.zoom}px`;
      this.root.appendChild(circle);
    }
    for (const tag of this.board.tags) {
      this.root.appendChild(this.renderTag(tag));
    }
  }

  private renderTag(tag: Tag): HTMLElement {
    const node = document.createElement('div');
    node.className = tag.group === null ? 'tag floating' : 'tag active';
    if (tag.origin === 'suggested') node.classList.add('suggested');
    if (tag.origin === 'grounded') node.classList.add('grounded');
    node.dataset.id = tag.id;
    node.dataset.group = tag.group ?? '';
    node.textContent = tag.kind === 'concept'
      ? (tag.label ? `${tag.label}:${tag.value}` : tag.value ?? '')
      : tag.source ?? '';
    const screen = worldToScreen(this.viewport, tag.position);
    node.style.left = `${screen.x}px`;
    node.style.top = `${screen.y}px`;
    return node;
  }

  nodeFor(tagId: string): HTMLElement | null {
    return this.root.querySelector(`[data-id="${tagId}"]`);
  }

  /** Re-fetch the board and re-render; the canvas mirrors server state. */
  async refresh(): Promise<void> {
    this.board = await this.api.getBoard(this.board.boardId);
    this.render();
  }

  // -- viewport ------------------------------------------------------------

  panBy(dx: number, dy: number): void {
    this.viewport = {
      ...this.viewport,
      x: this.viewport.x - dx / this.viewport.zoom,
      y: this.viewport.y - dy / this.viewport.zoom,
    };
    this.render();
  }

  zoomBy(factor: number, screenPoint: Point): void {
    this.viewport = zoomAt(this.viewport, factor, screenPoint);
    this.render();
  }

  // -- drag activation -----------------------------------------------------

  beginDrag(tagId: string): void {
    const tag = this.board.tags.find((t) => t.id === tagId);
    if (!tag) throw new Error(`unknown tag ${tagId}`);
    this.drag = {
      tagId,
      from: { ...tag.position },
      fromGroup: tag.group,
      current: { ...tag.position },
    };
  }

  dragTo(screenPoint: Point): void {
    if (!this.drag) return;
    this.drag.current = screenToWorld(this.viewport, screenPoint);
    const node = this.nodeFor(this.drag.tagId);
    if (node) {
      node.style.left = `${screenPoint.x}px`;
      node.style.top = `${screenPoint.y}px`;
    }
  }

  /**
   * Finish the drag: hit-test the drop point, apply the move optimistically,
   * and issue exactly one move_tag call. A conflict (or any API failure)
   * rolls the node back to where the drag started.
   */
  async endDrag(): Promise<Tag | null> {
    if (!this.drag) return null;
    const { tagId, from, fromGroup, current } = this.drag;
    this.drag = null;
    const targetGroup = groupAt(this.board.groups, current);

    const tag = this.board.tags.find((t) => t.id === tagId)!;
    tag.position = { ...current };
    tag.group = targetGroup;
    this.render(); // optimistic: active styling appears before the server answers

    try {
      const response = await this.api.moveTag(this.board.boardId, tagId, current, targetGroup);
      this.board = response.board;
      this.render();
      return response.tag;
    } catch (err) {
      tag.position = from;
      tag.group = fromGroup;
      this.render(); // snap back
      const message = (err as ApiError).message ?? 'move failed';
      this.onConflict(message);
      return null;
    }
  }
}
