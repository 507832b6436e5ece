import type { GroupCircle, Point } from './types';

/**
 * Inside iff the point's distance from the circle center is within the
 * radius; a drop exactly on the border counts as inside. This mirrors the
 * server's hit test, so optimistic activation never disagrees with the
 * authoritative result.
 */
export function circleContains(circle: GroupCircle, p: Point): boolean {
  const dx = p.x - circle.center.x;
  const dy = p.y - circle.center.y;
  return dx * dx + dy * dy <= circle.radius * circle.radius;
}

/** First group circle containing the point, or null when on open canvas. */
export function groupAt(groups: GroupCircle[], p: Point): string | null {
  for (const circle of groups) {
    if (circleContains(circle, p)) return circle.name;
  }
  return null;
}

export interface Viewport {
  x: number;
  y: number;
  zoom: number;
}

export function worldToScreen(view: Viewport, p: Point): Point {
  return { x: (p.x - view.x) * view.zoom, y: (p.y - view.y) * view.zoom };
}

export function screenToWorld(view: Viewport, p: Point): Point {
  return { x: p.x / view.zoom + view.x, y: p.y / view.zoom + view.y };
}

/** Zoom about a fixed screen point so the content under the cursor stays put. */
export function zoomAt(view: Viewport, factor: number, screenPoint: Point): Viewport {
  const anchor = screenToWorld(view, screenPoint);
  const zoom = Math.min(4, Math.max(0.25, view.zoom * factor));
  return {
    zoom,
    x: anchor.x - screenPoint.x / zoom,
    y: anchor.y - screenPoint.y / zoom,
  };
}
