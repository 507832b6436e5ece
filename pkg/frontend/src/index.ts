export { ApiClient, ApiError } from './api';
export { CanvasView } from './canvas';
export { circleContains, groupAt, screenToWorld, worldToScreen, zoomAt } from './geometry';
export { pollJob } from './jobs';
export { OverlayView } from './overlay';
export { DropdownWidget, SliderWidget } from './widgets';
export type * from './types';
