/**
 * Per-tag adaptive widgets: the alternatives drop-down with hover previews
 * and the five-step opposite slider. Both read pre-generated data from the
 * preview endpoints and commit changes through edit_tag only.
 */

import type { ApiClient } from './api';
import type { AlternativeSet, SliderSpec, Tag } from './types';

export class DropdownWidget {
  readonly menu: HTMLElement;
  readonly tooltip: HTMLElement;
  alternatives: AlternativeSet | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly boardId: string,
    public tag: Tag,
    root: HTMLElement,
  ) {
    this.menu = document.createElement('div');
    this.menu.className = 'dropdown-menu';
    this.tooltip = document.createElement('div');
    this.tooltip.className = 'preview-tooltip';
    root.append(this.menu, this.tooltip);
  }

  /** Open the menu; pending pre-generation renders as a skeleton row. */
  async open(): Promise<void> {
    this.menu.innerHTML = '';
    await this.api.schedulePreviews(this.boardId, this.tag.id);
    const response = await this.api.getAlternatives(this.boardId, this.tag.id);
    if (response.status === 'pending') {
      const skeleton = document.createElement('div');
      skeleton.className = 'skeleton';
      this.menu.appendChild(skeleton);
      return;
    }
    this.alternatives = response.alternatives;
    for (const option of this.alternatives.options) {
      const item = document.createElement('div');
      item.className = 'option';
      item.dataset.value = option;
      item.textContent = option;
      this.menu.appendChild(item);
    }
  }

  /** Hover an option: fetch its pre-generated preview into the tooltip. */
  async hover(option: string): Promise<void> {
    this.tooltip.className = 'preview-tooltip pending';
    this.tooltip.innerHTML = '';
    try {
      const html = await this.api.getPreview(this.boardId, this.tag.id, option);
      this.tooltip.className = 'preview-tooltip thumbnail';
      this.tooltip.innerHTML = html;
    } catch {
      // preview unavailable: degrade to a text-only tooltip
      this.tooltip.className = 'preview-tooltip text-only';
      this.tooltip.textContent = option;
    }
  }

  /** Commit a menu selection via edit_tag. */
  async select(option: string): Promise<Tag> {
    const response = await this.api.editTag(this.boardId, this.tag.id, this.tag.label ?? '', option);
    this.tag = response.tag;
    this.menu.innerHTML = '';
    return this.tag;
  }

  /** Manual typing overrides the value regardless of any menu state. */
  async typeValue(value: string): Promise<Tag> {
    const response = await this.api.editTag(this.boardId, this.tag.id, this.tag.label ?? '', value);
    this.tag = response.tag;
    this.menu.innerHTML = '';
    this.tooltip.innerHTML = '';
    return this.tag;
  }
}

export class SliderWidget {
  spec: SliderSpec | null = null;
  readonly element: HTMLElement;

  constructor(
    private readonly api: ApiClient,
    private readonly boardId: string,
    public tag: Tag,
    root: HTMLElement,
  ) {
    this.element = document.createElement('div');
    this.element.className = 'slider';
    root.appendChild(this.element);
  }

  /** Load the five-step spec; pending renders a disabled track. */
  async load(): Promise<boolean> {
    await this.api.schedulePreviews(this.boardId, this.tag.id);
    const response = await this.api.getSlider(this.boardId, this.tag.id);
    if (response.status === 'pending') {
      this.element.className = 'slider pending';
      return false;
    }
    this.spec = response.slider;
    this.element.className = 'slider ready';
    this.element.innerHTML = '';
    for (const [index, step] of this.spec.steps.entries()) {
      const stop = document.createElement('div');
      stop.className = 'step';
      stop.dataset.index = String(index);
      stop.title = step.description;
      this.element.appendChild(stop);
    }
    return true;
  }

  /**
   * Commit the slider at a step: the tag takes that step's value. Step 0 is
   * always the current value and step 4 the generated opposite.
   */
  async commit(stepIndex: number): Promise<Tag> {
    if (!this.spec) throw new Error('slider not loaded');
    const step = this.spec.steps[stepIndex];
    if (!step) throw new Error(`no step ${stepIndex}`);
    const response = await this.api.editTag(this.boardId, this.tag.id, this.tag.label ?? '', step.value);
    this.tag = response.tag;
    return this.tag;
  }
}
