/**
 * Slide steering overlay: ground one slide into a scoped tag board, generate
 * variations, and accept them into the deck — either the single slide or the
 * whole deck's style.
 */

import type { ApiClient } from './api';
import { pollJob } from './jobs';
import type { DeckPayload, SessionPayload, Slide } from './types';

export class OverlayView {
  session: SessionPayload | null = null;
  deck: DeckPayload | null = null;
  readonly tagList: HTMLElement;
  readonly variationGrid: HTMLElement;
  readonly thumbnailStrip: HTMLElement;

  constructor(
    private readonly api: ApiClient,
    root: HTMLElement,
  ) {
    this.tagList = document.createElement('div');
    this.tagList.className = 'overlay-tags';
    this.variationGrid = document.createElement('div');
    this.variationGrid.className = 'variation-grid';
    this.thumbnailStrip = document.createElement('div');
    this.thumbnailStrip.className = 'thumbnails';
    root.append(this.tagList, this.variationGrid, this.thumbnailStrip);
  }

  /** Open a slide: the scoped board arrives pre-populated with grounded tags. */
  async open(deckId: string, slideNumber: number): Promise<SessionPayload> {
    this.deck = await this.api.getDeck(deckId);
    this.session = await this.api.openSlideSession(deckId, slideNumber);
    this.renderTags();
    this.renderThumbnails();
    return this.session;
  }

  private renderTags(): void {
    this.tagList.innerHTML = '';
    if (!this.session) return;
    for (const tag of this.session.scopedBoard.tags) {
      const node = document.createElement('div');
      node.className = tag.group === null ? 'tag floating' : 'tag active';
      if (tag.origin === 'grounded') node.classList.add('grounded');
      node.dataset.id = tag.id;
      node.dataset.group = tag.group ?? '';
      node.textContent = tag.label ? `${tag.label}:${tag.value}` : tag.value ?? '';
      this.tagList.appendChild(node);
    }
  }

  renderThumbnails(): void {
    this.thumbnailStrip.innerHTML = '';
    if (!this.deck) return;
    for (const slide of this.deck.slides) {
      const thumb = document.createElement('div');
      thumb.className = 'thumbnail';
      thumb.dataset.slide = String(slide.slideNumber);
      thumb.dataset.headerFont = slide.theme.fonts.header;
      thumb.textContent = String(slide.content['title'] ?? '');
      this.thumbnailStrip.appendChild(thumb);
    }
  }

  /** Generate variations through the async job API and render the grid. */
  async generateVariations(count: number): Promise<Slide[]> {
    if (!this.session) throw new Error('no open session');
    const job = await this.api.startVariations(this.session.sessionId, count);
    await pollJob(this.api, job.jobId);
    this.session = await this.api.getSession(this.session.sessionId);
    this.variationGrid.innerHTML = '';
    for (const [index, slide] of this.session.variations.entries()) {
      const card = document.createElement('div');
      card.className = 'variation';
      card.dataset.index = String(index);
      card.textContent = String(slide.content['title'] ?? '');
      this.variationGrid.appendChild(card);
    }
    return this.session.variations;
  }

  /** Accept a variation into its slide only. */
  async applyToSlide(index: number): Promise<DeckPayload> {
    if (!this.session) throw new Error('no open session');
    this.deck = await this.api.applyVariation(this.session.sessionId, index, false);
    this.renderThumbnails();
    return this.deck;
  }

  /** Accept a variation and propagate its style across the whole deck. */
  async applyToDeck(index: number): Promise<DeckPayload> {
    if (!this.session) throw new Error('no open session');
    this.deck = await this.api.applyVariation(this.session.sessionId, index, true);
    this.renderThumbnails();
    return this.deck;
  }
}
