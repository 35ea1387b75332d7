/** DOM rendering and wiring. All state lives in SessionFlow; this layer
 * redraws from scratch on every change, which is plenty at ten steps. */

import { ApiClient, ApiError } from "./api.js";
import { SessionFlow, type SessionState } from "./session.js";
import { swatchStyle } from "./swatch.js";
import type { StepRecord, TopView } from "./types.js";

const STORAGE_KEY = "fitpick.session";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function swatchBox(digest: string, title: string): HTMLElement {
  const box = el("div", "swatch");
  box.style.background = swatchStyle(digest).background;
  box.title = title;
  return box;
}

function scoreBadge(score: number): HTMLElement {
  const badge = el("span", "badge", score.toFixed(2));
  badge.classList.add(score >= 0.7 ? "good" : score >= 0.4 ? "mid" : "poor");
  return badge;
}

export class App {
  private readonly flow: SessionFlow;
  private status = "";

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
  ) {
    this.flow = new SessionFlow(api);
    this.flow.onChange((state) => {
      localStorage.setItem(STORAGE_KEY, state.sessionId);
      this.renderSession(state);
    });
  }

  async boot(): Promise<void> {
    const stored = localStorage.getItem(STORAGE_KEY);
    if (stored) {
      try {
        await this.flow.resync(stored);
        return;
      } catch {
        localStorage.removeItem(STORAGE_KEY);
      }
    }
    await this.renderGallery();
  }

  private note(message: string): void {
    this.status = message;
    const bar = this.root.querySelector(".status");
    if (bar) bar.textContent = message;
  }

  private async renderGallery(offset = 0): Promise<void> {
    const page = await this.api.tops(offset, 24);
    this.root.replaceChildren();
    this.root.append(el("h1", undefined, "Pick a top"));
    this.root.append(el("div", "status", this.status));

    const grid = el("div", "gallery");
    for (const top of page.items) {
      grid.append(this.topCard(top));
    }
    this.root.append(grid);

    const nav = el("div", "pager");
    if (offset > 0) {
      const back = el("button", undefined, "← newer");
      back.onclick = () => void this.renderGallery(Math.max(0, offset - page.limit));
      nav.append(back);
    }
    if (offset + page.items.length < page.total) {
      const more = el("button", undefined, "older →");
      more.onclick = () => void this.renderGallery(offset + page.limit);
      nav.append(more);
    }
    nav.append(el("span", "muted", `${offset + 1}–${offset + page.items.length} of ${page.total}`));
    this.root.append(nav);
  }

  private topCard(top: TopView): HTMLElement {
    const card = el("div", "card");
    if (top.image_url) {
      const img = el("img");
      img.src = top.image_url;
      img.alt = top.id;
      card.append(img);
    } else {
      card.append(swatchBox(top.swatch, top.id));
    }
    card.append(el("div", "card-id", top.id));
    card.onclick = () => void this.startSession(top.id);
    return card;
  }

  private async startSession(topId: string): Promise<void> {
    try {
      await this.flow.start(topId, "human");
    } catch (error) {
      this.note(error instanceof ApiError ? `${error.code}: ${error.message}` : String(error));
    }
  }

  private renderSession(state: SessionState): void {
    this.root.replaceChildren();
    this.root.append(el("h1", undefined, `Styling ${state.topId ?? state.sessionId}`));
    this.root.append(el("div", "status", this.status));

    const timeline = el("div", "timeline");
    for (const record of state.history) {
      timeline.append(this.historyRow(record));
    }
    this.root.append(timeline);

    if (state.pending) {
      this.root.append(this.pendingPanel(state));
    } else if (state.done) {
      this.root.append(this.summaryPanel(state));
    }

    const reset = el("button", "linkish", "start over");
    reset.onclick = () => {
      localStorage.removeItem(STORAGE_KEY);
      this.status = "";
      void this.renderGallery();
    };
    this.root.append(reset);
  }

  private historyRow(record: StepRecord): HTMLElement {
    const row = el("div", "step");
    row.append(el("span", "step-no", String(record.step)));
    row.append(swatchBox(record.bottom.swatch, record.bottom.id));
    row.append(el("span", "step-id", record.bottom.id));
    row.append(scoreBadge(record.score));
    return row;
  }

  private pendingPanel(state: SessionState): HTMLElement {
    const pending = state.pending!;
    const panel = el("div", "pending");
    panel.append(
      el("h2", undefined, `Suggestion ${pending.step} of ${state.nSteps}`),
    );
    panel.append(swatchBox(pending.bottom.swatch, pending.bottom.id));
    panel.append(el("div", "card-id", pending.bottom.id));

    const slider = el("input") as HTMLInputElement;
    slider.type = "range";
    slider.min = "0";
    slider.max = "1";
    slider.step = "0.05";
    slider.value = "0.5";
    const readout = el("span", "badge mid", "0.50");
    slider.oninput = () => {
      readout.textContent = Number(slider.value).toFixed(2);
    };

    const submit = el("button", "primary", "Rate it");
    submit.onclick = () => {
      submit.disabled = true;
      void this.flow
        .submit(Number(slider.value))
        .catch((error: unknown) => {
          this.note(
            error instanceof ApiError ? `${error.code}: ${error.message}` : String(error),
          );
          submit.disabled = false;
        });
    };

    const controls = el("div", "controls");
    controls.append(slider, readout, submit);
    panel.append(controls);
    return panel;
  }

  private summaryPanel(state: SessionState): HTMLElement {
    const panel = el("div", "summary");
    panel.append(el("h2", undefined, "Session complete"));
    const scores = state.history.map((record) => record.score);
    const best = scores.length ? Math.max(...scores) : 0;
    panel.append(
      el(
        "p",
        undefined,
        `${state.history.length} suggestions scored; best ${best.toFixed(2)}.`,
      ),
    );
    return panel;
  }
}

export async function mount(root: HTMLElement, baseUrl: string): Promise<void> {
  const api = new ApiClient(baseUrl);
  const app = new App(api, root);
  await app.boot();
}
