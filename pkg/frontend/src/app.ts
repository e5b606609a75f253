import { StaleQueryError, fetchCurve, fetchQuery, fetchState, submitLabel } from "./api.js";
import { MatchingEditor } from "./editor.js";
import { drawQuery, nodeAt, pairKind, rankByValue, sideLayout } from "./render.js";
import type { QueryView, SessionState } from "./types.js";

const FRAME_W = 460;
const FRAME_H = 320;
const GAP = 60;

/**
 * Session controller.  One pending query at a time; submission waits for
 * the server (which retrains before answering), and a failed submit keeps
 * the draft so nothing the annotator did is lost.
 */
export class App {
  private editor: MatchingEditor | null = null;
  private view: QueryView | null = null;

  constructor(
    private base: string,
    private canvas: HTMLCanvasElement,
    private status: HTMLElement,
    private sidebar: HTMLElement,
    private submitButton: HTMLButtonElement,
    private curveCanvas: HTMLCanvasElement,
  ) {
    canvas.addEventListener("click", (ev) => this.onCanvasClick(ev));
    submitButton.addEventListener("click", () => void this.onSubmit());
  }

  async start(): Promise<void> {
    await this.refresh();
  }

  private async refresh(): Promise<void> {
    const state = await fetchState(this.base);
    await this.drawCurve(state);
    if (state.done) {
      this.status.textContent =
        `session finished after ${state.round} rounds; ` +
        `final hamming ${state.hamming_rate_history.at(-1)?.toFixed(4)}`;
      this.submitButton.disabled = true;
      return;
    }
    try {
      this.view = await fetchQuery(this.base);
    } catch (err) {
      this.banner(`bad query payload: ${(err as Error).message}`);
      return;
    }
    // the suggestion preloads the draft: confirming it is one click
    this.editor = new MatchingEditor(this.view.n, this.view.suggested);
    this.status.textContent =
      `round ${state.round + 1}: label instance ${this.view.instance_id} ` +
      `(${state.n_pool} left in pool)`;
    this.renderAll();
  }

  private renderAll(): void {
    if (!this.view || !this.editor) return;
    const ctx = this.canvas.getContext("2d");
    if (ctx) {
      drawQuery(ctx, this.view, this.editor.draft(), this.editor.selection(), {
        frameW: FRAME_W,
        frameH: FRAME_H,
        gap: GAP,
      });
    }
    this.renderSidebar();
    this.submitButton.disabled = !this.editor.isComplete();
  }

  private renderSidebar(): void {
    if (!this.view || !this.editor) return;
    const view = this.view;
    const realLeft = view.boxes_t.length;
    const realRight = view.boxes_t1.length;
    const ranked = rankByValue(view.value_scores);
    const rows = ranked.map((i) => {
      const j = this.editor!.draft()[i];
      const badge = j === null ? "unassigned" : pairKind(i, j, realLeft, realRight);
      return `<li>node ${i}: V = ${view.value_scores[i].toFixed(3)} bits ` +
        `<span class="badge badge-${badge}">${badge}</span></li>`;
    });
    this.sidebar.innerHTML =
      `<h3>solicitation value per node</h3><ol>${rows.join("")}</ol>` +
      `<p>click a left node, then its right partner; conflicting links move over</p>`;
  }

  private onCanvasClick(ev: MouseEvent): void {
    if (!this.view || !this.editor) return;
    const rect = this.canvas.getBoundingClientRect();
    const x = ev.clientX - rect.left;
    const y = ev.clientY - rect.top;
    const left = sideLayout(this.view.boxes_t, this.view.n, FRAME_W, FRAME_H);
    const right = sideLayout(this.view.boxes_t1, this.view.n, FRAME_W, FRAME_H)
      .map((nd) => ({ ...nd, x: nd.x + FRAME_W + GAP }));
    const li = nodeAt(left, x, y);
    if (li !== null) {
      this.editor.clickLeft(li);
      this.renderAll();
      return;
    }
    const ri = nodeAt(right, x, y);
    if (ri !== null) {
      this.editor.clickRight(ri);
      this.renderAll();
    }
  }

  private async onSubmit(): Promise<void> {
    if (!this.view || !this.editor || !this.editor.isComplete()) return;
    this.submitButton.disabled = true;
    this.status.textContent = "submitting; the model is retraining...";
    try {
      await submitLabel(this.base, this.view.instance_id, this.editor.toPermutation());
    } catch (err) {
      if (err instanceof StaleQueryError) {
        this.banner("query went stale; reloading");
        await this.refresh();
        return;
      }
      // network hiccup: keep the draft and re-enable the button
      this.banner(`submit failed (${(err as Error).message}); draft preserved, retry`);
      this.submitButton.disabled = !this.editor.isComplete();
      return;
    }
    await this.refresh();
  }

  private async drawCurve(state: SessionState): Promise<void> {
    const ctx = this.curveCanvas.getContext("2d");
    if (!ctx) return;
    const w = this.curveCanvas.width;
    const h = this.curveCanvas.height;
    ctx.clearRect(0, 0, w, h);
    const history = state.hamming_rate_history;
    if (history.length === 0) return;
    const maxRate = Math.max(...history, 0.01);
    ctx.strokeStyle = "#c23e3e";
    ctx.beginPath();
    history.forEach((rate, i) => {
      const x = (i / Math.max(1, history.length - 1)) * (w - 10) + 5;
      const y = h - 5 - (rate / maxRate) * (h - 10);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
    ctx.fillStyle = "#444";
    ctx.font = "11px sans-serif";
    ctx.fillText(`hamming ${history.at(-1)?.toFixed(3)} (${history.length} pts)`, 8, 12);
    void fetchCurve(this.base).catch(() => undefined); // warm the csv endpoint
  }

  private banner(message: string): void {
    this.status.textContent = message;
  }
}

export function mount(base = ""): App {
  const canvas = document.getElementById("frames") as HTMLCanvasElement;
  const status = document.getElementById("status") as HTMLElement;
  const sidebar = document.getElementById("sidebar") as HTMLElement;
  const submit = document.getElementById("submit") as HTMLButtonElement;
  const curve = document.getElementById("curve") as HTMLCanvasElement;
  const app = new App(base, canvas, status, sidebar, submit, curve);
  void app.start();
  return app;
}
