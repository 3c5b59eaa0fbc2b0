/**
 * Panel layout helper: maps data coordinates to surface pixels and draws
 * axes, ticks, heatmaps, curves and reference lines.
 */

import { diverging, sequential, symmetricLimit, type Rgb } from "./colormap.js";
import type { RasterImage, Surface } from "./surface.js";

const AXIS: Rgb = [0, 0, 0];
const GRID: Rgb = [200, 200, 200];

export interface PanelBox {
  x: number;
  y: number;
  w: number;
  h: number;
}

export function niceTicks(lo: number, hi: number, target = 5): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step0 = span / target;
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  let step = mag;
  for (const m of [1, 2, 2.5, 5, 10]) {
    if (step0 <= m * mag) {
      step = m * mag;
      break;
    }
  }
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + 1e-12 * span; v += step) {
    ticks.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return ticks;
}

export function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1000 || a < 0.01) return v.toExponential(0).replace("+", "");
  return String(Number(v.toPrecision(3)));
}

export class Panel {
  constructor(
    readonly surf: Surface,
    readonly box: PanelBox,
    readonly xlim: [number, number],
    readonly ylim: [number, number],
  ) {}

  px(x: number): number {
    return this.box.x + ((x - this.xlim[0]) / (this.xlim[1] - this.xlim[0])) * this.box.w;
  }

  py(y: number): number {
    return this.box.y + this.box.h - ((y - this.ylim[0]) / (this.ylim[1] - this.ylim[0])) * this.box.h;
  }

  frame() {
    const { x, y, w, h } = this.box;
    this.surf.line(x, y, x + w, y, AXIS);
    this.surf.line(x, y + h, x + w, y + h, AXIS);
    this.surf.line(x, y, x, y + h, AXIS);
    this.surf.line(x + w, y, x + w, y + h, AXIS);
  }

  xAxis(label: string, ticks?: number[]) {
    const tk = ticks ?? niceTicks(this.xlim[0], this.xlim[1]);
    for (const v of tk) {
      if (v < this.xlim[0] - 1e-12 || v > this.xlim[1] + 1e-12) continue;
      const px = this.px(v);
      this.surf.line(px, this.box.y + this.box.h, px, this.box.y + this.box.h + 4, AXIS);
      this.surf.text(fmtTick(v), px, this.box.y + this.box.h + 7, { anchor: "middle" });
    }
    this.surf.text(label, this.box.x + this.box.w / 2, this.box.y + this.box.h + 20, {
      anchor: "middle",
    });
  }

  yAxis(label: string, ticks?: number[]) {
    const tk = ticks ?? niceTicks(this.ylim[0], this.ylim[1]);
    for (const v of tk) {
      if (v < this.ylim[0] - 1e-12 || v > this.ylim[1] + 1e-12) continue;
      const py = this.py(v);
      this.surf.line(this.box.x - 4, py, this.box.x, py, AXIS);
      this.surf.text(fmtTick(v), this.box.x - 7, py - 3, { anchor: "end" });
    }
    this.surf.text(label, this.box.x - 38, this.box.y + this.box.h / 2, {
      anchor: "middle",
      rotate: true,
    });
  }

  title(s: string) {
    this.surf.text(s, this.box.x + this.box.w / 2, this.box.y - 12, { anchor: "middle" });
  }

  /** Heatmap over the panel extent; values[row][col], rows along y (first row = ylim[0]). */
  heatmap(values: number[][], mode: "diverging" | "sequential", lo?: number, hi?: number): { lo: number; hi: number } {
    const rows = values.length;
    const cols = values[0].length;
    const rgbBuf = new Uint8Array(rows * cols * 3);
    let range: { lo: number; hi: number };
    if (mode === "diverging") {
      const limit = hi ?? symmetricLimit(values);
      range = { lo: -limit, hi: limit };
      for (let r = 0; r < rows; r++) {
        for (let c = 0; c < cols; c++) {
          const col = diverging(values[r][c], limit);
          const k = ((rows - 1 - r) * cols + c) * 3; // row 0 of data at the bottom
          rgbBuf[k] = col[0];
          rgbBuf[k + 1] = col[1];
          rgbBuf[k + 2] = col[2];
        }
      }
    } else {
      let vlo = lo ?? Infinity;
      let vhi = hi ?? -Infinity;
      if (lo === undefined || hi === undefined) {
        for (const row of values) for (const v of row) {
          vlo = Math.min(vlo, v);
          vhi = Math.max(vhi, v);
        }
      }
      range = { lo: vlo, hi: vhi };
      for (let r = 0; r < rows; r++) {
        for (let c = 0; c < cols; c++) {
          const col = sequential(values[r][c], vlo, vhi);
          const k = ((rows - 1 - r) * cols + c) * 3;
          rgbBuf[k] = col[0];
          rgbBuf[k + 1] = col[1];
          rgbBuf[k + 2] = col[2];
        }
      }
    }
    const img: RasterImage = { width: cols, height: rows, rgb: rgbBuf };
    this.surf.blit(img, this.box.x, this.box.y, this.box.w, this.box.h);
    return range;
  }

  plot(xs: number[], ys: number[], color: Rgb, width = 1, dash?: number[]) {
    for (let i = 1; i < xs.length; i++) {
      if (!Number.isFinite(ys[i - 1]) || !Number.isFinite(ys[i])) continue;
      this.surf.line(this.px(xs[i - 1]), this.py(ys[i - 1]), this.px(xs[i]), this.py(ys[i]), color, width, dash);
    }
  }

  hline(y: number, color: Rgb = GRID, dash: number[] = [4, 3]) {
    this.surf.line(this.box.x, this.py(y), this.box.x + this.box.w, this.py(y), color, 1, dash);
  }

  legend(entries: { label: string; color: Rgb; dash?: number[] }[]) {
    let y = this.box.y + 6;
    for (const e of entries) {
      const x0 = this.box.x + this.box.w - 86;
      this.surf.line(x0, y + 3, x0 + 16, y + 3, e.color, 2, e.dash);
      this.surf.text(e.label, x0 + 20, y, {});
      y += 12;
    }
  }
}

/** Horizontal colorbar under a panel. */
export function colorbar(
  surf: Surface,
  box: PanelBox,
  mode: "diverging" | "sequential",
  lo: number,
  hi: number,
  label: string,
) {
  const n = 128;
  const rgbBuf = new Uint8Array(n * 3);
  for (let i = 0; i < n; i++) {
    const v = lo + ((hi - lo) * i) / (n - 1);
    const col = mode === "diverging" ? diverging(v, Math.max(Math.abs(lo), Math.abs(hi))) : sequential(v, lo, hi);
    rgbBuf[i * 3] = col[0];
    rgbBuf[i * 3 + 1] = col[1];
    rgbBuf[i * 3 + 2] = col[2];
  }
  surf.blit({ width: n, height: 1, rgb: rgbBuf }, box.x, box.y, box.w, box.h);
  surf.line(box.x, box.y, box.x + box.w, box.y, AXIS);
  surf.line(box.x, box.y + box.h, box.x + box.w, box.y + box.h, AXIS);
  surf.line(box.x, box.y, box.x, box.y + box.h, AXIS);
  surf.line(box.x + box.w, box.y, box.x + box.w, box.y + box.h, AXIS);
  surf.text(fmtTick(lo), box.x, box.y + box.h + 3, { anchor: "start" });
  surf.text(fmtTick(hi), box.x + box.w, box.y + box.h + 3, { anchor: "end" });
  surf.text(label, box.x + box.w / 2, box.y + box.h + 3, { anchor: "middle" });
}
