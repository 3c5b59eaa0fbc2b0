/**
 * Drawing surfaces: a raster backend serialized as PNG and a vector backend
 * serialized as SVG. Both expose the same primitive set so figure layouts
 * are written once. All outputs are deterministic.
 */

import { FONT, GLYPH_H, GLYPH_W, textWidth } from "./font5x7.js";
import { encodePng } from "./png.js";
import type { Rgb } from "./colormap.js";

export interface RasterImage {
  width: number;
  height: number;
  rgb: Uint8Array;
}

export interface TextOpts {
  scale?: number;
  color?: Rgb;
  anchor?: "start" | "middle" | "end";
  rotate?: boolean; // -90 degrees (vertical axis labels)
}

export interface Surface {
  readonly width: number;
  readonly height: number;
  fillRect(x: number, y: number, w: number, h: number, color: Rgb): void;
  blit(img: RasterImage, x: number, y: number, w: number, h: number): void;
  line(x1: number, y1: number, x2: number, y2: number, color: Rgb, width?: number, dash?: number[]): void;
  text(s: string, x: number, y: number, opts?: TextOpts): void;
  toBytes(): Buffer;
}

const BLACK: Rgb = [0, 0, 0];

export class RasterSurface implements Surface {
  readonly width: number;
  readonly height: number;
  private buf: Uint8Array;

  constructor(width: number, height: number, background: Rgb = [255, 255, 255]) {
    this.width = width;
    this.height = height;
    this.buf = new Uint8Array(width * height * 3);
    this.fillRect(0, 0, width, height, background);
  }

  private set(x: number, y: number, c: Rgb) {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = (y * this.width + x) * 3;
    this.buf[i] = c[0];
    this.buf[i + 1] = c[1];
    this.buf[i + 2] = c[2];
  }

  fillRect(x: number, y: number, w: number, h: number, color: Rgb) {
    const x0 = Math.round(x);
    const y0 = Math.round(y);
    for (let j = 0; j < Math.round(h); j++) {
      for (let i = 0; i < Math.round(w); i++) {
        this.set(x0 + i, y0 + j, color);
      }
    }
  }

  blit(img: RasterImage, x: number, y: number, w: number, h: number) {
    const x0 = Math.round(x);
    const y0 = Math.round(y);
    const wi = Math.round(w);
    const hi = Math.round(h);
    for (let j = 0; j < hi; j++) {
      const sy = Math.min(img.height - 1, Math.floor((j / hi) * img.height));
      for (let i = 0; i < wi; i++) {
        const sx = Math.min(img.width - 1, Math.floor((i / wi) * img.width));
        const k = (sy * img.width + sx) * 3;
        this.set(x0 + i, y0 + j, [img.rgb[k], img.rgb[k + 1], img.rgb[k + 2]]);
      }
    }
  }

  line(x1: number, y1: number, x2: number, y2: number, color: Rgb, width = 1, dash?: number[]) {
    const len = Math.hypot(x2 - x1, y2 - y1);
    const steps = Math.max(1, Math.ceil(len * 4));
    const half = Math.max(0, Math.floor(width / 2));
    const period = dash ? dash.reduce((a, b) => a + b, 0) : 0;
    for (let s = 0; s <= steps; s++) {
      const t = s / steps;
      if (dash && period > 0) {
        const pos = (t * len) % period;
        let acc = 0;
        let on = true;
        for (const seg of dash) {
          acc += seg;
          if (pos < acc) break;
          on = !on;
        }
        if (!on) continue;
      }
      const px = Math.round(x1 + (x2 - x1) * t);
      const py = Math.round(y1 + (y2 - y1) * t);
      for (let dy = -half; dy <= half; dy++) {
        for (let dx = -half; dx <= half; dx++) {
          this.set(px + dx, py + dy, color);
        }
      }
    }
  }

  text(s: string, x: number, y: number, opts: TextOpts = {}) {
    const scale = opts.scale ?? 1;
    const color = opts.color ?? BLACK;
    const w = textWidth(s, scale);
    let ox = Math.round(x);
    let oy = Math.round(y);
    if (!opts.rotate) {
      if (opts.anchor === "middle") ox -= Math.round(w / 2);
      if (opts.anchor === "end") ox -= w;
    } else {
      if (opts.anchor === "middle") oy += Math.round(w / 2);
      if (opts.anchor === "end") oy += w;
    }
    let advance = 0;
    for (const ch of s) {
      const glyph = FONT[ch] ?? FONT[" "];
      for (let col = 0; col < GLYPH_W; col++) {
        const bits = glyph[col];
        for (let row = 0; row < GLYPH_H; row++) {
          if ((bits >> row) & 1) {
            for (let sy = 0; sy < scale; sy++) {
              for (let sx = 0; sx < scale; sx++) {
                const gx = advance + col * scale + sx;
                const gy = row * scale + sy;
                if (!opts.rotate) {
                  this.set(ox + gx, oy + gy, color);
                } else {
                  this.set(ox + gy, oy - gx, color);
                }
              }
            }
          }
        }
      }
      advance += (GLYPH_W + 1) * scale;
    }
  }

  toBytes(): Buffer {
    return encodePng(this.width, this.height, this.buf);
  }
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function rgb(c: Rgb): string {
  return `rgb(${c[0]},${c[1]},${c[2]})`;
}

export class SvgSurface implements Surface {
  readonly width: number;
  readonly height: number;
  private parts: string[] = [];

  constructor(width: number, height: number, background: Rgb = [255, 255, 255]) {
    this.width = width;
    this.height = height;
    this.parts.push(
      `<rect x="0" y="0" width="${width}" height="${height}" fill="${rgb(background)}"/>`,
    );
  }

  fillRect(x: number, y: number, w: number, h: number, color: Rgb) {
    this.parts.push(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${rgb(color)}"/>`,
    );
  }

  blit(img: RasterImage, x: number, y: number, w: number, h: number) {
    const png = encodePng(img.width, img.height, img.rgb);
    this.parts.push(
      `<image x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" ` +
        `preserveAspectRatio="none" style="image-rendering:pixelated" ` +
        `href="data:image/png;base64,${png.toString("base64")}"/>`,
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, color: Rgb, width = 1, dash?: number[]) {
    const d = dash ? ` stroke-dasharray="${dash.join(",")}"` : "";
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ` +
        `stroke="${rgb(color)}" stroke-width="${width}"${d}/>`,
    );
  }

  text(s: string, x: number, y: number, opts: TextOpts = {}) {
    const scale = opts.scale ?? 1;
    const color = opts.color ?? BLACK;
    const size = 8 * scale;
    const anchor = { start: "start", middle: "middle", end: "end" }[opts.anchor ?? "start"];
    // the raster font draws from the glyph top; SVG text sits on the baseline
    const base = y + 7 * scale;
    const transform = opts.rotate ? ` transform="rotate(-90 ${fmt(x)} ${fmt(y)})"` : "";
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(base)}" font-family="monospace" font-size="${size}" ` +
        `fill="${rgb(color)}" text-anchor="${anchor}"${transform}>${esc(s)}</text>`,
    );
  }

  toBytes(): Buffer {
    const body = this.parts.join("\n ");
    return Buffer.from(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" ` +
        `viewBox="0 0 ${this.width} ${this.height}">\n ${body}\n</svg>\n`,
      "utf-8",
    );
  }
}

function fmt(x: number): string {
  return Number.isInteger(x) ? String(x) : x.toFixed(2);
}

export function makeSurface(format: "png" | "svg", width: number, height: number): Surface {
  return format === "png" ? new RasterSurface(width, height) : new SvgSurface(width, height);
}
