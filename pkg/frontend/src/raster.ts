/** Software rasterizer for the figure display list. */

import { parseColor, Rgb } from "./color.js";
import { DrawOp, Point, Scene } from "./draw.js";
import { GLYPH_HEIGHT, GLYPH_WIDTH, glyphFor } from "./font.js";
import { encodePng } from "./png.js";

export class Canvas {
  readonly width: number;
  readonly height: number;
  readonly pixels: Uint8Array;

  constructor(width: number, height: number) {
    this.width = Math.round(width);
    this.height = Math.round(height);
    this.pixels = new Uint8Array(this.width * this.height * 4);
    this.clear([255, 255, 255]);
  }

  clear(color: Rgb): void {
    for (let i = 0; i < this.pixels.length; i += 4) {
      this.pixels[i] = color[0];
      this.pixels[i + 1] = color[1];
      this.pixels[i + 2] = color[2];
      this.pixels[i + 3] = 255;
    }
  }

  blend(x: number, y: number, color: Rgb, alpha: number): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height || alpha <= 0) return;
    const i = (y * this.width + x) * 4;
    this.pixels[i] = Math.round(color[0] * alpha + this.pixels[i] * (1 - alpha));
    this.pixels[i + 1] = Math.round(color[1] * alpha + this.pixels[i + 1] * (1 - alpha));
    this.pixels[i + 2] = Math.round(color[2] * alpha + this.pixels[i + 2] * (1 - alpha));
    this.pixels[i + 3] = 255;
  }

  fillRect(x: number, y: number, w: number, h: number, color: Rgb, alpha = 1): void {
    const x0 = Math.max(0, Math.round(x));
    const y0 = Math.max(0, Math.round(y));
    const x1 = Math.min(this.width, Math.round(x + w));
    const y1 = Math.min(this.height, Math.round(y + h));
    for (let yy = y0; yy < y1; yy++) {
      for (let xx = x0; xx < x1; xx++) {
        this.blend(xx, yy, color, alpha);
      }
    }
  }

  line(x1: number, y1: number, x2: number, y2: number, color: Rgb, width = 1, alpha = 1): void {
    const steps = Math.max(1, Math.ceil(Math.hypot(x2 - x1, y2 - y1) * 2));
    const radius = Math.max(0, (width - 1) / 2);
    for (let s = 0; s <= steps; s++) {
      const t = s / steps;
      const cx = x1 + (x2 - x1) * t;
      const cy = y1 + (y2 - y1) * t;
      if (radius < 0.5) {
        this.blend(Math.round(cx), Math.round(cy), color, alpha);
      } else {
        for (let dy = -Math.ceil(radius); dy <= Math.ceil(radius); dy++) {
          for (let dx = -Math.ceil(radius); dx <= Math.ceil(radius); dx++) {
            if (dx * dx + dy * dy <= radius * radius + 0.25) {
              this.blend(Math.round(cx) + dx, Math.round(cy) + dy, color, alpha);
            }
          }
        }
      }
    }
  }

  polyline(points: Point[], color: Rgb, width = 1, dash?: number[], alpha = 1): void {
    if (!dash) {
      for (let i = 1; i < points.length; i++) {
        this.line(points[i - 1][0], points[i - 1][1], points[i][0], points[i][1], color, width, alpha);
      }
      return;
    }
    // dashed: walk the path accumulating arc length against the dash pattern
    const period = dash.reduce((a, b) => a + b, 0);
    let travelled = 0;
    for (let i = 1; i < points.length; i++) {
      const [ax, ay] = points[i - 1];
      const [bx, by] = points[i];
      const segment = Math.hypot(bx - ax, by - ay);
      const pieces = Math.max(1, Math.ceil(segment));
      for (let p = 0; p < pieces; p++) {
        const t0 = p / pieces;
        const t1 = (p + 1) / pieces;
        const phase = (travelled + segment * t0) % period;
        if (phase < dash[0]) {
          this.line(
            ax + (bx - ax) * t0, ay + (by - ay) * t0,
            ax + (bx - ax) * t1, ay + (by - ay) * t1,
            color, width, alpha,
          );
        }
      }
      travelled += segment;
    }
  }

  fillPolygon(points: Point[], color: Rgb, alpha = 1): void {
    if (points.length < 3) return;
    const ys = points.map((p) => p[1]);
    const y0 = Math.max(0, Math.floor(Math.min(...ys)));
    const y1 = Math.min(this.height - 1, Math.ceil(Math.max(...ys)));
    for (let y = y0; y <= y1; y++) {
      const scan = y + 0.5;
      const crossings: number[] = [];
      for (let i = 0; i < points.length; i++) {
        const [ax, ay] = points[i];
        const [bx, by] = points[(i + 1) % points.length];
        if (ay <= scan !== by <= scan) {
          crossings.push(ax + ((scan - ay) / (by - ay)) * (bx - ax));
        }
      }
      crossings.sort((a, b) => a - b);
      for (let c = 0; c + 1 < crossings.length; c += 2) {
        const xa = Math.max(0, Math.round(crossings[c]));
        const xb = Math.min(this.width - 1, Math.round(crossings[c + 1]));
        for (let x = xa; x <= xb; x++) {
          this.blend(x, y, color, alpha);
        }
      }
    }
  }

  disc(cx: number, cy: number, r: number, color: Rgb): void {
    for (let dy = -Math.ceil(r); dy <= Math.ceil(r); dy++) {
      for (let dx = -Math.ceil(r); dx <= Math.ceil(r); dx++) {
        if (dx * dx + dy * dy <= r * r + 0.25) {
          this.blend(Math.round(cx) + dx, Math.round(cy) + dy, color, 1);
        }
      }
    }
  }

  text(
    x: number,
    y: number,
    content: string,
    size: number,
    color: Rgb,
    anchor: "start" | "middle" | "end",
    rotate = false,
  ): void {
    const scale = Math.max(1, Math.round(size / GLYPH_HEIGHT));
    const advance = (GLYPH_WIDTH + 1) * scale;
    const total = content.length * advance - scale;
    // (x, y) is the text baseline, matching the SVG convention
    let offset = 0;
    if (anchor === "middle") offset = -total / 2;
    if (anchor === "end") offset = -total;
    for (let c = 0; c < content.length; c++) {
      const glyph = glyphFor(content[c]);
      for (let row = 0; row < GLYPH_HEIGHT; row++) {
        for (let col = 0; col < GLYPH_WIDTH; col++) {
          if ((glyph[row] >> (GLYPH_WIDTH - 1 - col)) & 1) {
            for (let sy = 0; sy < scale; sy++) {
              for (let sx = 0; sx < scale; sx++) {
                const gx = offset + c * advance + col * scale + sx;
                const gy = (row - GLYPH_HEIGHT) * scale + sy;
                const px = rotate ? Math.round(x + gy) : Math.round(x + gx);
                const py = rotate ? Math.round(y - gx) : Math.round(y + gy);
                this.blend(px, py, color, 1);
              }
            }
          }
        }
      }
    }
  }
}

export function renderSceneToPng(scene: Scene): Buffer {
  const canvas = new Canvas(scene.width, scene.height);
  for (const op of scene.ops) {
    switch (op.op) {
      case "rect":
        canvas.fillRect(op.x, op.y, op.w, op.h, parseColor(op.fill), op.opacity ?? 1);
        break;
      case "line":
        canvas.line(op.x1, op.y1, op.x2, op.y2, parseColor(op.stroke), op.width);
        break;
      case "polyline":
        canvas.polyline(op.points, parseColor(op.stroke), op.width, op.dash, op.opacity ?? 1);
        break;
      case "polygon":
        canvas.fillPolygon(op.points, parseColor(op.fill), op.opacity ?? 1);
        break;
      case "circle":
        canvas.disc(op.cx, op.cy, op.r, parseColor(op.fill));
        break;
      case "cross": {
        const color = parseColor(op.stroke);
        canvas.line(op.cx - op.size, op.cy - op.size, op.cx + op.size, op.cy + op.size, color, op.width);
        canvas.line(op.cx - op.size, op.cy + op.size, op.cx + op.size, op.cy - op.size, color, op.width);
        break;
      }
      case "text":
        canvas.text(op.x, op.y, op.text, op.size, parseColor(op.fill), op.anchor, op.rotate ?? false);
        break;
    }
  }
  return encodePng(canvas.width, canvas.height, canvas.pixels);
}
