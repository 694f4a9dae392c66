/**
 * A figure is a flat display list in pixel coordinates; the SVG and PNG
 * backends consume the same ops, so the pair always shows the same scene.
 */

export type Point = [number, number];

export type DrawOp =
  | { op: "rect"; x: number; y: number; w: number; h: number; fill: string; opacity?: number }
  | { op: "line"; x1: number; y1: number; x2: number; y2: number; stroke: string; width: number }
  | { op: "polyline"; points: Point[]; stroke: string; width: number; dash?: number[]; opacity?: number }
  | { op: "polygon"; points: Point[]; fill: string; opacity?: number }
  | { op: "circle"; cx: number; cy: number; r: number; fill: string }
  | { op: "cross"; cx: number; cy: number; size: number; stroke: string; width: number }
  | {
      op: "text";
      x: number;
      y: number;
      text: string;
      size: number;
      fill: string;
      anchor: "start" | "middle" | "end";
      rotate?: boolean; // vertical axis label
    };

export interface Scene {
  width: number;
  height: number;
  ops: DrawOp[];
}

const fmt = (v: number): string => {
  const rounded = Math.round(v * 100) / 100;
  return Object.is(rounded, -0) ? "0" : String(rounded);
};

function escapeXml(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function sceneToSvg(scene: Scene): string {
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${scene.width}" height="${scene.height}" ` +
      `viewBox="0 0 ${scene.width} ${scene.height}" font-family="Helvetica, Arial, sans-serif">`,
  );
  parts.push(`<rect x="0" y="0" width="${scene.width}" height="${scene.height}" fill="white"/>`);
  for (const op of scene.ops) {
    switch (op.op) {
      case "rect":
        parts.push(
          `<rect x="${fmt(op.x)}" y="${fmt(op.y)}" width="${fmt(op.w)}" height="${fmt(op.h)}" ` +
            `fill="${op.fill}"${op.opacity !== undefined ? ` fill-opacity="${op.opacity}"` : ""}/>`,
        );
        break;
      case "line":
        parts.push(
          `<line x1="${fmt(op.x1)}" y1="${fmt(op.y1)}" x2="${fmt(op.x2)}" y2="${fmt(op.y2)}" ` +
            `stroke="${op.stroke}" stroke-width="${op.width}"/>`,
        );
        break;
      case "polyline": {
        const pts = op.points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
        parts.push(
          `<polyline points="${pts}" fill="none" stroke="${op.stroke}" stroke-width="${op.width}"` +
            (op.dash ? ` stroke-dasharray="${op.dash.join(" ")}"` : "") +
            (op.opacity !== undefined ? ` stroke-opacity="${op.opacity}"` : "") +
            `/>`,
        );
        break;
      }
      case "polygon": {
        const pts = op.points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
        parts.push(
          `<polygon points="${pts}" fill="${op.fill}" stroke="none"` +
            (op.opacity !== undefined ? ` fill-opacity="${op.opacity}"` : "") +
            `/>`,
        );
        break;
      }
      case "circle":
        parts.push(
          `<circle cx="${fmt(op.cx)}" cy="${fmt(op.cy)}" r="${fmt(op.r)}" fill="${op.fill}"/>`,
        );
        break;
      case "cross": {
        const s = op.size;
        parts.push(
          `<path d="M ${fmt(op.cx - s)} ${fmt(op.cy - s)} L ${fmt(op.cx + s)} ${fmt(op.cy + s)} ` +
            `M ${fmt(op.cx - s)} ${fmt(op.cy + s)} L ${fmt(op.cx + s)} ${fmt(op.cy - s)}" ` +
            `stroke="${op.stroke}" stroke-width="${op.width}" fill="none"/>`,
        );
        break;
      }
      case "text": {
        const transform = op.rotate ? ` transform="rotate(-90 ${fmt(op.x)} ${fmt(op.y)})"` : "";
        parts.push(
          `<text x="${fmt(op.x)}" y="${fmt(op.y)}" font-size="${op.size}" fill="${op.fill}" ` +
            `text-anchor="${op.anchor}"${transform}>${escapeXml(op.text)}</text>`,
        );
        break;
      }
    }
  }
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
