/** Perceptually-uniform colormap for the field heatmaps (brighter = higher). */

export type Rgb = [number, number, number];

const VIRIDIS_ANCHORS: Rgb[] = [
  [68, 1, 84],
  [72, 40, 120],
  [62, 74, 137],
  [49, 104, 142],
  [38, 130, 142],
  [31, 158, 137],
  [53, 183, 121],
  [110, 206, 88],
  [181, 222, 43],
  [220, 227, 25],
  [253, 231, 37],
];

export function viridis(t: number): Rgb {
  const clamped = Math.min(1, Math.max(0, t));
  const pos = clamped * (VIRIDIS_ANCHORS.length - 1);
  const i = Math.min(VIRIDIS_ANCHORS.length - 2, Math.floor(pos));
  const frac = pos - i;
  const a = VIRIDIS_ANCHORS[i];
  const b = VIRIDIS_ANCHORS[i + 1];
  return [
    Math.round(a[0] + frac * (b[0] - a[0])),
    Math.round(a[1] + frac * (b[1] - a[1])),
    Math.round(a[2] + frac * (b[2] - a[2])),
  ];
}

export function rgbCss([r, g, b]: Rgb): string {
  return `rgb(${r},${g},${b})`;
}

export function parseColor(css: string): Rgb {
  const hex = css.match(/^#([0-9a-f]{6})$/i);
  if (hex) {
    const v = parseInt(hex[1], 16);
    return [(v >> 16) & 0xff, (v >> 8) & 0xff, v & 0xff];
  }
  const rgb = css.match(/^rgb\((\d+),(\d+),(\d+)\)$/);
  if (rgb) {
    return [Number(rgb[1]), Number(rgb[2]), Number(rgb[3])];
  }
  const named: Record<string, Rgb> = {
    black: [0, 0, 0],
    white: [255, 255, 255],
    none: [255, 255, 255],
  };
  if (css in named) return named[css];
  throw new Error(`unsupported color: ${css}`);
}
