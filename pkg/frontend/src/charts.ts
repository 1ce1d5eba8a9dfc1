// SVG line charts built from plain series, no chart library. Same series
// schema as the CLI's CSV/SVG export: a time axis plus named y-series.

export interface ChartOptions {
  title: string;
  xLabel?: string;
  yLabel?: string;
  width?: number;
  height?: number;
}

const COLORS = ["#c0392b", "#2471a3", "#1e8449", "#7d3c98"];
const ML = 60, MR = 20, MT = 30, MB = 45;

function ticks(lo: number, hi: number, n = 5): number[] {
  if (hi <= lo) {
    hi = lo + 1;
  }
  const step = (hi - lo) / n;
  return Array.from({ length: n + 1 }, (_, i) => lo + i * step);
}

function fmt(v: number): string {
  return Number(v.toPrecision(3)).toString();
}

export function lineChart(
  t: number[],
  series: Record<string, number[]>,
  options: ChartOptions,
): string {
  const names = Object.keys(series);
  if (t.length === 0 || names.length === 0) {
    return placeholder(options.title, "no data yet");
  }
  const width = options.width ?? 720;
  const height = options.height ?? 360;
  const plotW = width - ML - MR;
  const plotH = height - MT - MB;
  const x0 = Math.min(...t);
  const x1 = Math.max(...t, x0 + 1e-9);
  const all = names.flatMap((n) => series[n]);
  const y0 = Math.min(0, ...all);
  const y1 = Math.max(...all, y0 + 1e-9);
  const sx = (x: number) => ML + ((x - x0) / (x1 - x0)) * plotW;
  const sy = (y: number) => MT + plotH - ((y - y0) / (y1 - y0)) * plotH;

  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="sans-serif" font-size="11">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    `<text x="${width / 2}" y="18" text-anchor="middle" font-size="14">${options.title}</text>`,
  ];
  for (const xv of ticks(x0, x1)) {
    const px = sx(xv).toFixed(1);
    parts.push(`<line x1="${px}" y1="${MT}" x2="${px}" y2="${MT + plotH}" stroke="#eee"/>`);
    parts.push(
      `<text x="${px}" y="${MT + plotH + 14}" text-anchor="middle">${fmt(xv)}</text>`,
    );
  }
  for (const yv of ticks(y0, y1)) {
    const py = sy(yv).toFixed(1);
    parts.push(`<line x1="${ML}" y1="${py}" x2="${ML + plotW}" y2="${py}" stroke="#eee"/>`);
    parts.push(`<text x="${ML - 6}" y="${py}" text-anchor="end">${fmt(yv)}</text>`);
  }
  parts.push(
    `<rect x="${ML}" y="${MT}" width="${plotW}" height="${plotH}" fill="none" stroke="#888"/>`,
  );
  names.forEach((name, i) => {
    const color = COLORS[i % COLORS.length];
    const pts = t
      .map((x, k) => `${sx(x).toFixed(2)},${sy(series[name][k]).toFixed(2)}`)
      .join(" ");
    parts.push(
      `<polyline fill="none" stroke="${color}" stroke-width="1.2" points="${pts}"/>`,
    );
    parts.push(
      `<text x="${ML + plotW - 6}" y="${MT + 14 + 14 * i}" text-anchor="end" ` +
        `fill="${color}">${name}</text>`,
    );
  });
  if (options.xLabel) {
    parts.push(
      `<text x="${ML + plotW / 2}" y="${height - 10}" text-anchor="middle">${options.xLabel}</text>`,
    );
  }
  if (options.yLabel) {
    parts.push(
      `<text x="16" y="${MT + plotH / 2}" text-anchor="middle" ` +
        `transform="rotate(-90 16 ${MT + plotH / 2})">${options.yLabel}</text>`,
    );
  }
  parts.push("</svg>");
  return parts.join("\n");
}

/** Chronological scatter/line of one metric across sessions. */
export function trendChart(
  points: { started_at: string; value: number }[],
  metric: string,
): string {
  if (points.length === 0) {
    return placeholder(`Trend: ${metric}`, "no sessions with this metric");
  }
  const t = points.map((_, i) => i + 1); // session index; labels carry the dates
  const svg = lineChart(t, { [metric]: points.map((p) => p.value) }, {
    title: `Trend: ${metric}`,
    xLabel: "session (chronological)",
    yLabel: metric,
  });
  const markers = points
    .map((p, i) => `<!-- point ${i + 1}: ${p.started_at} = ${p.value} -->`)
    .join("\n");
  return svg.replace("</svg>", markers + "\n</svg>");
}

export function placeholder(title: string, message: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="720" height="120" font-family="sans-serif">` +
    `<rect width="720" height="120" fill="#fafafa" stroke="#ddd"/>` +
    `<text x="360" y="50" text-anchor="middle" font-size="14">${title}</text>` +
    `<text x="360" y="75" text-anchor="middle" fill="#777">${message}</text></svg>`
  );
}
