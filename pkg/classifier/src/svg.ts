/** Minimal SVG line charts for training curves (no DOM dependency). */

export interface Series {
  label: string;
  values: number[];
  color: string;
}

const WIDTH = 520;
const HEIGHT = 320;
const MARGIN = { left: 52, right: 12, top: 28, bottom: 34 };

export function lineChartSvg(title: string, xLabel: string, series: Series[]): string {
  const innerW = WIDTH - MARGIN.left - MARGIN.right;
  const innerH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const all = series.flatMap((s) => s.values).filter((v) => Number.isFinite(v));
  const n = Math.max(...series.map((s) => s.values.length), 2);
  let lo = Math.min(...all, 0);
  let hi = Math.max(...all, 1e-9);
  if (hi === lo) hi = lo + 1;

  const px = (i: number) => MARGIN.left + (innerW * i) / (n - 1);
  const py = (v: number) => MARGIN.top + innerH * (1 - (v - lo) / (hi - lo));

  const polylines = series
    .map((s) => {
      const pts = s.values.map((v, i) => `${px(i).toFixed(1)},${py(v).toFixed(1)}`).join(" ");
      return `<polyline fill="none" stroke="${s.color}" stroke-width="2" points="${pts}"/>`;
    })
    .join("\n  ");
  const legend = series
    .map(
      (s, k) =>
        `<text x="${MARGIN.left + 130 * k}" y="${HEIGHT - 8}" fill="${s.color}" font-size="12">${s.label}</text>`,
    )
    .join("\n  ");
  const yTicks = [lo, (lo + hi) / 2, hi]
    .map((v) => {
      const y = py(v).toFixed(1);
      return (
        `<line x1="${MARGIN.left - 4}" y1="${y}" x2="${WIDTH - MARGIN.right}" y2="${y}" stroke="#ddd"/>` +
        `<text x="4" y="${y}" font-size="10" fill="#444">${v.toPrecision(3)}</text>`
      );
    })
    .join("\n  ");

  return `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}">
  <rect width="100%" height="100%" fill="white"/>
  <text x="${WIDTH / 2}" y="18" text-anchor="middle" font-size="14">${title}</text>
  ${yTicks}
  ${polylines}
  <text x="${WIDTH / 2}" y="${HEIGHT - 20}" text-anchor="middle" font-size="11" fill="#444">${xLabel}</text>
  ${legend}
</svg>
`;
}
