// Best-so-far line chart as a bare SVG polyline. Values come straight from
// /history; nothing is recomputed here.

export interface BestPoint {
  step: number;
  best: number;
}

export const CHART_WIDTH = 360;
export const CHART_HEIGHT = 150;
const PAD = 14;

export function polylinePoints(
  points: BestPoint[],
  width = CHART_WIDTH,
  height = CHART_HEIGHT,
): string {
  const usable = points.filter((p) => Number.isFinite(p.best));
  if (usable.length === 0) return "";
  const steps = usable.map((p) => p.step);
  const bests = usable.map((p) => p.best);
  const sLo = Math.min(...steps);
  const sHi = Math.max(...steps);
  const bLo = Math.min(...bests);
  const bHi = Math.max(...bests);
  const sSpan = sHi - sLo || 1;
  const bSpan = bHi - bLo || 1;
  return usable
    .map((p) => {
      const x = PAD + ((p.step - sLo) / sSpan) * (width - 2 * PAD);
      const y = height - PAD - ((p.best - bLo) / bSpan) * (height - 2 * PAD);
      return `${round3(x)},${round3(y)}`;
    })
    .join(" ");
}

function round3(value: number): number {
  return Math.round(value * 1000) / 1000;
}

export function renderChart(svg: SVGSVGElement, points: BestPoint[]): void {
  svg.setAttribute("viewBox", `0 0 ${CHART_WIDTH} ${CHART_HEIGHT}`);
  const usable = points.filter((p) => Number.isFinite(p.best));
  if (usable.length === 0) {
    svg.innerHTML = `<text x="${CHART_WIDTH / 2}" y="${CHART_HEIGHT / 2}" class="chart-empty" text-anchor="middle">no history yet</text>`;
    return;
  }
  const bests = usable.map((p) => p.best);
  const lo = Math.min(...bests);
  const hi = Math.max(...bests);
  const line = polylinePoints(usable);
  svg.innerHTML = `
    <rect x="0.5" y="0.5" width="${CHART_WIDTH - 1}" height="${CHART_HEIGHT - 1}" class="chart-frame"/>
    <polyline points="${line}" class="chart-line" fill="none"/>
    <text x="4" y="12" class="chart-label">${formatTick(hi)}</text>
    <text x="4" y="${CHART_HEIGHT - 4}" class="chart-label">${formatTick(lo)}</text>
  `;
}

function formatTick(value: number): string {
  if (value === 0) return "0";
  const magnitude = Math.abs(value);
  if (magnitude >= 1e4 || magnitude < 1e-3) return value.toExponential(2);
  return String(Math.round(value * 1e4) / 1e4);
}
