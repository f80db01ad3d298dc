/** Cumulative cost-change chart over swap steps, as an SVG polyline. */

export interface ChartSpec {
  width: number;
  height: number;
  pad: number;
}

export function chartPoints(
  series: number[],
  spec: ChartSpec,
): { x: number; y: number }[] {
  if (series.length === 0) return [];
  const lo = Math.min(...series, 0);
  const hi = Math.max(...series, 0);
  const span = Math.max(hi - lo, 1e-12);
  const stepX =
    series.length > 1 ? (spec.width - 2 * spec.pad) / (series.length - 1) : 0;
  return series.map((v, i) => ({
    x: spec.pad + i * stepX,
    y: spec.pad + ((hi - v) / span) * (spec.height - 2 * spec.pad),
  }));
}

export function chartSvg(series: number[], spec: ChartSpec): string {
  const pts = chartPoints(series, spec);
  const path = pts.map((p) => `${p.x.toFixed(1)},${p.y.toFixed(1)}`).join(" ");
  // dashed zero line on the same scale as the series
  const lo = Math.min(...series, 0);
  const hi = Math.max(...series, 0);
  const span = Math.max(hi - lo, 1e-12);
  const y0 = spec.pad + (hi / span) * (spec.height - 2 * spec.pad);
  const baseline =
    pts.length > 0
      ? `<line x1="${spec.pad}" y1="${y0.toFixed(1)}" x2="${spec.width - spec.pad}" ` +
        `y2="${y0.toFixed(1)}" stroke="#999" stroke-dasharray="4 3"/>`
      : "";
  return (
    `<svg viewBox="0 0 ${spec.width} ${spec.height}" xmlns="http://www.w3.org/2000/svg">` +
    baseline +
    `<polyline points="${path}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>` +
    "</svg>"
  );
}
