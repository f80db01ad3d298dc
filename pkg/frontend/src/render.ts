/** Scatter layers for the map view, computed as plain data so they can be
 * tested without a DOM. Regions are points sized by demand; facilities are
 * type-colored markers; each region links to its closest facility per type.
 *
 * Geographic instances fall back to the same lon/lat scatter: closest-
 * facility links come straight from the service's placements, and without
 * map tiles a projected scatter is the honest rendering.
 */

import type { InstanceDoc, SolutionPayload } from "./api.js";

export const TYPE_COLORS = [
  "#d62728",
  "#1f77b4",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
];

export interface PointLayer {
  kind: "regions";
  points: { node: number; x: number; y: number; radius: number }[];
}

export interface MarkerLayer {
  kind: "facilities";
  type: string;
  color: string;
  markers: { node: number; x: number; y: number; pinned: boolean }[];
}

export interface EdgeLayer {
  kind: "assignments";
  type: string;
  color: string;
  edges: { from: number; to: number; x1: number; y1: number; x2: number; y2: number }[];
}

export type Layer = PointLayer | MarkerLayer | EdgeLayer;

export interface Viewport {
  width: number;
  height: number;
  pad: number;
}

function scaler(doc: InstanceDoc, vp: Viewport) {
  const xs = doc.nodes.map((n) => n.x);
  const ys = doc.nodes.map((n) => n.y);
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  const [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  const sx = (vp.width - 2 * vp.pad) / Math.max(x1 - x0, 1e-12);
  const sy = (vp.height - 2 * vp.pad) / Math.max(y1 - y0, 1e-12);
  return (x: number, y: number): [number, number] => [
    vp.pad + (x - x0) * sx,
    // screen y grows downward
    vp.height - vp.pad - (y - y0) * sy,
  ];
}

function closestIndex(doc: InstanceDoc, node: number, placement: number[]): number {
  let best = placement[0]!;
  let bestDist = Infinity;
  const nx = doc.nodes[node]!.x;
  const ny = doc.nodes[node]!.y;
  for (const f of [...placement].sort((a, b) => a - b)) {
    const fx = doc.nodes[f]!.x;
    const fy = doc.nodes[f]!.y;
    const d = Math.hypot(nx - fx, ny - fy);
    if (d < bestDist) {
      bestDist = d;
      best = f;
    }
  }
  return best;
}

export function buildLayers(
  doc: InstanceDoc,
  solution: SolutionPayload | null,
  options: {
    viewport?: Viewport;
    hiddenTypes?: Set<string>;
    pinned?: Record<string, number[]>;
  } = {},
): Layer[] {
  const vp = options.viewport ?? { width: 640, height: 480, pad: 24 };
  const hidden = options.hiddenTypes ?? new Set<string>();
  const project = scaler(doc, vp);
  const types = Object.keys(doc.budgets);
  const demandMax = Math.max(
    ...types.map((k) => Math.max(...(doc.demands[k] ?? [0]))),
    1e-12,
  );

  const layers: Layer[] = [];
  const points = doc.nodes.map((n) => {
    const demand = types.reduce((acc, k) => acc + (doc.demands[k]?.[n.id] ?? 0), 0);
    const [x, y] = project(n.x, n.y);
    return {
      node: n.id,
      x,
      y,
      radius: 2 + 6 * Math.sqrt(demand / (types.length * demandMax)),
    };
  });
  layers.push({ kind: "regions", points });

  if (!solution) return layers;

  types.forEach((k, ti) => {
    if (hidden.has(k)) return;
    const placement = solution.type_placements[k] ?? [];
    if (placement.length === 0) return;
    const color = TYPE_COLORS[ti % TYPE_COLORS.length]!;
    const pinnedSet = new Set(options.pinned?.[k] ?? []);
    const edges = doc.nodes.map((n) => {
      const to = closestIndex(doc, n.id, placement);
      const [x1, y1] = project(n.x, n.y);
      const [x2, y2] = project(doc.nodes[to]!.x, doc.nodes[to]!.y);
      return { from: n.id, to, x1, y1, x2, y2 };
    });
    layers.push({ kind: "assignments", type: k, color, edges });
    layers.push({
      kind: "facilities",
      type: k,
      color,
      markers: placement.map((f) => {
        const [x, y] = project(doc.nodes[f]!.x, doc.nodes[f]!.y);
        return { node: f, x, y, pinned: pinnedSet.has(f) };
      }),
    });
  });
  return layers;
}

export function layersToSvg(layers: Layer[], vp: Viewport): string {
  const parts: string[] = [];
  for (const layer of layers) {
    if (layer.kind === "assignments") {
      for (const e of layer.edges) {
        parts.push(
          `<line x1="${e.x1.toFixed(1)}" y1="${e.y1.toFixed(1)}" ` +
            `x2="${e.x2.toFixed(1)}" y2="${e.y2.toFixed(1)}" ` +
            `stroke="${layer.color}" stroke-opacity="0.25" data-edge="${e.from}-${e.to}"/>`,
        );
      }
    }
  }
  for (const layer of layers) {
    if (layer.kind === "regions") {
      for (const p of layer.points) {
        parts.push(
          `<circle cx="${p.x.toFixed(1)}" cy="${p.y.toFixed(1)}" r="${p.radius.toFixed(1)}" ` +
            `fill="#555" fill-opacity="0.55" data-node="${p.node}"/>`,
        );
      }
    }
  }
  for (const layer of layers) {
    if (layer.kind === "facilities") {
      for (const m of layer.markers) {
        const ring = m.pinned ? ` stroke="#000" stroke-width="2"` : "";
        parts.push(
          `<rect x="${(m.x - 5).toFixed(1)}" y="${(m.y - 5).toFixed(1)}" width="10" height="10" ` +
            `fill="${layer.color}"${ring} data-facility="${layer.type}:${m.node}"/>`,
        );
      }
    }
  }
  return (
    `<svg viewBox="0 0 ${vp.width} ${vp.height}" xmlns="http://www.w3.org/2000/svg">` +
    parts.join("") +
    "</svg>"
  );
}
