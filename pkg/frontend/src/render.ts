// Pure HTML builders for the single-decision screen. Returning strings keeps
// rendering testable without a browser; main.ts assigns them to innerHTML
// and wires the button handlers.

import { Geometry } from "./api.js";
import { SessionView } from "./session.js";

type Ring = Array<[number, number]>;

function polygonRings(geometry: Geometry): Ring[] {
  if (geometry.type === "Polygon") {
    return geometry.coordinates as Ring[];
  }
  if (geometry.type === "MultiPolygon") {
    return (geometry.coordinates as Ring[][]).flat();
  }
  return [];
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Render a ward boundary as an SVG outline, or "" for unusable geometry. */
export function geometryToSvg(geometry: Geometry | null | undefined): string {
  if (!geometry) return "";
  const rings = polygonRings(geometry).filter((ring) => ring.length >= 3);
  if (rings.length === 0) return "";
  const xs = rings.flat().map((p) => p[0]);
  const ys = rings.flat().map((p) => p[1]);
  const minX = Math.min(...xs);
  const maxX = Math.max(...xs);
  const minY = Math.min(...ys);
  const maxY = Math.max(...ys);
  const width = maxX - minX || 1;
  const height = maxY - minY || 1;
  const pad = 0.05 * Math.max(width, height);
  // SVG y grows downward; flip latitude so north stays up.
  const paths = rings
    .map((ring) => {
      const points = ring.map(
        ([x, y]) => `${(x - minX).toFixed(6)} ${(maxY - y).toFixed(6)}`,
      );
      return `M ${points.join(" L ")} Z`;
    })
    .join(" ");
  const viewBox = `${-pad} ${-pad} ${width + 2 * pad} ${height + 2 * pad}`;
  return (
    `<svg class="ward-outline" viewBox="${viewBox}" ` +
    `preserveAspectRatio="xMidYMid meet" role="img">` +
    `<path d="${paths}" fill="none" stroke="currentColor" ` +
    `stroke-width="${(0.01 * Math.max(width, height)).toFixed(6)}" /></svg>`
  );
}

/** One ward card: map outline when geometry exists, name-only otherwise. */
export function wardCard(
  label: string,
  geometry: Geometry | null | undefined,
  side: "left" | "right",
): string {
  const svg = geometryToSvg(geometry);
  const body = svg
    ? `<div class="card-map">${svg}</div>`
    : `<div class="card-name-only">(no map available)</div>`;
  return (
    `<div class="ward-card" data-side="${side}">` +
    `<h2 class="ward-name">${escapeHtml(label)}</h2>${body}</div>`
  );
}

export function counterText(view: SessionView): string {
  return `${view.comparisonsMade} of ${view.targetComparisons}`;
}

export function renderPairScreen(view: SessionView): string {
  if (!view.pair) {
    return `<p class="status">No pair available.</p>`;
  }
  const left = wardCard(
    view.pair.left,
    view.geometries.get(view.pair.left),
    "left",
  );
  const right = wardCard(
    view.pair.right,
    view.geometries.get(view.pair.right),
    "right",
  );
  const done =
    view.targetComparisons > 0 && view.comparisonsMade >= view.targetComparisons
      ? `<p class="complete">You have reached the target of ` +
        `${view.targetComparisons} comparisons. Thank you! You may stop ` +
        `here or keep going.</p>`
      : "";
  return (
    `<p class="counter">${counterText(view)}</p>${done}` +
    `<p class="question">In which ward is the problem more severe?</p>` +
    `<div class="pair">${left}${right}</div>` +
    `<div class="actions">` +
    `<button data-action="left" title="The left ward ranks higher">Left is higher</button>` +
    `<button data-action="tie" title="The two wards are about the same">Tie</button>` +
    `<button data-action="right" title="The right ward ranks higher">Right is higher</button>` +
    `<button data-action="skip" title="Not confident enough to judge this pair">Skip</button>` +
    `</div>`
  );
}
