import { describe, expect, it } from "vitest";

import { Geometry } from "../src/api.js";
import {
  counterText,
  geometryToSvg,
  renderPairScreen,
  wardCard,
} from "../src/render.js";
import { SessionView } from "../src/session.js";

const SQUARE: Geometry = {
  type: "Polygon",
  coordinates: [
    [
      [0, 0],
      [2, 0],
      [2, 1],
      [0, 1],
      [0, 0],
    ],
  ],
};

function view(overrides: Partial<SessionView> = {}): SessionView {
  return {
    studyId: "s1",
    judgeId: "j1",
    pair: { left: "Alpha", right: "Beta" },
    geometries: new Map(),
    comparisonsMade: 0,
    targetComparisons: 30,
    ...overrides,
  };
}

describe("geometry rendering", () => {
  it("renders a polygon as an svg outline path", () => {
    const svg = geometryToSvg(SQUARE);
    expect(svg).toContain("<svg");
    expect(svg).toContain("<path");
    expect(svg).toContain("Z");
  });

  it("renders every part of a multipolygon", () => {
    const multi: Geometry = {
      type: "MultiPolygon",
      coordinates: [SQUARE.coordinates, SQUARE.coordinates],
    };
    const svg = geometryToSvg(multi);
    expect(svg.match(/M /g)).toHaveLength(2);
  });

  it("degrades to empty output for missing or unusable geometry", () => {
    expect(geometryToSvg(null)).toBe("");
    expect(geometryToSvg(undefined)).toBe("");
    expect(geometryToSvg({ type: "Point", coordinates: [0, 0] })).toBe("");
    expect(
      geometryToSvg({ type: "Polygon", coordinates: [[[0, 0], [1, 1]]] }),
    ).toBe("");
  });
});

describe("ward cards", () => {
  it("shows a map card when geometry exists", () => {
    const html = wardCard("Alpha", SQUARE, "left");
    expect(html).toContain("Alpha");
    expect(html).toContain("<svg");
    expect(html).toContain('data-side="left"');
  });

  it("falls back to a name-only card without geometry", () => {
    const html = wardCard("Beta", null, "right");
    expect(html).toContain("Beta");
    expect(html).not.toContain("<svg");
    expect(html).toContain("card-name-only");
  });

  it("escapes ward names", () => {
    const html = wardCard('<b>"Ward"</b>', null, "left");
    expect(html).not.toContain("<b>");
    expect(html).toContain("&lt;b&gt;");
  });
});

describe("pair screen", () => {
  const ACTIONS = ["left", "right", "tie", "skip"];

  it("shows two map cards and four actions when both wards have geometry", () => {
    const geometries = new Map<string, Geometry | null>([
      ["Alpha", SQUARE],
      ["Beta", SQUARE],
    ]);
    const html = renderPairScreen(view({ geometries }));
    expect(html.match(/<svg/g)).toHaveLength(2);
    for (const action of ACTIONS) {
      expect(html).toContain(`data-action="${action}"`);
    }
  });

  it("shows two name cards and four actions without geometry", () => {
    const html = renderPairScreen(view());
    expect(html).not.toContain("<svg");
    expect(html.match(/card-name-only/g)).toHaveLength(2);
    for (const action of ACTIONS) {
      expect(html).toContain(`data-action="${action}"`);
    }
  });

  it("shows the counter as '12 of 30' after 12 submissions", () => {
    const v = view({ comparisonsMade: 12 });
    expect(counterText(v)).toBe("12 of 30");
    expect(renderPairScreen(v)).toContain("12 of 30");
  });

  it("shows a completion message at the target but keeps the actions", () => {
    const html = renderPairScreen(view({ comparisonsMade: 30 }));
    expect(html).toContain("reached the target");
    for (const action of ACTIONS) {
      expect(html).toContain(`data-action="${action}"`);
    }
  });

  it("never leaks aggregate results into the screen", () => {
    const html = renderPairScreen(view({ comparisonsMade: 5 }));
    expect(html).not.toMatch(/other judges|results|percent|%/i);
  });
});
