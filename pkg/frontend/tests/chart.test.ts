import { describe, expect, test } from "vitest";
import { polylinePoints, renderChart } from "../src/chart.js";

function svg(): SVGSVGElement {
  return document.createElementNS("http://www.w3.org/2000/svg", "svg");
}

describe("polylinePoints", () => {
  test("maps steps and bests linearly into the padded frame", () => {
    const line = polylinePoints([
      { step: 0, best: 4 },
      { step: 1, best: 2 },
      { step: 2, best: 2 },
    ]);
    expect(line).toBe("14,14 180,136 346,136");
  });

  test("a single step sits at the frame corner instead of dividing by zero", () => {
    expect(polylinePoints([{ step: 3, best: 5 }])).toBe("14,136");
  });

  test("non-finite bests are dropped before scaling", () => {
    const line = polylinePoints([
      { step: 0, best: Number.POSITIVE_INFINITY },
      { step: 1, best: 3 },
      { step: 2, best: 1 },
    ]);
    expect(line).toBe("14,14 346,136");
  });

  test("no finite data gives an empty line", () => {
    expect(polylinePoints([])).toBe("");
    expect(polylinePoints([{ step: 0, best: Number.NaN }])).toBe("");
  });
});

describe("renderChart", () => {
  test("renders a polyline and range labels from the given bests", () => {
    const el = svg();
    renderChart(el, [
      { step: 0, best: 4 },
      { step: 1, best: 2 },
    ]);
    expect(el.innerHTML).toContain('points="14,14 346,136"');
    expect(el.innerHTML).toContain(">4<");
    expect(el.innerHTML).toContain(">2<");
  });

  test("renders a placeholder when there is nothing to plot", () => {
    const el = svg();
    renderChart(el, []);
    expect(el.innerHTML).toContain("no history yet");
  });
});
