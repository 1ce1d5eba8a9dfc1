// Chart rendering from recorded API data: the dashboard computes nothing,
// it plots server numbers verbatim.

import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { lineChart, placeholder, trendChart } from "../src/charts.js";
import type { StreamChunk, TrendResponse } from "../src/types.js";

const trend: TrendResponse = JSON.parse(
  readFileSync(new URL("../fixtures/trend_fixture.json", import.meta.url), "utf-8"),
);
const recorded = JSON.parse(
  readFileSync(new URL("../fixtures/stream_session.json", import.meta.url), "utf-8"),
) as { batch: StreamChunk };

describe("trend chart", () => {
  it("plots the 3-session fixture chronologically", () => {
    expect(trend.points).toHaveLength(3);
    const dates = trend.points.map((p) => p.started_at);
    expect([...dates].sort()).toEqual(dates);
    const svg = trendChart(trend.points, trend.metric);
    expect(svg).toContain("<svg");
    expect(svg).toContain(`Trend: ${trend.metric}`);
    for (const p of trend.points) {
      expect(svg).toContain(p.started_at);
      expect(svg).toContain(String(p.value));
    }
    // descending latency means the constructed improvement is visible
    const values = trend.points.map((p) => p.value);
    expect(values[0]).toBeGreaterThan(values[1]);
    expect(values[1]).toBeGreaterThan(values[2]);
  });

  it("renders a placeholder for an empty history", () => {
    const svg = trendChart([], "latency_mean_s");
    expect(svg).toContain("no sessions");
  });
});

describe("precision line chart", () => {
  it("renders one polyline per eye with every recorded point", () => {
    const records = recorded.batch.records;
    const svg = lineChart(
      records.map((r) => r.t),
      {
        "left eye": records.map((r) => r.error_left),
        "right eye": records.map((r) => r.error_right),
      },
      { title: "Focus precision", xLabel: "time (s)", yLabel: "error (deg)" },
    );
    const polylines = svg.match(/<polyline /g) ?? [];
    expect(polylines).toHaveLength(2);
    expect(svg).toContain("left eye");
    expect(svg).toContain("right eye");
    const points = svg.match(/points="([^"]+)"/)![1].trim().split(" ");
    expect(points).toHaveLength(records.length);
  });

  it("flat zero series stays on the baseline", () => {
    const svg = lineChart([0, 1, 2], { flat: [0, 0, 0] }, { title: "flat" });
    const points = svg.match(/points="([^"]+)"/)![1].trim().split(" ");
    const ys = new Set(points.map((p) => p.split(",")[1]));
    expect(ys.size).toBe(1);
  });

  it("empty series renders the placeholder state", () => {
    expect(lineChart([], {}, { title: "empty" })).toContain("no data yet");
    expect(placeholder("t", "m")).toContain("m");
  });
});
