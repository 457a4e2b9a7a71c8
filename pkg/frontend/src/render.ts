/**
 * SVG figure rendering for the four harness plot families via echarts
 * server-side rendering. Given the same inputs the output is deterministic,
 * and every log-log panel carries its fitted slope as an annotation.
 */

import * as echarts from "echarts";

import { Table, numericColumn } from "./csv";
import { logLogSlope } from "./fit";

export type Family = "scaling" | "efficiency" | "accounting" | "trapping";

export const FAMILIES: Family[] = ["scaling", "efficiency", "accounting", "trapping"];

export interface RenderOptions {
  tauUs?: number;
  footer?: string;
  width?: number;
  height?: number;
}

export interface RenderResult {
  svg: string;
  annotations: Record<string, number>;
  warnings: string[];
}

const PALETTE = ["#2f6fb2", "#c44e52", "#55a868", "#8172b2", "#937860"];

function renderSvg(option: echarts.EChartsOption, width: number, height: number): string {
  const chart = echarts.init(null, undefined, {
    renderer: "svg",
    ssr: true,
    width,
    height,
  });
  chart.setOption(option);
  const svg = (chart as unknown as { renderToSVGString(): string }).renderToSVGString();
  chart.dispose();
  return canonicalizeClasses(svg);
}

/**
 * echarts numbers its SVG CSS classes and clip-path ids with a
 * process-global counter; rename them in order of first appearance so
 * identical inputs give identical bytes no matter how many charts were
 * rendered before.
 */
function canonicalizeClasses(svg: string): string {
  const seen = new Map<string, string>();
  return svg.replace(/zr\d+-c(?:ls-)?\d+/g, (token) => {
    if (!seen.has(token)) {
      seen.set(token, `zrx-${seen.size}`);
    }
    return seen.get(token)!;
  });
}

interface SeriesGroup {
  label: string;
  rows: Record<string, string>[];
}

/** Split sweep rows by control strength, keeping ladder order within each. */
function groupByOmega(table: Table): SeriesGroup[] {
  const groups = new Map<string, Record<string, string>[]>();
  for (const row of table.rows) {
    const key = row.omega_c ?? "";
    if (!groups.has(key)) {
      groups.set(key, []);
    }
    groups.get(key)!.push(row);
  }
  return [...groups.entries()].map(([key, rows]) => ({
    label: key === "" ? "control" : `Omega=${trimNumber(key)}`,
    rows,
  }));
}

function trimNumber(text: string): string {
  const value = Number(text);
  return Number.isFinite(value) ? value.toPrecision(4).replace(/\.?0+$/, "") : text;
}

function pairs(
  rows: Record<string, string>[],
  xName: string,
  yName: string,
): [number, number][] {
  const out: [number, number][] = [];
  for (const row of rows) {
    const x = Number(row[xName]);
    const y = Number(row[yName]);
    if (Number.isFinite(x) && Number.isFinite(y) && row[xName] !== "" && row[yName] !== "") {
      out.push([x, y]);
    }
  }
  return out;
}

function footerGraphic(footer: string | undefined): echarts.EChartsOption["graphic"] {
  if (!footer) {
    return [];
  }
  return [
    {
      type: "text",
      right: 8,
      bottom: 4,
      style: { text: footer, fontSize: 10, fill: "#888" },
    },
  ];
}

interface Panel {
  title: string;
  subtitle: string;
  xName: string;
  yName: string;
  xLog: boolean;
  yLog: boolean;
  series: { label: string; data: [number, number][]; dashed?: boolean }[];
}

/** Lay panels out on one row and render them as a single image. */
function panelOption(
  panels: Panel[],
  opts: RenderOptions,
): echarts.EChartsOption {
  const n = panels.length;
  const gridWidth = 100 / n;
  const grids: object[] = [];
  const xAxes: object[] = [];
  const yAxes: object[] = [];
  const series: object[] = [];
  const titles: object[] = [];
  const legendData: string[] = [];

  panels.forEach((panel, i) => {
    grids.push({
      left: `${gridWidth * i + 7}%`,
      width: `${gridWidth - 11}%`,
      top: 72,
      bottom: 56,
    });
    xAxes.push({
      gridIndex: i,
      type: panel.xLog ? "log" : "value",
      name: panel.xName,
      nameLocation: "middle",
      nameGap: 26,
    });
    yAxes.push({
      gridIndex: i,
      type: panel.yLog ? "log" : "value",
      name: panel.yName,
    });
    titles.push({
      text: panel.title,
      subtext: panel.subtitle,
      left: `${gridWidth * i + gridWidth / 2}%`,
      textAlign: "center",
      textStyle: { fontSize: 13 },
      subtextStyle: { fontSize: 11 },
    });
    panel.series.forEach((s, j) => {
      if (!legendData.includes(s.label)) {
        legendData.push(s.label);
      }
      series.push({
        name: s.label,
        type: "line",
        xAxisIndex: i,
        yAxisIndex: i,
        data: s.data,
        symbolSize: 6,
        lineStyle: { type: s.dashed ? "dashed" : "solid" },
        itemStyle: { color: PALETTE[j % PALETTE.length] },
        color: PALETTE[j % PALETTE.length],
      });
    });
  });

  return {
    animation: false,
    backgroundColor: "#ffffff",
    legend: { bottom: 22, data: legendData },
    grid: grids,
    xAxis: xAxes,
    yAxis: yAxes,
    series: series as echarts.EChartsOption["series"],
    title: titles,
    graphic: footerGraphic(opts.footer),
  };
}

function slopeText(slope: number): string {
  return `slope ${slope.toFixed(2)}`;
}

function renderScaling(sweep: Table, opts: RenderOptions): RenderResult {
  const groups = groupByOmega(sweep);
  const annotations: Record<string, number> = {};
  const warnings: string[] = [];
  const quantities: [string, string][] = [
    ["gamma_eit_fwhm", "EIT linewidth"],
    ["delta_t_abs", "pulse delay"],
    ["t_opt", "optimal pulse width"],
  ];
  const panels: Panel[] = quantities.map(([column, title]) => {
    const series = groups.map((g) => ({
      label: g.label,
      data: pairs(g.rows, "density", column),
    }));
    const slopes: number[] = [];
    groups.forEach((g, i) => {
      const data = series[i].data;
      if (data.length >= 2) {
        const fit = logLogSlope(data.map((p) => p[0]), data.map((p) => p[1]));
        slopes.push(fit.slope);
        annotations[`${column}_slope[${g.label}]`] = fit.slope;
      } else {
        warnings.push(`${column}: not enough points for ${g.label}`);
      }
    });
    if (slopes.length > 0) {
      annotations[`${column}_slope`] = slopes[0];
    }
    return {
      title,
      subtitle: slopes.map(slopeText).join(", "),
      xName: "density (cm^-3)",
      yName: column,
      xLog: true,
      yLog: true,
      series,
    };
  });
  const svg = renderSvg(
    panelOption(panels, opts),
    opts.width ?? 1280,
    opts.height ?? 430,
  );
  return { svg, annotations, warnings };
}

function renderEfficiency(sweep: Table, opts: RenderOptions): RenderResult {
  const tauUs = opts.tauUs ?? 400;
  const groups = groupByOmega(sweep);
  const annotations: Record<string, number> = {};
  const warnings: string[] = [];
  const series: Panel["series"] = [];
  groups.forEach((g) => {
    const stored = pairs(g.rows, "density", "eta_stored");
    series.push({ label: `stored ${g.label}`, data: stored });
    const zeroStorage: [number, number][] = [];
    for (const row of g.rows) {
      const density = Number(row.density);
      const eta = Number(row.eta_stored);
      const tauCoh = Number(row.tau_coherence);
      if (Number.isFinite(density) && Number.isFinite(eta) && tauCoh > 0) {
        zeroStorage.push([density, eta * Math.exp(tauUs / tauCoh)]);
      }
    }
    if (zeroStorage.length > 0) {
      series.push({
        label: `zero-storage extrapolation ${g.label}`,
        data: zeroStorage,
        dashed: true,
      });
    } else {
      warnings.push(`no finite lifetimes for ${g.label}`);
    }
    const etas = stored.map((p) => p[1]);
    if (etas.length > 0) {
      const peak = etas.indexOf(Math.max(...etas));
      annotations[`eta_peak_density[${g.label}]`] = stored[peak][0];
    }
  });
  const panels: Panel[] = [
    {
      title: `storage efficiency at tau = ${tauUs} us`,
      subtitle: "dashed: decay-corrected back to tau = 0",
      xName: "density (cm^-3)",
      yName: "eta",
      xLog: true,
      yLog: false,
      series,
    },
  ];
  const svg = renderSvg(
    panelOption(panels, opts),
    opts.width ?? 720,
    opts.height ?? 460,
  );
  return { svg, annotations, warnings };
}

function renderAccounting(
  sweep: Table,
  traces: Table | undefined,
  opts: RenderOptions,
): RenderResult {
  const annotations: Record<string, number> = {};
  const warnings: string[] = [];
  const group = groupByOmega(sweep)[0];
  const densities: string[] = [];
  const leak: number[] = [];
  const stored: number[] = [];
  const other: number[] = [];
  for (const row of group.rows) {
    const l = Number(row.eta_leakage);
    const s = Number(row.eta_stored);
    if (!Number.isFinite(l) || !Number.isFinite(s) || row.eta_leakage === "") {
      continue;
    }
    densities.push(Number(row.density).toExponential(1));
    leak.push(l);
    stored.push(s);
    other.push(Math.max(0, 1 - l - s));
  }
  annotations.accounting_rows = densities.length;

  const barGrid = {
    left: "7%",
    width: traces ? "38%" : "82%",
    top: 72,
    bottom: 56,
  };
  const option: echarts.EChartsOption = {
    animation: false,
    backgroundColor: "#ffffff",
    legend: { bottom: 22 },
    grid: traces ? [barGrid, { left: "56%", width: "38%", top: 72, bottom: 56 }] : [barGrid],
    title: [
      {
        text: "photon accounting",
        subtext: "fractions of the input pulse area",
        left: traces ? "26%" : "48%",
        textAlign: "center",
        textStyle: { fontSize: 13 },
        subtextStyle: { fontSize: 11 },
      },
      ...(traces
        ? [
            {
              text: "pulse traces",
              left: "75%" as const,
              textAlign: "center" as const,
              textStyle: { fontSize: 13 },
            },
          ]
        : []),
    ],
    xAxis: [
      { gridIndex: 0, type: "category" as const, data: densities, name: "density (cm^-3)", nameLocation: "middle" as const, nameGap: 26 },
      ...(traces ? [{ gridIndex: 1, type: "value" as const, name: "t (1/gamma)" }] : []),
    ],
    yAxis: [
      { gridIndex: 0, type: "value" as const, name: "fraction" },
      ...(traces ? [{ gridIndex: 1, type: "value" as const, name: "intensity" }] : []),
    ],
    series: [
      { name: "leakage", type: "bar", stack: "eta", data: leak, itemStyle: { color: PALETTE[0] } },
      { name: "retrieved", type: "bar", stack: "eta", data: stored, itemStyle: { color: PALETTE[2] } },
      { name: "lost", type: "bar", stack: "eta", data: other, itemStyle: { color: PALETTE[1] } },
    ],
    graphic: footerGraphic(opts.footer),
  };

  if (traces) {
    const t = numericColumn(traces, "t");
    const input = numericColumn(traces, "input_intensity");
    const output = numericColumn(traces, "output_intensity");
    const control = numericColumn(traces, "control_omega");
    const maxControl = Math.max(...control.filter(Number.isFinite), 1e-300);
    const maxIntensity = Math.max(...input.filter(Number.isFinite), ...output.filter(Number.isFinite));
    const zip = (ys: number[], scale = 1): [number, number][] =>
      t.map((ti, i) => [ti, ys[i] * scale] as [number, number]).filter(
        (p) => Number.isFinite(p[0]) && Number.isFinite(p[1]),
      );
    (option.series as object[]).push(
      {
        name: "input",
        type: "line",
        xAxisIndex: 1,
        yAxisIndex: 1,
        showSymbol: false,
        data: zip(input),
        itemStyle: { color: PALETTE[3] },
      },
      {
        name: "transmitted",
        type: "line",
        xAxisIndex: 1,
        yAxisIndex: 1,
        showSymbol: false,
        data: zip(output),
        itemStyle: { color: PALETTE[4] },
      },
      {
        name: "control (scaled)",
        type: "line",
        xAxisIndex: 1,
        yAxisIndex: 1,
        showSymbol: false,
        lineStyle: { type: "dotted" },
        data: zip(control, maxIntensity / maxControl),
        itemStyle: { color: "#777777" },
      },
    );
    annotations.trace_points = t.length;
  } else {
    warnings.push("no trace CSV supplied; rendering bars only");
  }

  const svg = renderSvg(option, opts.width ?? (traces ? 1100 : 640), opts.height ?? 460);
  return { svg, annotations, warnings };
}

function renderTrapping(radtrap: Table, opts: RenderOptions): RenderResult {
  const annotations: Record<string, number> = {};
  const warnings: string[] = [];
  const density = numericColumn(radtrap, "density");
  const fwhm = numericColumn(radtrap, "fwhm_proxy");
  const rise = numericColumn(radtrap, "rise_time_ns");

  const proxyPairs = density
    .map((n, i) => [n, fwhm[i]] as [number, number])
    .filter((p) => p[0] > 0 && Number.isFinite(p[1]));
  const reference: [number, number][] = proxyPairs.map(([n, _]) => [
    n,
    proxyPairs[0][1] * Math.sqrt(n / proxyPairs[0][0]),
  ]);
  const risePairs = density
    .map((n, i) => [n, rise[i]] as [number, number])
    .filter((p) => p[0] > 0 && Number.isFinite(p[1]) && p[1] > 0);

  if (proxyPairs.length >= 2) {
    annotations.fwhm_proxy_slope = logLogSlope(
      proxyPairs.map((p) => p[0]),
      proxyPairs.map((p) => p[1]),
    ).slope;
  }
  if (risePairs.length >= 2) {
    annotations.rise_time_slope = logLogSlope(
      risePairs.map((p) => p[0]),
      risePairs.map((p) => p[1]),
    ).slope;
  } else {
    warnings.push("fewer than 2 usable rise-time points");
  }

  const panels: Panel[] = [
    {
      title: "absorption-linewidth proxy",
      subtitle:
        `${slopeText(annotations.fwhm_proxy_slope ?? NaN)}; ` +
        "dashed: sqrt-density growth",
      xName: "density (cm^-3)",
      yName: "fwhm (gamma/2)",
      xLog: true,
      yLog: true,
      series: [
        { label: "radiation-trapping model", data: proxyPairs },
        { label: "sqrt-density reference", data: reference, dashed: true },
      ],
    },
    {
      title: "fluorescence rise time",
      subtitle: slopeText(annotations.rise_time_slope ?? NaN),
      xName: "density (cm^-3)",
      yName: "rise time (ns)",
      xLog: true,
      yLog: true,
      series: [{ label: "side fluorescence", data: risePairs }],
    },
  ];
  const svg = renderSvg(
    panelOption(panels, opts),
    opts.width ?? 900,
    opts.height ?? 440,
  );
  return { svg, annotations, warnings };
}

export function renderFamily(
  family: Family,
  tables: Table[],
  opts: RenderOptions = {},
): RenderResult {
  if (tables.length === 0 || tables[0].rows.length === 0) {
    throw new Error("renderFamily requires at least one non-empty table");
  }
  switch (family) {
    case "scaling":
      return renderScaling(tables[0], opts);
    case "efficiency":
      return renderEfficiency(tables[0], opts);
    case "accounting":
      return renderAccounting(tables[0], tables[1], opts);
    case "trapping":
      return renderTrapping(tables[0], opts);
    default: {
      const exhaustive: never = family;
      throw new Error(`unknown family ${exhaustive}`);
    }
  }
}
