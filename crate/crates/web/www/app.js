// Built by `wasm-pack build crates/web --target web --out-dir www/pkg`.
import init, { predictSynthetic, quantileGrid, predictEdgeList } from "./pkg/fluxgraph_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function show(target, html) {
  $(target).innerHTML = html;
}

function fail(target, e) {
  show(target, `<p class="err">${e.message ?? e}</p>`);
}

const pct = (x) => (100 * x).toFixed(2) + "%";

// Observed vertex and edge counts with the forecast appended as hollow points.
function chart(observed, forecast) {
  const svg = $("chart");
  const w = svg.width.baseVal.value, hgt = svg.height.baseVal.value, pad = 30;
  const series = [
    { ys: observed.vertices, extra: forecast?.vertices, colour: "#1f77b4" },
    { ys: observed.edges, extra: forecast?.edges, colour: "#d62728" },
  ];
  const n = observed.vertices.length + (forecast ? forecast.h : 0);
  const ymax = Math.max(...series.flatMap((s) => [...s.ys, s.extra ?? 0]), 1);
  const x = (i) => pad + (i * (w - 2 * pad)) / Math.max(n - 1, 1);
  const y = (v) => hgt - pad - (v * (hgt - 2 * pad)) / ymax;
  let body = `<text x="${pad}" y="16" font-size="11">vertices (blue) and edges (red)</text>`;
  for (const s of series) {
    const pts = s.ys.map((v, i) => `${x(i)},${y(v)}`).join(" ");
    body += `<polyline fill="none" stroke="${s.colour}" stroke-width="2" points="${pts}"/>`;
    if (s.extra !== undefined) {
      body += `<circle cx="${x(n - 1)}" cy="${y(s.extra)}" r="4" fill="white" stroke="${s.colour}" stroke-width="2"/>`;
    }
  }
  svg.innerHTML = body;
}

function summary(p) {
  const lp = p.lp_objective === null ? "n/a" : p.lp_objective.toFixed(3);
  const hubs = p.hubs.map(([v, d, b]) => `<tr><td>${v}</td><td>${d}</td><td>${b.toFixed(2)}</td></tr>`).join("");
  return `<p>Predicted ${p.vertices} vertices (forecast ${p.n_hat}) and ${p.edges} edges
    (bound ${p.edge_bound.toFixed(1)}) from ${p.candidates} candidates.
    Objective ${p.ilp_objective.toFixed(3)}, relaxation ${lp}.</p>
    <table><tr><th>vertex</th><th>degree</th><th>bound</th></tr>${hubs}</table>`;
}

function runPredict() {
  try {
    const r = JSON.parse(predictSynthetic(num("seed"), num("train"), num("s"), num("gamma"), num("u"), num("h")));
    chart(r.observed, { ...r.prediction });
    const t = r.truth;
    show("out", `${summary(r.prediction)}
      <p>Actual: ${t.vertices} vertices, ${t.edges} edges.</p>
      <table><tr><th></th><th>vertex error</th><th>edge error</th></tr>
      <tr><th>forecast</th><td>${pct(t.vertex_error)}</td><td>${pct(t.edge_error)}</td></tr>
      <tr><th>last seen</th><td>${pct(t.baseline_vertex_error)}</td><td>${pct(t.baseline_edge_error)}</td></tr></table>`);
  } catch (e) {
    fail("out", e);
  }
}

function runGrid() {
  const gammas = [0.1, 0.3, 0.5, 0.7, 0.9];
  const us = [0.5, 0.7, 0.9];
  try {
    const r = JSON.parse(quantileGrid(num("seed"), num("train"), num("s"), num("h"), new Float64Array(gammas), new Float64Array(us)));
    chart(r.observed, null);
    let rows = "";
    gammas.forEach((g, i) => {
      const cells = us.map((_, j) => {
        const c = r.cells[i * us.length + j];
        return `<td>${c.vertices} / ${c.edges}</td>`;
      });
      rows += `<tr><th>γ=${g}</th>${cells.join("")}</tr>`;
    });
    show("out", `<p>Vertices / edges at horizon ${num("h")}.</p>
      <table><tr><th></th>${us.map((u) => `<th>u=${u}</th>`).join("")}</tr>${rows}</table>`);
  } catch (e) {
    fail("out", e);
  }
}

function runUpload() {
  try {
    const r = JSON.parse(predictEdgeList($("edges").value, $("gran").value, num("gamma"), num("u"), num("h")));
    chart(r.observed, { ...r.prediction });
    const skipped = r.skipped_lines ? `<p>Skipped ${r.skipped_lines} lines.</p>` : "";
    show("out2", skipped + summary(r.prediction));
  } catch (e) {
    fail("out2", e);
  }
}

await init();
for (const id of ["gamma", "u"]) {
  $(id).addEventListener("input", () => ($(id + "Out").textContent = $(id).value));
}
$("predict").addEventListener("click", runPredict);
$("grid").addEventListener("click", runGrid);
$("upload").addEventListener("click", runUpload);
runPredict();
