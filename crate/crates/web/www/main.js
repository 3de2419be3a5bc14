import init, { bounds_table, noise_curves, simulate } from "./pkg/spin_witness_web.js";

const $ = (id) => document.getElementById(id);

function call(f, ...args) {
  try {
    return { value: JSON.parse(f(...args)) };
  } catch (e) {
    return { error: String(e) };
  }
}

// Draws each series as a polyline on shared axes.
function plot(canvas, xs, series, { xLabel, yMin, yMax, marks = [] }) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = { l: 50, r: 12, t: 12, b: 34 };
  const x0 = xs[0];
  const x1 = xs[xs.length - 1];
  const sx = (x) => pad.l + ((x - x0) / (x1 - x0 || 1)) * (w - pad.l - pad.r);
  const sy = (y) => h - pad.b - ((y - yMin) / (yMax - yMin)) * (h - pad.t - pad.b);

  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#444";
  ctx.font = "12px system-ui";
  ctx.beginPath();
  ctx.moveTo(pad.l, pad.t);
  ctx.lineTo(pad.l, h - pad.b);
  ctx.lineTo(w - pad.r, h - pad.b);
  ctx.stroke();
  for (let i = 0; i <= 4; i++) {
    const y = yMin + ((yMax - yMin) * i) / 4;
    ctx.fillText(y.toFixed(3), 4, sy(y) + 4);
    const x = x0 + ((x1 - x0) * i) / 4;
    ctx.fillText(Number.isInteger(x) ? x : x.toFixed(2), sx(x) - 10, h - pad.b + 16);
  }
  ctx.fillText(xLabel, w / 2, h - 4);

  for (const { ys, color, dashed } of series) {
    ctx.strokeStyle = color;
    ctx.setLineDash(dashed ? [6, 4] : []);
    ctx.lineWidth = 2;
    ctx.beginPath();
    ys.forEach((y, i) => (i ? ctx.lineTo(sx(xs[i]), sy(y)) : ctx.moveTo(sx(xs[i]), sy(y))));
    ctx.stroke();
  }
  ctx.setLineDash([2, 3]);
  ctx.lineWidth = 1;
  for (const { x, color } of marks) {
    ctx.strokeStyle = color;
    ctx.beginPath();
    ctx.moveTo(sx(x), pad.t);
    ctx.lineTo(sx(x), h - pad.b);
    ctx.stroke();
  }
  ctx.setLineDash([]);
}

function drawBounds() {
  const r = call(bounds_table, Number($("kmax").value));
  if (r.error) {
    $("bounds-note").textContent = r.error;
    $("bounds-note").className = "error";
    return;
  }
  const rows = r.value;
  const ks = rows.map((row) => row.k);
  plot($("bounds"), ks, [
    { ys: rows.map((row) => row.p_max), color: "#1f77b4" },
    { ys: rows.map((row) => row.p_sep), color: "#d62728" },
    { ys: rows.map((row) => row.p_classical), color: "#2ca02c" },
  ], { xLabel: "K", yMin: 0.5, yMax: 0.76 });
  const last = rows[rows.length - 1];
  $("bounds-note").className = "";
  $("bounds-note").textContent =
    `K = ${last.k}: gap P_max - P_sep = ${last.gap_exact} ≈ ${last.gap.toPrecision(6)}`;
}

function drawNoise() {
  const k = Number($("noise-k").value);
  $("noise-k-val").textContent = k;
  const r = call(noise_curves, k, 201);
  if (r.error) {
    $("noise-note").textContent = r.error;
    return;
  }
  const v = r.value;
  plot($("noise"), v.p, [
    { ys: v.global, color: "#1f77b4" },
    { ys: v.local, color: "#ff7f0e" },
    { ys: v.p.map(() => v.p_sep), color: "#d62728", dashed: true },
  ], {
    xLabel: "p",
    yMin: 0.5,
    yMax: 0.76,
    marks: [
      { x: v.global_threshold, color: "#1f77b4" },
      { x: v.local_threshold, color: "#ff7f0e" },
    ],
  });
  $("noise-note").textContent =
    `detected while p < ${v.global_threshold.toFixed(4)} (global) or p < ${v.local_threshold.toFixed(4)} (local)`;
}

function runSimulation() {
  const r = call(simulate, Number($("sim-k").value), $("sim-state").value,
    Number($("sim-rounds").value), Number($("sim-seed").value));
  const out = $("sim-out");
  if (r.error) {
    out.textContent = r.error;
    out.className = "error";
    return;
  }
  const v = r.value;
  out.className = "";
  out.textContent = [
    `estimate    ${v.p_hat.toFixed(5)}  (95% CI ${v.ci_low.toFixed(5)} .. ${v.ci_high.toFixed(5)})`,
    `exact score ${v.exact_score.toFixed(5)}`,
    `P_sep       ${v.p_sep.toFixed(5)}`,
    `verdict     ${v.verdict}`,
  ].join("\n");
}

await init();
$("bounds-go").addEventListener("click", drawBounds);
$("noise-k").addEventListener("input", drawNoise);
$("sim-go").addEventListener("click", runSimulation);
drawBounds();
drawNoise();
