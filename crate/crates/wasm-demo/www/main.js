// Canvas front end for the vem2d wasm module. Panels share one render path:
// the wasm side hands back a polygon vertex stream + offsets, one scalar per
// cell, and a text summary; we map scalars onto a blue-white-red ramp.

import init, { lloydMesh, solveLayer, solveChannel } from "./pkg/vem2d_wasm.js";

const ready = init();

// ---- rendering ------------------------------------------------------------

function drawBundle(canvas, bundle, { symmetric = false } = {}) {
  const coords = bundle.coords;
  const offsets = bundle.offsets;
  const values = bundle.cellValues;

  let xmin = Infinity, xmax = -Infinity, ymin = Infinity, ymax = -Infinity;
  for (let i = 0; i < coords.length; i += 2) {
    xmin = Math.min(xmin, coords[i]); xmax = Math.max(xmax, coords[i]);
    ymin = Math.min(ymin, coords[i + 1]); ymax = Math.max(ymax, coords[i + 1]);
  }
  const pad = 6;
  const sx = (canvas.width - 2 * pad) / (xmax - xmin);
  const sy = (canvas.height - 2 * pad) / (ymax - ymin);
  const s = Math.min(sx, sy);
  const px = x => pad + (x - xmin) * s;
  const py = y => canvas.height - pad - (y - ymin) * s; // y up

  let vmin = Infinity, vmax = -Infinity;
  for (const v of values) { vmin = Math.min(vmin, v); vmax = Math.max(vmax, v); }
  if (symmetric) { const m = Math.max(Math.abs(vmin), Math.abs(vmax), 1e-30); vmin = -m; vmax = m; }
  if (vmax - vmin < 1e-12) { vmax = vmin + 1; }

  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const n = offsets.length - 1;
  for (let c = 0; c < n; c++) {
    ctx.beginPath();
    for (let i = offsets[c]; i < offsets[c + 1]; i++) {
      const x = px(coords[2 * i]), y = py(coords[2 * i + 1]);
      if (i === offsets[c]) ctx.moveTo(x, y); else ctx.lineTo(x, y);
    }
    ctx.closePath();
    ctx.fillStyle = ramp((values[c] - vmin) / (vmax - vmin));
    ctx.fill();
    ctx.strokeStyle = "rgba(40,40,40,0.45)";
    ctx.lineWidth = 0.6;
    ctx.stroke();
  }
  return { vmin, vmax };
}

// Blue -> white -> red diverging ramp on t in [0, 1].
function ramp(t) {
  t = Math.max(0, Math.min(1, t));
  const u = 2 * t - 1; // [-1, 1]
  const r = u > 0 ? 255 : Math.round(255 * (1 + u * 0.75));
  const b = u < 0 ? 255 : Math.round(255 * (1 - u * 0.75));
  const g = Math.round(255 * (1 - 0.75 * Math.abs(u)));
  return `rgb(${r},${g},${b})`;
}

// ---- panel wiring -----------------------------------------------------------

function bindSlider(id) {
  const el = document.getElementById(id);
  const out = document.getElementById(id + "-out");
  if (out) {
    const show = () => { out.textContent = Number(el.value).toFixed(el.step && el.step.includes(".") ? (el.step.split(".")[1] || "").length : 0); };
    el.addEventListener("input", show);
    show();
  }
  return el;
}

async function run(button, status, job) {
  await ready;
  button.disabled = true;
  status.textContent = "computing…";
  // Let the browser paint the status before the solver blocks the thread.
  await new Promise(r => setTimeout(r, 30));
  try {
    const t0 = performance.now();
    const summary = job();
    status.textContent = `${summary}  (${((performance.now() - t0) / 1000).toFixed(2)} s)`;
  } catch (e) {
    status.textContent = `error: ${e.message ?? e}`;
  } finally {
    button.disabled = false;
  }
}

// Tabs.
for (const btn of document.querySelectorAll("nav button")) {
  btn.addEventListener("click", () => {
    document.querySelectorAll("nav button").forEach(b => b.classList.toggle("active", b === btn));
    document.querySelectorAll(".panel").forEach(p =>
      p.classList.toggle("active", p.id === "panel-" + btn.dataset.panel));
  });
}

// Voronoi mesh panel.
{
  const n = bindSlider("mesh-n"), iters = bindSlider("mesh-iters");
  const seed = document.getElementById("mesh-seed");
  const btn = document.getElementById("mesh-run");
  const status = document.getElementById("mesh-status");
  const canvas = document.getElementById("mesh-canvas");
  const go = () => run(btn, status, () => {
    const b = lloydMesh(Number(n.value), Number(iters.value), Number(seed.value));
    drawBundle(canvas, b);
    return b.summary;
  });
  btn.addEventListener("click", go);
  ready.then(go);
}

// Boundary-layer panel.
{
  const n = bindSlider("layer-n");
  const d1 = bindSlider("layer-d1"), d2 = bindSlider("layer-d2"), d3 = bindSlider("layer-d3");
  const btn = document.getElementById("layer-run");
  const status = document.getElementById("layer-status");
  const canvas = document.getElementById("layer-canvas");
  btn.addEventListener("click", () => run(btn, status, () => {
    const b = solveLayer(Number(n.value), 2, Number(d1.value), Number(d2.value), Number(d3.value));
    drawBundle(canvas, b, { symmetric: true });
    return b.summary;
  }));
}

// Channel panel.
{
  const n = bindSlider("channel-n");
  const btn = document.getElementById("channel-run");
  const status = document.getElementById("channel-status");
  const canvas = document.getElementById("channel-canvas");
  btn.addEventListener("click", () => run(btn, status, () => {
    const b = solveChannel(Number(n.value), 2);
    drawBundle(canvas, b);
    return b.summary;
  }));
}
