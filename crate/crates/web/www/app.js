// Built with `wasm-pack build crates/web --target web --out-dir www/pkg`.
import init, { scale_curve, qstar_cdfs, busy_density } from "./pkg/fluidq_web.js";

const COLOURS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

function plot(canvas, xs, series, { log = false, labels = [] } = {}) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, pad = 48;
  ctx.clearRect(0, 0, W, H);
  const tf = log ? (v) => Math.log10(Math.max(v, 1e-300)) : (v) => v;
  const all = series.flat().map(tf).filter(Number.isFinite);
  let lo = Math.min(...all), hi = Math.max(...all);
  if (hi === lo) hi = lo + 1;
  const x0 = xs[0], x1 = xs[xs.length - 1];
  const px = (x) => pad + ((x - x0) / (x1 - x0)) * (W - 2 * pad);
  const py = (y) => H - pad - ((tf(y) - lo) / (hi - lo)) * (H - 2 * pad);

  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad, pad, W - 2 * pad, H - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  for (let k = 0; k <= 4; k++) {
    const x = x0 + ((x1 - x0) * k) / 4;
    ctx.fillText(x.toPrecision(3), px(x) - 10, H - pad + 14);
    const y = lo + ((hi - lo) * k) / 4;
    ctx.fillText((log ? "1e" + y.toFixed(1) : y.toPrecision(3)), 4, H - pad - ((y - lo) / (hi - lo)) * (H - 2 * pad) + 4);
  }
  series.forEach((ys, i) => {
    ctx.strokeStyle = COLOURS[i % COLOURS.length];
    ctx.beginPath();
    ys.forEach((y, k) => (k ? ctx.lineTo(px(xs[k]), py(y)) : ctx.moveTo(px(xs[k]), py(y))));
    ctx.stroke();
    if (labels[i]) {
      ctx.fillStyle = ctx.strokeStyle;
      ctx.fillText(labels[i], W - pad - 120, pad + 16 + 14 * i);
    }
  });
}

// split a flat row-major array into columns
function columns(flat, width) {
  const cols = Array.from({ length: width }, () => []);
  flat.forEach((v, k) => cols[k % width].push(v));
  return cols;
}

function wire(name, run) {
  const err = document.getElementById(`${name}-err`);
  const go = () => {
    err.textContent = "";
    try {
      run();
    } catch (e) {
      err.textContent = String(e);
    }
  };
  document.getElementById(`${name}-go`).addEventListener("click", go);
  go();
}

const num = (id) => Number(document.getElementById(id).value);
const text = (id) => document.getElementById(id).value;

await init();

wire("scale", () => {
  const [xs, w] = columns(scale_curve(text("scale-model"), num("scale-q"), num("scale-x"), 200), 2);
  const log = document.getElementById("scale-log").checked;
  plot(document.getElementById("scale-plot"), xs, [w], { log, labels: ["W(x)"] });
});

wire("qstar", () => {
  const [xs, pd, cond] = columns(qstar_cdfs(text("qstar-model"), num("qstar-x"), 120), 3);
  plot(document.getElementById("qstar-plot"), xs, [pd, cond], { labels: ["at busy start", "given busy"] });
});

wire("busy", () => {
  const cs = text("busy-c").split(",").map(Number);
  const [vs, ...dens] = columns(busy_density(new Float64Array(cs), num("busy-v"), 300), cs.length + 1);
  plot(document.getElementById("busy-plot"), vs, dens, { labels: cs.map((c) => `c = ${c}`) });
});
