import init, { pac_demo, kuramoto_demo, roundtrip_demo, default_script } from "./pkg/rose_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function plot(canvas, ys, opts = {}) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  if (!ys.length) return;
  const lo = opts.min ?? Math.min(...ys);
  const hi = opts.max ?? Math.max(...ys);
  const span = hi - lo || 1;
  const x = (i) => (opts.bars ? (i + 0.5) : i) * w / (opts.bars ? ys.length : Math.max(ys.length - 1, 1));
  const y = (v) => h - 4 - (v - lo) / span * (h - 8);
  ctx.strokeStyle = ctx.fillStyle = opts.color ?? "#2563eb";
  if (opts.bars) {
    const bw = w / ys.length * 0.8;
    ys.forEach((v, i) => ctx.fillRect(x(i) - bw / 2, y(v), bw, h - 4 - y(v)));
    return;
  }
  ctx.beginPath();
  ys.forEach((v, i) => (i ? ctx.lineTo(x(i), y(v)) : ctx.moveTo(x(i), y(v))));
  ctx.stroke();
}

function show(pre, text, bad) {
  pre.textContent = text;
  pre.className = bad ? "err" : "";
}

function runPac() {
  const r = JSON.parse(pac_demo(num("pac-depth"), num("pac-phase"), num("pac-wave"), num("pac-gamma")));
  if (r.error) return show($("pac-out"), r.error, true);
  plot($("pac-trace"), r.trace);
  plot($("pac-bins"), r.mean_amplitude, { bars: true, min: 0, color: "#059669" });
  show($("pac-out"),
    `modulation index ${r.modulation_index.toFixed(4)}\n` +
    `recovered preferred phase ${r.preferred_phase.toFixed(3)} rad\n` +
    `trace: first ${r.trace_seconds.toFixed(2)} s`);
}

function runSync() {
  const r = JSON.parse(kuramoto_demo(num("k-n"), num("k-k"), num("k-spread"), num("k-secs"), num("k-seed")));
  if (r.error) return show($("k-out"), r.error, true);
  plot($("k-r"), r.order_parameter, { min: 0, max: 1, color: "#9333ea" });
  show($("k-out"), `final order parameter R = ${r.final_order_parameter.toFixed(4)}`);
}

function runRoundtrip() {
  const out = $("rt-out");
  const r = JSON.parse(roundtrip_demo($("rt-script").value, num("rt-snr"), num("rt-seed")));
  out.replaceChildren();
  if (r.error && !r.tree) {
    out.innerHTML = `<pre class="err"></pre>`;
    out.firstChild.textContent = r.error;
    return;
  }
  plot($("rt-lf"), r.lf_trace);
  const head = document.createElement("pre");
  head.textContent = `${r.bracketed}\n${r.log.join("\n")}\n\n` +
    (r.exact_match ? "decoded tree matches" : `decoded tree differs${r.error ? ": " + r.error : ""}`);
  head.className = r.exact_match ? "" : "err";
  const table = document.createElement("table");
  table.innerHTML = "<tr><th>slot</th><th>depth</th><th>true</th><th>decoded</th><th>corr</th></tr>";
  for (const s of r.slots) {
    const tr = table.insertRow();
    for (const v of [s.node, s.depth, s.true, s.decoded, s.correlation.toFixed(3)]) tr.insertCell().textContent = v;
    if (s.true !== s.decoded) tr.className = "miss";
  }
  out.append(head, table);
}

await init();
$("rt-script").value = default_script();
$("pac-run").onclick = runPac;
$("k-run").onclick = runSync;
$("rt-run").onclick = runRoundtrip;
runPac();
runSync();
runRoundtrip();
