// Built with: wasm-pack build crates/web --target web --out-dir www/pkg
import init, { invariants, classify, constantsMesh } from "./pkg/lorentz_web.js";

const $ = (id) => document.getElementById(id);

function show(el, f) {
  try {
    el.classList.remove("err");
    el.textContent = f();
  } catch (e) {
    el.classList.add("err");
    el.textContent = String(e);
  }
}

const fmt = (x) => (typeof x === "number" ? Number(x.toPrecision(10)) : x);

function runInvariants() {
  show($("inv-out"), () => {
    const r = JSON.parse(invariants($("inv-surface").value, $("inv-params").value,
      Number($("inv-u").value), Number($("inv-v").value)));
    return Object.entries(r).map(([k, v]) => `${k.padEnd(9)} ${Array.isArray(v) ? v.map(fmt).join(", ") : fmt(v)}`).join("\n");
  });
}

function runClassify() {
  show($("cls-out"), () => {
    const r = JSON.parse(classify($("cls-surface").value, $("cls-params").value, Number($("cls-n").value)));
    const total = r.classes.length;
    const lines = Object.entries(r.counts).map(([k, n]) => `${k.padEnd(22)} ${String(n).padStart(6)}  ${(100 * n / total).toFixed(1)}%`);
    return [`domain ${r.domain.join(", ")}`, ...lines, `${"total".padEnd(22)} ${String(total).padStart(6)}`].join("\n");
  });
}

let mesh = null;
let yaw = 0.6, pitch = 0.4;

function draw() {
  const c = $("m-canvas"), ctx = c.getContext("2d");
  ctx.clearRect(0, 0, c.width, c.height);
  if (!mesh) return;
  const v = mesh.vertices, n = v.length / 3;
  let cx = 0, cy = 0, cz = 0;
  for (let i = 0; i < n; i++) { cx += v[3 * i]; cy += v[3 * i + 1]; cz += v[3 * i + 2]; }
  cx /= n; cy /= n; cz /= n;
  const [cyw, syw, cp, sp] = [Math.cos(yaw), Math.sin(yaw), Math.cos(pitch), Math.sin(pitch)];
  const pts = new Float64Array(2 * n);
  let r = 1e-12;
  for (let i = 0; i < n; i++) {
    const x = v[3 * i] - cx, y = v[3 * i + 1] - cy, z = v[3 * i + 2] - cz;
    const x1 = cyw * x + syw * y, y1 = -syw * x + cyw * y;
    const y2 = cp * z - sp * y1;
    pts[2 * i] = x1; pts[2 * i + 1] = y2;
    r = Math.max(r, Math.abs(x1), Math.abs(y2));
  }
  const s = 0.45 * Math.min(c.width, c.height) / r;
  ctx.strokeStyle = "#2a5d9f";
  ctx.lineWidth = 0.6;
  ctx.beginPath();
  const f = mesh.faces;
  for (let t = 0; t < f.length; t += 3) {
    const [a, b, d] = [f[t], f[t + 1], f[t + 2]];
    ctx.moveTo(c.width / 2 + s * pts[2 * a], c.height / 2 - s * pts[2 * a + 1]);
    ctx.lineTo(c.width / 2 + s * pts[2 * b], c.height / 2 - s * pts[2 * b + 1]);
    ctx.lineTo(c.width / 2 + s * pts[2 * d], c.height / 2 - s * pts[2 * d + 1]);
  }
  ctx.stroke();
}

function runMesh() {
  show($("m-out"), () => {
    const proj = $("m-proj").value.split(",").map((s) => Number(s.trim()) - 1);
    mesh = JSON.parse(constantsMesh(Number($("m-l").value), Number($("m-m").value), Number($("m-n").value),
      Number($("m-res").value), Number($("m-size").value), Uint32Array.from(proj)));
    draw();
    return `PDE residual     ${mesh.pde_residual.toExponential(3)}\n` +
      `Gram drift       ${mesh.max_gram_drift.toExponential(3)}\n` +
      `path discrepancy ${mesh.path_discrepancy.toExponential(3)}`;
  });
}

function dragRotate(canvas) {
  let last = null;
  canvas.addEventListener("pointerdown", (e) => { last = [e.clientX, e.clientY]; canvas.setPointerCapture(e.pointerId); });
  canvas.addEventListener("pointerup", () => { last = null; });
  canvas.addEventListener("pointermove", (e) => {
    if (!last) return;
    yaw += 0.01 * (e.clientX - last[0]);
    pitch += 0.01 * (e.clientY - last[1]);
    last = [e.clientX, e.clientY];
    draw();
  });
}

await init();
$("cls-surface").innerHTML = $("inv-surface").innerHTML;
$("cls-surface").value = "graphK";
$("inv-run").onclick = runInvariants;
$("cls-run").onclick = runClassify;
$("m-run").onclick = runMesh;
dragRotate($("m-canvas"));
runInvariants();
runClassify();
runMesh();
