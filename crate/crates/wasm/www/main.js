// Built with `wasm-pack build --target web crates/wasm`, which writes ../pkg.
import init, { profile_1d, wedge_trial, minimize_wedge } from "../pkg/corner_gl_wasm.js";

const $ = (id) => document.getElementById(id);
const canvas = $("plot");
const ctx = canvas.getContext("2d");

function params() {
  return { b: +$("b").value, deficit: +$("deficit").value, h: +$("h").value };
}

function show(result, keys) {
  if (result.error) {
    $("out").textContent = "error: " + result.error;
    return false;
  }
  $("out").textContent = keys.map((k) => `${k} = ${result[k]}`).join("\n");
  return true;
}

function drawProfile(t, f) {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const tmax = t[t.length - 1];
  const fmax = Math.max(...f);
  const x = (v) => 40 + (v / tmax) * (canvas.width - 60);
  const y = (v) => canvas.height - 30 - (v / fmax) * (canvas.height - 60);
  ctx.strokeStyle = "#888";
  ctx.strokeRect(40, 30, canvas.width - 60, canvas.height - 60);
  ctx.beginPath();
  t.forEach((tv, i) => (i ? ctx.lineTo(x(tv), y(f[i])) : ctx.moveTo(x(tv), y(f[i]))));
  ctx.strokeStyle = "#1f5fbf";
  ctx.stroke();
  ctx.fillText("t", canvas.width - 20, canvas.height - 12);
  ctx.fillText("f0", 10, 40);
}

function drawField(nodes, triangles, modulus) {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const xs = nodes.map((p) => p[0]);
  const ys = nodes.map((p) => p[1]);
  const [x0, x1, y0, y1] = [Math.min(...xs), Math.max(...xs), Math.min(...ys), Math.max(...ys)];
  const s = Math.min((canvas.width - 20) / (x1 - x0), (canvas.height - 20) / (y1 - y0));
  const px = (p) => [10 + (p[0] - x0) * s, canvas.height - 10 - (p[1] - y0) * s];
  const mmax = Math.max(...modulus);
  for (const tri of triangles) {
    const m = (modulus[tri[0]] + modulus[tri[1]] + modulus[tri[2]]) / (3 * mmax);
    ctx.fillStyle = `hsl(${240 - 240 * m}, 80%, ${30 + 30 * m}%)`;
    ctx.beginPath();
    tri.forEach((k, i) => {
      const [a, b] = px(nodes[k]);
      i ? ctx.lineTo(a, b) : ctx.moveTo(a, b);
    });
    ctx.closePath();
    ctx.fill();
  }
}

function busy(fn) {
  $("out").textContent = "Working…";
  setTimeout(fn, 10);
}

await init();
$("out").textContent = "Ready.";

$("profile").onclick = () =>
  busy(() => {
    const r = JSON.parse(profile_1d(params().b, 10));
    if (show(r, ["alpha0", "e1d", "ecorr"])) drawProfile(r.t, r.f0);
  });

$("trial").onclick = () =>
  busy(() => {
    const p = params();
    show(JSON.parse(wedge_trial(p.b, p.deficit, p.h)), ["beta", "gamma", "e_trial", "e_trial_corner", "conjecture"]);
  });

$("wedge").onclick = () =>
  busy(() => {
    const p = params();
    const r = JSON.parse(minimize_wedge(p.b, p.deficit, p.h));
    if (show(r, ["beta", "e_gamma", "e_corner", "conjecture", "iterations", "converged"])) {
      drawField(r.nodes, r.triangles, r.modulus);
    }
  });
