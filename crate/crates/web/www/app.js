import init, { spectral, certify, solve } from "./pkg/hammerstein_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const fmt = (x) => (typeof x === "number" ? x.toPrecision(8) : String(x));

for (const id of ["amp", "decay", "wa", "wb", "nodes", "damping"]) {
  const show = () => ($(`${id}-v`).textContent = $(id).value);
  $(id).addEventListener("input", show);
  show();
}

// Runs after the button label has repainted, since the wasm calls block.
function busy(button, out, work) {
  out.textContent = "working…";
  button.disabled = true;
  setTimeout(() => {
    try {
      work();
    } catch (e) {
      out.innerHTML = `<span class="bad">${e}</span>`;
    } finally {
      button.disabled = false;
    }
  }, 20);
}

function showSpectral() {
  const r = JSON.parse(spectral(num("amp"), num("decay"), num("wa"), num("wb"), num("nodes")));
  const s = r.summary;
  const lines = [
    `r(L1)   = ${fmt(s.l1.radius)}   mu(L1) = ${fmt(s.l1.char_value)}`,
    `r(L2|A) = ${fmt(s.l2.radius)}   mu(L2) = ${fmt(s.l2.char_value)}`,
    `M~(A)   = ${s.m_tilde === null ? "n/a (" + s.m_tilde_error + ")" : fmt(s.m_tilde)}`,
  ];
  if (r.ordering) {
    for (const c of r.ordering.checks) lines.push(`${c.passed ? "ok  " : "FAIL"} ${c.relation}  (gap ${fmt(c.gap)})`);
  }
  $("spectral-out").textContent = lines.join("\n");
}

function showCertificate() {
  const r = JSON.parse(certify(num("amp"), num("decay"), num("wa"), num("wb"), num("nodes")));
  const out = [];
  out.push(r.certified ? "nontrivial solution certified" : "no certificate");
  if (r.failed_conditions.length) out.push(`failed conditions: ${r.failed_conditions.join(", ")}`);
  if (r.skipped) out.push(`skipped: ${r.skipped}`);
  const c = r.certificate;
  if (c) {
    out.push(`T1 ${c.t1_holds}   T2 ${c.t2_holds}`);
    for (const m of Object.values(c.margins)) {
      out.push(`${m.holds ? "holds" : "fails"}  ${m.smaller} < ${m.larger}   margin ${fmt(m.margin)}`);
    }
  }
  $("certify-out").innerHTML = `<span class="${r.certified ? "ok" : "bad"}">${out.join("\n")}</span>`;
}

function plot(t, u) {
  const cv = $("plot");
  const g = cv.getContext("2d");
  const w = cv.width, h = cv.height, pad = 30;
  g.clearRect(0, 0, w, h);
  const ymax = Math.max(1e-12, ...u.map(Math.abs)) * 1.1;
  const x = (v) => pad + ((v - t[0]) / (t[t.length - 1] - t[0])) * (w - 2 * pad);
  const y = (v) => h / 2 - (v / ymax) * (h / 2 - pad);
  g.strokeStyle = "#bbb";
  g.beginPath();
  g.moveTo(pad, h / 2);
  g.lineTo(w - pad, h / 2);
  g.stroke();
  g.fillStyle = "#555";
  g.fillText(`±${ymax.toPrecision(3)}`, 2, pad - 8);
  g.fillText("t = −4π", pad, h - 8);
  g.fillText("4π", w - pad - 12, h - 8);
  g.strokeStyle = "#1f5fbf";
  g.lineWidth = 2;
  g.beginPath();
  t.forEach((tv, i) => (i ? g.lineTo(x(tv), y(u[i])) : g.moveTo(x(tv), y(u[i]))));
  g.stroke();
}

function showSolve() {
  const r = JSON.parse(solve(num("amp"), num("decay"), num("nodes"), num("damping")));
  $("solve-out").textContent = [
    `${r.converged ? "converged" : "not converged"}${r.trivial ? " (trivial)" : ""} after ${r.iterations} iterations`,
    `residual ||u - Tu||_phi = ${fmt(r.residual)}`,
    `u ≈ c·sin t with c = ${fmt(r.sin_coefficient)}`,
  ].join("\n");
  plot(r.t, r.u);
}

await init();
$("run-spectral").addEventListener("click", (e) => busy(e.target, $("spectral-out"), showSpectral));
$("run-certify").addEventListener("click", (e) => busy(e.target, $("certify-out"), showCertificate));
$("run-solve").addEventListener("click", (e) => busy(e.target, $("solve-out"), showSolve));
