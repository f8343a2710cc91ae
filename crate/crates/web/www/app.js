import init, { Playground, verify_controller } from "./pkg/swarmsafe_web.js";

const $ = (id) => document.getElementById(id);
const canvas = $("arena");
const ctx = canvas.getContext("2d");
const COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
const TICKS_PER_FRAME = 2;

let pg = null;
let paused = false;

function reset() {
  try {
    pg = new Playground($("scenario").value, Number($("robots").value), BigInt($("seed").value));
    pg.set_filter($("filter").checked);
    applySafety();
  } catch (e) {
    $("stats").textContent = `error: ${e}`;
    pg = null;
  }
}

function applySafety() {
  if (!pg) return;
  const gamma = Number($("gamma").value);
  const ds = Number($("ds").value);
  $("gamma-v").textContent = gamma.toFixed(1);
  $("ds-v").textContent = ds.toFixed(3);
  try {
    pg.set_safety(gamma, ds);
  } catch (e) {
    $("stats").textContent = `rejected: ${e}`;
  }
}

function toCanvas(b) {
  const scale = canvas.width / Math.max(b[1] - b[0], b[3] - b[2]);
  return {
    scale,
    x: (x) => (x - b[0]) * scale,
    y: (y) => (b[3] - y) * scale,
    inv: (px, py) => [b[0] + px / scale, b[3] - py / scale],
  };
}

function draw() {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (!pg) return;
  const m = toCanvas(pg.bounds());
  const d = pg.density();
  for (let k = 0; k < d.length; k += 3) {
    ctx.fillStyle = "rgba(242, 193, 78, 0.35)";
    ctx.beginPath();
    ctx.arc(m.x(d[k]), m.y(d[k + 1]), 0.12 * m.scale * Math.sqrt(d[k + 2] / 4), 0, 2 * Math.PI);
    ctx.fill();
  }
  const p = pg.positions();
  const u = pg.velocities();
  const r = pg.robot_radius() * m.scale;
  const halo = 0.5 * pg.safety_distance() * m.scale;
  for (let i = 0; i < p.length / 2; i++) {
    const [cx, cy] = [m.x(p[2 * i]), m.y(p[2 * i + 1])];
    ctx.strokeStyle = "#bbb";
    ctx.setLineDash([3, 3]);
    ctx.beginPath();
    ctx.arc(cx, cy, halo, 0, 2 * Math.PI);
    ctx.stroke();
    ctx.setLineDash([]);
    ctx.fillStyle = COLORS[i % COLORS.length];
    ctx.beginPath();
    ctx.arc(cx, cy, r, 0, 2 * Math.PI);
    ctx.fill();
    ctx.strokeStyle = "#000";
    ctx.beginPath();
    ctx.moveTo(cx, cy);
    ctx.lineTo(cx + 2 * u[2 * i] * m.scale, cy - 2 * u[2 * i + 1] * m.scale);
    ctx.stroke();
  }
  const min = pg.min_distance();
  $("stats").textContent =
    `t = ${pg.t().toFixed(2)} s   filter ${pg.filter() ? "on" : "off"}\n` +
    `safety score ${pg.score().toFixed(5)}   impacts ${pg.impacts()}\n` +
    `min distance ${Number.isFinite(min) ? min.toFixed(4) : "n/a"} m`;
}

function frame() {
  if (pg && !paused) {
    try {
      pg.step(TICKS_PER_FRAME);
    } catch (e) {
      paused = true;
      $("stats").textContent = `stopped: ${e}`;
    }
  }
  draw();
  requestAnimationFrame(frame);
}

canvas.addEventListener("click", (ev) => {
  if (!pg) return;
  const rect = canvas.getBoundingClientRect();
  const m = toCanvas(pg.bounds());
  const [x, y] = m.inv(ev.clientX - rect.left, ev.clientY - rect.top);
  try {
    pg.add_density(x, y, Number($("weight").value));
  } catch (e) {
    $("stats").textContent = `rejected: ${e}`;
  }
});

$("reset").onclick = reset;
$("scenario").onchange = reset;
$("pause").onclick = () => {
  paused = !paused;
  $("pause").textContent = paused ? "Resume" : "Pause";
};
$("filter").onchange = () => pg && pg.set_filter($("filter").checked);
$("gamma").oninput = applySafety;
$("ds").oninput = applySafety;
$("weight").oninput = () => ($("weight-v").textContent = Number($("weight").value).toFixed(1));
$("clear").onclick = () => pg && pg.clear_density();
$("verify").onclick = () => {
  $("report").textContent = "running...";
  setTimeout(() => {
    try {
      const rep = JSON.parse(verify_controller($("controller").value, Number($("robots").value), Number($("seconds").value)));
      const lines = rep.scenarios.map((s) => `${s.name.padEnd(10)} S = ${s.score.toFixed(6)}`);
      lines.push(`aggregate  S = ${rep.aggregate.toFixed(6)} (threshold ${rep.threshold})`);
      lines.push(`decision: ${rep.decision}`);
      $("report").textContent = lines.join("\n");
    } catch (e) {
      $("report").textContent = `error: ${e}`;
    }
  }, 0);
};

await init();
reset();
requestAnimationFrame(frame);
