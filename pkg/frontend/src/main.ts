/** Browser shell: wires the store, API client, renderer, and controls.
 * Kept free of logic worth testing; everything it calls lives in the pure
 * modules.
 */

import { StudioApi, PreviewGate, ApiError } from "./api.js";
import {
  Store,
  initialState,
  withCloud,
  withPreview,
  togglePick,
  clearAnchors,
  setDefectType,
  setParam,
  setSeed,
  withSynth,
  withCommit,
  withStatus,
  withBusy,
  canPreview,
  currentInstruction,
} from "./state.js";
import {
  DEFECT_TYPES,
  DefectType,
  TYPE_FIELDS,
  exportInstruction,
} from "./instruction.js";
import {
  Orbit,
  rotateOrbit,
  zoomOrbit,
  viewProjection,
  pickNearest,
} from "./picking.js";
import { PointRenderer, buildColorBuffer, flattenPositions } from "./renderer.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

// Same-origin by default; `?api=http://host:port` points the studio at a
// service running elsewhere (the service already answers CORS preflights).
const apiBase = new URLSearchParams(window.location.search).get("api") ?? "";
const api = new StudioApi(apiBase);
const store = new Store(initialState());
const gate = new PreviewGate();

const canvas = el<HTMLCanvasElement>("view");
const renderer = new PointRenderer(canvas);
let orbit: Orbit = { theta: 0.6, phi: 0.35, dist: 3.2, target: [0, 0, 0] };
let lastHash = "";

function currentMvp() {
  return viewProjection(orbit, canvas.clientWidth, canvas.clientHeight);
}

function anchorRows(): number[] {
  const s = store.get();
  if (!s.preview) return [];
  const bySource = new Map<number, number>();
  s.preview.source_indices.forEach((src, row) => bySource.set(src, row));
  const rows: number[] = [];
  for (const a of s.anchors) {
    const row = bySource.get(a);
    if (row !== undefined) rows.push(row);
  }
  return rows;
}

function redraw(): void {
  const s = store.get();
  if (s.preview) {
    const mask = s.synth ? s.synth.mask : null;
    renderer.setColors(buildColorBuffer(s.preview.count, mask, anchorRows()));
  }
  renderer.draw(currentMvp(), 5.0);
}

function syncControls(): void {
  const s = store.get();
  el<HTMLDivElement>("status").textContent = s.status;
  el<HTMLDivElement>("hash").textContent = lastHash ? `resp ${lastHash}` : "";
  el<HTMLButtonElement>("preview-btn").disabled = !canPreview(s);
  el<HTMLButtonElement>("commit-btn").disabled = !s.synth || s.busy;
  el<HTMLButtonElement>("export-btn").disabled = !s.cloudId;
  el<HTMLSpanElement>("anchor-count").textContent = String(s.anchors.length);
  el<HTMLTextAreaElement>("json-view").value = s.cloudId
    ? exportInstruction(currentInstruction(s))
    : "";
  const dl = el<HTMLAnchorElement>("download");
  if (s.commit) {
    dl.href = s.commit.links.download;
    dl.textContent = `download ${s.commit.id}.ply`;
    dl.style.display = "inline";
  } else {
    dl.style.display = "none";
  }
}

function rebuildParamPanel(): void {
  const s = store.get();
  const panel = el<HTMLDivElement>("params");
  panel.textContent = "";
  for (const f of TYPE_FIELDS[s.defectType]) {
    const row = document.createElement("label");
    row.className = "param-row";
    const name = document.createElement("span");
    name.textContent = f.label;
    const input = document.createElement("input");
    input.type = "range";
    input.min = String(f.min);
    input.max = String(f.max);
    input.step = String(f.step);
    input.value = String(s.form[f.name]);
    const val = document.createElement("span");
    val.className = "param-value";
    val.textContent = String(s.form[f.name]);
    input.addEventListener("input", () => {
      store.update((st) => setParam(st, f.name, Number(input.value)));
      val.textContent = input.value;
    });
    row.append(name, input, val);
    panel.append(row);
  }
}

async function refreshPreview(): Promise<void> {
  const s = store.get();
  if (!s.cloudId) return;
  const got = await gate.run(() => api.getPreview(s.cloudId as string, 2000));
  if (!got) return; // superseded by a newer request
  lastHash = got.hash;
  store.update((st) => withPreview(st, got.data));
  renderer.setPositions(flattenPositions(got.data.positions));
  redraw();
}

async function runSynthPreview(): Promise<void> {
  const s = store.get();
  if (!s.cloudId || !canPreview(s)) return;
  store.update((st) => withBusy(withStatus(st, "synthesizing..."), true));
  const json = exportInstruction(currentInstruction(s));
  try {
    const got = await gate.run(() =>
      api.synthesizePreview(s.cloudId as string, json, 2000),
    );
    if (!got) return;
    lastHash = got.hash;
    store.update((st) => withSynth(st, got.data));
    renderer.setPositions(flattenPositions(got.data.positions));
  } catch (err) {
    store.update((st) => withStatus(st, describe(err)));
  } finally {
    store.update((st) => withBusy(st, false));
    redraw();
  }
}

async function runCommit(): Promise<void> {
  const s = store.get();
  if (!s.cloudId || !s.synth) return;
  store.update((st) => withBusy(withStatus(st, "committing..."), true));
  const json = exportInstruction(currentInstruction(s));
  try {
    const res = await api.synthesizeCommit(s.cloudId, json);
    store.update((st) => withCommit(st, res));
  } catch (err) {
    store.update((st) => withStatus(st, describe(err)));
  } finally {
    store.update((st) => withBusy(st, false));
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return `${err.code}: ${err.message}`;
  return String(err);
}

function wireUpload(): void {
  const input = el<HTMLInputElement>("file");
  input.addEventListener("change", async () => {
    const file = input.files && input.files[0];
    if (!file) return;
    store.update((st) => withStatus(st, `uploading ${file.name}...`));
    try {
      const body = await file.arrayBuffer();
      const up = await api.uploadCloud(body);
      store.update((st) => withCloud(st, up.id, up.point_count));
      await refreshPreview();
    } catch (err) {
      store.update((st) => withStatus(st, describe(err)));
    }
  });
}

function wireCanvas(): void {
  let dragging = false;
  let moved = 0;
  let lastX = 0;
  let lastY = 0;
  canvas.addEventListener("mousedown", (ev) => {
    dragging = true;
    moved = 0;
    lastX = ev.clientX;
    lastY = ev.clientY;
  });
  window.addEventListener("mouseup", (ev) => {
    if (!dragging) return;
    dragging = false;
    if (moved < 4) {
      const rect = canvas.getBoundingClientRect();
      const s = store.get();
      if (!s.preview) return;
      const hit = pickNearest(
        s.preview.positions,
        currentMvp(),
        rect.width,
        rect.height,
        ev.clientX - rect.left,
        ev.clientY - rect.top,
      );
      if (hit) {
        const src = s.preview.source_indices[hit.index];
        store.update((st) => togglePick(st, src));
        redraw();
      }
    }
  });
  window.addEventListener("mousemove", (ev) => {
    if (!dragging) return;
    const dx = ev.clientX - lastX;
    const dy = ev.clientY - lastY;
    moved += Math.abs(dx) + Math.abs(dy);
    lastX = ev.clientX;
    lastY = ev.clientY;
    if (moved >= 4) {
      orbit = rotateOrbit(orbit, dx * 0.008, dy * 0.008);
      redraw();
    }
  });
  canvas.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    orbit = zoomOrbit(orbit, ev.deltaY > 0 ? 1.1 : 0.9);
    redraw();
  });
}

function wireControls(): void {
  const typeSel = el<HTMLSelectElement>("defect-type");
  for (const t of DEFECT_TYPES) {
    const opt = document.createElement("option");
    opt.value = t;
    opt.textContent = t;
    typeSel.append(opt);
  }
  typeSel.addEventListener("change", () => {
    store.update((st) => setDefectType(st, typeSel.value as DefectType));
    rebuildParamPanel();
    redraw();
  });
  const seedInput = el<HTMLInputElement>("seed");
  seedInput.value = String(store.get().seed);
  seedInput.addEventListener("change", () => {
    store.update((st) => setSeed(st, Number(seedInput.value) || 0));
  });
  el<HTMLButtonElement>("clear-btn").addEventListener("click", () => {
    store.update(clearAnchors);
    redraw();
  });
  el<HTMLButtonElement>("preview-btn").addEventListener("click", () => {
    void runSynthPreview();
  });
  el<HTMLButtonElement>("commit-btn").addEventListener("click", () => {
    void runCommit();
  });
  el<HTMLButtonElement>("export-btn").addEventListener("click", () => {
    const s = store.get();
    const blob = new Blob([exportInstruction(currentInstruction(s))], {
      type: "application/json",
    });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = "instruction.json";
    a.click();
    URL.revokeObjectURL(a.href);
  });
}

function resize(): void {
  const dpr = window.devicePixelRatio || 1;
  canvas.width = Math.floor(canvas.clientWidth * dpr);
  canvas.height = Math.floor(canvas.clientHeight * dpr);
  redraw();
}

store.subscribe(syncControls);
wireUpload();
wireCanvas();
wireControls();
rebuildParamPanel();
window.addEventListener("resize", resize);
resize();
syncControls();

void api
  .health()
  .then(() => store.update((st) => withStatus(st, "service up; upload a cloud")))
  .catch(() => store.update((st) => withStatus(st, "service unreachable")));
