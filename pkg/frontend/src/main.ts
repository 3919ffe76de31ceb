// Studio app wiring: load or create a session, then keep the viewport,
// overlay, element list, score panel, and history in lockstep with the
// store's current snapshot.

import { SessionClient } from "./api";
import {
  createSession,
  loadSession,
  refreshSession,
  submitEdit,
} from "./controller";
import { commandFromForm, STYLE_CHOICES, VERB_CHOICES, type EditFormValue } from "./forms";
import { drawOverlay, pickElement } from "./overlay";
import { SessionStore } from "./state";
import { isGreenspace, programElements } from "./types";
import { SceneViewer } from "./viewer";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("base") ?? "";
const client = new SessionClient(baseUrl);
const store = new SessionStore();

const el = (id: string) => document.getElementById(id)!;
const viewer = new SceneViewer(el("viewport") as HTMLCanvasElement);
const overlayCanvas = el("overlay") as HTMLCanvasElement;

viewer.onSelect = (id) => store.select(id);
overlayCanvas.addEventListener("click", (event) => {
  const snapshot = store.current;
  if (!snapshot) return;
  const rect = overlayCanvas.getBoundingClientRect();
  store.select(
    pickElement(
      snapshot.program,
      overlayCanvas.width,
      overlayCanvas.height,
      ((event.clientX - rect.left) / rect.width) * overlayCanvas.width,
      ((event.clientY - rect.top) / rect.height) * overlayCanvas.height,
    ),
  );
});

function render(): void {
  const snapshot = store.current;
  el("session-label").textContent = snapshot
    ? `session ${snapshot.sessionId} · revision ${snapshot.revision}`
    : "no session";
  el("create-panel").style.display = snapshot ? "none" : "block";
  el("studio-panel").style.display = snapshot ? "grid" : "none";

  const banner = el("stale-banner");
  if (store.staleRevision !== null) {
    banner.style.display = "block";
    banner.textContent =
      `Your edit targeted a stale revision; the server is at ` +
      `revision ${store.staleRevision}.`;
  } else {
    banner.style.display = "none";
  }
  const errorBox = el("error-banner");
  errorBox.style.display = store.lastError ? "block" : "none";
  errorBox.textContent = store.lastError ?? "";

  if (!snapshot) return;
  viewer.setScene(snapshot.scene);
  viewer.select(store.selectedElementId);
  drawOverlay(overlayCanvas, snapshot.program, store.selectedElementId);

  const list = el("element-list");
  list.innerHTML = "";
  for (const element of programElements(snapshot.program)) {
    const row = document.createElement("div");
    row.className =
      "element-row" + (element.id === store.selectedElementId ? " selected" : "");
    const floors = element.floor_count !== undefined ? ` · ${element.floor_count}F` : "";
    row.textContent = `${element.id} (${element.type}${floors})`;
    row.onclick = () => store.select(element.id);
    list.appendChild(row);
  }

  const score = snapshot.score;
  el("score-panel").innerHTML = score
    ? `<b>S<sub>spatial</sub> ${score.s_spatial.toFixed(2)}</b>` +
      `<span>align ${score.s_align.toFixed(1)}</span>` +
      `<span>plau ${score.s_plau.toFixed(1)}</span>` +
      `<span>overlap ${score.s_overlap.toFixed(1)}</span>` +
      `<span>density ${score.s_density.toFixed(1)}</span>` +
      `<em>${score.semantic_source}</em>`
    : "score unavailable";

  const historyBox = el("history");
  historyBox.innerHTML = "";
  for (const entry of [...store.history].reverse()) {
    const row = document.createElement("div");
    row.className = "history-row";
    row.textContent = `r${entry.revision}: ${entry.command}`;
    if (entry.warnings.length) row.title = entry.warnings.join("\n");
    historyBox.appendChild(row);
  }

  renderFormFields();
}

// --- edit form -------------------------------------------------------------

function verbSelect(): HTMLSelectElement {
  return el("verb") as HTMLSelectElement;
}

function renderFormFields(): void {
  const snapshot = store.current;
  if (!snapshot) return;
  const verb = verbSelect().value;
  const fields = el("form-fields");
  const elements = programElements(snapshot.program);
  const buildings = elements.filter((e) => !isGreenspace(e));
  const targetOptions = (onlyBuildings: boolean) =>
    (onlyBuildings ? buildings : elements)
      .map((e) => `<option ${e.id === store.selectedElementId ? "selected" : ""}>${e.id}</option>`)
      .join("");
  let html = "";
  switch (verb) {
    case "set_floor_count":
      html = `<select id="arg-target">${targetOptions(true)}</select>
              <input id="arg-floors" type="number" min="1" value="5">`;
      break;
    case "scale_density":
      html = `<input id="arg-density" type="number" min="0.05" max="0.95"
                     step="0.05" value="0.65">
              <label><input id="arg-move" type="checkbox"> allow move</label>`;
      break;
    case "set_style":
      html = `<select id="arg-target"><option>block</option>${targetOptions(true)}</select>
              <select id="arg-style">${STYLE_CHOICES.map((s) => `<option>${s}</option>`).join("")}</select>`;
      break;
    case "set_component":
      html = `<select id="arg-target">${targetOptions(true)}</select>
              <select id="arg-ctype"><option>window</option><option>door</option><option>roof</option></select>
              <input id="arg-desc" placeholder="description, comma, separated">`;
      break;
    case "remove_element":
      html = `<select id="arg-target">${targetOptions(false)}</select>`;
      break;
    case "retype_element":
      html = `<select id="arg-target">${targetOptions(false)}</select>
              <input id="arg-newtype" placeholder="new type" value="office">`;
      break;
    case "add_element":
      html = `<input id="arg-id" placeholder="id" value="new_1">
              <input id="arg-etype" placeholder="type" value="office">
              <input id="arg-polygon" placeholder="[[x,y],...]"
                     value="[[60,60],[75,60],[75,75],[60,75]]">
              <input id="arg-floors" type="number" min="1" value="4">`;
      break;
  }
  fields.innerHTML = html;
}

function readForm(): EditFormValue | null {
  const verb = verbSelect().value;
  const value = (id: string) => (el(id) as HTMLInputElement).value;
  try {
    switch (verb) {
      case "set_floor_count":
        return { verb, target: value("arg-target"), floors: Number(value("arg-floors")) };
      case "scale_density":
        return {
          verb,
          targetDensity: Number(value("arg-density")),
          allowMove: (el("arg-move") as HTMLInputElement).checked,
        };
      case "set_style":
        return { verb, target: value("arg-target"), style: value("arg-style") };
      case "set_component":
        return {
          verb,
          target: value("arg-target"),
          componentType: value("arg-ctype"),
          description: value("arg-desc"),
        };
      case "remove_element":
        return { verb, target: value("arg-target") };
      case "retype_element":
        return { verb, target: value("arg-target"), newType: value("arg-newtype") };
      case "add_element":
        return {
          verb,
          id: value("arg-id"),
          elementType: value("arg-etype"),
          polygon: JSON.parse(value("arg-polygon")),
          floorCount: Number(value("arg-floors")),
        };
      default:
        return null;
    }
  } catch (error) {
    store.setError(`bad form input: ${error}`);
    return null;
  }
}

// --- bootstrapping -----------------------------------------------------------

async function init(): Promise<void> {
  const verbBox = verbSelect();
  verbBox.innerHTML = VERB_CHOICES.map((v) => `<option>${v}</option>`).join("");
  verbBox.onchange = renderFormFields;

  el("submit-edit").onclick = async () => {
    const form = readForm();
    if (form) await submitEdit(client, store, commandFromForm(form));
  };
  el("refresh").onclick = () => refreshSession(client, store);
  el("create-session").onclick = async () => {
    try {
      const text = (el("program-input") as HTMLTextAreaElement).value;
      const prompt = (el("prompt-input") as HTMLInputElement).value;
      const id = await createSession(client, store, JSON.parse(text), undefined, prompt);
      const url = new URL(window.location.href);
      url.searchParams.set("session", id);
      window.history.replaceState(null, "", url);
    } catch (error) {
      store.setError(error instanceof Error ? error.message : String(error));
    }
  };

  store.subscribe(render);
  const sessionId = params.get("session");
  if (sessionId) {
    try {
      await loadSession(client, store, sessionId);
    } catch (error) {
      store.setError(`cannot load session: ${error}`);
    }
  }
  render();
}

init();
