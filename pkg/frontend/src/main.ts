/**
 * Browser wiring: load an image, paint a mask over it, send both to the
 * inpainting service, inspect the result with a before/after slider,
 * then optionally keep editing the result.
 */
import { InpaintClient, ServiceError } from "./api.js";
import { Point } from "./maskBuffer.js";
import { EditorSession, SourceImage } from "./session.js";

const params = new URLSearchParams(window.location.search);
const serviceUrl = params.get("service") ?? "http://localhost:8000";
const client = new InpaintClient(serviceUrl);

let session: EditorSession | null = null;
let sourceBitmap: ImageBitmap | null = null;
let resultBitmap: ImageBitmap | null = null;
let sliderPosition = 0.5;
let stroke: Point[] = [];
let drawing = false;

const fileInput = document.getElementById("file") as HTMLInputElement;
const modelSelect = document.getElementById("model") as HTMLSelectElement;
const radiusInput = document.getElementById("radius") as HTMLInputElement;
const modeInput = document.getElementById("erase") as HTMLInputElement;
const undoButton = document.getElementById("undo") as HTMLButtonElement;
const redoButton = document.getElementById("redo") as HTMLButtonElement;
const clearButton = document.getElementById("clear") as HTMLButtonElement;
const inpaintButton = document.getElementById("inpaint") as HTMLButtonElement;
const continueButton = document.getElementById("continue") as HTMLButtonElement;
const sliderInput = document.getElementById("slider") as HTMLInputElement;
const statusLine = document.getElementById("status") as HTMLElement;
const toastBox = document.getElementById("toast") as HTMLElement;
const canvas = document.getElementById("editor") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;

function bytesToBlob(bytes: Uint8Array, type: string): Blob {
  // fresh copy pins the backing store to a plain ArrayBuffer
  return new Blob([new Uint8Array(bytes)], { type });
}

function toast(message: string): void {
  toastBox.textContent = message;
  toastBox.classList.add("visible");
  window.setTimeout(() => toastBox.classList.remove("visible"), 4000);
}

function setControlsEnabled(): void {
  const busy = session?.inFlight ?? false;
  inpaintButton.disabled = !session || busy;
  undoButton.disabled = !session || !session.canUndo || busy;
  redoButton.disabled = !session || !session.canRedo || busy;
  clearButton.disabled = !session || busy;
  continueButton.disabled = !session || !session.latestResult || busy;
}

function redraw(): void {
  if (!session || !sourceBitmap) return;
  const { width, height } = session.source;
  canvas.width = width;
  canvas.height = height;
  ctx.drawImage(sourceBitmap, 0, 0);

  if (resultBitmap) {
    const split = Math.round(width * sliderPosition);
    ctx.drawImage(resultBitmap, split, 0, width - split, height,
                  split, 0, width - split, height);
    ctx.fillStyle = "rgba(255,255,255,0.9)";
    ctx.fillRect(split - 1, 0, 2, height);
  }

  // translucent red hole overlay
  const overlay = ctx.getImageData(0, 0, width, height);
  const mask = session.mask.data;
  for (let i = 0; i < mask.length; i++) {
    if (mask[i] !== 0) {
      overlay.data[4 * i] = Math.min(255, overlay.data[4 * i] + 120);
      overlay.data[4 * i + 1] = overlay.data[4 * i + 1] * 0.4;
      overlay.data[4 * i + 2] = overlay.data[4 * i + 2] * 0.4;
    }
  }
  ctx.putImageData(overlay, 0, 0);
  setControlsEnabled();
}

function canvasPoint(event: PointerEvent): Point {
  const rect = canvas.getBoundingClientRect();
  return {
    x: (event.clientX - rect.left) * (canvas.width / rect.width),
    y: (event.clientY - rect.top) * (canvas.height / rect.height),
  };
}

async function loadFile(file: File): Promise<void> {
  const bytes = new Uint8Array(await file.arrayBuffer());
  let bitmap: ImageBitmap;
  try {
    bitmap = await createImageBitmap(new Blob([bytes], { type: file.type }));
  } catch {
    toast(`${file.name} is not a readable raster image`);
    return;
  }
  const source: SourceImage = {
    bytes,
    width: bitmap.width,
    height: bitmap.height,
    mime: file.type || "image/png",
  };
  session = new EditorSession(source, modelSelect.value || "default");
  sourceBitmap = bitmap;
  resultBitmap = null;
  statusLine.textContent =
    `${file.name}: ${bitmap.width}x${bitmap.height}`;
  redraw();
}

async function refreshModels(): Promise<void> {
  try {
    const models = await client.listModels();
    modelSelect.replaceChildren();
    for (const model of models) {
      const option = document.createElement("option");
      option.value = model.model_id;
      option.textContent = model.model_id;
      modelSelect.append(option);
    }
    if (session && models.length > 0) {
      session.modelId = modelSelect.value;
    }
  } catch {
    toast(`cannot reach service at ${serviceUrl}`);
  }
}

async function runInpaint(): Promise<void> {
  if (!session || session.inFlight) return;
  setControlsEnabled();
  inpaintButton.textContent = "inpainting...";
  try {
    session.modelId = modelSelect.value || session.modelId;
    const result = await session.requestInpaint(client);
    resultBitmap = await createImageBitmap(
      bytesToBlob(result.imageBytes, "image/png"));
    statusLine.textContent =
      `inpainted in ${result.timingMs.toFixed(0)} ms`;
  } catch (err) {
    // non-blocking: the session is unchanged on failure
    toast(err instanceof ServiceError
      ? `service error ${err.status}: ${err.message}`
      : `request failed: ${String(err)}`);
  } finally {
    inpaintButton.textContent = "inpaint";
    redraw();
  }
}

async function continueFromResult(): Promise<void> {
  if (!session?.latestResult) return;
  const next = session.continueFromResult();
  const bitmap = await createImageBitmap(
    bytesToBlob(next.source.bytes, "image/png"));
  session = next;
  sourceBitmap = bitmap;
  resultBitmap = null;
  statusLine.textContent = "editing previous result";
  redraw();
}

canvas.addEventListener("pointerdown", (event) => {
  if (!session || session.inFlight) return;
  drawing = true;
  canvas.setPointerCapture(event.pointerId);
  stroke = [canvasPoint(event)];
});

canvas.addEventListener("pointermove", (event) => {
  if (!drawing || !session) return;
  stroke.push(canvasPoint(event));
  // live preview: paint incrementally without snapshotting
  session.mask.stampPath(stroke.slice(-2), session.brush.radius,
                         session.brush.mode);
  redraw();
});

canvas.addEventListener("pointerup", () => {
  if (!drawing || !session) return;
  drawing = false;
  session.brushStroke(stroke);
  stroke = [];
  redraw();
});

fileInput.addEventListener("change", () => {
  const file = fileInput.files?.[0];
  if (file) void loadFile(file);
});
radiusInput.addEventListener("input", () => {
  if (session) session.brush.radius = Number(radiusInput.value);
});
modeInput.addEventListener("change", () => {
  if (session) session.brush.mode = modeInput.checked ? "erase" : "draw";
});
undoButton.addEventListener("click", () => {
  session?.undo();
  redraw();
});
redoButton.addEventListener("click", () => {
  session?.redo();
  redraw();
});
clearButton.addEventListener("click", () => {
  session?.clearMask();
  redraw();
});
sliderInput.addEventListener("input", () => {
  sliderPosition = Number(sliderInput.value) / 100;
  redraw();
});
inpaintButton.addEventListener("click", () => void runInpaint());
continueButton.addEventListener("click", () => void continueFromResult());

setControlsEnabled();
void refreshModels();
void client.health().then((status) => {
  statusLine.textContent = status.ready
    ? `service ready at ${serviceUrl}`
    : `service at ${serviceUrl} is not ready yet`;
}).catch(() => {
  statusLine.textContent = `service unreachable at ${serviceUrl}`;
});
