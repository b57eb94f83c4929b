/**
 * Browser entry point. Owns the DOM, the frame loop, and the single
 * interaction thread; all game state lives in SessionController and is
 * whatever the service last acknowledged.
 */

import { ApiClient, ApiError } from "./api.js";
import { PlacementError } from "./placement.js";
import { drawBriefing, drawSummary, drawTrial, fieldTransform, toField } from "./render.js";
import { SessionController } from "./session.js";

interface PageConfig {
  serverUrl: string;
  patientId: string;
}

function readConfig(): PageConfig {
  const params = new URLSearchParams(window.location.search);
  return {
    serverUrl: params.get("server") ?? window.location.origin,
    patientId: params.get("patient") ?? "demo",
  };
}

const config = readConfig();
const api = new ApiClient(config.serverUrl);

const canvas = document.getElementById("field") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const startButton = document.getElementById("start") as HTMLButtonElement;
const quitButton = document.getElementById("quit") as HTMLButtonElement;
const banner = document.getElementById("banner") as HTMLDivElement;
const bannerText = document.getElementById("banner-text") as HTMLSpanElement;
const retryButton = document.getElementById("retry") as HTMLButtonElement;
const configLine = document.getElementById("config") as HTMLParagraphElement;

configLine.textContent = `server ${config.serverUrl} - patient ${config.patientId}`;

let controller: SessionController | null = null;
let t0 = 0;
let paused = false;
let finished = false;
let finalizing = false;
let timeoutSentFor: number | null = null;
let quitRequested = false;
let pendingRetry: (() => Promise<unknown>) | null = null;

function nowS(): number {
  return (performance.now() - t0) / 1000;
}

function showBanner(message: string, retryable: boolean): void {
  banner.hidden = false;
  bannerText.textContent = message;
  retryButton.hidden = !retryable;
}

function hideBanner(): void {
  banner.hidden = true;
  pendingRetry = null;
}

function fail(message: string): void {
  finished = true;
  quitButton.disabled = true;
  showBanner(message, false);
}

/** Run one server-bound action; network loss pauses the game until retried. */
function dispatch(action: () => Promise<unknown>): void {
  action().then(
    () => {
      if (pendingRetry === action) {
        paused = false;
        hideBanner();
      }
    },
    (err) => {
      if (err instanceof ApiError) {
        fail(`service refused the request: ${err.message}`);
        return;
      }
      paused = true;
      pendingRetry = action;
      showBanner("connection lost - game paused", true);
    },
  );
}

retryButton.addEventListener("click", () => {
  const action = pendingRetry;
  if (action) {
    retryButton.hidden = true;
    dispatch(action);
  }
});

async function finishUp(): Promise<void> {
  if (finalizing || !controller) return;
  finalizing = true;
  quitButton.disabled = true;
  try {
    const done = await controller.finish();
    finished = true;
    drawSummary(ctx, done.report.metrics);
  } catch (err) {
    if (err instanceof ApiError) {
      fail(`could not close the session: ${err.message}`);
    } else {
      finalizing = false;
      paused = true;
      pendingRetry = () => finishUp();
      showBanner("connection lost - game paused", true);
    }
  }
}

function frame(): void {
  if (!controller || finished) return;
  let view;
  try {
    view = controller.view(nowS());
  } catch (err) {
    if (err instanceof PlacementError) {
      fail(`cannot lay out this level: ${err.message}`);
      return;
    }
    throw err;
  }
  if (view.phase === "ended") {
    void finishUp();
    return;
  }
  drawTrial(ctx, view, controller.effects());
  if (
    !paused &&
    !quitRequested &&
    view.phase === "in-trial" &&
    view.trialIndex !== null &&
    view.trialStartS !== null &&
    view.remainingS <= 0 &&
    timeoutSentFor !== view.trialIndex
  ) {
    // the window closed with no click; report it at the exact window end
    timeoutSentFor = view.trialIndex;
    const atS = view.trialStartS + view.ticket.theta_s;
    dispatch(() => controller!.timeout(atS));
  }
  window.requestAnimationFrame(frame);
}

canvas.addEventListener("click", (ev) => {
  if (!controller || paused || finished || finalizing || quitRequested) return;
  const rect = canvas.getBoundingClientRect();
  const px = (ev.clientX - rect.left) * (canvas.width / rect.width);
  const py = (ev.clientY - rect.top) * (canvas.height / rect.height);
  const [x, y] = toField(fieldTransform(canvas.width, canvas.height), px, py);
  const atS = nowS();
  dispatch(() => controller!.click(x, y, atS));
});

quitButton.addEventListener("click", () => {
  if (!controller || paused || finished || finalizing) return;
  quitRequested = true;
  const atS = nowS();
  dispatch(() => controller!.quit(atS));
});

startButton.addEventListener("click", () => {
  startButton.disabled = true;
  dispatch(async () => {
    try {
      await api.getPatient(config.patientId);
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        await api.createPatient(config.patientId);
      } else {
        throw err;
      }
    }
    const plan = await api.suggestedPlan(config.patientId);
    const next = new SessionController(api);
    try {
      await next.start(config.patientId, plan.plan_id);
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        fail("another session is already running for this patient");
        return;
      }
      throw err;
    }
    controller = next;
    t0 = performance.now();
    quitButton.disabled = false;
    window.requestAnimationFrame(frame);
  });
});

quitButton.disabled = true;
drawBriefing(ctx, null);
