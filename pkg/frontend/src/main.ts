/** Entry point: wires the API client, session state, and canvas together. */

import { ApiClient, type SkeletonInfo, type VideoInfo } from "./api.js";
import { canvasToNative, fitTransform, insideFrame, type ViewTransform } from "./coords.js";
import { drawScene, stretchImageData } from "./render.js";
import { AnnotationSession } from "./session.js";

const NATIVE_W = 640;
const NATIVE_H = 480;

const api = new ApiClient();

interface AppState {
  skeleton: SkeletonInfo;
  videos: VideoInfo[];
  session: AnnotationSession;
  /** Contrast-stretched frame, ready to blit. */
  frameImage: HTMLCanvasElement | null;
  transform: ViewTransform;
  /** Joints labeled on this frame, newest last, for undo. */
  history: string[];
}

let state: AppState | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const canvas = () => el<HTMLCanvasElement>("view");
const statusBar = () => el<HTMLDivElement>("status");
const errorBanner = () => el<HTMLDivElement>("error");
const videoSelect = () => el<HTMLSelectElement>("video");
const frameLabel = () => el<HTMLSpanElement>("frame-label");

function showError(message: string): void {
  const banner = errorBanner();
  banner.textContent = message;
  banner.hidden = false;
}

function clearError(): void {
  errorBanner().hidden = true;
}

function setStatus(message: string): void {
  statusBar().textContent = message;
}

async function loadFrameImage(videoId: string, frameIndex: number): Promise<HTMLCanvasElement> {
  const resp = await fetch(api.frameUrl(videoId, frameIndex));
  if (!resp.ok) throw new Error(`frame ${frameIndex} failed to load (${resp.status})`);
  const bitmap = await createImageBitmap(await resp.blob());
  const off = document.createElement("canvas");
  off.width = bitmap.width;
  off.height = bitmap.height;
  const ctx = off.getContext("2d");
  if (!ctx) throw new Error("2d context unavailable");
  ctx.drawImage(bitmap, 0, 0);
  const stretched = stretchImageData(ctx.getImageData(0, 0, off.width, off.height));
  ctx.putImageData(stretched, 0, 0);
  return off;
}

function redraw(): void {
  if (!state) return;
  const view = canvas();
  const ctx = view.getContext("2d");
  if (!ctx || !state.frameImage) return;
  drawScene(ctx, {
    image: state.frameImage,
    nativeW: NATIVE_W,
    nativeH: NATIVE_H,
    transform: state.transform,
    session: state.session,
    skeleton: state.skeleton,
  });
  const s = state.session;
  frameLabel().textContent = `frame ${s.frameIndex} (${s.frameIndices.indexOf(s.frameIndex) + 1}/${s.frameIndices.length})`;
  const active = s.activeJoint();
  const flag = s.dirty ? " [unsaved]" : "";
  setStatus(
    active === null
      ? `all ${s.joints.length} joints labeled${flag}`
      : `click to place ${active} (${s.labeledCount()}/${s.joints.length})${flag}`,
  );
}

async function showCurrentFrame(): Promise<void> {
  if (!state) return;
  const s = state.session;
  try {
    state.frameImage = await loadFrameImage(s.videoId, s.frameIndex);
    const annotations = await api.getAnnotations(s.videoId);
    s.loadExisting(annotations.get(s.frameIndex));
    state.history = [];
    clearError();
  } catch (err) {
    showError(err instanceof Error ? err.message : String(err));
  }
  redraw();
}

async function saveCurrent(): Promise<boolean> {
  if (!state) return false;
  const s = state.session;
  const joints = s.payload();
  if (joints.length === 0) return true;
  try {
    await api.putAnnotation(s.videoId, s.frameIndex, joints);
    s.markSaved();
    clearError();
    redraw();
    return true;
  } catch (err) {
    showError(`save failed, changes kept locally: ${err instanceof Error ? err.message : err}`);
    return false;
  }
}

async function navigate(direction: 1 | -1): Promise<void> {
  if (!state) return;
  const s = state.session;
  if (s.dirty && !(await saveCurrent())) return;
  if (!s.step(direction)) return;
  await showCurrentFrame();
}

async function switchVideo(videoId: string): Promise<void> {
  if (!state) return;
  const info = state.videos.find((v) => v.id === videoId);
  if (!info) return;
  if (state.session.dirty && !(await saveCurrent())) return;
  state.session = new AnnotationSession(videoId, state.skeleton.joints, info.frame_indices);
  await showCurrentFrame();
}

function onCanvasClick(event: MouseEvent): void {
  if (!state) return;
  const rect = canvas().getBoundingClientRect();
  const p = canvasToNative(
    event.clientX - rect.left,
    event.clientY - rect.top,
    state.transform,
  );
  if (!insideFrame(p, NATIVE_W, NATIVE_H)) {
    setStatus("click inside the frame");
    return;
  }
  const joint = state.session.place(p.x, p.y);
  if (joint !== null) state.history.push(joint);
  redraw();
}

function onKeyDown(event: KeyboardEvent): void {
  if (!state) return;
  switch (event.key) {
    case "x": {
      const joint = state.session.skip();
      if (joint !== null) state.history.push(joint);
      redraw();
      break;
    }
    case "u": {
      const joint = state.history.pop();
      if (joint !== undefined) {
        state.session.clearJoint(joint);
        state.session.selectJoint(joint);
        redraw();
      }
      break;
    }
    case "s":
      void saveCurrent();
      break;
    case "ArrowRight":
    case "n":
      void navigate(1);
      break;
    case "ArrowLeft":
    case "p":
      void navigate(-1);
      break;
  }
}

async function init(): Promise<void> {
  try {
    const [skeleton, listing] = await Promise.all([api.getSkeleton(), api.listVideos()]);
    const first = listing.videos[0];
    if (!first) {
      showError("the manifest has no videos");
      return;
    }
    const view = canvas();
    state = {
      skeleton,
      videos: listing.videos,
      session: new AnnotationSession(first.id, skeleton.joints, first.frame_indices),
      frameImage: null,
      transform: fitTransform(NATIVE_W, NATIVE_H, view.width, view.height),
      history: [],
    };
    const select = videoSelect();
    select.innerHTML = "";
    for (const video of listing.videos) {
      const option = document.createElement("option");
      option.value = video.id;
      option.textContent = `${video.id} (${video.frame_indices.length} frames)`;
      select.appendChild(option);
    }
    select.addEventListener("change", () => void switchVideo(select.value));
    view.addEventListener("click", onCanvasClick);
    document.addEventListener("keydown", onKeyDown);
    el<HTMLButtonElement>("prev").addEventListener("click", () => void navigate(-1));
    el<HTMLButtonElement>("next").addEventListener("click", () => void navigate(1));
    el<HTMLButtonElement>("save").addEventListener("click", () => void saveCurrent());
    el<HTMLButtonElement>("skip").addEventListener("click", () => {
      if (!state) return;
      const joint = state.session.skip();
      if (joint !== null) state.history.push(joint);
      redraw();
    });
    await showCurrentFrame();
  } catch (err) {
    showError(err instanceof Error ? err.message : String(err));
  }
}

void init();
