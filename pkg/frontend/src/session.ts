/**
 * Editor session state: the source image, its mask layer, brush state,
 * undo history, and the inpainting result history.
 *
 * The session never touches source pixels; only the mask layer and the
 * result history change. Mask dimensions always equal image dimensions.
 */
import { InpaintClient, InpaintResult } from "./api.js";
import { BrushMode, MaskBuffer, Point } from "./maskBuffer.js";
import { encodePGM } from "./pgm.js";
import { UndoStack } from "./undoStack.js";

export interface SourceImage {
  /** encoded raster bytes, sent to the service verbatim */
  bytes: Uint8Array;
  width: number;
  height: number;
  mime: string;
}

export interface BrushState {
  radius: number;
  mode: BrushMode;
}

export class EditorSession {
  readonly source: SourceImage;
  mask: MaskBuffer;
  brush: BrushState = { radius: 16, mode: "draw" };
  modelId: string;
  results: InpaintResult[] = [];
  private history: UndoStack<MaskBuffer>;
  private pending = false;

  constructor(source: SourceImage, modelId = "default") {
    if (source.width <= 0 || source.height <= 0) {
      throw new Error("source image has no pixels");
    }
    this.source = source;
    this.modelId = modelId;
    this.mask = new MaskBuffer(source.width, source.height);
    this.history = new UndoStack(this.mask.clone());
  }

  get undoDepth(): number {
    return this.history.depth;
  }

  get canUndo(): boolean {
    return this.history.canUndo;
  }

  get canRedo(): boolean {
    return this.history.canRedo;
  }

  get inFlight(): boolean {
    return this.pending;
  }

  get latestResult(): InpaintResult | undefined {
    return this.results[this.results.length - 1];
  }

  /** Stamp discs along the path and snapshot the mask for undo. */
  brushStroke(path: Point[], radius?: number, mode?: BrushMode): void {
    this.mask.stampPath(path, radius ?? this.brush.radius,
                        mode ?? this.brush.mode);
    this.history.push(this.mask.clone());
  }

  undo(): void {
    this.mask = this.history.undo().clone();
  }

  redo(): void {
    this.mask = this.history.redo().clone();
  }

  clearMask(): void {
    this.mask.clear();
    this.history.push(this.mask.clone());
  }

  /** 8-bit grayscale export (255 = hole), matching the service contract. */
  exportMask(): Uint8Array {
    return encodePGM(this.mask);
  }

  /**
   * Send the current image+mask to the service and append the result.
   * At most one request is in flight; concurrent calls are rejected.
   */
  async requestInpaint(client: InpaintClient): Promise<InpaintResult> {
    if (this.pending) {
      throw new Error("an inpaint request is already in flight");
    }
    this.pending = true;
    try {
      const result = await client.inpaint({
        imageBytes: this.source.bytes,
        maskBytes: this.exportMask(),
        modelId: this.modelId,
      });
      this.results.push(result);
      return result;
    } finally {
      this.pending = false;
    }
  }

  /**
   * Start a new editing pass on the latest result: it becomes the source
   * and the mask/undo history reset. Returns the new session.
   */
  continueFromResult(): EditorSession {
    const latest = this.latestResult;
    if (!latest) {
      throw new Error("no result to continue from");
    }
    const next = new EditorSession({
      bytes: latest.imageBytes,
      width: latest.width,
      height: latest.height,
      mime: "image/png",
    }, this.modelId);
    next.brush = { ...this.brush };
    return next;
  }
}
