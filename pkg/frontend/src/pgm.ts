/**
 * Binary PGM (P5) encoding for mask export/import.
 *
 * The service accepts any 8-bit grayscale raster; PGM is lossless and
 * trivial to emit without a canvas, so exported masks re-import
 * bit-exactly.
 */
import { MaskBuffer } from "./maskBuffer.js";

export function encodePGM(mask: MaskBuffer): Uint8Array {
  const header = `P5\n${mask.width} ${mask.height}\n255\n`;
  const headerBytes = new TextEncoder().encode(header);
  const out = new Uint8Array(headerBytes.length + mask.data.length);
  out.set(headerBytes, 0);
  out.set(mask.data, headerBytes.length);
  return out;
}

function isWhitespace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d;
}

export function decodePGM(bytes: Uint8Array): MaskBuffer {
  let pos = 0;

  function token(): string {
    while (pos < bytes.length && isWhitespace(bytes[pos])) pos++;
    if (bytes[pos] === 0x23) { // '#' comment runs to end of line
      while (pos < bytes.length && bytes[pos] !== 0x0a) pos++;
      return token();
    }
    const start = pos;
    while (pos < bytes.length && !isWhitespace(bytes[pos])) pos++;
    return new TextDecoder().decode(bytes.subarray(start, pos));
  }

  const magic = token();
  if (magic !== "P5") {
    throw new Error(`not a binary PGM file (magic ${magic})`);
  }
  const width = Number(token());
  const height = Number(token());
  const maxval = Number(token());
  if (!Number.isInteger(width) || !Number.isInteger(height) ||
      maxval !== 255) {
    throw new Error("unsupported PGM header");
  }
  pos++; // single whitespace after maxval
  const expected = width * height;
  const pixels = bytes.subarray(pos, pos + expected);
  if (pixels.length !== expected) {
    throw new Error(
      `PGM truncated: expected ${expected} pixels, got ${pixels.length}`);
  }
  return new MaskBuffer(width, height, Uint8Array.from(pixels));
}
