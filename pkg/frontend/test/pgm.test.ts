import { describe, expect, it } from "vitest";

import { MaskBuffer } from "../src/maskBuffer.js";
import { decodePGM, encodePGM } from "../src/pgm.js";

describe("PGM encoding", () => {
  it("round-trips bit-exactly", () => {
    const mask = new MaskBuffer(37, 23);
    mask.stampDisc({ x: 10, y: 10 }, 6);
    mask.stampDisc({ x: 30, y: 5 }, 3);
    const decoded = decodePGM(encodePGM(mask));
    expect(decoded.width).toBe(37);
    expect(decoded.height).toBe(23);
    expect(decoded.equals(mask)).toBe(true);
  });

  it("emits a canonical P5 header", () => {
    const bytes = encodePGM(new MaskBuffer(4, 2));
    const header = new TextDecoder().decode(bytes.subarray(0, 11));
    expect(header).toBe("P5\n4 2\n255\n");
    expect(bytes.length).toBe(11 + 8); // header + pixels
  });

  it("tolerates comments in the header", () => {
    const body = new Uint8Array([7, 8, 9, 10, 11, 12]);
    const header = new TextEncoder().encode("P5\n# comment\n3 2\n255\n");
    const file = new Uint8Array(header.length + body.length);
    file.set(header);
    file.set(body, header.length);
    const decoded = decodePGM(file);
    expect(Array.from(decoded.data)).toEqual([7, 8, 9, 10, 11, 12]);
  });

  it("rejects non-PGM and truncated files", () => {
    expect(() => decodePGM(new TextEncoder().encode("P6\n1 1\n255\nxxx")))
      .toThrow(/not a binary PGM/);
    expect(() => decodePGM(new TextEncoder().encode("P5\n4 4\n255\nxy")))
      .toThrow(/truncated/);
  });
});
