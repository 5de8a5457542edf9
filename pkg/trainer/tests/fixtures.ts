import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import { crc32, deflateSync } from "node:zlib";

/** Minimal grayscale PNG encoder; enough for the toolkit to read sizes. */
export function encodePng(width: number, height: number, shade = 240): Buffer {
  const signature = Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);

  const chunk = (type: string, data: Buffer): Buffer => {
    const length = Buffer.alloc(4);
    length.writeUInt32BE(data.length);
    const body = Buffer.concat([Buffer.from(type, "ascii"), data]);
    const crc = Buffer.alloc(4);
    crc.writeUInt32BE(crc32(body) >>> 0);
    return Buffer.concat([length, body, crc]);
  };

  const ihdr = Buffer.alloc(13);
  ihdr.writeUInt32BE(width, 0);
  ihdr.writeUInt32BE(height, 4);
  ihdr[8] = 8; // bit depth
  ihdr[9] = 0; // grayscale
  // compression, filter, interlace all 0

  // each scanline: filter byte 0 + width pixels
  const raw = Buffer.alloc(height * (width + 1), shade);
  for (let y = 0; y < height; y++) {
    raw[y * (width + 1)] = 0;
  }

  return Buffer.concat([
    signature,
    chunk("IHDR", ihdr),
    chunk("IDAT", deflateSync(raw)),
    chunk("IEND", Buffer.alloc(0)),
  ]);
}

export interface FixtureBox {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
  text: string;
}

export interface FixturePage {
  stem: string;
  width: number;
  height: number;
  boxes: FixtureBox[];
}

/** Three receipt-shaped pages tall enough for a 30-chunk first stage. */
export const FIXTURE_PAGES: FixturePage[] = [
  {
    stem: "r1", width: 120, height: 300,
    boxes: [
      { x0: 10, y0: 10, x1: 110, y1: 30, text: "HELLO WORLD" },
      { x0: 10, y0: 60, x1: 60, y1: 80, text: "FOO" },
      { x0: 70, y0: 60, x1: 110, y1: 80, text: "BAR" },
      { x0: 10, y0: 200, x1: 110, y1: 220, text: "TOTAL 9.99" },
    ],
  },
  {
    stem: "r2", width: 100, height: 310,
    boxes: [
      { x0: 5, y0: 5, x1: 95, y1: 25, text: "RECEIPT" },
      { x0: 5, y0: 40, x1: 40, y1: 60, text: "A1" },
      { x0: 50, y0: 42, x1: 95, y1: 58, text: "B2" },
      { x0: 5, y0: 100, x1: 95, y1: 120, text: "SUM" },
      { x0: 5, y0: 250, x1: 95, y1: 270, text: "END" },
    ],
  },
  {
    stem: "r3", width: 80, height: 305,
    boxes: [
      { x0: 5, y0: 30, x1: 75, y1: 50, text: "ONE" },
      { x0: 5, y0: 90, x1: 75, y1: 110, text: "TWO" },
    ],
  },
];

/** Write PNG + annotation pairs the dataset builder can ingest. */
export function writeFixtureDataset(root: string, split = "train"): string {
  const base = join(root, split);
  mkdirSync(base, { recursive: true });
  for (const page of FIXTURE_PAGES) {
    writeFileSync(join(base, `${page.stem}.png`),
                  encodePng(page.width, page.height));
    const lines = page.boxes.map(
      (b) => `${b.x0},${b.y0},${b.x1},${b.y0},${b.x1},${b.y1},${b.x0},${b.y1},${b.text}`,
    );
    writeFileSync(join(base, `${page.stem}.txt`), lines.join("\n") + "\n", "utf-8");
  }
  return root;
}
