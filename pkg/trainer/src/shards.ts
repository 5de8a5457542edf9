import { readFileSync } from "node:fs";

/** One training/eval chunk as emitted by the dataset builder. */
export interface ShardRecord {
  page_id: string;
  y_start: number;
  y_end: number;
  label: string;
  stage_L: number;
  sample_index: number;
  crop_path: string | null;
}

/** Key that pairs a record with its hypothesis across files. */
export function recordKey(record: ShardRecord): string {
  return `${record.page_id}_L${record.stage_L}_k${record.sample_index}`;
}

export function readShard(path: string): ShardRecord[] {
  const text = readFileSync(path, "utf-8");
  const records: ShardRecord[] = [];
  for (const [lineNo, line] of text.split("\n").entries()) {
    if (!line.trim()) continue;
    let parsed: unknown;
    try {
      parsed = JSON.parse(line);
    } catch (err) {
      throw new Error(`${path}:${lineNo + 1}: invalid JSON: ${String(err)}`);
    }
    const rec = parsed as Partial<ShardRecord>;
    if (
      typeof rec.page_id !== "string" ||
      typeof rec.y_start !== "number" ||
      typeof rec.y_end !== "number" ||
      typeof rec.label !== "string" ||
      typeof rec.stage_L !== "number" ||
      typeof rec.sample_index !== "number"
    ) {
      throw new Error(`${path}:${lineNo + 1}: record is missing required fields`);
    }
    records.push({
      page_id: rec.page_id,
      y_start: rec.y_start,
      y_end: rec.y_end,
      label: rec.label,
      stage_L: rec.stage_L,
      sample_index: rec.sample_index,
      crop_path: rec.crop_path ?? null,
    });
  }
  return records;
}
