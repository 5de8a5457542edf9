import { createHash } from "node:crypto";
import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";

/** On-disk checkpoint descriptor; weights are an opaque backend token. */
export interface Checkpoint {
  id: string;
  model: string;
  stage_L: number;
  epoch: number;
  parent: string | null;
  weights: string;
}

export function checkpointId(model: string, stageL: number, epoch: number,
                             parent: string | null, weights: string): string {
  const hash = createHash("sha256");
  hash.update(`${model}|${stageL}|${epoch}|${parent ?? ""}|${weights}`);
  return hash.digest("hex").slice(0, 16);
}

export function checkpointPath(dir: string, id: string): string {
  return join(dir, `${id}.json`);
}

export function writeCheckpoint(dir: string, checkpoint: Checkpoint): string {
  mkdirSync(dir, { recursive: true });
  const path = checkpointPath(dir, checkpoint.id);
  writeFileSync(path, JSON.stringify(checkpoint, null, 2) + "\n", "utf-8");
  return path;
}

export function readCheckpoint(dir: string, id: string): Checkpoint {
  const raw = JSON.parse(readFileSync(checkpointPath(dir, id), "utf-8"));
  return raw as Checkpoint;
}

/**
 * Walk parent links from a checkpoint back to the base model.
 *
 * Returns ids ordered root-first; the walk fails loudly on a missing
 * parent file or a cycle instead of returning a partial chain.
 */
export function lineage(dir: string, id: string): string[] {
  const chain: string[] = [];
  const seen = new Set<string>();
  let cursor: string | null = id;
  while (cursor !== null) {
    if (seen.has(cursor)) {
      throw new Error(`checkpoint lineage cycle at ${cursor}`);
    }
    seen.add(cursor);
    chain.push(cursor);
    cursor = readCheckpoint(dir, cursor).parent;
  }
  return chain.reverse();
}
