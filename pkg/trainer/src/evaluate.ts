import { spawnSync } from "node:child_process";
import { mkdirSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";

import type { ShardRecord } from "./shards.js";
import { recordKey } from "./shards.js";

/** Corpus-level block of an evaluation report (see the toolkit's schema). */
export interface CorpusStats {
  pairs: number;
  average: string;
  precision: number;
  recall: number;
  f1: number;
  cer: number | null;
  S: number;
  D: number;
  I: number;
  C: number;
  [extra: string]: unknown;
}

export interface EvaluateResult {
  corpus: CorpusStats;
  report_path: string;
  /** Exact subprocess invocation, recorded for provenance. */
  command: string[];
}

export interface EvaluateOptions {
  python?: string;
  separator?: string;
  average?: "micro" | "macro";
}

export function writeKeyedJsonl(path: string,
                                rows: { key: string; text: string }[]): void {
  mkdirSync(dirname(path), { recursive: true });
  const body = rows.map((row) => JSON.stringify(row)).join("\n");
  writeFileSync(path, body + (rows.length ? "\n" : ""), "utf-8");
}

export function writeReferenceFile(path: string, records: ShardRecord[]): void {
  writeKeyedJsonl(
    path,
    records.map((record) => ({ key: recordKey(record), text: record.label })),
  );
}

/**
 * Score a hypothesis file against references by shelling out to the
 * dataset toolkit's CLI. All metric numbers come from that subprocess;
 * this module never computes CER or PRF itself.
 */
export function runEvaluate(refPath: string, hypPath: string, outPath: string,
                            options: EvaluateOptions = {}): EvaluateResult {
  const python = options.python ?? "python3";
  const command = [
    python, "-m", "chunkforge", "evaluate",
    "--ref", refPath,
    "--hyp", hypPath,
    "--out", outPath,
  ];
  if (options.separator !== undefined) {
    command.push("--separator", options.separator);
  }
  if (options.average !== undefined) {
    command.push("--average", options.average);
  }
  mkdirSync(dirname(outPath), { recursive: true });
  const result = spawnSync(command[0]!, command.slice(1), {
    encoding: "utf-8",
    maxBuffer: 64 * 1024 * 1024,
  });
  if (result.error) {
    throw new Error(`cannot run ${command[0]}: ${result.error.message}`);
  }
  if (result.status !== 0) {
    throw new Error(
      `evaluate exited ${result.status}: ${result.stdout.trim() || result.stderr.trim()}`,
    );
  }
  const document = JSON.parse(result.stdout) as { corpus: CorpusStats };
  return { corpus: document.corpus, report_path: outPath, command };
}
