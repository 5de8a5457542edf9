import { createHash } from "node:crypto";

import { BackendUnavailable } from "./errors.js";
import type { ShardRecord } from "./shards.js";

/**
 * Thin model interface the curriculum driver runs against.
 *
 * `load` restores a weights token (null = base model), `train` consumes one
 * epoch of records and returns the updated weights token, `generate`
 * produces one text per record at the given beam size.
 */
export interface ModelBackend {
  readonly name: string;
  load(weights: string | null): Promise<void>;
  train(records: ShardRecord[]): Promise<string>;
  generate(records: ShardRecord[], beamSize: number): Promise<string[]>;
}

export type StubBehavior = "echo" | "empty" | "corrupt";

/**
 * GPU-free stand-in backend so the curriculum contract is testable.
 *
 * echo: returns each record's label verbatim (perfect model).
 * empty: returns "" for everything (worst case, pure deletions).
 * corrupt: overwrites every (beamSize+1)-th character, so wider beams
 * score better and beam settings are comparable file to file.
 */
export class StubBackend implements ModelBackend {
  readonly name: string;
  readonly behavior: StubBehavior;
  private weights: string | null = null;
  /** Total records consumed by train(); one increment per record per epoch. */
  recordsTrained = 0;
  trainCalls = 0;

  constructor(behavior: StubBehavior) {
    this.behavior = behavior;
    this.name = `stub:${behavior}`;
  }

  async load(weights: string | null): Promise<void> {
    this.weights = weights;
  }

  async train(records: ShardRecord[]): Promise<string> {
    this.recordsTrained += records.length;
    this.trainCalls += 1;
    const hash = createHash("sha256");
    hash.update(this.weights ?? "base");
    for (const record of records) {
      hash.update(`${record.page_id}:${record.y_start}:${record.label}\n`);
    }
    this.weights = hash.digest("hex").slice(0, 16);
    return this.weights;
  }

  async generate(records: ShardRecord[], beamSize: number): Promise<string[]> {
    return records.map((record) => {
      if (this.behavior === "empty") return "";
      if (this.behavior === "echo") return record.label;
      const period = beamSize + 1;
      const chars = Array.from(record.label);
      for (let i = 0; i < chars.length; i += period) {
        chars[i] = "#";
      }
      return chars.join("");
    });
  }
}

/**
 * Construct the backend named by a plan's model identifier.
 *
 * Only the stub family is built in; real model identifiers belong to
 * integrations that implement ModelBackend themselves and pass it in.
 */
export function createBackend(model: string): ModelBackend {
  if (model === "stub:echo" || model === "stub:empty" || model === "stub:corrupt") {
    return new StubBackend(model.slice("stub:".length) as StubBehavior);
  }
  throw new BackendUnavailable(
    `no built-in backend for ${JSON.stringify(model)}; pass a ModelBackend instance`,
  );
}
