import { readFileSync } from "node:fs";
import { dirname, resolve } from "node:path";

import { ManifestInvalid } from "./errors.js";

/** Label-construction settings echoed by the dataset builder. */
export interface LabelConfig {
  theta: number;
  delta: number;
  separator: string;
  joiner: string;
}

export interface ManifestStage {
  L: number;
  N: number;
  mode: "random" | "tiled";
  seed: number;
  epochs: number;
  shard_path: string;
  /** One path per epoch; equals [shard_path] when epochs is 1. */
  epoch_shard_paths: string[];
}

export interface Manifest {
  version: number;
  root: string;
  global_seed: number;
  config: LabelConfig;
  stages: ManifestStage[];
  /** Directory the manifest lives in; shard paths resolve against it. */
  base_dir: string;
}

function asObject(value: unknown, what: string): Record<string, unknown> {
  if (typeof value !== "object" || value === null || Array.isArray(value)) {
    throw new ManifestInvalid(`${what} must be a JSON object`);
  }
  return value as Record<string, unknown>;
}

function asNumber(value: unknown, what: string): number {
  if (typeof value !== "number" || !Number.isFinite(value)) {
    throw new ManifestInvalid(`${what} must be a finite number`);
  }
  return value;
}

function asString(value: unknown, what: string): string {
  if (typeof value !== "string") {
    throw new ManifestInvalid(`${what} must be a string`);
  }
  return value;
}

function parseStage(raw: unknown, index: number): ManifestStage {
  const obj = asObject(raw, `stages[${index}]`);
  const L = asNumber(obj.L, `stages[${index}].L`);
  const epochs = asNumber(obj.epochs ?? 1, `stages[${index}].epochs`);
  const shardPath = asString(obj.shard_path, `stages[${index}].shard_path`);
  const mode = asString(obj.mode, `stages[${index}].mode`);
  if (mode !== "random" && mode !== "tiled") {
    throw new ManifestInvalid(`stages[${index}].mode must be random or tiled`);
  }
  let epochPaths: string[];
  if (obj.epoch_shard_paths !== undefined) {
    if (!Array.isArray(obj.epoch_shard_paths)) {
      throw new ManifestInvalid(`stages[${index}].epoch_shard_paths must be an array`);
    }
    epochPaths = obj.epoch_shard_paths.map((p, i) =>
      asString(p, `stages[${index}].epoch_shard_paths[${i}]`),
    );
  } else {
    epochPaths = [shardPath];
  }
  if (epochPaths.length !== epochs) {
    throw new ManifestInvalid(
      `stages[${index}] declares ${epochs} epochs but ${epochPaths.length} shard paths`,
    );
  }
  return {
    L,
    N: asNumber(obj.N, `stages[${index}].N`),
    mode,
    seed: asNumber(obj.seed, `stages[${index}].seed`),
    epochs,
    shard_path: shardPath,
    epoch_shard_paths: epochPaths,
  };
}

/**
 * Parse and validate a dataset manifest.
 *
 * Rejects anything that would break the curriculum contract, most
 * importantly stage L values that are not strictly decreasing.
 */
export function loadManifest(path: string): Manifest {
  let data: unknown;
  try {
    data = JSON.parse(readFileSync(path, "utf-8"));
  } catch (err) {
    throw new ManifestInvalid(`cannot read manifest ${path}: ${String(err)}`);
  }
  const obj = asObject(data, "manifest");
  const version = asNumber(obj.version, "version");
  if (version !== 1) {
    throw new ManifestInvalid(`unsupported manifest version ${version}`);
  }
  const rawStages = obj.stages;
  if (!Array.isArray(rawStages) || rawStages.length === 0) {
    throw new ManifestInvalid("manifest must declare at least one stage");
  }
  const stages = rawStages.map(parseStage);
  for (let i = 1; i < stages.length; i++) {
    const prev = stages[i - 1]!;
    const cur = stages[i]!;
    if (cur.L >= prev.L) {
      throw new ManifestInvalid(
        `stage L values must be strictly decreasing, got ${prev.L} then ${cur.L}`,
      );
    }
  }
  const config = asObject(obj.config, "config");
  return {
    version,
    root: asString(obj.root, "root"),
    global_seed: asNumber(obj.global_seed, "global_seed"),
    config: {
      theta: asNumber(config.theta, "config.theta"),
      delta: asNumber(config.delta, "config.delta"),
      separator: asString(config.separator, "config.separator"),
      joiner: asString(config.joiner, "config.joiner"),
    },
    stages,
    base_dir: dirname(resolve(path)),
  };
}

/** Absolute path of one stage shard, resolved against the manifest location. */
export function shardAbsolutePath(manifest: Manifest, relative: string): string {
  return resolve(manifest.base_dir, relative);
}
