import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import type { ModelBackend } from "./backend.js";
import { createBackend } from "./backend.js";
import { checkpointId, readCheckpoint, writeCheckpoint } from "./checkpoints.js";
import type { Checkpoint } from "./checkpoints.js";
import { StageFailure } from "./errors.js";
import { runEvaluate, writeReferenceFile } from "./evaluate.js";
import type { EvaluateResult } from "./evaluate.js";
import { generateHypotheses } from "./hypotheses.js";
import { loadManifest, shardAbsolutePath } from "./manifest.js";
import type { Manifest, ManifestStage } from "./manifest.js";
import { readShard } from "./shards.js";
import type { ShardRecord } from "./shards.js";

export interface TrainerPlan {
  manifest_path: string;
  /** Backend identifier, e.g. "stub:echo"; opaque to the driver. */
  model: string;
  epochs_per_stage: number;
  checkpoint_dir: string;
  /** Eval references, hypotheses and reports are written under here. */
  work_dir: string;
  beam_size?: number;
  python?: string;
}

/** Written per stage as work_dir/stage_L{L}/report.json. */
export interface StageReport {
  stage_L: number;
  parent_checkpoint: string | null;
  best_checkpoint: string;
  best_epoch: number;
  cer: number | null;
  eval_report_path: string;
  /** Proof the numbers came from the toolkit CLI, not local math. */
  provenance: {
    tool: string;
    command: string[];
  };
}

export interface CurriculumResult {
  final_checkpoint: string;
  reports: StageReport[];
}

interface EpochOutcome {
  checkpoint: Checkpoint;
  evaluation: EvaluateResult;
}

function stageShards(manifest: Manifest, stage: ManifestStage,
                     epoch: number): ShardRecord[] {
  // Reuse the last declared shard when the plan trains more epochs than
  // the manifest materialized.
  const paths = stage.epoch_shard_paths;
  const relative = paths[Math.min(epoch, paths.length - 1)]!;
  return readShard(shardAbsolutePath(manifest, relative));
}

async function runStage(manifest: Manifest, stage: ManifestStage,
                        stageIndex: number, plan: TrainerPlan,
                        backend: ModelBackend,
                        parent: Checkpoint | null): Promise<StageReport> {
  const beamSize = plan.beam_size ?? 5;
  const stageDir = join(plan.work_dir, `stage_L${stage.L}`);
  mkdirSync(stageDir, { recursive: true });

  // Fixed validation set for the whole stage: epoch 0's records.
  const evalRecords = stageShards(manifest, stage, 0);
  const refPath = join(stageDir, "refs.jsonl");
  writeReferenceFile(refPath, evalRecords);

  let weights = parent?.weights ?? null;
  await backend.load(weights);
  const outcomes: EpochOutcome[] = [];
  for (let epoch = 0; epoch < plan.epochs_per_stage; epoch++) {
    const records = stageShards(manifest, stage, epoch);
    weights = await backend.train(records);
    const checkpoint: Checkpoint = {
      id: checkpointId(plan.model, stage.L, epoch, parent?.id ?? null, weights),
      model: plan.model,
      stage_L: stage.L,
      epoch,
      parent: parent?.id ?? null,
      weights,
    };
    writeCheckpoint(plan.checkpoint_dir, checkpoint);

    const hypPath = join(stageDir, `hyp_e${epoch}_b${beamSize}.jsonl`);
    await generateHypotheses(backend, evalRecords, beamSize, hypPath);
    const evaluation = runEvaluate(
      refPath, hypPath, join(stageDir, `eval_e${epoch}.json`),
      { python: plan.python, separator: manifest.config.separator },
    );
    outcomes.push({ checkpoint, evaluation });
  }

  // Lowest CER wins; ties go to the earlier epoch. A null CER (no
  // reference characters) ranks after any real score.
  let best = outcomes[0]!;
  for (const outcome of outcomes.slice(1)) {
    const challenger = outcome.evaluation.corpus.cer;
    const incumbent = best.evaluation.corpus.cer;
    if (incumbent === null && challenger !== null) {
      best = outcome;
    } else if (challenger !== null && incumbent !== null && challenger < incumbent) {
      best = outcome;
    }
  }

  // Rewind the backend to the winning epoch before the next stage.
  await backend.load(best.checkpoint.weights);

  const report: StageReport = {
    stage_L: stage.L,
    parent_checkpoint: parent?.id ?? null,
    best_checkpoint: best.checkpoint.id,
    best_epoch: best.checkpoint.epoch,
    cer: best.evaluation.corpus.cer,
    eval_report_path: best.evaluation.report_path,
    provenance: {
      tool: "chunkforge evaluate",
      command: best.evaluation.command,
    },
  };
  writeFileSync(join(stageDir, "report.json"),
                JSON.stringify(report, null, 2) + "\n", "utf-8");
  return report;
}

/**
 * Execute the staged curriculum described by a dataset manifest.
 *
 * Stages run strictly in manifest order (decreasing L); each stage trains
 * from the previous stage's best checkpoint and records a stage report
 * whose metrics were produced by the dataset toolkit CLI.
 */
export async function runCurriculum(plan: TrainerPlan,
                                    backend?: ModelBackend): Promise<CurriculumResult> {
  if (plan.epochs_per_stage < 1) {
    throw new RangeError("epochs_per_stage must be >= 1");
  }
  const manifest = loadManifest(plan.manifest_path);
  const model = backend ?? createBackend(plan.model);

  const reports: StageReport[] = [];
  let parent: Checkpoint | null = null;
  for (const [stageIndex, stage] of manifest.stages.entries()) {
    let report: StageReport;
    try {
      report = await runStage(manifest, stage, stageIndex, plan, model, parent);
    } catch (err) {
      throw new StageFailure(stageIndex, stage.L, err);
    }
    reports.push(report);
    // Read the stored file back so the chain never relies on in-memory
    // state alone.
    parent = readCheckpoint(plan.checkpoint_dir, report.best_checkpoint);
  }

  return { final_checkpoint: reports[reports.length - 1]!.best_checkpoint, reports };
}
