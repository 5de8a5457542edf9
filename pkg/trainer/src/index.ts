export { BackendUnavailable, ManifestInvalid, StageFailure } from "./errors.js";
export { loadManifest, shardAbsolutePath } from "./manifest.js";
export type { LabelConfig, Manifest, ManifestStage } from "./manifest.js";
export { readShard, recordKey } from "./shards.js";
export type { ShardRecord } from "./shards.js";
export { StubBackend, createBackend } from "./backend.js";
export type { ModelBackend, StubBehavior } from "./backend.js";
export {
  checkpointId,
  checkpointPath,
  lineage,
  readCheckpoint,
  writeCheckpoint,
} from "./checkpoints.js";
export type { Checkpoint } from "./checkpoints.js";
export { runEvaluate, writeKeyedJsonl, writeReferenceFile } from "./evaluate.js";
export type { CorpusStats, EvaluateOptions, EvaluateResult } from "./evaluate.js";
export { generateHypotheses } from "./hypotheses.js";
export { runCurriculum } from "./curriculum.js";
export type { CurriculumResult, StageReport, TrainerPlan } from "./curriculum.js";
