/** Manifest failed structural validation (missing fields, non-decreasing L). */
export class ManifestInvalid extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ManifestInvalid";
  }
}

/** The requested model backend cannot be constructed in this environment. */
export class BackendUnavailable extends Error {
  constructor(message: string) {
    super(message);
    this.name = "BackendUnavailable";
  }
}

/** A stage of the curriculum failed; carries the stage index and cause. */
export class StageFailure extends Error {
  readonly stageIndex: number;
  readonly stageL: number;

  constructor(stageIndex: number, stageL: number, cause: unknown) {
    const reason = cause instanceof Error ? cause.message : String(cause);
    super(`stage ${stageIndex} (L=${stageL}) failed: ${reason}`);
    this.name = "StageFailure";
    this.stageIndex = stageIndex;
    this.stageL = stageL;
    this.cause = cause;
  }
}
