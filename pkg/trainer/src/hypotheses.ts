import type { ModelBackend } from "./backend.js";
import { writeKeyedJsonl } from "./evaluate.js";
import type { ShardRecord } from "./shards.js";
import { recordKey } from "./shards.js";

/**
 * Generate one hypothesis per record and write them keyed like the
 * reference file, ready for the toolkit's evaluate command.
 */
export async function generateHypotheses(backend: ModelBackend,
                                         records: ShardRecord[],
                                         beamSize: number,
                                         outPath: string): Promise<string> {
  const texts = await backend.generate(records, beamSize);
  if (texts.length !== records.length) {
    throw new Error(
      `backend returned ${texts.length} texts for ${records.length} records`,
    );
  }
  writeKeyedJsonl(
    outPath,
    records.map((record, i) => ({ key: recordKey(record), text: texts[i]! })),
  );
  return outPath;
}
