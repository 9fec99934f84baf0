/** Conversion jobs: array dump + labels -> EMB1. */

import { writeFileSync, readFileSync } from 'node:fs';

import { ConversionError, ValidationError } from './errors.js';
import { encodeEmb1, decodeEmb1, makeDataset, type Emb1Dataset } from './emb1.js';
import { loadArrayDump, loadLabels } from './dump.js';
import type { FloatMatrix } from './npy.js';

export interface ConversionJob {
  dumpPath: string;
  labelsPath: string;
  outPath: string;
  name: string;
  /** class count; defaults to max(label)+1 */
  classes?: number;
  /** sink for narrowing/skip notices; defaults to console.warn */
  warn?: (message: string) => void;
}

export interface ConversionResult {
  dataset: Emb1Dataset;
  outPath: string;
  narrowed: boolean;
}

/** Narrow f8 source values to f4 (round-to-nearest), flagging any value
 * that changes in the process. */
export function narrowToFloat32(m: FloatMatrix): { data: Float32Array; lossy: boolean } {
  const data = new Float32Array(m.data.length);
  let lossy = false;
  for (let i = 0; i < m.data.length; i++) {
    data[i] = Math.fround(m.data[i]);
    if (m.sourceType === 'f8' && data[i] !== m.data[i]) lossy = true;
  }
  return { data, lossy };
}

export function buildDataset(
  matrix: FloatMatrix,
  labels: Int32Array,
  name: string,
  classes?: number,
  warn: (m: string) => void = console.warn,
): { dataset: Emb1Dataset; narrowed: boolean } {
  if (matrix.rows !== labels.length) {
    throw new ConversionError(
      `array has ${matrix.rows} rows but labels file has ${labels.length} entries`,
    );
  }
  if (matrix.rows === 0) throw new ConversionError('refusing to convert an empty array');

  let maxLabel = 0;
  for (const v of labels) {
    if (v < 0) throw new ValidationError(`negative label ${v}`);
    if (v > maxLabel) maxLabel = v;
  }
  const k = classes ?? maxLabel + 1;
  if (maxLabel >= k) {
    throw new ValidationError(`label ${maxLabel} outside {0..${k - 1}}`);
  }

  const { data, lossy } = narrowToFloat32(matrix);
  if (lossy) {
    warn(`narrowing 64-bit values to float32 changed at least one value (round-to-nearest)`);
  }
  const narrowed = matrix.sourceType === 'f8';
  const u16 = new Uint16Array(labels.length);
  for (let i = 0; i < labels.length; i++) u16[i] = labels[i];
  return { dataset: makeDataset(name, data, u16, matrix.cols, k), narrowed };
}

export function convert(job: ConversionJob): ConversionResult {
  const matrix = loadArrayDump(job.dumpPath);
  const labels = loadLabels(job.labelsPath);
  const { dataset, narrowed } = buildDataset(
    matrix, labels, job.name, job.classes, job.warn ?? console.warn,
  );
  writeFileSync(job.outPath, encodeEmb1(dataset));
  return { dataset, outPath: job.outPath, narrowed };
}

/** EMB1 -> in-memory dataset (the export half of the identity). */
export function exportEmb1(path: string): Emb1Dataset {
  let buf: Buffer;
  try {
    buf = readFileSync(path);
  } catch (err) {
    throw new ConversionError(`cannot read ${path}: ${(err as Error).message}`);
  }
  return decodeEmb1(buf, path);
}

/** Write a dataset back out; convert(exportEmb1(f)) is the identity on files. */
export function writeEmb1(ds: Emb1Dataset, path: string): void {
  writeFileSync(path, encodeEmb1(ds));
}
