/** Source-file loading: dense array dumps (.npy or numeric .csv) and
 * label lists (plain text or single-column .csv).
 */

import { readFileSync } from 'node:fs';
import { extname } from 'node:path';

import { ConversionError, ValidationError } from './errors.js';
import { decodeNpy, type FloatMatrix } from './npy.js';

function readBytes(path: string): Buffer {
  try {
    return readFileSync(path);
  } catch (err) {
    throw new ConversionError(`cannot read ${path}: ${(err as Error).message}`);
  }
}

function parseCsvMatrix(text: string, source: string): FloatMatrix {
  const lines = text.split(/\r?\n/).filter((ln) => ln.trim().length > 0);
  if (lines.length === 0) throw new ConversionError(`${source}: empty CSV`);
  let start = 0;
  // tolerate a header row of column names
  if (lines[0].split(',').some((cell) => Number.isNaN(Number(cell.trim())))) {
    start = 1;
  }
  const rowsText = lines.slice(start);
  if (rowsText.length === 0) throw new ConversionError(`${source}: no data rows`);
  const cols = rowsText[0].split(',').length;
  const data = new Float64Array(rowsText.length * cols);
  rowsText.forEach((ln, r) => {
    const cells = ln.split(',');
    if (cells.length !== cols) {
      throw new ConversionError(
        `${source}: row ${r} has ${cells.length} columns, expected ${cols}`,
      );
    }
    cells.forEach((cell, c) => {
      const v = Number(cell.trim());
      if (Number.isNaN(v)) {
        throw new ConversionError(`${source}: non-numeric cell ${JSON.stringify(cell)} at row ${r}`);
      }
      data[r * cols + c] = v;
    });
  });
  return { data, rows: rowsText.length, cols, sourceType: 'f8' };
}

export function loadArrayDump(path: string): FloatMatrix {
  const buf = readBytes(path);
  if (extname(path).toLowerCase() === '.npy') return decodeNpy(buf, path);
  return parseCsvMatrix(buf.toString('utf-8'), path);
}

export function loadLabels(path: string): Int32Array {
  const text = readBytes(path).toString('utf-8');
  const tokens = text
    .split(/[\s,]+/)
    .map((t) => t.trim())
    .filter((t) => t.length > 0);
  // tolerate a single leading header token like "label"
  const start = tokens.length > 0 && Number.isNaN(Number(tokens[0])) ? 1 : 0;
  const body = tokens.slice(start);
  if (body.length === 0) throw new ConversionError(`${path}: no labels found`);
  const out = new Int32Array(body.length);
  body.forEach((tok, i) => {
    const v = Number(tok);
    if (!Number.isInteger(v)) {
      throw new ValidationError(`${path}: label ${JSON.stringify(tok)} is not an integer`);
    }
    out[i] = v;
  });
  return out;
}
