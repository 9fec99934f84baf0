/** EMB1 binary embedding files.
 *
 * Layout, all little-endian:
 *
 *     magic   'EMB1'           4 bytes
 *     version u32 = 1
 *     n       u64
 *     dim     u32
 *     k       u32  (class count)
 *     nameLen u32, then name (UTF-8)
 *     vectors n * dim float32, row-major
 *     labels  n * u16
 *
 * Serialization is deterministic, so a read/write round trip reproduces
 * the input file byte for byte.
 */

import { ConversionError, ValidationError } from './errors.js';

export const MAGIC = 'EMB1';
export const VERSION = 1;
export const MAX_LABEL = 0xffff;

const HEADER_SIZE = 28;

export interface Emb1Dataset {
  name: string;
  /** row-major n x dim */
  vectors: Float32Array;
  labels: Uint16Array;
  n: number;
  dim: number;
  k: number;
}

export function makeDataset(
  name: string,
  vectors: Float32Array,
  labels: Uint16Array,
  dim: number,
  k: number,
): Emb1Dataset {
  const n = labels.length;
  if (dim < 1) throw new ValidationError(`dim must be >= 1, got ${dim}`);
  if (vectors.length !== n * dim) {
    throw new ConversionError(
      `vector buffer holds ${vectors.length} floats, expected ${n} x ${dim}`,
    );
  }
  if (k < 1 || k - 1 > MAX_LABEL) {
    throw new ValidationError(`class count ${k} outside u16 label range`);
  }
  for (let i = 0; i < n; i++) {
    if (labels[i] >= k) {
      throw new ValidationError(`label ${labels[i]} at row ${i} outside {0..${k - 1}}`);
    }
  }
  return { name, vectors, labels, n, dim, k };
}

export function encodeEmb1(ds: Emb1Dataset): Buffer {
  const name = Buffer.from(ds.name, 'utf-8');
  const buf = Buffer.alloc(HEADER_SIZE + name.length + ds.n * ds.dim * 4 + ds.n * 2);
  buf.write(MAGIC, 0, 'ascii');
  buf.writeUInt32LE(VERSION, 4);
  buf.writeBigUInt64LE(BigInt(ds.n), 8);
  buf.writeUInt32LE(ds.dim, 16);
  buf.writeUInt32LE(ds.k, 20);
  buf.writeUInt32LE(name.length, 24);
  name.copy(buf, HEADER_SIZE);
  let off = HEADER_SIZE + name.length;
  for (let i = 0; i < ds.vectors.length; i++, off += 4) {
    buf.writeFloatLE(ds.vectors[i], off);
  }
  for (let i = 0; i < ds.labels.length; i++, off += 2) {
    buf.writeUInt16LE(ds.labels[i], off);
  }
  return buf;
}

export function decodeEmb1(buf: Buffer, source = '<buffer>'): Emb1Dataset {
  if (buf.length < HEADER_SIZE) {
    throw new ConversionError(`${source}: truncated header (${buf.length} bytes)`);
  }
  const magic = buf.toString('ascii', 0, 4);
  if (magic !== MAGIC) {
    throw new ConversionError(`${source}: bad magic ${JSON.stringify(magic)}`);
  }
  const version = buf.readUInt32LE(4);
  if (version !== VERSION) {
    throw new ConversionError(`${source}: unsupported version ${version}`);
  }
  const nBig = buf.readBigUInt64LE(8);
  if (nBig > BigInt(Number.MAX_SAFE_INTEGER)) {
    throw new ConversionError(`${source}: sample count ${nBig} too large`);
  }
  const n = Number(nBig);
  const dim = buf.readUInt32LE(16);
  const k = buf.readUInt32LE(20);
  const nameLen = buf.readUInt32LE(24);
  const body = HEADER_SIZE + nameLen;
  const expect = body + n * dim * 4 + n * 2;
  if (buf.length !== expect) {
    throw new ConversionError(`${source}: expected ${expect} bytes, got ${buf.length}`);
  }
  const name = buf.toString('utf-8', HEADER_SIZE, body);
  const vectors = new Float32Array(n * dim);
  for (let i = 0; i < vectors.length; i++) {
    vectors[i] = buf.readFloatLE(body + i * 4);
  }
  const labels = new Uint16Array(n);
  const labelOff = body + n * dim * 4;
  for (let i = 0; i < n; i++) {
    labels[i] = buf.readUInt16LE(labelOff + i * 2);
  }
  return makeDataset(name, vectors, labels, dim, k);
}
