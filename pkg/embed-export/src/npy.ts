/** Minimal NPY (format version 1.0) reader/writer for dense 2-D float
 * arrays, the usual interchange dump for numeric tooling.  Supports
 * little-endian f4/f8, C order.
 */

import { ConversionError } from './errors.js';

const NPY_MAGIC = Buffer.from('\x93NUMPY', 'latin1');

export interface FloatMatrix {
  /** row-major n x dim, f8 inputs kept at full precision until narrowing */
  data: Float64Array;
  rows: number;
  cols: number;
  /** dtype of the source file: 'f4' | 'f8' */
  sourceType: 'f4' | 'f8';
}

export function decodeNpy(buf: Buffer, source = '<buffer>'): FloatMatrix {
  if (buf.length < 10 || !buf.subarray(0, 6).equals(NPY_MAGIC)) {
    throw new ConversionError(`${source}: not an NPY file`);
  }
  const major = buf.readUInt8(6);
  if (major !== 1) {
    throw new ConversionError(`${source}: unsupported NPY version ${major}`);
  }
  const headerLen = buf.readUInt16LE(8);
  const header = buf.toString('latin1', 10, 10 + headerLen);

  const descr = /'descr':\s*'([^']+)'/.exec(header)?.[1];
  const fortran = /'fortran_order':\s*(True|False)/.exec(header)?.[1];
  const shapeText = /'shape':\s*\(([^)]*)\)/.exec(header)?.[1];
  if (!descr || !fortran || shapeText === undefined) {
    throw new ConversionError(`${source}: malformed NPY header ${JSON.stringify(header)}`);
  }
  if (fortran === 'True') {
    throw new ConversionError(`${source}: Fortran-order arrays are not supported`);
  }
  if (descr !== '<f4' && descr !== '<f8') {
    throw new ConversionError(`${source}: need little-endian float32/float64, got ${descr}`);
  }
  const dims = shapeText.split(',').map((s) => s.trim()).filter((s) => s.length > 0);
  if (dims.length !== 2) {
    throw new ConversionError(`${source}: need a 2-D array, got shape (${shapeText})`);
  }
  const rows = Number(dims[0]);
  const cols = Number(dims[1]);
  if (!Number.isInteger(rows) || !Number.isInteger(cols) || rows < 0 || cols < 1) {
    throw new ConversionError(`${source}: bad shape (${shapeText})`);
  }

  const itemSize = descr === '<f4' ? 4 : 8;
  const body = 10 + headerLen;
  if (buf.length !== body + rows * cols * itemSize) {
    throw new ConversionError(
      `${source}: body holds ${buf.length - body} bytes, expected ${rows * cols * itemSize}`,
    );
  }
  const data = new Float64Array(rows * cols);
  for (let i = 0; i < data.length; i++) {
    data[i] =
      descr === '<f4' ? buf.readFloatLE(body + i * 4) : buf.readDoubleLE(body + i * 8);
  }
  return { data, rows, cols, sourceType: descr === '<f4' ? 'f4' : 'f8' };
}

export function encodeNpy(data: Float32Array, rows: number, cols: number): Buffer {
  if (data.length !== rows * cols) {
    throw new ConversionError(`buffer holds ${data.length} floats, expected ${rows} x ${cols}`);
  }
  let header = `{'descr': '<f4', 'fortran_order': False, 'shape': (${rows}, ${cols}), }`;
  // header (incl. 10-byte preamble and trailing newline) padded to 64 bytes
  const unpadded = 10 + header.length + 1;
  header += ' '.repeat((64 - (unpadded % 64)) % 64) + '\n';

  const buf = Buffer.alloc(10 + header.length + data.length * 4);
  NPY_MAGIC.copy(buf, 0);
  buf.writeUInt8(1, 6);
  buf.writeUInt8(0, 7);
  buf.writeUInt16LE(header.length, 8);
  buf.write(header, 10, 'latin1');
  for (let i = 0; i < data.length; i++) {
    buf.writeFloatLE(data[i], 10 + header.length + i * 4);
  }
  return buf;
}
