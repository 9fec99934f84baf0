/** Netpbm image decoding (binary PPM/PGM) and nearest-neighbor resize.
 *
 * The offline extraction pipeline only needs a dependency-free image
 * path; PPM/PGM cover that.  Anything else is reported as unreadable
 * and skipped by the extractor.
 */

import { ExtractorError } from './errors.js';

export interface RgbImage {
  width: number;
  height: number;
  /** interleaved RGB, one byte per channel */
  pixels: Uint8Array;
}

export function decodeNetpbm(buf: Buffer, source = '<buffer>'): RgbImage {
  const magic = buf.toString('ascii', 0, 2);
  if (magic !== 'P5' && magic !== 'P6') {
    throw new ExtractorError(`${source}: unsupported image format (need binary PGM/PPM)`);
  }
  // header: magic, width, height, maxval as whitespace-separated tokens,
  // with #-comments allowed between them
  let off = 2;
  const tokens: number[] = [];
  while (tokens.length < 3) {
    if (off >= buf.length) throw new ExtractorError(`${source}: truncated header`);
    const ch = String.fromCharCode(buf[off]);
    if (ch === '#') {
      while (off < buf.length && buf[off] !== 0x0a) off++;
      off++;
    } else if (/\s/.test(ch)) {
      off++;
    } else {
      let tok = '';
      while (off < buf.length && !/\s/.test(String.fromCharCode(buf[off]))) {
        tok += String.fromCharCode(buf[off]);
        off++;
      }
      const v = Number(tok);
      if (!Number.isInteger(v) || v <= 0) {
        throw new ExtractorError(`${source}: bad header token ${JSON.stringify(tok)}`);
      }
      tokens.push(v);
    }
  }
  off++; // single whitespace after maxval
  const [width, height, maxval] = tokens;
  if (maxval > 255) throw new ExtractorError(`${source}: 16-bit samples not supported`);

  const channels = magic === 'P6' ? 3 : 1;
  const expected = width * height * channels;
  if (buf.length - off < expected) {
    throw new ExtractorError(`${source}: truncated pixel data`);
  }
  const raw = buf.subarray(off, off + expected);
  const pixels = new Uint8Array(width * height * 3);
  for (let i = 0; i < width * height; i++) {
    if (channels === 3) {
      pixels[i * 3] = raw[i * 3];
      pixels[i * 3 + 1] = raw[i * 3 + 1];
      pixels[i * 3 + 2] = raw[i * 3 + 2];
    } else {
      pixels[i * 3] = pixels[i * 3 + 1] = pixels[i * 3 + 2] = raw[i];
    }
  }
  return { width, height, pixels };
}

/** Nearest-neighbor resample to size x size (resizing, not padding). */
export function resizeImage(img: RgbImage, size: number): RgbImage {
  if (img.width === size && img.height === size) return img;
  const pixels = new Uint8Array(size * size * 3);
  for (let y = 0; y < size; y++) {
    const sy = Math.min(img.height - 1, Math.floor((y * img.height) / size));
    for (let x = 0; x < size; x++) {
      const sx = Math.min(img.width - 1, Math.floor((x * img.width) / size));
      const src = (sy * img.width + sx) * 3;
      const dst = (y * size + x) * 3;
      pixels[dst] = img.pixels[src];
      pixels[dst + 1] = img.pixels[src + 1];
      pixels[dst + 2] = img.pixels[src + 2];
    }
  }
  return { width: size, height: size, pixels };
}
