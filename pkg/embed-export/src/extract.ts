/** Feature extraction over an image folder.
 *
 * Ships one built-in extractor, `random-projection`: a seeded, fixed
 * sparse sign projection of the raw resized pixels.  It downloads
 * nothing and exists so the full dump -> EMB1 pipeline can be exercised
 * offline; real backbones can be added through the registry.
 */

import { readdirSync, readFileSync } from 'node:fs';
import { join } from 'node:path';

import { ExtractorError } from './errors.js';
import { decodeNetpbm, resizeImage } from './image.js';
import { Rng } from './rng.js';

export interface Extractor {
  id: string;
  dim: number;
  /** preprocessing description recorded in the manifest */
  preprocessing: string;
  embed(pixels: Uint8Array): Float32Array;
}

export interface ExtractOptions {
  resize?: number;
  dim?: number;
  seed?: number;
  warn?: (message: string) => void;
}

export interface ManifestImage {
  file: string;
  status: 'ok' | 'skipped';
  reason?: string;
}

export interface Manifest {
  extractor: string;
  resize: number;
  dim: number;
  seed: number;
  preprocessing: string;
  images: ManifestImage[];
}

export interface ExtractResult {
  /** row-major rows x dim embeddings for the ok images, in file order */
  data: Float32Array;
  rows: number;
  cols: number;
  manifest: Manifest;
}

function randomProjection(resize: number, dim: number, seed: number): Extractor {
  const inDim = resize * resize * 3;
  const rng = new Rng(seed);
  // fixed sparse map: every input coordinate feeds one signed output slot
  const target = new Int32Array(inDim);
  const sign = new Float32Array(inDim);
  for (let i = 0; i < inDim; i++) {
    target[i] = Math.floor(rng.next() * dim);
    sign[i] = rng.next() < 0.5 ? -1 : 1;
  }
  const scale = 1 / Math.sqrt(inDim / dim);
  return {
    id: 'random-projection',
    dim,
    preprocessing:
      `nearest-neighbor resize to ${resize}x${resize}, RGB bytes scaled to [0,1], ` +
      `seeded sparse sign projection to ${dim} dims`,
    embed(pixels: Uint8Array): Float32Array {
      const out = new Float32Array(dim);
      for (let i = 0; i < inDim; i++) {
        out[target[i]] += (sign[i] * pixels[i]) / 255;
      }
      for (let j = 0; j < dim; j++) out[j] = Math.fround(out[j] * scale);
      return out;
    },
  };
}

const REGISTRY: Record<
  string,
  (resize: number, dim: number, seed: number) => Extractor
> = {
  'random-projection': randomProjection,
};

export function extract(
  imageFolder: string,
  extractorId: string,
  opts: ExtractOptions = {},
): ExtractResult {
  const resize = opts.resize ?? 224;
  const dim = opts.dim ?? 384;
  const seed = opts.seed ?? 0;
  const warn = opts.warn ?? console.warn;
  if (resize < 1 || dim < 1) {
    throw new ExtractorError(`resize/dim must be positive, got ${resize}/${dim}`);
  }

  const factory = REGISTRY[extractorId];
  if (!factory) {
    throw new ExtractorError(
      `unknown extractor ${JSON.stringify(extractorId)}; available: ${Object.keys(REGISTRY).join(', ')}`,
    );
  }
  const extractor = factory(resize, dim, seed);

  let files: string[];
  try {
    files = readdirSync(imageFolder).sort();
  } catch (err) {
    throw new ExtractorError(`cannot list ${imageFolder}: ${(err as Error).message}`);
  }

  const rows: Float32Array[] = [];
  const images: ManifestImage[] = [];
  for (const file of files) {
    const path = join(imageFolder, file);
    try {
      const img = decodeNetpbm(readFileSync(path), path);
      rows.push(extractor.embed(resizeImage(img, resize).pixels));
      images.push({ file, status: 'ok' });
    } catch (err) {
      const reason = (err as Error).message;
      warn(`skipping ${path}: ${reason}`);
      images.push({ file, status: 'skipped', reason });
    }
  }
  if (rows.length === 0) {
    throw new ExtractorError(`no readable images in ${imageFolder}`);
  }

  const data = new Float32Array(rows.length * dim);
  rows.forEach((row, i) => data.set(row, i * dim));
  return {
    data,
    rows: rows.length,
    cols: dim,
    manifest: {
      extractor: extractorId,
      resize,
      dim,
      seed,
      preprocessing: extractor.preprocessing,
      images,
    },
  };
}
