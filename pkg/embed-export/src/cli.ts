#!/usr/bin/env node
/** Command-line front end: `embed-export convert` and `embed-export extract`. */

import { realpathSync, writeFileSync } from 'node:fs';
import { parseArgs } from 'node:util';
import { pathToFileURL } from 'node:url';

import { convert } from './convert.js';
import { extract } from './extract.js';
import { encodeNpy } from './npy.js';
import { ConversionError, ExtractorError, ValidationError } from './errors.js';

const USAGE = `usage:
  embed-export convert --dump X.npy|X.csv --labels y.txt|y.csv \\
      --name NAME --out OUT.emb1 [--classes K]
  embed-export extract --images DIR --out OUT.npy \\
      [--extractor random-projection] [--resize 224] [--dim 384] [--seed 0] \\
      [--manifest OUT.manifest.json]`;

function intOption(raw: string | undefined, name: string): number | undefined {
  if (raw === undefined) return undefined;
  const v = Number(raw);
  if (!Number.isInteger(v) || v < 0) {
    throw new ValidationError(`--${name} must be a non-negative integer, got ${raw}`);
  }
  return v;
}

function cmdConvert(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      dump: { type: 'string' },
      labels: { type: 'string' },
      name: { type: 'string' },
      out: { type: 'string' },
      classes: { type: 'string' },
    },
  });
  if (!values.dump || !values.labels || !values.out) {
    console.error(USAGE);
    return 2;
  }
  const res = convert({
    dumpPath: values.dump,
    labelsPath: values.labels,
    outPath: values.out,
    name: values.name ?? 'converted',
    classes: intOption(values.classes, 'classes'),
    warn: (m) => console.error(`warning: ${m}`),
  });
  console.log(
    `wrote ${res.outPath}: ${res.dataset.n} x ${res.dataset.dim}, K=${res.dataset.k}` +
      (res.narrowed ? ' (narrowed from 64-bit)' : ''),
  );
  return 0;
}

function cmdExtract(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      images: { type: 'string' },
      out: { type: 'string' },
      extractor: { type: 'string', default: 'random-projection' },
      resize: { type: 'string' },
      dim: { type: 'string' },
      seed: { type: 'string' },
      manifest: { type: 'string' },
    },
  });
  if (!values.images || !values.out) {
    console.error(USAGE);
    return 2;
  }
  const res = extract(values.images, values.extractor as string, {
    resize: intOption(values.resize, 'resize'),
    dim: intOption(values.dim, 'dim'),
    seed: intOption(values.seed, 'seed'),
    warn: (m) => console.error(`warning: ${m}`),
  });
  writeFileSync(values.out, encodeNpy(res.data, res.rows, res.cols));
  const manifestPath = values.manifest ?? `${values.out}.manifest.json`;
  writeFileSync(manifestPath, JSON.stringify(res.manifest, null, 2) + '\n');
  const skipped = res.manifest.images.filter((im) => im.status === 'skipped').length;
  console.log(
    `wrote ${values.out}: ${res.rows} x ${res.cols}` +
      (skipped > 0 ? ` (${skipped} skipped, see ${manifestPath})` : ''),
  );
  return 0;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    if (command === 'convert') return cmdConvert(rest);
    if (command === 'extract') return cmdExtract(rest);
    console.error(USAGE);
    return 2;
  } catch (err) {
    if (
      err instanceof ConversionError ||
      err instanceof ValidationError ||
      err instanceof ExtractorError
    ) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

function invokedDirectly(): boolean {
  if (process.argv[1] === undefined) return false;
  try {
    // resolve the npm bin symlink before comparing against this module
    return import.meta.url === pathToFileURL(realpathSync(process.argv[1])).href;
  } catch {
    return false;
  }
}
if (invokedDirectly()) {
  process.exit(main(process.argv.slice(2)));
}
