import { describe, expect, it } from 'vitest';

import {
  ConversionError,
  ValidationError,
  decodeEmb1,
  encodeEmb1,
  makeDataset,
} from '../src/index.js';

function sample() {
  return makeDataset(
    'toy',
    new Float32Array([0.5, -1.25, 3.75, 0.125, 7, -2, 0, 1]),
    new Uint16Array([0, 2, 1, 0]),
    2,
    3,
  );
}

describe('emb1 codec', () => {
  it('round trips byte-identically', () => {
    const a = encodeEmb1(sample());
    const b = encodeEmb1(decodeEmb1(a));
    expect(b.equals(a)).toBe(true);
  });

  it('lays out the header as documented', () => {
    const buf = encodeEmb1(sample());
    expect(buf.toString('ascii', 0, 4)).toBe('EMB1');
    expect(buf.readUInt32LE(4)).toBe(1);
    expect(Number(buf.readBigUInt64LE(8))).toBe(4);
    expect(buf.readUInt32LE(16)).toBe(2);
    expect(buf.readUInt32LE(20)).toBe(3);
    expect(buf.readUInt32LE(24)).toBe(3); // 'toy'
    expect(buf.length).toBe(28 + 3 + 4 * 2 * 4 + 4 * 2);
  });

  it('preserves values and name through decode', () => {
    const ds = decodeEmb1(encodeEmb1(sample()));
    expect(ds.name).toBe('toy');
    expect(Array.from(ds.vectors)).toEqual([0.5, -1.25, 3.75, 0.125, 7, -2, 0, 1]);
    expect(Array.from(ds.labels)).toEqual([0, 2, 1, 0]);
  });

  it('rejects labels outside the class range', () => {
    expect(() =>
      makeDataset('x', new Float32Array(4), new Uint16Array([0, 3]), 2, 3),
    ).toThrow(ValidationError);
  });

  it('rejects a vector buffer of the wrong size', () => {
    expect(() =>
      makeDataset('x', new Float32Array(5), new Uint16Array([0, 1]), 2, 2),
    ).toThrow(ConversionError);
  });

  it('rejects bad magic and truncation', () => {
    const buf = encodeEmb1(sample());
    const bad = Buffer.from(buf);
    bad.write('NOPE', 0, 'ascii');
    expect(() => decodeEmb1(bad)).toThrow(/bad magic/);
    expect(() => decodeEmb1(buf.subarray(0, 10))).toThrow(/truncated/);
    expect(() => decodeEmb1(buf.subarray(0, buf.length - 1))).toThrow(/expected/);
  });
});
