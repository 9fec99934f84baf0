export { ConversionError, ValidationError, ExtractorError } from './errors.js';
export {
  MAGIC, VERSION, MAX_LABEL,
  makeDataset, encodeEmb1, decodeEmb1,
  type Emb1Dataset,
} from './emb1.js';
export { decodeNpy, encodeNpy, type FloatMatrix } from './npy.js';
export { loadArrayDump, loadLabels } from './dump.js';
export {
  convert, exportEmb1, writeEmb1, buildDataset, narrowToFloat32,
  type ConversionJob, type ConversionResult,
} from './convert.js';
export { decodeNetpbm, resizeImage, type RgbImage } from './image.js';
export {
  extract,
  type ExtractOptions, type ExtractResult, type Manifest, type ManifestImage,
} from './extract.js';
export { Rng } from './rng.js';
export { main } from './cli.js';
