/** Error taxonomy shared across the converter and extractor. */

export class ConversionError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'ConversionError';
  }
}

export class ValidationError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'ValidationError';
  }
}

export class ExtractorError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'ExtractorError';
  }
}
