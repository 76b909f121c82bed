/** Input file does not match the expected figure-input schema. */
export class SchemaMismatchError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaMismatchError";
  }
}

/** Input parsed fine but a panel or series we need to draw is absent. */
export class MissingGroupError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "MissingGroupError";
  }
}
