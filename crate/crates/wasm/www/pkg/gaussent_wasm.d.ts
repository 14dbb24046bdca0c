/* tslint:disable */
/* eslint-disable */

/**
 * Row-major `f` and `g` of a named catalog channel.
 */
export function catalog_channel(name: string, param: number): string;

/**
 * Validity and entanglement verdict of `(f, g)`.
 *
 * Invalid pairs are still placed in the `(det f, det g)` plane, with
 * `valid: false` and the reason.
 */
export function classify_channel(f: Float64Array, g: Float64Array): string;

/**
 * Sends the second mode of `tmss(r)` through the channel.
 */
export function evolve_tmss(r: number, f: Float64Array, g: Float64Array): string;

/**
 * Log-negativity of `tmss(r)` before and after the channel, on `steps`
 * evenly spaced points in `(0, r_max]`.
 */
export function sweep(f: Float64Array, g: Float64Array, r_max: number, steps: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly catalog_channel: (a: number, b: number, c: number) => [number, number];
    readonly classify_channel: (a: number, b: number, c: number, d: number) => [number, number];
    readonly evolve_tmss: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly sweep: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
