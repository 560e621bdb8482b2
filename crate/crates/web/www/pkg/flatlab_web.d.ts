/* tslint:disable */
/* eslint-disable */

export function cutoff_profile(r1: number, r2: number, m: number, points: number): Float64Array;

export function ot_landscape(n: number, displayed: boolean): Float64Array;

/**
 * `[r1, r2, C]` at the minimizer over the default search box.
 */
export function ot_optimum(displayed: boolean): Float64Array;

export function theta_modulus(tau_re: number, tau_im: number, n: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly cutoff_profile: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly ot_landscape: (a: number, b: number) => [number, number];
    readonly ot_optimum: (a: number) => [number, number, number, number];
    readonly theta_modulus: (a: number, b: number, c: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
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
