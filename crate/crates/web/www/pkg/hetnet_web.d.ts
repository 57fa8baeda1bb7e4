/* tslint:disable */
/* eslint-disable */

/**
 * Rows of `[ratio, case1, case2, case4]` for `points` log-spaced ratios.
 */
export function association_sweep(alpha_s: number, ratio_min: number, ratio_max: number, points: number): Float64Array;

/**
 * Rows of `[x, pdf]` for the serving distance of `tier` ("mcell"/"scell")
 * conditioned on association case `case` (1, 2 or 4).
 */
export function distance_pdf(alpha_s: number, ratio: number, _case: number, tier: string, bins: number): Float64Array;

/**
 * Monte Carlo association frequencies `[case1, case2, case3, case4, se1, se2, se4]`.
 */
export function monte_carlo_association(alpha_s: number, ratio: number, n: number, seed: number, shadow_db: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly association_sweep: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly distance_pdf: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly monte_carlo_association: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
