/* tslint:disable */
/* eslint-disable */

/**
 * Coefficients of (x/sinh x)^{1/2} through x^{len−1}.
 */
export function ahat_coefficients(len: number): string;

/**
 * a⋆b and [a, b]⋆ on the flat plane through ħ^order. With `unit_poisson`
 * the Poisson bracket is {x¹, x²} = 1; otherwise ω = dx¹dx².
 */
export function star_product(a: string, b: string, order: number, unit_poisson: boolean): string;

/**
 * Index check on the torus with Ω_ħ = ħ(c + cos x¹)dx¹dx², for the trivial
 * line bundle (`rotation = false`) or the rotating rank-one projector in
 * a rank-two bundle.
 */
export function torus_index(c: string, rotation: boolean): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly ahat_coefficients: (a: number) => [number, number];
    readonly star_product: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
    readonly torus_index: (a: number, b: number, c: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
