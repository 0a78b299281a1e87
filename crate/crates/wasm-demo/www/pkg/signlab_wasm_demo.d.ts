/* tslint:disable */
/* eslint-disable */

export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Width of the antimaximum window above `λ₁` for `h = φ₁ + tφ₂`.
     */
    amp_delta(t: number): number;
    lambda1(): number;
    lambda2(): number;
    /**
     * Interval `(0, 1)` with `nodes` interior points.
     */
    constructor(nodes: number);
    /**
     * `z` solving `−z'' − σz = φ₁ + tφ₂`.
     */
    scalar_profile(sigma: number, t: number): Float64Array;
    /**
     * `[u; v]` for `A = [[a, b], [c, d]]` and `F = (φ₁, φ₁)`, concatenated.
     */
    system_profile(a: number, b: number, c: number, d: number, mu: number): Float64Array;
    /**
     * `[ξ₁, ξ₂, μ₁⁻, μ₁⁺]` for the same matrix.
     */
    system_summary(a: number, b: number, c: number, d: number): Float64Array;
    xs(): Float64Array;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_amp_delta: (a: number, b: number) => [number, number, number];
    readonly demo_lambda1: (a: number) => number;
    readonly demo_lambda2: (a: number) => number;
    readonly demo_new: (a: number) => [number, number, number];
    readonly demo_scalar_profile: (a: number, b: number, c: number) => [number, number, number, number];
    readonly demo_system_profile: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly demo_system_summary: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly demo_xs: (a: number) => [number, number];
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
