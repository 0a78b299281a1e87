/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demo_free: (a: number, b: number) => void;
export const demo_amp_delta: (a: number, b: number) => [number, number, number];
export const demo_lambda1: (a: number) => number;
export const demo_lambda2: (a: number) => number;
export const demo_new: (a: number) => [number, number, number];
export const demo_scalar_profile: (a: number, b: number, c: number) => [number, number, number, number];
export const demo_system_profile: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const demo_system_summary: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const demo_xs: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
