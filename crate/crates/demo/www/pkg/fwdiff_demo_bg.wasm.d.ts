/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const defaultTriple: () => [number, number];
export const gaussianTriple: (a: number, b: number, c: number) => [number, number, number, number];
export const treeScan: (a: number, b: number, c: number) => [number, number, number, number];
export const xorSweep: (a: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
