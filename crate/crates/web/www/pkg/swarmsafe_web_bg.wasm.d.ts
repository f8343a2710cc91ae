/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_playground_free: (a: number, b: number) => void;
export const playground_add_density: (a: number, b: number, c: number, d: number) => [number, number, number];
export const playground_bounds: (a: number) => [number, number];
export const playground_clear_density: (a: number) => void;
export const playground_density: (a: number) => [number, number];
export const playground_filter: (a: number) => number;
export const playground_gamma: (a: number) => number;
export const playground_impacts: (a: number) => number;
export const playground_min_distance: (a: number) => number;
export const playground_new: (a: number, b: number, c: number, d: bigint) => [number, number, number];
export const playground_positions: (a: number) => [number, number];
export const playground_robot_radius: (a: number) => number;
export const playground_safety_distance: (a: number) => number;
export const playground_score: (a: number) => number;
export const playground_set_filter: (a: number, b: number) => void;
export const playground_set_safety: (a: number, b: number, c: number) => [number, number];
export const playground_step: (a: number, b: number) => [number, number];
export const playground_t: (a: number) => number;
export const playground_velocities: (a: number) => [number, number];
export const verify_controller: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
