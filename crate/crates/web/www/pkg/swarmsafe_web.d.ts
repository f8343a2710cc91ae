/* tslint:disable */
/* eslint-disable */

export class Playground {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Place a density reference (coverage only). Returns its id.
     */
    add_density(x: number, y: number, weight: number): number;
    /**
     * Workspace as `[left, right, bottom, top]` (m).
     */
    bounds(): Float64Array;
    clear_density(): void;
    /**
     * Density references as `[x0, y0, w0, x1, ...]`.
     */
    density(): Float64Array;
    filter(): boolean;
    gamma(): number;
    impacts(): number;
    /**
     * Smallest center distance seen so far (m).
     */
    min_distance(): number;
    /**
     * `scenario` is one of `swap`, `head_on` or `coverage`.
     */
    constructor(scenario: string, robots: number, seed: bigint);
    /**
     * Robot centers as `[x0, y0, x1, y1, ...]` (m).
     */
    positions(): Float64Array;
    robot_radius(): number;
    safety_distance(): number;
    /**
     * Safety score of the run so far; 1 before the first tick.
     */
    score(): number;
    set_filter(on: boolean): void;
    /**
     * Change `gamma` and `d_s` together. Rejected values leave both unchanged.
     */
    set_safety(gamma: number, d_s: number): void;
    /**
     * Advance `ticks` simulation ticks. On error the world is left at the
     * last good tick.
     */
    step(ticks: number): void;
    t(): number;
    /**
     * Last applied velocities, interleaved like [`Playground::positions`] (m/s).
     */
    velocities(): Float64Array;
}

/**
 * Verify a named controller (`zero`, `swap`, `head_on`, `adversarial` or
 * `consensus`) on the scenario suite with `seconds` per scenario. Returns the
 * report as JSON.
 */
export function verify_controller(name: string, robots: number, seconds: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_playground_free: (a: number, b: number) => void;
    readonly playground_add_density: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly playground_bounds: (a: number) => [number, number];
    readonly playground_clear_density: (a: number) => void;
    readonly playground_density: (a: number) => [number, number];
    readonly playground_filter: (a: number) => number;
    readonly playground_gamma: (a: number) => number;
    readonly playground_impacts: (a: number) => number;
    readonly playground_min_distance: (a: number) => number;
    readonly playground_new: (a: number, b: number, c: number, d: bigint) => [number, number, number];
    readonly playground_positions: (a: number) => [number, number];
    readonly playground_robot_radius: (a: number) => number;
    readonly playground_safety_distance: (a: number) => number;
    readonly playground_score: (a: number) => number;
    readonly playground_set_filter: (a: number, b: number) => void;
    readonly playground_set_safety: (a: number, b: number, c: number) => [number, number];
    readonly playground_step: (a: number, b: number) => [number, number];
    readonly playground_t: (a: number) => number;
    readonly playground_velocities: (a: number) => [number, number];
    readonly verify_controller: (a: number, b: number, c: number, d: number) => [number, number, number, number];
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
