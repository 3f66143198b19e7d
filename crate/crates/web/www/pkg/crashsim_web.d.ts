/* tslint:disable */
/* eslint-disable */

/**
 * Energy fractions for `points` altitudes up to `max_altitude_m`, plus the
 * collision threshold (null when none below the search ceiling).
 */
export function energy_curve(mass: number, damping: number, stiffness: number, clearance_mm: number, max_altitude_m: number, points: number): string;

/**
 * Synthesize noisy peaks at 50/100/150 cm with `true_damping`, then fit the
 * damping back; includes the loss curve over the search bracket.
 */
export function fit_synthetic(mass: number, true_damping: number, stiffness: number, noise: number, repeats: number, seed: number): string;

/**
 * One drop: trajectory, raw and filtered proper acceleration, peaks.
 */
export function simulate(mass: number, damping: number, stiffness: number, altitude_cm: number, clearance_mm: number, cutoff_hz: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly energy_curve: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly fit_synthetic: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly simulate: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
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
