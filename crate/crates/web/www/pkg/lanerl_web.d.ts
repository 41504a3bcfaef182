/* tslint:disable */
/* eslint-disable */

export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Closed centerline as `[x0, y0, x1, y1, ...]`.
     */
    centerline(): Float64Array;
    lane_half_width(): number;
    constructor(seed: bigint, traffic: number, target_speed_kmh: number);
    /**
     * Row-major raster intensities in `[0, 1]`, row 0 ahead of the agent.
     */
    raster(): Float64Array;
    raster_height(): number;
    raster_width(): number;
    set_lateral_bias(metres: number): void;
    set_target_speed(kmh: number): void;
    /**
     * `[speed km/h, lateral offset m, heading error rad, laps, seconds]`.
     */
    status(): Float64Array;
    /**
     * Advances up to `n` steps. Returns false once the episode has ended.
     */
    step(n: number): boolean;
    termination(): string;
    /**
     * Agent positions since reset as `[x, y, ...]`.
     */
    trail(): Float64Array;
    /**
     * `[x, y, heading, half_length, half_width]` per vehicle, agent first.
     */
    vehicles(): Float64Array;
}

/**
 * Interleaved `[v, r_v(v), r_v'(v), ...]` for `v` from 0 to `v_end` km/h.
 */
export function reward_curves(v_end: number, step: number): Float64Array;

/**
 * CuRLA traffic count per episode for a schedule of `total` episodes.
 */
export function traffic_schedule(total: number, _switch: number, ramp: number, traffic_max: number): Uint32Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_centerline: (a: number) => [number, number];
    readonly demo_lane_half_width: (a: number) => number;
    readonly demo_new: (a: bigint, b: number, c: number) => [number, number, number];
    readonly demo_raster: (a: number) => [number, number];
    readonly demo_raster_height: (a: number) => number;
    readonly demo_raster_width: (a: number) => number;
    readonly demo_set_lateral_bias: (a: number, b: number) => void;
    readonly demo_set_target_speed: (a: number, b: number) => void;
    readonly demo_status: (a: number) => [number, number];
    readonly demo_step: (a: number, b: number) => [number, number, number];
    readonly demo_termination: (a: number) => [number, number];
    readonly demo_trail: (a: number) => [number, number];
    readonly demo_vehicles: (a: number) => [number, number];
    readonly reward_curves: (a: number, b: number) => [number, number, number, number];
    readonly traffic_schedule: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
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
