/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demo_free: (a: number, b: number) => void;
export const demo_centerline: (a: number) => [number, number];
export const demo_lane_half_width: (a: number) => number;
export const demo_new: (a: bigint, b: number, c: number) => [number, number, number];
export const demo_raster: (a: number) => [number, number];
export const demo_raster_height: (a: number) => number;
export const demo_raster_width: (a: number) => number;
export const demo_set_lateral_bias: (a: number, b: number) => void;
export const demo_set_target_speed: (a: number, b: number) => void;
export const demo_status: (a: number) => [number, number];
export const demo_step: (a: number, b: number) => [number, number, number];
export const demo_termination: (a: number) => [number, number];
export const demo_trail: (a: number) => [number, number];
export const demo_vehicles: (a: number) => [number, number];
export const reward_curves: (a: number, b: number) => [number, number, number, number];
export const traffic_schedule: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
