/**
 * Simulation-output readers: run manifests with SHA-256 verification,
 * trajectory/summary CSVs and Wigner grid files.
 *
 * Inputs are opened read-only and never modified; any mismatch between a
 * manifest digest and the file on disk aborts the render.
 */

import { createHash } from "node:crypto";
import { readFileSync } from "node:fs";
import { join } from "node:path";

export class DigestMismatchError extends Error {}
export class InputError extends Error {}

export interface Manifest {
  name: string;
  files: Record<string, { sha256: string; bytes: number }>;
  [key: string]: unknown;
}

export interface Trajectory {
  t_us: number[];
  gamma_t: number[];
  fidelity: number[];
  parity: number[];
  n_mean: number[];
  var_x1: number[];
  var_x2: number[];
  p_excited: number[];
}

export interface WignerGrid {
  reMin: number;
  reMax: number;
  reN: number;
  imMin: number;
  imMax: number;
  imN: number;
  /** values[imIndex][reIndex] */
  values: number[][];
}

export interface SweepSummary {
  index: number[];
  value: number[];
  maxFidelity: number[];
  argmaxGammaT: number[];
  finalFidelity: number[];
  absAlpha: number[];
  status: string[];
}

export function loadManifest(dir: string, name: string): Manifest {
  const path = join(dir, `${name}_manifest.json`);
  let text: string;
  try {
    text = readFileSync(path, "utf-8");
  } catch {
    throw new InputError(`missing manifest: ${path}`);
  }
  const manifest = JSON.parse(text) as Manifest;
  for (const [fname, meta] of Object.entries(manifest.files ?? {})) {
    const data = readFileSync(join(dir, fname));
    const digest = createHash("sha256").update(data).digest("hex");
    if (digest !== meta.sha256) {
      throw new DigestMismatchError(
        `digest mismatch for ${fname}: manifest ${meta.sha256.slice(0, 12)}..., file ${digest.slice(0, 12)}...`,
      );
    }
  }
  return manifest;
}

function splitCsv(text: string): string[][] {
  return text
    .trim()
    .split("\n")
    .map((line) => line.split(","));
}

export function loadTrajectory(dir: string, fname: string): Trajectory {
  const rows = splitCsv(readFileSync(join(dir, fname), "utf-8"));
  const header = rows[0];
  const want = ["t_us", "gamma_t", "fidelity", "parity", "n_mean", "var_x1", "var_x2", "p_excited"];
  if (header.join(",") !== want.join(",")) {
    throw new InputError(`unexpected trajectory header in ${fname}: ${header.join(",")}`);
  }
  const cols: number[][] = want.map(() => []);
  for (const row of rows.slice(1)) {
    row.forEach((cell, i) => cols[i].push(Number(cell)));
  }
  return {
    t_us: cols[0],
    gamma_t: cols[1],
    fidelity: cols[2],
    parity: cols[3],
    n_mean: cols[4],
    var_x1: cols[5],
    var_x2: cols[6],
    p_excited: cols[7],
  };
}

export function loadWigner(dir: string, fname: string): WignerGrid {
  const rows = splitCsv(readFileSync(join(dir, fname), "utf-8"));
  if (rows[0].join(",") !== "re_min,re_max,re_n,im_min,im_max,im_n") {
    throw new InputError(`unexpected Wigner header in ${fname}`);
  }
  const [reMin, reMax, reN, imMin, imMax, imN] = rows[1].map(Number);
  const values = rows.slice(2).map((r) => r.map(Number));
  if (values.length !== imN || values.some((r) => r.length !== reN)) {
    throw new InputError(`Wigner grid shape mismatch in ${fname}`);
  }
  return { reMin, reMax, reN, imMin, imMax, imN, values };
}

export function loadSweepSummary(dir: string, fname: string): SweepSummary {
  const rows = splitCsv(readFileSync(join(dir, fname), "utf-8"));
  if (!rows[0].join(",").startsWith("index,axis,value,max_fidelity,argmax_gamma_t,final_fidelity,abs_alpha")) {
    throw new InputError(`unexpected sweep summary header in ${fname}`);
  }
  const out: SweepSummary = {
    index: [],
    value: [],
    maxFidelity: [],
    argmaxGammaT: [],
    finalFidelity: [],
    absAlpha: [],
    status: [],
  };
  for (const r of rows.slice(1)) {
    out.index.push(Number(r[0]));
    out.value.push(Number(r[2]));
    out.maxFidelity.push(Number(r[3]));
    out.argmaxGammaT.push(Number(r[4]));
    out.finalFidelity.push(Number(r[5]));
    out.absAlpha.push(Number(r[6]));
    out.status.push(r[7]);
  }
  return out;
}

export interface CompareSeries {
  gamma_t: number[];
  overlap: number[];
  overlapNormalized: number[];
  fidelityUhlmann: number[];
}

export function loadCompare(dir: string, fname: string): CompareSeries {
  const rows = splitCsv(readFileSync(join(dir, fname), "utf-8"));
  if (rows[0].join(",") !== "t_us,gamma_t,overlap,overlap_normalized,fidelity_uhlmann") {
    throw new InputError(`unexpected compare header in ${fname}`);
  }
  const out: CompareSeries = { gamma_t: [], overlap: [], overlapNormalized: [], fidelityUhlmann: [] };
  for (const r of rows.slice(1)) {
    out.gamma_t.push(Number(r[1]));
    out.overlap.push(Number(r[2]));
    out.overlapNormalized.push(Number(r[3]));
    out.fidelityUhlmann.push(Number(r[4]));
  }
  return out;
}
