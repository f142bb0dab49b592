/** Instruction drafting: per-type parameter forms and assembly of the
 * wire-format instruction document.
 *
 * The server is the only validator; ranges here just size the sliders.
 * Lengths are fractions of the category reference radius.
 */

export type DefectType =
  | "bump"
  | "dent"
  | "scratch"
  | "groove"
  | "hole"
  | "bend"
  | "crack"
  | "freeform";

export const DEFECT_TYPES: DefectType[] = [
  "bump",
  "dent",
  "scratch",
  "groove",
  "hole",
  "bend",
  "crack",
  "freeform",
];

const OPERATORS: Record<DefectType, string> = {
  bump: "mpas1d",
  dent: "mpas1d",
  scratch: "mpas1d",
  groove: "mpas1d",
  hole: "mpas1d",
  bend: "mpas2d-bend",
  crack: "mpas2d-crack",
  freeform: "mpas3d",
};

/** Displacement direction fixed by defect semantics (bumps grow out,
 * everything else carves in). */
const DIR_PINS: Partial<Record<DefectType, number>> = {
  bump: 1,
  dent: -1,
  hole: -1,
  scratch: -1,
  groove: -1,
};

export interface FieldDef {
  name: string;
  label: string;
  min: number;
  max: number;
  step: number;
  default: number;
}

const R_FIELD: FieldDef = { name: "r", label: "radius", min: 0.02, max: 0.45, step: 0.005, default: 0.2 };
const D_FIELD: FieldDef = { name: "d", label: "depth", min: 0.005, max: 0.2, step: 0.005, default: 0.04 };

/** Form fields per type. Fields sharing a name mean the same thing, so
 * switching type preserves them and resets only the rest. */
export const TYPE_FIELDS: Record<DefectType, FieldDef[]> = {
  bump: [R_FIELD, D_FIELD],
  dent: [R_FIELD, D_FIELD],
  scratch: [R_FIELD, D_FIELD],
  groove: [R_FIELD, D_FIELD],
  hole: [
    R_FIELD,
    D_FIELD,
    { name: "removal_frac", label: "removal fraction", min: 0.1, max: 1.0, step: 0.05, default: 0.8 },
  ],
  bend: [
    { name: "delta", label: "blend band", min: 0.05, max: 0.45, step: 0.01, default: 0.3 },
    { name: "theta", label: "angle (rad)", min: -0.8, max: 0.8, step: 0.02, default: 0.4 },
  ],
  crack: [
    { name: "tau", label: "slit width", min: 0.02, max: 0.3, step: 0.01, default: 0.12 },
    { name: "sigma", label: "edge jitter", min: 0, max: 0.02, step: 0.001, default: 0.0 },
    { name: "r_c", label: "rim width", min: 0.02, max: 0.15, step: 0.005, default: 0.06 },
  ],
  freeform: [
    { name: "eps", label: "hull margin", min: 0.05, max: 0.4, step: 0.01, default: 0.2 },
    { name: "amp", label: "kernel height", min: -0.15, max: 0.15, step: 0.005, default: 0.05 },
    { name: "ksigma", label: "kernel width", min: 0.05, max: 0.6, step: 0.01, default: 0.3 },
  ],
};

export function defaultsFor(type: DefectType): Record<string, number> {
  const out: Record<string, number> = {};
  for (const f of TYPE_FIELDS[type]) out[f.name] = f.default;
  return out;
}

/** Carry values whose field name survives the type switch; reset the rest. */
export function carryParams(
  next: DefectType,
  previous: Record<string, number>,
): Record<string, number> {
  const out = defaultsFor(next);
  for (const f of TYPE_FIELDS[next]) {
    if (f.name in previous) out[f.name] = previous[f.name];
  }
  return out;
}

/** Anchor counts the operator can accept; used to gate the preview button. */
export function anchorRequirement(type: DefectType): { min: number; usesAnchors: boolean } {
  switch (type) {
    case "bump":
    case "dent":
    case "hole":
      return { min: 1, usesAnchors: true };
    case "scratch":
    case "groove":
      return { min: 2, usesAnchors: true };
    case "freeform":
      return { min: 4, usesAnchors: true };
    default:
      return { min: 0, usesAnchors: false };
  }
}

export interface Instruction {
  schema_version: number;
  type: DefectType;
  operator: string;
  region: Record<string, unknown>;
  params: Record<string, unknown>;
  seed: number;
}

/** Assemble the wire document. Anchor order equals pick order; that
 * ordering is meaningful (it drives scratch path direction). */
export function buildInstruction(
  type: DefectType,
  anchors: number[],
  form: Record<string, number>,
  seed: number,
): Instruction {
  const region: Record<string, unknown> =
    anchorRequirement(type).usesAnchors && anchors.length > 0
      ? { anchors: [...anchors] }
      : {};

  let params: Record<string, unknown>;
  const op = OPERATORS[type];
  if (op === "mpas1d") {
    params = {
      m: anchors.length > 0 ? anchors.length : 1,
      r: form.r,
      d: form.d,
      dir: DIR_PINS[type],
    };
    if (type === "hole") params.removal_frac = form.removal_frac;
  } else if (op === "mpas2d-bend") {
    params = { delta: form.delta, theta: form.theta };
  } else if (op === "mpas2d-crack") {
    params = { tau: form.tau, sigma: form.sigma, r_c: form.r_c };
  } else {
    params = {
      m: anchors.length > 0 ? anchors.length : 5,
      eps: form.eps,
      kernels: [{ amp: form.amp, center: [0.5, 0.5], sigma: form.ksigma }],
      k_smooth: 8,
      lam: 0.5,
    };
  }

  return {
    schema_version: 1,
    type,
    operator: op,
    region,
    params,
    seed,
  };
}

/** Canonical export: the exact text sent to the server on commit, so a
 * replayed file reproduces the artifact byte-for-byte. */
export function exportInstruction(instr: Instruction): string {
  return JSON.stringify(instr, null, 2);
}
