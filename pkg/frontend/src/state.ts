/** Studio session state and reducers.
 *
 * Plain data plus pure transition functions; the DOM shell subscribes and
 * re-renders. Geometry never happens here: masks, displacements, and
 * artifacts all come back from the service.
 */

import type { PreviewPayload, SynthPreview, CommitResult } from "./api.js";
import {
  DefectType,
  defaultsFor,
  carryParams,
  anchorRequirement,
  buildInstruction,
  Instruction,
} from "./instruction.js";

export interface StudioState {
  cloudId: string | null;
  pointCount: number;
  /** Decimated preview of the uploaded cloud, straight from the service. */
  preview: PreviewPayload | null;
  /** Picked anchors as source-cloud indices, in pick order. */
  anchors: number[];
  defectType: DefectType;
  form: Record<string, number>;
  seed: number;
  /** Last synthesis preview; its mask drives the overlay colors. */
  synth: SynthPreview | null;
  commit: CommitResult | null;
  status: string;
  busy: boolean;
}

export function initialState(): StudioState {
  return {
    cloudId: null,
    pointCount: 0,
    preview: null,
    anchors: [],
    defectType: "bump",
    form: defaultsFor("bump"),
    seed: 7,
    synth: null,
    commit: null,
    status: "upload a cloud to begin",
    busy: false,
  };
}

export function withCloud(
  s: StudioState,
  cloudId: string,
  pointCount: number,
): StudioState {
  // New cloud invalidates everything downstream of it.
  return {
    ...initialState(),
    defectType: s.defectType,
    form: s.form,
    seed: s.seed,
    cloudId,
    pointCount,
    status: `cloud ${cloudId} (${pointCount} points)`,
  };
}

export function withPreview(s: StudioState, p: PreviewPayload): StudioState {
  return { ...s, preview: p, status: `preview: ${p.count} of ${p.total} points` };
}

/** Toggle an anchor; re-picking an anchored point removes it. Order of the
 * surviving picks is preserved. */
export function togglePick(s: StudioState, sourceIndex: number): StudioState {
  const at = s.anchors.indexOf(sourceIndex);
  const anchors =
    at >= 0
      ? s.anchors.filter((_, i) => i !== at)
      : [...s.anchors, sourceIndex];
  return { ...s, anchors, synth: null, commit: null };
}

export function clearAnchors(s: StudioState): StudioState {
  return { ...s, anchors: [], synth: null, commit: null };
}

export function setDefectType(s: StudioState, t: DefectType): StudioState {
  if (t === s.defectType) return s;
  // Shared-name fields carry over; type-specific ones reset to defaults.
  return { ...s, defectType: t, form: carryParams(t, s.form), synth: null, commit: null };
}

export function setParam(s: StudioState, name: string, value: number): StudioState {
  if (!(name in s.form)) return s;
  return { ...s, form: { ...s.form, [name]: value }, synth: null, commit: null };
}

export function setSeed(s: StudioState, seed: number): StudioState {
  return { ...s, seed: Math.trunc(seed), synth: null, commit: null };
}

export function withSynth(s: StudioState, p: SynthPreview): StudioState {
  return { ...s, synth: p, status: `masked ${p.masked} points` };
}

export function withCommit(s: StudioState, c: CommitResult): StudioState {
  return { ...s, commit: c, status: `committed ${c.id}` };
}

export function withStatus(s: StudioState, status: string): StudioState {
  return { ...s, status };
}

export function withBusy(s: StudioState, busy: boolean): StudioState {
  return { ...s, busy };
}

/** Preview is allowed once the cloud exists and the anchor count satisfies
 * the selected operator. */
export function canPreview(s: StudioState): boolean {
  if (!s.cloudId || s.busy) return false;
  const req = anchorRequirement(s.defectType);
  if (!req.usesAnchors) return true;
  return s.anchors.length === 0 ? false : s.anchors.length >= req.min;
}

export function currentInstruction(s: StudioState): Instruction {
  return buildInstruction(s.defectType, s.anchors, s.form, s.seed);
}

/** Minimal observable store: state + listeners. */
export class Store {
  private state: StudioState;
  private listeners: Array<(s: StudioState) => void> = [];

  constructor(state: StudioState = initialState()) {
    this.state = state;
  }

  get(): StudioState {
    return this.state;
  }

  set(next: StudioState): void {
    this.state = next;
    for (const fn of this.listeners) fn(next);
  }

  update(fn: (s: StudioState) => StudioState): void {
    this.set(fn(this.state));
  }

  subscribe(fn: (s: StudioState) => void): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((f) => f !== fn);
    };
  }
}
