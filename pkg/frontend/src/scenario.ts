/** Table-based time-diagram editing for scenario drafts.
 *
 * Edits validate against the model (horizon, targets, control
 * alphabets) before being applied; an invalid edit leaves the draft
 * unchanged and returns inline messages instead of throwing. Drafts
 * never touch the server until an explicit run or compare action.
 */

export interface TimeDiagramEntry {
  t: number;
  target: string;
  symbol: string;
}

export interface ScenarioDraft {
  id: string;
  time_diagram: TimeDiagramEntry[];
  after_effects: unknown[];
  monitoring: unknown[];
}

export interface ModelInfo {
  horizon: number;
  /** control alphabet per subsystem slot id */
  controls: Record<string, string[]>;
}

export interface EditResult {
  draft: ScenarioDraft;
  applied: boolean;
  messages: string[];
}

/** Pull what the editor needs out of a model document. */
export function modelInfo(modelDoc: Record<string, unknown>): ModelInfo {
  const horizon = Number(modelDoc["horizon"]);
  const controls: Record<string, string[]> = {};
  const topo = (modelDoc["topology"] ?? {}) as Record<string, unknown>;
  const aggs = (modelDoc["aggregates"] ?? {}) as Record<string, Record<string, unknown>>;
  collectSlots(topo, aggs, controls);
  return { horizon, controls };
}

function collectSlots(
  topo: Record<string, unknown>,
  aggs: Record<string, Record<string, unknown>>,
  out: Record<string, string[]>,
): void {
  const slots = (topo["slots"] ?? {}) as Record<string, Record<string, unknown>>;
  for (const [name, content] of Object.entries(slots)) {
    if (typeof content["aggregate"] === "string") {
      const agg = aggs[content["aggregate"]] ?? {};
      out[name] = [...((agg["controls"] ?? []) as string[])];
    } else if (content["topology"]) {
      // nested groups: leaf slot ids are what runs address
      collectSlots(content["topology"] as Record<string, unknown>, aggs, out);
    }
  }
}

export function newDraft(id: string): ScenarioDraft {
  return { id, time_diagram: [], after_effects: [], monitoring: [] };
}

export function draftFromDocument(doc: Record<string, unknown>): ScenarioDraft {
  return {
    id: String(doc["id"] ?? "draft"),
    time_diagram: [...((doc["time_diagram"] ?? []) as TimeDiagramEntry[])],
    after_effects: [...((doc["after_effects"] ?? []) as unknown[])],
    monitoring: [...((doc["monitoring"] ?? []) as unknown[])],
  };
}

/** Serialize a draft to the scenario document the service expects. */
export function draftToDocument(draft: ScenarioDraft): Record<string, unknown> {
  return {
    format: "aggsim-scenario/1",
    id: draft.id,
    time_diagram: draft.time_diagram.map((e) => ({ ...e })),
    after_effects: draft.after_effects,
    monitoring: draft.monitoring,
  };
}

export function validateEntry(entry: TimeDiagramEntry, model: ModelInfo): string[] {
  const messages: string[] = [];
  if (!Number.isFinite(entry.t) || entry.t < 0) {
    messages.push(`time ${entry.t} must be a non-negative number`);
  } else if (entry.t > model.horizon) {
    messages.push(`time ${entry.t} is beyond the horizon ${model.horizon}`);
  }
  const alphabet = model.controls[entry.target];
  if (alphabet === undefined) {
    messages.push(`unknown subsystem ${JSON.stringify(entry.target)}`);
  } else if (!alphabet.includes(entry.symbol)) {
    messages.push(
      `symbol ${JSON.stringify(entry.symbol)} is not a control of ${entry.target}`,
    );
  }
  return messages;
}

/** The symbol picker is alphabet-driven: only these can be submitted. */
export function symbolChoices(model: ModelInfo, target: string): string[] {
  return [...(model.controls[target] ?? [])];
}

export function addEntry(
  draft: ScenarioDraft,
  entry: TimeDiagramEntry,
  model: ModelInfo,
): EditResult {
  const messages = validateEntry(entry, model);
  if (messages.length > 0) return { draft, applied: false, messages };
  const diagram = [...draft.time_diagram, { ...entry }].sort(
    (a, b) => a.t - b.t || a.target.localeCompare(b.target),
  );
  return { draft: { ...draft, time_diagram: diagram }, applied: true, messages: [] };
}

export function removeEntry(draft: ScenarioDraft, index: number): EditResult {
  if (index < 0 || index >= draft.time_diagram.length) {
    return { draft, applied: false, messages: [`no entry at row ${index}`] };
  }
  const diagram = draft.time_diagram.filter((_, i) => i !== index);
  return { draft: { ...draft, time_diagram: diagram }, applied: true, messages: [] };
}

export function modifyEntry(
  draft: ScenarioDraft,
  index: number,
  entry: TimeDiagramEntry,
  model: ModelInfo,
): EditResult {
  if (index < 0 || index >= draft.time_diagram.length) {
    return { draft, applied: false, messages: [`no entry at row ${index}`] };
  }
  const messages = validateEntry(entry, model);
  if (messages.length > 0) return { draft, applied: false, messages };
  const diagram = draft.time_diagram.map((e, i) => (i === index ? { ...entry } : e));
  diagram.sort((a, b) => a.t - b.t || a.target.localeCompare(b.target));
  return { draft: { ...draft, time_diagram: diagram }, applied: true, messages: [] };
}

/** A draft is launchable when every row validates against the model. */
export function validateDraft(draft: ScenarioDraft, model: ModelInfo): string[] {
  const messages: string[] = [];
  draft.time_diagram.forEach((entry, i) => {
    for (const m of validateEntry(entry, model)) messages.push(`row ${i}: ${m}`);
  });
  return messages;
}
