import { describe, expect, it } from "vitest";

import {
  addEntry,
  draftFromDocument,
  draftToDocument,
  modelInfo,
  modifyEntry,
  newDraft,
  removeEntry,
  symbolChoices,
  validateDraft,
} from "../src/scenario.js";

import modelDoc from "./fixtures/model.json";
import scenarioDoc from "./fixtures/scenario.json";

const model = modelInfo(modelDoc as Record<string, unknown>);

describe("time-diagram editing", () => {
  it("extracts horizon and control alphabets from the model", () => {
    expect(model.horizon).toBe(8.0);
    expect(model.controls["tank"]!.sort()).toEqual(["DRAIN", "FILL"]);
    expect(model.controls["counter"]).toEqual([]);
  });

  it("adds a valid entry and keeps the diagram sorted", () => {
    let draft = newDraft("d");
    const first = addEntry(draft, { t: 6.0, target: "tank", symbol: "DRAIN" }, model);
    expect(first.applied).toBe(true);
    const second = addEntry(
      first.draft,
      { t: 2.0, target: "tank", symbol: "FILL" },
      model,
    );
    expect(second.applied).toBe(true);
    expect(second.draft.time_diagram.map((e) => e.t)).toEqual([2.0, 6.0]);
    expect(validateDraft(second.draft, model)).toEqual([]);
  });

  it("flags an entry beyond the horizon and leaves the draft unchanged", () => {
    const draft = newDraft("d");
    const result = addEntry(draft, { t: 9.0, target: "tank", symbol: "DRAIN" }, model);
    expect(result.applied).toBe(false);
    expect(result.messages[0]).toContain("beyond the horizon");
    expect(result.draft).toBe(draft);
    expect(result.draft.time_diagram).toHaveLength(0);
  });

  it("flags unknown targets and out-of-alphabet symbols", () => {
    const draft = newDraft("d");
    const ghost = addEntry(draft, { t: 1.0, target: "ghost", symbol: "GO" }, model);
    expect(ghost.applied).toBe(false);
    expect(ghost.messages[0]).toContain("unknown subsystem");
    const bad = addEntry(draft, { t: 1.0, target: "tank", symbol: "EXPLODE" }, model);
    expect(bad.applied).toBe(false);
    expect(bad.messages[0]).toContain("not a control");
  });

  it("removing the last entry leaves a valid empty diagram", () => {
    const start = addEntry(
      newDraft("d"),
      { t: 6.0, target: "tank", symbol: "DRAIN" },
      model,
    ).draft;
    const removed = removeEntry(start, 0);
    expect(removed.applied).toBe(true);
    expect(removed.draft.time_diagram).toEqual([]);
    expect(validateDraft(removed.draft, model)).toEqual([]);
  });

  it("modify replaces a row in place and revalidates", () => {
    const start = addEntry(
      newDraft("d"),
      { t: 6.0, target: "tank", symbol: "DRAIN" },
      model,
    ).draft;
    const ok = modifyEntry(start, 0, { t: 3.0, target: "tank", symbol: "FILL" }, model);
    expect(ok.applied).toBe(true);
    expect(ok.draft.time_diagram).toEqual([{ t: 3.0, target: "tank", symbol: "FILL" }]);
    const bad = modifyEntry(start, 0, { t: 99.0, target: "tank", symbol: "FILL" }, model);
    expect(bad.applied).toBe(false);
    expect(bad.draft).toBe(start);
  });

  it("out-of-range row edits are flagged", () => {
    const draft = newDraft("d");
    expect(removeEntry(draft, 0).applied).toBe(false);
    expect(
      modifyEntry(draft, 3, { t: 1.0, target: "tank", symbol: "FILL" }, model).applied,
    ).toBe(false);
  });

  it("the symbol picker offers only the subsystem's alphabet", () => {
    expect(symbolChoices(model, "tank").sort()).toEqual(["DRAIN", "FILL"]);
    expect(symbolChoices(model, "nope")).toEqual([]);
  });

  it("round-trips a scenario document through the draft editor", () => {
    const draft = draftFromDocument(scenarioDoc as Record<string, unknown>);
    expect(draft.id).toBe("fill-only");
    expect(validateDraft(draft, model)).toEqual([]);
    const doc = draftToDocument(draft);
    expect(doc["format"]).toBe("aggsim-scenario/1");
    // documents omit empty sections; the draft serializes them explicitly
    expect(doc["time_diagram"]).toEqual(
      (scenarioDoc as Record<string, unknown>)["time_diagram"] ?? [],
    );
  });
});
