/** Workbench session: one selected model, scenario drafts, active runs.
 *
 * The session orchestrates the service calls — launch, step, steer,
 * poll — and keeps one TrajectoryView per run. It performs no
 * simulation itself; a steer refused with 409 becomes a prompt with
 * the next valid time prefilled instead of an exception.
 */

import { ApiClient, ApiError } from "./api.js";
import { LogCursor } from "./poller.js";
import {
  ModelInfo,
  ScenarioDraft,
  draftToDocument,
  modelInfo,
  symbolChoices,
  validateDraft,
} from "./scenario.js";
import { TrajectoryView, appendRecords, emptyView } from "./trajectory.js";

export interface ActiveRun {
  id: string;
  mode: "full" | "paused";
  cursor: LogCursor;
  view: TrajectoryView;
  finished: boolean;
  t: number;
}

export interface SteerOutcome {
  ok: boolean;
  /** for a refused steer: a human prompt, with the run clock to prefill */
  prompt?: string;
  nextValidTime?: number;
  code?: string;
}

export class WorkbenchSession {
  modelDoc: Record<string, unknown> | null = null;
  modelDigest: string | null = null;
  info: ModelInfo | null = null;
  drafts: Map<string, ScenarioDraft> = new Map();
  runs: Map<string, ActiveRun> = new Map();

  constructor(private readonly api: ApiClient) {}

  selectModel(doc: Record<string, unknown>, digest?: string): void {
    this.modelDoc = doc;
    this.modelDigest = digest ?? null;
    this.info = modelInfo(doc);
  }

  openDraft(draft: ScenarioDraft): void {
    this.drafts.set(draft.id, draft);
  }

  /** Valid control symbols for a subsystem; the picker offers only these. */
  controlChoices(target: string): string[] {
    return this.info ? symbolChoices(this.info, target) : [];
  }

  /** Launch a run for a draft; drafts must validate before any launch. */
  async launch(draftId: string, seed: number, mode: "full" | "paused"): Promise<ActiveRun> {
    if (!this.modelDoc || !this.info) throw new Error("no model selected");
    const draft = this.drafts.get(draftId);
    if (!draft) throw new Error(`no draft ${JSON.stringify(draftId)}`);
    const findings = validateDraft(draft, this.info);
    if (findings.length > 0) {
      throw new Error(`draft is not valid: ${findings.join("; ")}`);
    }
    const started = await this.api.startRun({
      model: this.modelDoc,
      scenario: draftToDocument(draft),
      seed,
      mode,
    });
    const run: ActiveRun = {
      id: started.id,
      mode,
      cursor: new LogCursor(this.api, started.id),
      view: emptyView(),
      finished: started.finished,
      t: started.t,
    };
    this.runs.set(run.id, run);
    await this.poll(run.id);
    return run;
  }

  /** Fetch new records for a run and fold them into its view. */
  async poll(runId: string): Promise<void> {
    const run = this.mustRun(runId);
    const fresh = await run.cursor.poll();
    appendRecords(run.view, fresh);
    run.finished = run.cursor.finished;
  }

  /** Advance a paused run one event and refresh the view. */
  async step(runId: string): Promise<void> {
    const run = this.mustRun(runId);
    const res = await this.api.step(runId);
    run.t = res.t;
    run.finished = res.finished;
    await this.poll(runId);
  }

  /** Steering is offered only while the run is live. */
  canSteer(runId: string): boolean {
    const run = this.runs.get(runId);
    return run !== undefined && !run.finished;
  }

  async steer(runId: string, t: number, target: string, symbol: string): Promise<SteerOutcome> {
    const run = this.mustRun(runId);
    try {
      await this.api.control(runId, t, target, symbol);
      return { ok: true };
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        return {
          ok: false,
          code: err.code,
          prompt: `time ${t} already passed — next valid time is ${run.t}`,
          nextValidTime: run.t,
        };
      }
      throw err;
    }
  }

  /** Step a paused run to completion, polling after every event. */
  async runToEnd(runId: string): Promise<void> {
    while (!this.mustRun(runId).finished) {
      await this.step(runId);
    }
  }

  private mustRun(runId: string): ActiveRun {
    const run = this.runs.get(runId);
    if (!run) throw new Error(`no active run ${JSON.stringify(runId)}`);
    return run;
  }
}
