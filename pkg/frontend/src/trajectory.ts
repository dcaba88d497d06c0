/** Trajectory view assembly.
 *
 * Every number here is copied from log records — sample points are the
 * service's samples verbatim (no client-side resampling), markers come
 * from transition/control records, terminal values from the terminal
 * record.
 */

import { LogRecord } from "./api.js";

export interface SeriesPoint {
  t: number;
  vars: number[];
  region: string;
}

export interface TransitionMarker {
  t: number;
  target: string;
  from: string;
  to: string;
}

export interface ControlMarker {
  t: number;
  target: string;
  symbol: string;
  matched: boolean;
}

export interface TerminalState {
  vars: number[];
  region: string;
  law: string;
}

export interface TrajectoryView {
  series: Record<string, SeriesPoint[]>;
  transitions: TransitionMarker[];
  controls: ControlMarker[];
  terminal: Record<string, TerminalState> | null;
}

export function emptyView(): TrajectoryView {
  return { series: {}, transitions: [], controls: [], terminal: null };
}

/** Fold freshly polled records into the view; append-only. */
export function appendRecords(view: TrajectoryView, records: LogRecord[]): TrajectoryView {
  for (const rec of records) {
    switch (rec.type) {
      case "sample": {
        const target = String(rec.target);
        const points = (view.series[target] ??= []);
        points.push({
          t: rec.t,
          vars: rec["vars"] as number[],
          region: String(rec["region"]),
        });
        break;
      }
      case "transition":
        view.transitions.push({
          t: rec.t,
          target: String(rec.target),
          from: String(rec["from"]),
          to: String(rec["to"]),
        });
        break;
      case "control":
        view.controls.push({
          t: rec.t,
          target: String(rec.target),
          symbol: String(rec["symbol"]),
          matched: Boolean(rec["matched"]),
        });
        break;
      case "terminal":
        view.terminal = rec["states"] as Record<string, TerminalState>;
        break;
      default:
        break; // inputs, outputs, rules: not drawn in the trajectory pane
    }
  }
  return view;
}

export function buildView(records: LogRecord[]): TrajectoryView {
  return appendRecords(emptyView(), records);
}
