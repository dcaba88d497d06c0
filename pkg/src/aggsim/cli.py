"""Command-line interface: thin adapters over the library.

Exit codes: 0 success, 1 domain/validation failure, 2 I/O or usage failure.
"""

from __future__ import annotations

import csv
import glob as globmod
import io
import json
import logging
import os
import sys

import click

from . import documents
from .criteria import compare as compare_op
from .engine import simulate
from .errors import AggsimError, NoScenarioMatched
from .structure import MutationOp, Struct, apply_strategy

log = logging.getLogger("aggsim")

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_IO = 2


def _setup_logging():
    level = os.environ.get("AGGSIM_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


class _IOExit(click.ClickException):
    exit_code = EXIT_IO


class _DomainExit(click.ClickException):
    exit_code = EXIT_DOMAIN


def _read_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise _IOExit(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise _IOExit(f"{path} is not valid JSON: {exc}") from exc


def _write_text(path: str, text: str):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise _IOExit(f"cannot write {path}: {exc}") from exc


@click.group()
def main():
    """Hierarchical aggregate-model simulation under scenario control."""
    _setup_logging()


@main.command()
@click.argument("model_path")
@click.argument("scenario_paths", nargs=-1)
def validate(model_path, scenario_paths):
    """Validate a model document and any scenario documents against it."""
    model_doc = _read_json(model_path)
    findings = documents.validate_model_doc(model_doc)
    for sp in scenario_paths:
        sdoc = _read_json(sp)
        findings += [f"{sp}: {f}" for f in documents.validate_scenario_doc(sdoc, model_doc)]
    for f in findings:
        click.echo(f"finding: {f}")
    if findings:
        raise _DomainExit(f"{len(findings)} validation finding(s)")
    click.echo("ok")


def _run_log(model_doc, scenario_doc, seed):
    model = documents.model_from_doc(model_doc)
    scenario = documents.scenario_from_doc(scenario_doc)
    want = scenario_doc.get("model_digest")
    if want and want != documents.model_doc_digest(model_doc):
        raise AggsimError("scenario's model digest does not match the model")
    return simulate(model, scenario, seed), scenario


@main.command()
@click.argument("model_path")
@click.argument("scenario_path")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_path", default=None, help="Write the run log here.")
def run(model_path, scenario_path, seed, out_path):
    """Simulate one scenario and print a summary."""
    model_doc = _read_json(model_path)
    scenario_doc = _read_json(scenario_path)
    try:
        runlog, _ = _run_log(model_doc, scenario_doc, seed)
        criteria = documents.scenario_criteria(scenario_doc)
        if out_path:
            _write_text(out_path, runlog.to_jsonl())
        transitions = runlog.records_of("transition")
        click.echo(f"records: {len(runlog.records)}")
        click.echo(f"transitions: {len(transitions)}")
        for ident, state in sorted(runlog.terminal_states().items()):
            vals = ", ".join(repr(v) for v in state["vars"])
            click.echo(
                f"terminal {ident}: [{vals}] region={state['region']} "
                f"law={state['law']}"
            )
        from .criteria import evaluate

        for name, criterion in criteria.items():
            click.echo(f"criterion {name}: {evaluate(runlog, criterion)!r}")
    except AggsimError as exc:
        raise _DomainExit(str(exc)) from exc


@main.command()
@click.argument("model_path")
@click.argument("scenario_glob")
@click.option("--criterion", "criterion_name", required=True)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--report", "report_path", default=None)
def compare(model_path, scenario_glob, criterion_name, seed, report_path):
    """Rank every scenario matching the glob under one named criterion."""
    model_doc = _read_json(model_path)
    paths = sorted(globmod.glob(scenario_glob))
    try:
        if not paths:
            raise NoScenarioMatched(f"no scenario matches {scenario_glob!r}")
        scenarios, criterion = [], None
        for p in paths:
            sdoc = _read_json(p)
            scenarios.append(documents.scenario_from_doc(sdoc))
            named = documents.scenario_criteria(sdoc)
            if criterion is None and criterion_name in named:
                criterion = named[criterion_name]
        if criterion is None:
            raise AggsimError(
                f"criterion {criterion_name!r} not defined by any matched scenario"
            )
        model = documents.model_from_doc(model_doc)
        ranking = compare_op(model, scenarios, criterion, seed)
        for rank, (sid, score) in enumerate(ranking.entries, start=1):
            click.echo(f"{rank}. {sid}  score={score!r}")
        if report_path:
            _write_text(
                report_path,
                documents.canonical_json(
                    {
                        "criterion": documents.criterion_to_spec(criterion),
                        "seed": ranking.seed,
                        "model_digest": ranking.model_digest,
                        "ranking": [
                            {"id": sid, "score": score}
                            for sid, score in ranking.entries
                        ],
                    }
                )
                + "\n",
            )
    except AggsimError as exc:
        raise _DomainExit(str(exc)) from exc


@main.command()
@click.argument("kb_path")
@click.option("--out", "out_path", required=True)
def synthesize(kb_path, out_path):
    """Synthesize a dynamic model from a knowledge-base document."""
    from .synthesis import synthesize_dynamic_model

    kb_doc = _read_json(kb_path)
    try:
        kb = documents.kb_from_doc(kb_doc)
        model = synthesize_dynamic_model(kb)
        _write_text(
            out_path,
            json.dumps(documents.model_to_doc(model), indent=2, sort_keys=True)
            + "\n",
        )
        click.echo(
            f"synthesized {len(model.aggregates)} subsystem(s), "
            f"{len(model.topology.couplings)} coupling(s)"
        )
    except AggsimError as exc:
        raise _DomainExit(str(exc)) from exc


def _struct_from_model_doc(doc: dict) -> Struct:
    topo = doc.get("topology", {})
    nodes = {name: dict(spec) for name, spec in topo.get("slots", {}).items()}
    edges = {}
    for i, c in enumerate(topo.get("couplings", ())):
        edges[f"c{i}"] = (c["source"]["slot"], c["dest"]["slot"], dict(c))
    return Struct.build(nodes, edges)


def _model_doc_with_struct(doc: dict, struct: Struct) -> dict:
    out = dict(doc)
    out["topology"] = {
        "slots": {n: dict(a) for n, a in struct.node_map().items()},
        "couplings": [
            dict(attrs) for _, (_, _, attrs) in sorted(struct.edge_map().items())
        ],
    }
    return out


@main.command()
@click.argument("model_path")
@click.argument("script_path")
@click.option("--out", "out_path", required=True)
def mutate(model_path, script_path, out_path):
    """Apply a mutation script to a model document's topology."""
    model_doc = _read_json(model_path)
    script = _read_json(script_path)
    try:
        struct = _struct_from_model_doc(model_doc)
        ops = [MutationOp(**op) for op in script]
        struct = apply_strategy(struct, ops)
        new_doc = _model_doc_with_struct(model_doc, struct)
        findings = documents.validate_model_doc(new_doc)
        if findings:
            raise AggsimError("; ".join(findings))
        _write_text(out_path, json.dumps(new_doc, indent=2, sort_keys=True) + "\n")
        click.echo(f"applied {len(ops)} mutation(s)")
    except (AggsimError, TypeError) as exc:
        raise _DomainExit(str(exc)) from exc


@main.command()
@click.argument("log_path")
@click.option("--out", "out_path", required=True)
def report(log_path, out_path):
    """Render a run log to a plot-ready CSV of sampled trajectories."""
    try:
        with open(log_path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise _IOExit(f"cannot read {log_path}: {exc}") from exc
    from .engine import RunLog

    try:
        runlog = RunLog.from_jsonl(text)
    except (ValueError, IndexError) as exc:
        raise _DomainExit(f"{log_path} is not a run log: {exc}") from exc
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["t", "target", "variable", "value", "region", "law", "mode"])
    for rec in runlog.records:
        if rec["type"] != "sample":
            continue
        for i, v in enumerate(rec["vars"]):
            writer.writerow(
                [rec["t"], rec["target"], i, repr(v), rec["region"], rec["law"], rec["mode"]]
            )
    _write_text(out_path, buf.getvalue())
    click.echo(f"wrote {out_path}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option(
    "--allow-remote",
    is_flag=True,
    help="Required to bind anywhere other than loopback.",
)
def serve(host, port, allow_remote):
    """Serve the HTTP API for the workbench and for scripts."""
    if host not in ("127.0.0.1", "localhost", "::1") and not allow_remote:
        raise click.UsageError("binding beyond loopback requires --allow-remote")
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
