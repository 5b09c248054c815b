"""Headless operation: validate configs, run simulations, verify replays,
export artifacts, and launch the HTTP service.

Exit codes: 0 success, 1 runtime error, 2 validation failure or replay
divergence. Errors print machine-readable JSON on stderr.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Optional

import click
import uvicorn

from .config import Registry, load_config
from .errors import SimsparkError
from .loop import RUNNING, Ablations, Simulation
from .persistence import EXPORT_KINDS, RunStore
from .providers import (
    LiveProvider,
    Provider,
    ProviderConfig,
    ReplayProvider,
    Script,
    ScriptedProvider,
)
from .service import create_app

PROVIDER_CHOICES = ("live", "scripted", "replay")
ABLATION_CHOICES = ("no-daily-life", "no-social-habits")


def _fail(error: dict | SimsparkError, exit_code: int = 1) -> None:
    payload = error.to_json() if isinstance(error, SimsparkError) else error
    click.echo(json.dumps(payload, ensure_ascii=False), err=True)
    sys.exit(exit_code)


def _load_registry(config_path: str, seed: Optional[int]) -> Registry:
    document = json.loads(Path(config_path).read_text("utf-8"))
    if seed is not None:
        document.setdefault("simulation", {})["random_seed"] = seed
    config, agents, npcs, events = load_config(document)
    return Registry(config, agents=agents, npcs=npcs, events=events)


def _build_provider(
    provider: str,
    script: Optional[str],
    transcript: Optional[str],
    endpoint: str,
    model: str,
    throttle_ms: float = 0.0,
) -> Provider:
    if provider == "scripted":
        return ScriptedProvider(Script.load(script) if script else Script(), delay_ms=throttle_ms)
    if provider == "replay":
        if not transcript:
            raise click.UsageError("--transcript is required with --provider replay")
        return ReplayProvider.from_file(transcript)
    return LiveProvider(ProviderConfig(endpoint=endpoint, model_name=model))


def _ablations(names: tuple[str, ...]) -> Ablations:
    return Ablations(
        no_daily_life="no-daily-life" in names,
        no_social_habits="no-social-habits" in names,
    )


@click.group()
def main():
    """Simulate social media behavior with reasoning-traced agents."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
def validate(config_path):
    """Validate a config document; nonzero exit on violations."""
    try:
        registry = _load_registry(config_path, None)
    except SimsparkError as exc:
        _fail(exc, 2)
    report = registry.validate()
    click.echo(json.dumps(report.to_json(), ensure_ascii=False, indent=2))
    if not report.ok:
        sys.exit(2)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--provider", "provider_name", type=click.Choice(PROVIDER_CHOICES), default="scripted")
@click.option("--script", type=click.Path(exists=True), default=None)
@click.option("--transcript", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--ablate", multiple=True, type=click.Choice(ABLATION_CHOICES))
@click.option("--endpoint", default="", help="Live completion endpoint URL.")
@click.option("--model", default="", help="Live model name.")
def run(config_path, out_dir, provider_name, script, transcript, seed, ablate, endpoint, model):
    """Run a simulation to completion and write the run directory."""
    try:
        registry = _load_registry(config_path, seed)
        provider = _build_provider(provider_name, script, transcript, endpoint, model)
        sim = Simulation(registry, provider, Path(out_dir), _ablations(ablate))
        sim.start()
        sim.run_until_done()
    except SimsparkError as exc:
        _fail(exc, 2 if exc.code == "CONFIG_INVALID" else 1)
    if sim.state.status != "Finished":
        _fail({"code": "RUN_SUSPENDED", "message": f"run stopped in state {sim.state.status}"})
    click.echo(str(sim.store.run_dir))


def _apply_recorded_change(sim: Simulation, change: dict) -> None:
    entity, action, payload = change["entity"], change["action"], change.get("payload")
    if action == "remove":
        sim.mutate(lambda reg: reg.remove_entity(change["entity_id"]))
        return
    if entity == "simulation":
        document = {"simulation": payload}
        config, _, _, _ = load_config(document)
        sim.mutate(lambda reg: reg.replace_config(config))
    elif entity == "agent":
        document = {"simulation": sim.registry.to_document()["simulation"], "agents": [payload]}
        _, agents, _, _ = load_config(document)
        sim.mutate(lambda reg: reg.upsert_agent(agents[0]))
    elif entity == "npc":
        document = {"simulation": sim.registry.to_document()["simulation"], "npcs": [payload]}
        _, _, npcs, _ = load_config(document)
        sim.mutate(lambda reg: reg.upsert_npc(npcs[0]))
    elif entity == "event":
        document = {"simulation": sim.registry.to_document()["simulation"], "events": [payload]}
        _, _, _, events = load_config(document)
        if sim.state.status == "Paused":
            sim.inject_event(events[0])
        else:
            sim.mutate(lambda reg: reg.add_event(events[0]))


def replay_run(run_dir: Path, out_dir: Path) -> tuple[bool, Optional[int], Path]:
    """Re-execute a recorded run against its transcript; returns
    (matches, first divergent sequence, replica directory)."""
    recorded = RunStore.open_existing(run_dir)
    config_doc = recorded.load_config()
    document = {k: v for k, v in config_doc.items() if k not in ("format_version", "run_id")}
    ablations = _ablations(tuple(document.pop("ablations", ())))
    config, agents, npcs, events = load_config(document)
    registry = Registry(config, agents=agents, npcs=npcs, events=events)
    provider = ReplayProvider.from_file(str(run_dir / "transcript.jsonl"))
    sim = Simulation(registry, provider, out_dir, ablations)

    first_boundary = next(
        (r["seq"] for r in recorded.records if r["type"] in ("note", "tick_begin")),
        len(recorded.records),
    )
    changes = [r for r in recorded.records if r["type"] == "config_change"]
    pre_start = [c for c in changes if c["seq"] < first_boundary]
    by_tick: dict[int, list[dict]] = {}
    for change in changes:
        if change["seq"] >= first_boundary:
            by_tick.setdefault(change["effective_tick"], []).append(change)

    for change in pre_start:
        _apply_recorded_change(sim, change)
    sim.start()
    while sim.state.status == RUNNING:
        tick = sim.state.current_tick
        if tick in by_tick:
            sim.pause()
            for change in by_tick.pop(tick):
                _apply_recorded_change(sim, change)
            sim.resume()
        sim.step_tick()

    produced = sim.store.records
    for original, replica in zip(recorded.records, produced):
        if original != replica:
            return False, original["seq"], sim.store.run_dir
    if len(produced) != len(recorded.records):
        return False, min(len(produced), len(recorded.records)), sim.store.run_dir
    return True, None, sim.store.run_dir


@main.command()
@click.option("--run-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_dir", type=click.Path(), default=None, help="Replica directory (default: temp).")
def replay(run_dir, out_dir):
    """Re-execute a run from its transcript and verify the log reproduces."""
    import tempfile

    target = Path(out_dir) if out_dir else Path(tempfile.mkdtemp(prefix="simspark-replay-"))
    try:
        ok, divergence, replica = replay_run(Path(run_dir), target)
    except SimsparkError as exc:
        _fail(exc)
    if not ok:
        _fail(
            {
                "code": "REPLAY_DIVERGENCE",
                "message": f"first divergent sequence number: {divergence}",
                "replica": str(replica),
            },
            2,
        )
    click.echo(json.dumps({"ok": True, "replica": str(replica)}))


@main.command()
@click.option("--run-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--what", required=True, type=click.Choice(EXPORT_KINDS))
@click.option("--embeddings", is_flag=True, default=False)
def export(run_dir, what, embeddings):
    """Print one export stream (JSON lines) from a run directory."""
    try:
        store = RunStore.open_existing(Path(run_dir))
        for line in store.export(what, include_embeddings=embeddings):
            click.echo(line)
    except SimsparkError as exc:
        _fail(exc)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--data-dir", required=True, type=click.Path())
@click.option("--listen", default="127.0.0.1:8008")
@click.option("--provider", "provider_name", type=click.Choice(PROVIDER_CHOICES), default="scripted")
@click.option("--script", type=click.Path(exists=True), default=None)
@click.option("--transcript", type=click.Path(exists=True), default=None)
@click.option("--endpoint", default="")
@click.option("--model", default="")
@click.option("--ui-dir", type=click.Path(exists=True, file_okay=False), default=None)
@click.option("--throttle-ms", type=float, default=0.0, help="Pad each scripted completion (demo pacing).")
def serve(config_path, data_dir, listen, provider_name, script, transcript, endpoint, model, ui_dir, throttle_ms):
    """Serve the HTTP control plane (and optionally the built UI)."""
    try:
        registry = _load_registry(config_path, None)
        provider = _build_provider(provider_name, script, transcript, endpoint, model, throttle_ms)
        sim = Simulation(registry, provider, Path(data_dir))
    except SimsparkError as exc:
        _fail(exc, 2)
    app = create_app(sim, ui_dir=ui_dir)
    host, _, port = listen.rpartition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="warning")


if __name__ == "__main__":
    main()
