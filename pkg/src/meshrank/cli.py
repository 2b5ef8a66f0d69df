"""Command-line front door: mesh prep, design, serving, simulation, analysis.

Every subcommand is a thin shell over the library; all file outputs are
written atomically (temp file + rename) and all randomness flows through
an explicit --seed (a generated seed is printed so runs can be repeated).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import secrets
import sys
import tempfile
from pathlib import Path

from .errors import MeshRankError
from .objio import parse_obj, validate, write_obj
from .observers import ObserverModel, simulate_session_with_events
from .protocol.design import (
    DEFAULT_PROMPT,
    ShadingMode,
    design_from_dict,
    design_to_dict,
    full_factorial,
)
from .protocol.events import dump_events, group_by_session, load_events, replay_events
from .protocol.session import Phase
from .simplify import decimate_ladder, geometric_error
from .stats.report import aggregate_report, report_csv_text

DEFAULT_LISTEN = os.environ.get("MESHRANK_LISTEN", "127.0.0.1:8000")


def _load_config(path: str) -> dict[str, str]:
    """key=value lines mirroring flag names (dashes or underscores)."""
    mapping: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise MeshRankError(f"{path}:{line_no}: expected key=value")
            mapping[key.strip().replace("-", "_")] = value.strip()
    return mapping


def _write_atomic(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_mesh(path: Path):
    with open(path, "rb") as fh:
        return parse_obj(fh, name=path.stem)


def _comma_ints(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part]


def _resolve_seed(seed: int | None) -> int:
    if seed is None:
        seed = secrets.randbits(63)
        print(f"seed: {seed}")
    return seed


# -- subcommands -----------------------------------------------------------


def cmd_validate(args) -> int:
    mesh = _load_mesh(Path(args.input))
    report = validate(mesh)
    doc = {
        "input": args.input,
        "triangle_count": report.triangle_count,
        "degenerate_faces": report.degenerate_faces,
        "out_of_range_indices": report.out_of_range_indices,
        "connected_components": report.connected_components,
        "is_watertight": report.is_watertight,
        "bounding_box": report.bounding_box,
        "passed": report.passed,
    }
    print(json.dumps(doc, indent=None if args.compact else 2))
    return 0 if report.passed else 1


def cmd_decimate(args) -> int:
    input_path = Path(args.input)
    mesh = _load_mesh(input_path)
    targets = _comma_ints(args.targets)
    seed = _resolve_seed(args.seed)
    out_dir = Path(args.out_dir)
    ladder = decimate_ladder(mesh, targets)
    report_doc = {"input": str(input_path), "source_triangles": mesh.triangle_count,
                  "seed": seed, "targets": {}}
    for target in sorted(targets, reverse=True):
        simplified, report = ladder[target]
        out_path = out_dir / f"{input_path.stem}_{target}.obj"
        _write_atomic(out_path, write_obj(simplified))
        entry = {
            "achieved": report.achieved,
            "overshoot": report.overshoot,
            "collapses": report.collapses,
            "output": str(out_path),
        }
        if args.samples > 0:
            summary = geometric_error(mesh, simplified, args.samples, seed)
            entry["geometric_error"] = {"mean": summary.mean, "max": summary.max,
                                        "samples": summary.sample_count}
        report_doc["targets"][str(target)] = entry
        print(f"{target}: {report.achieved} triangles -> {out_path}")
    report_path = out_dir / f"{input_path.stem}_decimation.json"
    _write_atomic(report_path, json.dumps(report_doc, indent=2).encode())
    print(f"report: {report_path}")
    return 0


def cmd_design(args) -> int:
    mesh_paths = [Path(p) for p in args.meshes.split(",") if p]
    shadings = [ShadingMode(s) for s in args.shadings.split(",") if s]
    textures = {}
    for item in (args.textures.split(",") if args.textures else []):
        mesh_ref, _, texture_ref = item.partition("=")
        textures[mesh_ref] = texture_ref
    meshes = []
    for path in mesh_paths:
        mesh = _load_mesh(path)
        meshes.append((path.name, mesh.triangle_count))
        if path.name not in textures and str(path) in textures:
            textures[path.name] = textures[str(path)]
    design = full_factorial(meshes, shadings, prompt=args.prompt, textures=textures)
    doc = design_to_dict(design)
    data = json.dumps(doc, indent=2).encode()
    if args.out:
        _write_atomic(Path(args.out), data)
        print(f"{len(design.stimuli)} stimuli, {len(design.pairs)} pairs -> {args.out}")
    else:
        sys.stdout.write(data.decode() + "\n")
    return 0


def _build_model(args) -> ObserverModel:
    masking = {}
    for item in (args.masking.split(",") if args.masking else []):
        key, _, value = item.partition("=")
        masking[key] = float(value)
    beta = math.inf if args.beta == "inf" else float(args.beta)
    if args.model == "deterministic" or math.isinf(beta) and args.model == "logistic":
        return ObserverModel(kind="deterministic")
    if args.model == "guesser":
        return ObserverModel(kind="guesser")
    if args.model == "shading_masked":
        return ObserverModel(kind="shading_masked", beta=beta, shading_factors=masking)
    return ObserverModel(kind="logistic", beta=beta)


def cmd_simulate(args) -> int:
    with open(args.design, encoding="utf-8") as fh:
        design = design_from_dict(json.load(fh))
    model = _build_model(args)
    seed = _resolve_seed(args.seed)
    events = simulate_events(model, design, reps=args.reps, seed=seed)
    if args.out:
        import io as _io

        buffer = _io.StringIO()
        dump_events(events, buffer)
        _write_atomic(Path(args.out), buffer.getvalue().encode())
        print(f"{args.reps} sessions -> {args.out}")
    else:
        dump_events(events, sys.stdout)
    return 0


def simulate_events(model: ObserverModel, design, reps: int, seed: int) -> list[dict]:
    """Session event stream for a batch of simulated observers.

    Per-replication seeds derive from the root seed; session ids are
    sim-0000, sim-0001, ... so logs are stable across runs.
    """
    import numpy as np

    child = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    seeds = child.integers(0, 2**63 - 1, size=reps)
    events: list[dict] = []
    for i in range(reps):
        _, session_events = simulate_session_with_events(
            model, design, int(seeds[i]), session_id=f"sim-{i:04d}"
        )
        events.extend(session_events)
    return events


def analyze_events(events: list[dict], group_by: str | None):
    sessions = group_by_session(events)
    states = []
    ids = []
    skipped = 0
    for session_id, session_events in sessions.items():
        state = replay_events(session_events)
        if state.phase is Phase.COMPLETE:
            states.append(state)
            ids.append(session_id)
        else:
            skipped += 1
    return aggregate_report(states, group_by=group_by, session_ids=ids), skipped


def cmd_analyze(args) -> int:
    if args.sessions == "-":
        events = [json.loads(line) for line in sys.stdin if line.strip()]
    else:
        events = load_events(args.sessions)
    report, skipped = analyze_events(events, args.group_by)
    if skipped:
        print(f"skipped {skipped} incomplete session(s)", file=sys.stderr)
    data = report.to_json_bytes()
    if args.out:
        _write_atomic(Path(args.out), data)
        print(f"report -> {args.out}")
    else:
        sys.stdout.buffer.write(data + b"\n")
    if args.csv:
        _write_atomic(Path(args.csv), report.to_csv_text().encode())
        print(f"csv -> {args.csv}")
    return 0


def cmd_report(args) -> int:
    with open(args.report, encoding="utf-8") as fh:
        doc = json.load(fh)
    text = report_csv_text(doc)
    if args.csv:
        _write_atomic(Path(args.csv), text.encode())
        print(f"csv -> {args.csv}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app
    from .service.storage import ExperimentStore

    host, _, port = args.listen.rpartition(":")
    store = ExperimentStore(args.store)
    app = create_app(store, ui_dir=args.ui_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="meshrank",
        description="Paired-comparison psychophysics toolkit for 3D mesh quality.",
        epilog="A config file (--config, key=value lines) supplies defaults "
               "for any flag; explicit flags win.",
    )
    parser.add_argument("--config", default=None, help="key=value defaults file")
    raw_sub = parser.add_subparsers(dest="command", required=True)
    commands: dict[str, argparse.ArgumentParser] = {}

    class _Sub:
        def add_parser(self, name: str, **kwargs) -> argparse.ArgumentParser:
            commands[name] = raw_sub.add_parser(name, **kwargs)
            return commands[name]

    sub = _Sub()

    p = sub.add_parser("validate", help="structural report for an OBJ mesh")
    p.add_argument("--input", required=True)
    p.add_argument("--compact", action="store_true")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("decimate", help="produce a resolution ladder from one mesh")
    p.add_argument("--input", required=True)
    p.add_argument("--targets", required=True, help="comma-separated triangle counts")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--samples", type=int, default=1000,
                   help="geometric-error sample count (0 to skip)")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=cmd_decimate)

    p = sub.add_parser("design", help="build an experiment design JSON")
    p.add_argument("--meshes", required=True, help="comma-separated OBJ paths")
    p.add_argument("--shadings", default="unlit", help="comma-separated shading modes")
    p.add_argument("--prompt", default=DEFAULT_PROMPT)
    p.add_argument("--textures", default="", help="mesh.obj=texture.png,...")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_design)

    p = sub.add_parser("simulate", help="run simulated observers, emit JSONL events")
    p.add_argument("--design", required=True)
    p.add_argument("--model", default="guesser",
                   choices=["deterministic", "guesser", "logistic", "shading_masked"])
    p.add_argument("--beta", default="1.0")
    p.add_argument("--masking", default="", help="shading=factor,... for shading_masked")
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="JSONL path (default stdout)")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("analyze", help="aggregate JSONL session logs into a report")
    p.add_argument("--sessions", required=True, help="JSONL path or - for stdin")
    p.add_argument("--group-by", default=None, choices=["shading", "confidence"])
    p.add_argument("--out", default=None, help="report JSON path (default stdout)")
    p.add_argument("--csv", default=None)
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("report", help="render a report JSON as CSV")
    p.add_argument("--report", required=True)
    p.add_argument("--csv", default=None)
    p.set_defaults(fn=cmd_report)

    p = sub.add_parser("serve", help="start the experiment HTTP service")
    p.add_argument("--store", required=True)
    p.add_argument("--listen", default=DEFAULT_LISTEN)
    p.add_argument("--ui-dir", default=None)
    p.set_defaults(fn=cmd_serve)

    return parser, commands


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, commands = build_parser()
    try:
        # config defaults are applied before parsing so explicit flags win;
        # string defaults still go through each option's type conversion
        if "--config" in argv:
            at = argv.index("--config")
            if at + 1 >= len(argv):
                parser.error("--config needs a path")
            mapping = _load_config(argv[at + 1])
            del argv[at:at + 2]
            for command in commands.values():
                known = {action.dest for action in command._actions}
                command.set_defaults(**{k: v for k, v in mapping.items() if k in known})
                for action in command._actions:
                    if action.dest in mapping:
                        action.required = False
        args = parser.parse_args(argv)
        return args.fn(args)
    except MeshRankError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
