"""Command-line interface.

Subcommands: validate, translate, plan, route, repair, simulate, roundtrip,
bench. Exit codes: 0 success, 1 validation/translation/routing failure,
2 usage or configuration error.

Configuration is a flat ``key = value`` file selected with --config; flags
override file values. The completion backend is chosen only by the
FORMBRIDGE_BACKEND environment variable (mock, replay, or remote), so a
remote endpoint is never contacted implicitly. Repair traces can be written
to a log file: one ``attempt=<i> digest=<sha256-prefix> codes=<codes>`` line
per attempt, then ``outcome=<status>``.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

from .backends import (
    BackendTimeout,
    BackendUnavailable,
    CompletionBackend,
    CorruptingTranslatorBackend,
    MockBackend,
    RemoteBackend,
)
from .core import (
    Artifact,
    FormbridgeError,
    Registry,
    UnknownFormalism,
    UnrepresentableElement,
)
from .fidelity import benchmark, roundtrip
from .formalisms import builtin_registry
from .planner import (
    NATURAL_LANGUAGE,
    CostPolicy,
    Ftg,
    GraphFormatError,
    HopFailed,
    NoPath,
    default_graph,
    execute_plan,
    load_graph,
    plan,
)
from .repair import RepairBackendError, RepairPolicy, repair_translate
from .reporting import (
    benchmark_records,
    benchmark_table,
    cost_records,
    cost_table,
    save_benchmark_figure,
    save_cost_figure,
)
from .router import (
    AmbiguousTask,
    EmptyRequest,
    NoAdapterForKind,
    NoPipelineForKind,
    RouterConfigError,
    classify_task,
    dispatch,
    load_adapters,
    load_lexicon,
)
from .scriptlang import ScriptRuntimeError, ScriptSyntaxError
from .serving import (
    BackendModelSpec,
    FullSwap,
    SharedBackbone,
    UnknownTaskInTrace,
    compare,
    load_trace,
    simulate,
)
from .taxonomy import bindings_by_kind
from .translate import (
    LLM_DIRECT,
    LLM_SCRIPTED,
    RULE_BASED,
    ScriptCache,
    ScriptCacheError,
    ScriptSynthesisFailed,
    UnsupportedPair,
    make_spec,
)

__all__ = ["main"]

SUFFIX_FORMALISMS = {
    ".uml": "uml-mini",
    ".er": "er-mini",
    ".p9": "fol-p9",
    ".pk": "fol-pk",
    ".json": "tab-json",
    ".csv": "tab-csv",
}

CONFIG_KEYS = ("graph", "lexicon", "adapters", "seed", "max_attempts",
               "threshold", "replay", "remote_url")

BACKEND_KINDS = ("mock", "replay", "remote")


class ConfigError(FormbridgeError):
    pass


@dataclass(slots=True)
class RuntimeConfig:
    registry: Registry
    backend_kind: str
    graph_path: Path | None = None
    lexicon_path: Path | None = None
    adapters_path: Path | None = None
    replay_path: Path | None = None
    remote_url: str | None = None
    seed: int = 0
    max_attempts: int = 3
    threshold: float = 0.25

    def graph(self) -> Ftg:
        if self.graph_path is None:
            return default_graph()
        return load_graph(self.graph_path)

    def lexicon(self):
        if self.lexicon_path is None:
            text = _packaged("lexicon.txt")
            from .router import parse_lexicon
            return parse_lexicon(text)
        return load_lexicon(self.lexicon_path)

    def adapters(self):
        if self.adapters_path is None:
            from .router import parse_adapters
            return parse_adapters(_packaged("adapters.txt"))
        return load_adapters(self.adapters_path)

    def repair_policy(self) -> RepairPolicy:
        return RepairPolicy(max_attempts=self.max_attempts)


def _packaged(name: str) -> str:
    return resources.files("formbridge").joinpath(f"data/{name}") \
        .read_text(encoding="utf-8")


def parse_config_text(text: str) -> dict[str, str]:
    """Flat ``key = value`` configuration, ``#`` comments allowed."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"config line {lineno}: expected 'key = value'")
        key = key.strip()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        values[key] = value.strip()
    return values


def _read_text(path: Path, what: str) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {what} {path}: {exc}") from None


def resolve_config(args: argparse.Namespace) -> RuntimeConfig:
    file_values: dict[str, str] = {}
    config_path = getattr(args, "config", None)
    if config_path is not None:
        file_values = parse_config_text(_read_text(Path(config_path), "config"))

    def pick(flag_name: str, key: str) -> str | None:
        flag = getattr(args, flag_name, None)
        if flag is not None:
            return str(flag)
        return file_values.get(key)

    def pick_path(flag_name: str, key: str) -> Path | None:
        value = pick(flag_name, key)
        return None if value is None else Path(value)

    seed_text = pick("seed", "seed") or "0"
    try:
        seed = int(seed_text)
    except ValueError:
        raise ConfigError(f"seed must be an integer, got {seed_text!r}") from None
    if not 0 <= seed < 2 ** 64:
        raise ConfigError("seed must fit in 64 unsigned bits")
    attempts_text = pick("max_attempts", "max_attempts") or "3"
    try:
        max_attempts = int(attempts_text)
    except ValueError:
        raise ConfigError(
            f"max_attempts must be an integer, got {attempts_text!r}") from None
    if max_attempts < 1:
        raise ConfigError("max_attempts must be at least 1")
    threshold_text = pick("threshold", "threshold") or "0.25"
    try:
        threshold = float(threshold_text)
    except ValueError:
        raise ConfigError(
            f"threshold must be a number, got {threshold_text!r}") from None
    if not 0 < threshold <= 1:
        raise ConfigError("threshold must lie in (0, 1]")
    backend_kind = os.environ.get("FORMBRIDGE_BACKEND", "mock")
    if backend_kind not in BACKEND_KINDS:
        raise ConfigError(f"FORMBRIDGE_BACKEND must be one of "
                          f"{', '.join(BACKEND_KINDS)}; got {backend_kind!r}")
    return RuntimeConfig(
        registry=builtin_registry(),
        backend_kind=backend_kind,
        graph_path=pick_path("graph", "graph"),
        lexicon_path=pick_path("lexicon", "lexicon"),
        adapters_path=pick_path("adapters", "adapters"),
        replay_path=pick_path("replay", "replay"),
        remote_url=pick("remote_url", "remote_url"),
        seed=seed,
        max_attempts=max_attempts,
        threshold=threshold,
    )


def parse_replay_script(text: str) -> list[str]:
    """Replay file: completions separated by lines containing only ``---``.

    Each nonempty completion is newline-terminated, matching the codecs'
    canonical renderings.
    """
    parts: list[list[str]] = [[]]
    for line in text.splitlines():
        if line.strip() == "---":
            parts.append([])
        else:
            parts[-1].append(line)
    return ["\n".join(chunk) + "\n" if chunk else "" for chunk in parts]


def build_backend(cfg: RuntimeConfig) -> CompletionBackend:
    if cfg.backend_kind == "mock":
        return MockBackend(default="???", name="mock")
    if cfg.backend_kind == "replay":
        if cfg.replay_path is None:
            raise ConfigError("replay backend needs --replay FILE "
                              "(or 'replay' in the config file)")
        script = parse_replay_script(_read_text(cfg.replay_path, "replay file"))
        return MockBackend(schedule=script, name="replay")
    url = os.environ.get("FORMBRIDGE_REMOTE_URL") or cfg.remote_url
    if not url:
        raise ConfigError("remote backend needs FORMBRIDGE_REMOTE_URL "
                          "(or 'remote_url' in the config file)")
    return RemoteBackend(url)


def infer_formalism(path: Path, override: str | None, registry: Registry,
                    allow_nl: bool = False) -> str:
    if override is not None:
        # repair does not parse its source, so prose input is fine there
        if not (allow_nl and override == NATURAL_LANGUAGE):
            registry.get(override)
        return override
    formalism = SUFFIX_FORMALISMS.get(path.suffix)
    if formalism is None:
        raise ConfigError(f"cannot infer a formalism from {path.name!r}; "
                          "pass the formalism flag")
    return formalism


def _policy(value: str) -> CostPolicy:
    try:
        return CostPolicy(value)
    except ValueError:
        raise ConfigError(
            f"unknown policy {value!r}; choose from "
            + ", ".join(p.value for p in CostPolicy)) from None


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------


def cmd_validate(args: argparse.Namespace, cfg: RuntimeConfig) -> int:
    path = Path(args.file)
    formalism = infer_formalism(path, args.formalism, cfg.registry)
    artifact = Artifact(formalism, _read_text(path, "input"))
    diagnostics = cfg.registry.validate(artifact)
    if not diagnostics:
        return 0
    for diagnostic in diagnostics:
        print(diagnostic.render_line())
    return 1 if any(d.is_error for d in diagnostics) else 0


def cmd_translate(args: argparse.Namespace, cfg: RuntimeConfig) -> int:
    path = Path(args.file)
    content = _read_text(path, "input")
    graph = cfg.graph()
    chosen = plan(graph, args.source, args.target, _policy(args.policy))
    backend = build_backend(cfg)
    cache = ScriptCache(args.script_cache) if args.script_cache else None
    outcome, _ = execute_plan(Artifact(args.source, content), chosen, backend,
                              cfg.repair_policy(), cfg.registry,
                              seed=cfg.seed, script_cache=cache)
    sys.stdout.write(outcome.artifact.content)
    return 0


def cmd_plan(args: argparse.Namespace, cfg: RuntimeConfig) -> int:
    graph = cfg.graph()
    chosen = plan(graph, args.source, args.target, _policy(args.policy))
    print(f"plan={chosen.describe()}")
    print(f"hops={len(chosen.hops)}")
    print(f"predicted_fidelity={chosen.predicted_fidelity:g}")
    print(f"predicted_latency={chosen.predicted_latency:g}")
    return 0


def cmd_route(args: argparse.Namespace, cfg: RuntimeConfig) -> int:
    decision = classify_task(args.request, cfg.lexicon(), cfg.threshold,
                             cfg.adapters())
    invocation = dispatch(decision, args.request, bindings_by_kind())
    binding = invocation.pipeline
    print(f"task={decision.task.value}")
    print(f"adapter={decision.adapter.name}")
    print(f"confidence={decision.confidence:g}")
    if decision.runner_up is not None:
        kind, score = decision.runner_up
        print(f"runner_up={kind.value}:{score:g}")
    print(f"action={binding.pipeline.action}")
    print(f"route={'->'.join(binding.pipeline.route) or '-'}")
    return 0


def cmd_repair(args: argparse.Namespace, cfg: RuntimeConfig) -> int:
    path = Path(args.file)
    source = infer_formalism(path, args.source, cfg.registry, allow_nl=True)
    artifact = Artifact(source, _read_text(path, "input"))
    backend = build_backend(cfg)
    try:
        outcome, trace = repair_translate(artifact, args.target, backend,
                                          cfg.repair_policy(), cfg.registry,
                                          seed=cfg.seed)
    except RepairBackendError as exc:
        if args.trace_log:
            Path(args.trace_log).write_text(exc.trace.export_log(),
                                            encoding="utf-8")
        raise
    if args.trace_log:
        Path(args.trace_log).write_text(trace.export_log(), encoding="utf-8")
    if outcome.ok:
        sys.stdout.write(outcome.artifact.content)
        return 0
    for diagnostic in outcome.diagnostics:
        sys.stderr.write(diagnostic.render_line() + "\n")
    return 1


def cmd_simulate(args: argparse.Namespace, cfg: RuntimeConfig) -> int:
    trace = load_trace(Path(args.trace))
    model = BackendModelSpec(args.model_load_ms, args.model_mem_mb)
    adapters = cfg.adapters()

    def full() -> FullSwap:
        return FullSwap(args.capacity) if args.capacity else FullSwap()

    def shared() -> SharedBackbone:
        return SharedBackbone(args.capacity) if args.capacity \
            else SharedBackbone()

    if args.policy == "both":
        reports = compare(trace, [full(), shared()], model, adapters)
    else:
        policy = full() if args.policy == "full" else shared()
        reports = [simulate(trace, policy, model, adapters)]
    out = cost_table(reports) if args.format == "table" \
        else cost_records(reports)
    sys.stdout.write(out)
    if args.figures:
        figure = save_cost_figure(reports,
                                  Path(args.figures) / "serving-costs.png")
        print(f"figure={figure}")
    return 0


def cmd_roundtrip(args: argparse.Namespace, cfg: RuntimeConfig) -> int:
    path = Path(args.file)
    source = infer_formalism(path, args.source, cfg.registry)
    artifact = Artifact(source, _read_text(path, "input"))
    graph = cfg.graph()
    policy = _policy(args.policy)
    forward = plan(graph, source, args.via, policy)
    backward = plan(graph, args.via, source, policy)
    backend = build_backend(cfg)
    report = roundtrip(artifact, forward, backward, backend,
                       cfg.repair_policy(), cfg.registry, seed=cfg.seed)
    print(f"forward={forward.describe()}")
    print(f"backward={backward.describe()}")
    print(f"distortion={report.distortion:g}")
    print(f"missing={len(report.missing)}")
    print(f"fabricated={len(report.fabricated)}")
    print(f"mutated={len(report.mutated)}")
    print(f"syntactic_valid={'true' if report.syntactic_valid else 'false'}")
    return 0


def cmd_bench(args: argparse.Namespace, cfg: RuntimeConfig) -> int:
    corpus_dir = Path(args.corpus)
    if not corpus_dir.is_dir():
        raise ConfigError(f"corpus {corpus_dir} is not a directory")
    files = sorted(p for p in corpus_dir.iterdir()
                   if p.suffix in SUFFIX_FORMALISMS)
    if not files:
        raise ConfigError(f"no fixtures with known suffixes in {corpus_dir}")
    source = infer_formalism(files[0], args.source, cfg.registry)
    corpus = []
    for p in files:
        if infer_formalism(p, args.source, cfg.registry) != source:
            raise ConfigError("corpus fixtures must share one formalism; "
                              f"{p.name} differs from {source}")
        corpus.append(Artifact(source, _read_text(p, "fixture")))
    variants = [make_spec(source, args.target, kind) for kind in args.variants]
    if cfg.backend_kind == "mock":
        backend: CompletionBackend = CorruptingTranslatorBackend(
            corruption_probability=args.corruption, registry=cfg.registry,
            name="mock")
    else:
        backend = build_backend(cfg)
    rows = benchmark(corpus, variants, backend, cfg.repair_policy(),
                     cfg.registry, seeds=range(args.seeds))
    out = benchmark_table(rows) if args.format == "table" \
        else benchmark_records(rows)
    sys.stdout.write(out)
    if args.figures:
        figure = save_benchmark_figure(rows,
                                       Path(args.figures) / "benchmark.png")
        print(f"figure={figure}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="formbridge",
        description="Plan, execute, repair, and audit translations between "
                    "modeling formalisms.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE",
                        help="flat key = value configuration file")
    common.add_argument("--graph", metavar="FILE", help="graph file override")
    common.add_argument("--lexicon", metavar="FILE")
    common.add_argument("--adapters", metavar="FILE")
    common.add_argument("--replay", metavar="FILE",
                        help="completion script for the replay backend")
    common.add_argument("--seed", metavar="N")
    common.add_argument("--max-attempts", dest="max_attempts", metavar="N")
    common.add_argument("--threshold", metavar="X")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common],
                       help="parse and structurally check one artifact")
    p.add_argument("file")
    p.add_argument("--as", dest="formalism", default=None,
                   help="formalism id (default: inferred from suffix)")
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("translate", parents=[common],
                       help="translate a file along the best plan")
    p.add_argument("file")
    p.add_argument("--from", dest="source", required=True)
    p.add_argument("--to", dest="target", required=True)
    p.add_argument("--policy", default="max-fidelity")
    p.add_argument("--script-cache", dest="script_cache", metavar="DIR")
    p.set_defaults(handler=cmd_translate)

    p = sub.add_parser("plan", parents=[common],
                       help="show the best plan without executing it")
    p.add_argument("--from", dest="source", required=True)
    p.add_argument("--to", dest="target", required=True)
    p.add_argument("--policy", default="max-fidelity")
    p.set_defaults(handler=cmd_plan)

    p = sub.add_parser("route", parents=[common],
                       help="classify a request and name its pipeline")
    p.add_argument("request")
    p.set_defaults(handler=cmd_route)

    p = sub.add_parser("repair", parents=[common],
                       help="translate with the validate-and-feedback loop")
    p.add_argument("file")
    p.add_argument("--from", dest="source", default=None,
                   help="source formalism, or 'nl' for prose input")
    p.add_argument("--to", dest="target", required=True)
    p.add_argument("--trace-log", dest="trace_log", metavar="FILE",
                   help="write the attempt log here")
    p.set_defaults(handler=cmd_repair)

    p = sub.add_parser("simulate", parents=[common],
                       help="simulate serving costs over a task trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--policy", choices=("full", "shared", "both"),
                   default="both")
    p.add_argument("--capacity", type=int, default=None)
    p.add_argument("--model-load-ms", dest="model_load_ms", type=float,
                   default=10000.0)
    p.add_argument("--model-mem-mb", dest="model_mem_mb", type=float,
                   default=16000.0)
    p.add_argument("--format", choices=("records", "table"),
                   default="records")
    p.add_argument("--figures", metavar="DIR")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("roundtrip", parents=[common],
                       help="measure round-trip distortion through a formalism")
    p.add_argument("file")
    p.add_argument("--via", required=True)
    p.add_argument("--from", dest="source", default=None)
    p.add_argument("--policy", default="max-fidelity")
    p.set_defaults(handler=cmd_roundtrip)

    p = sub.add_parser("bench", parents=[common],
                       help="compare translator variants over a corpus")
    p.add_argument("--corpus", required=True, metavar="DIR")
    p.add_argument("--to", dest="target", required=True)
    p.add_argument("--from", dest="source", default=None)
    p.add_argument("--variants", nargs="+", required=True,
                   choices=(RULE_BASED, LLM_DIRECT, LLM_SCRIPTED))
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--corruption", type=float, default=0.0)
    p.add_argument("--format", choices=("records", "table"),
                   default="records")
    p.add_argument("--figures", metavar="DIR")
    p.set_defaults(handler=cmd_bench)
    return parser


_CONFIG_ERRORS = (ConfigError, GraphFormatError, RouterConfigError,
                  ScriptCacheError, UnknownFormalism, UnknownTaskInTrace,
                  EmptyRequest)

_RUN_ERRORS = (NoPath, AmbiguousTask, NoAdapterForKind, NoPipelineForKind,
               RepairBackendError, BackendUnavailable, BackendTimeout,
               ScriptSynthesisFailed, UnsupportedPair, UnrepresentableElement,
               ScriptSyntaxError, ScriptRuntimeError)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        cfg = resolve_config(args)
        return args.handler(args, cfg)
    except HopFailed as exc:
        sys.stderr.write(f"formbridge: {exc}\n")
        for index, trace in enumerate(exc.traces):
            sys.stderr.write(f"hop {index} trace:\n{trace.export_log()}")
        return 1
    except _CONFIG_ERRORS as exc:
        sys.stderr.write(f"formbridge: {exc}\n")
        return 2
    except _RUN_ERRORS as exc:
        sys.stderr.write(f"formbridge: {exc}\n")
        return 1
    except FormbridgeError as exc:
        sys.stderr.write(f"formbridge: {exc}\n")
        return 1
    except ValueError as exc:
        sys.stderr.write(f"formbridge: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
