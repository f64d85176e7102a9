"""Command-line entry point: ``ingest``, ``analyze``, ``fit``, ``score``,
``alerts``, ``generate``, ``export``.

Every pipeline command works inside an operator-named run directory and
appends to its manifest; stages refuse inputs whose digests do not match
what the producing stage recorded. Exit codes: 0 ok, 1 validation error,
2 numerical failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
import time
from pathlib import Path

from . import __version__
from .alerts import components, propagate_alerts
from .correlation import pearson_matrix
from .errors import NumericalError, ValidationError
from .exports import (
    correlation_csv,
    correlation_text,
    graphml,
    model_report_csv,
    model_report_text,
    read_feature_csv,
    read_parties_csv,
    write_alerts_csv,
    write_feature_csv,
    write_ledger_csv,
    write_network_exports,
    write_parties_csv,
    write_scores_csv,
)
from .ledger import apply_recording_threshold, load_labels, load_ledger
from .logit import DEFAULT_PREDICTORS, fit_logit, rank_clients, resolve_model, save_model
from .manifest import RunManifest, utc_now
from .metrics import assemble_features
from .networks import (
    DEFAULT_HIGH_RISK_THRESHOLD,
    NetworkKind,
    build_analytic_networks,
    build_tacit_network,
)
from .synth import PRESETS, generate, scenario_from_toml, write_scenario
from .tables import tables_from_config

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

logger = logging.getLogger("factornet")

CONFIG_ENV_VAR = "FACTORNET_CONFIG"

DATASET_LEDGER = "dataset/ledger.csv"
DATASET_PARTIES = "dataset/parties.csv"
FEATURES = "features.csv"


class _Stage:
    """Times one stage and records it in the run manifest on close."""

    def __init__(self, run_dir: Path, name: str, settings: dict):
        self.manifest = RunManifest(run_dir)
        self.run_dir = Path(run_dir)
        self.name = name
        self.settings = settings
        self.inputs: dict[str, Path] = {}
        self.outputs: dict[str, Path] = {}
        self.counts: dict[str, int] = {}
        self.started_at = utc_now()
        self._t0 = time.perf_counter()

    def add_input(self, name: str, path: Path):
        self.inputs[name] = Path(path)

    def add_output(self, rel: str, path: Path):
        self.outputs[rel] = Path(path)

    def verify(self, rel: str) -> Path:
        path = self.manifest.verify_artifact(rel)
        self.inputs[rel] = path
        return path

    def out_path(self, rel: str) -> Path:
        path = self.run_dir / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        self.outputs[rel] = path
        return path

    def finish(self):
        self.manifest.record_stage(
            self.name,
            settings=self.settings,
            inputs=self.inputs,
            outputs=self.outputs,
            counts=self.counts,
            started_at=self.started_at,
            elapsed_ms=int((time.perf_counter() - self._t0) * 1000),
        )


def _load_config(args) -> tuple[dict, Path]:
    path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV_VAR)
    if not path:
        return {}, Path(".")
    path = Path(path)
    with open(path, "rb") as handle:
        return tomllib.load(handle), path.parent


def _tables(args, config: dict, base_dir: Path):
    tables = tables_from_config(config, base_dir)
    if getattr(args, "window", None) is not None:
        tables = dataclasses.replace(tables, aggregation_window=args.window)
    return tables


def _network_options(args, config: dict) -> dict:
    section = config.get("network", {})
    arc_combine = getattr(args, "arc_combine", None) or section.get("arc_combine", "mean")
    collapse = getattr(args, "collapse", None) or section.get("collapse", "mean")
    default = section.get("high_risk_threshold", DEFAULT_HIGH_RISK_THRESHOLD)
    overrides = section.get("thresholds", {})
    thresholds = {
        kind: float(overrides.get(kind.value, default))
        for kind in (NetworkKind.TRANSACTIONS, NetworkKind.SECTOR, NetworkKind.GEO)
    }
    if getattr(args, "threshold", None) is not None:
        thresholds = {kind: args.threshold for kind in thresholds}
    return {"arc_combine": arc_combine, "collapse": collapse, "thresholds": thresholds}


def _threshold_settings(options: dict) -> dict:
    return {
        "arc_combine": options["arc_combine"],
        "collapse": options["collapse"],
        "thresholds": {k.value: v for k, v in options["thresholds"].items()},
    }


# --- commands ----------------------------------------------------------------

def cmd_ingest(args) -> int:
    config, base_dir = _load_config(args)
    tables = _tables(args, config, base_dir)
    stage = _Stage(
        args.run_dir,
        "ingest",
        {
            "recording_threshold": str(tables.recording_threshold),
            "aggregation_window": tables.aggregation_window,
            "amount_bins": [str(b) for b in tables.amount_bins],
            "tool_version": __version__,
        },
    )
    stage.add_input(Path(args.ledger).name, Path(args.ledger))
    records, parties = load_ledger(Path(args.ledger), tables)
    result = apply_recording_threshold(records, tables)
    labeled = 0
    if args.labels:
        stage.add_input(Path(args.labels).name, Path(args.labels))
        parties, labeled = load_labels(Path(args.labels), parties)

    write_ledger_csv(result.records, stage.out_path(DATASET_LEDGER))
    write_parties_csv(parties, stage.out_path(DATASET_PARTIES))
    stage.counts = {
        "rows_read": len(records),
        "rows_kept": len(result.records),
        "rows_dropped": result.dropped,
        "parties": len(parties),
        "parties_labeled": labeled,
    }
    stage.finish()
    print(
        f"ingest: kept {len(result.records)}/{len(records)} records "
        f"({result.dropped} below threshold), {len(parties)} parties, {labeled} labeled"
    )
    return 0


def _load_dataset(stage: _Stage, tables):
    ledger_path = stage.verify(DATASET_LEDGER)
    parties_path = stage.verify(DATASET_PARTIES)
    records, _ = load_ledger(ledger_path, tables)
    parties = read_parties_csv(parties_path)
    return records, parties


def cmd_analyze(args) -> int:
    config, base_dir = _load_config(args)
    tables = _tables(args, config, base_dir)
    options = _network_options(args, config)
    stage = _Stage(args.run_dir, "analyze", _threshold_settings(options) | {"tool_version": __version__})
    records, parties = _load_dataset(stage, tables)

    networks = build_analytic_networks(
        records,
        parties,
        tables,
        arc_combine=options["arc_combine"],
        collapse=options["collapse"],
        thresholds=options["thresholds"],
    )
    tacit = build_tacit_network(records, parties)
    rows = assemble_features(networks, records, parties)

    write_feature_csv(rows, stage.out_path(FEATURES))
    for net in (*networks.values(), tacit):
        for path in write_network_exports(net, stage.run_dir / "networks", parties):
            stage.add_output(path.relative_to(stage.run_dir).as_posix(), path)

    stage.counts = {
        "parties": len(parties),
        "feature_rows": len(rows),
        "tacit_edges": tacit.n_arcs,
        **{f"{kind.value}_arcs": net.n_arcs for kind, net in networks.items()},
    }
    stage.finish()
    print(f"analyze: {len(rows)} feature rows, networks exported to networks/")
    return 0


def cmd_fit(args) -> int:
    config, _ = _load_config(args)
    fit_cfg = config.get("fit", {})
    predictors = (
        [p.strip() for p in args.predictors.split(",") if p.strip()]
        if args.predictors
        else list(fit_cfg.get("predictors", DEFAULT_PREDICTORS))
    )
    standardize = args.standardize or bool(fit_cfg.get("standardize", False))
    stage = _Stage(
        args.run_dir,
        "fit",
        {"predictors": predictors, "standardize": standardize, "tool_version": __version__},
    )
    rows = read_feature_csv(stage.verify(FEATURES))

    report = pearson_matrix(rows)
    stage.out_path("correlations.csv").write_text(correlation_csv(report), encoding="utf-8")
    stage.out_path("correlations.txt").write_text(correlation_text(report), encoding="utf-8")

    model = fit_logit(rows, predictors, standardize=standardize)
    save_model(model, stage.out_path("model.json"))
    stage.out_path("model_report.txt").write_text(model_report_text(model), encoding="utf-8")
    stage.out_path("model_report.csv").write_text(model_report_csv(model), encoding="utf-8")
    stage.counts = {"fit_rows": model.n, "predictors": len(predictors)}
    stage.finish()

    print(model_report_text(model), end="")
    if not model.converged:
        print(f"fit did not converge: {model.message}", file=sys.stderr)
        return 2
    return 0


def cmd_score(args) -> int:
    config, _ = _load_config(args)
    score_cfg = config.get("score", {})
    spec = args.model or score_cfg.get("model", "paper:model4")
    top_k = args.top_k if args.top_k is not None else score_cfg.get("top_k")
    stage = _Stage(
        args.run_dir,
        "score",
        {"model": spec, "top_k": top_k, "tool_version": __version__},
    )
    rows = read_feature_csv(stage.verify(FEATURES))
    if not spec.startswith("paper:"):
        model_path = Path(spec)
        if not model_path.is_absolute() and (stage.run_dir / spec).exists():
            model_path = stage.run_dir / spec
        stage.add_input(model_path.name, model_path)
        spec = str(model_path)
    model = resolve_model(spec)
    ranked = rank_clients(model, rows, top_k)
    write_scores_csv(ranked, stage.out_path("scores.csv"))
    stage.counts = {"scored": len(ranked)}
    stage.finish()
    for party_id, probability in ranked[:10]:
        print(f"{party_id}  {probability:.4f}")
    return 0


def cmd_alerts(args) -> int:
    config, base_dir = _load_config(args)
    tables = _tables(args, config, base_dir)
    stage = _Stage(args.run_dir, "alerts", {"tool_version": __version__})
    records, parties = _load_dataset(stage, tables)

    flags = {p.party_id for p in parties if p.high_risk_label == 1}
    if args.flags:
        stage.add_input(Path(args.flags).name, Path(args.flags))
        for line in Path(args.flags).read_text(encoding="utf-8").splitlines():
            party_id = line.strip()
            if party_id and not party_id.startswith("#"):
                flags.add(party_id)

    tacit = build_tacit_network(records, parties)
    comps = components(tacit, flags)
    alerts = propagate_alerts(comps, flags)
    write_alerts_csv(alerts, stage.out_path("alerts.csv"))
    stage.out_path("networks/tacit_flagged.graphml").write_text(
        graphml(tacit, parties, flags), encoding="utf-8"
    )
    stage.counts = {
        "components": len(comps),
        "flagged": len(flags),
        "alerts": len(alerts),
    }
    stage.finish()
    print(f"alerts: {len(alerts)} parties to watch across {len(comps)} components")
    return 0


def cmd_generate(args) -> int:
    if args.scenario:
        scenario = scenario_from_toml(Path(args.scenario))
    else:
        scenario = PRESETS[args.preset]
    if args.seed is not None:
        scenario = dataclasses.replace(scenario, seed=args.seed)
    config, base_dir = _load_config(args)
    tables = _tables(args, config, base_dir)

    stage = _Stage(args.out, "generate", dataclasses.asdict(scenario) | {"tool_version": __version__})
    result = generate(scenario, tables)
    paths = write_scenario(result, Path(args.out))
    for name, path in paths.items():
        stage.add_output(path.name, path)
    stage.counts = {
        "rows": len(result.ledger_rows),
        "parties": len(result.labels),
        "criminal_parties": sum(result.labels.values()),
    }
    stage.finish()
    print(
        f"generate: {len(result.ledger_rows)} rows, {len(result.labels)} parties "
        f"({sum(result.labels.values())} criminal) -> {args.out}"
    )
    return 0


def cmd_export(args) -> int:
    config, base_dir = _load_config(args)
    tables = _tables(args, config, base_dir)
    options = _network_options(args, config)
    stage = _Stage(args.run_dir, "export", _threshold_settings(options) | {"tool_version": __version__})
    records, parties = _load_dataset(stage, tables)
    networks = build_analytic_networks(
        records,
        parties,
        tables,
        arc_combine=options["arc_combine"],
        collapse=options["collapse"],
        thresholds=options["thresholds"],
    )
    tacit = build_tacit_network(records, parties)
    for net in (*networks.values(), tacit):
        for path in write_network_exports(net, stage.run_dir / "networks", parties):
            stage.add_output(path.relative_to(stage.run_dir).as_posix(), path)
    stage.counts = {f"{kind.value}_arcs": net.n_arcs for kind, net in networks.items()}
    stage.finish()
    print("export: networks written to networks/")
    return 0


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="factornet",
        description="Risk-network analytics for factoring transaction ledgers.",
    )
    parser.add_argument("--version", action="version", version=f"factornet {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, run_dir=True):
        if run_dir:
            p.add_argument("--run-dir", required=True, type=Path, help="run directory for artifacts")
        p.add_argument("--config", help=f"TOML config (default: ${CONFIG_ENV_VAR})")

    p = sub.add_parser("ingest", help="validate a ledger, apply the recording threshold")
    p.add_argument("ledger", help="ledger CSV")
    p.add_argument("--labels", help="party_id,high_risk CSV")
    p.add_argument("--window", type=int, help="aggregation window override (days)")
    common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("analyze", help="build networks, compute metrics, write features")
    p.add_argument("--threshold", type=float, help="high-risk arc filter for all networks")
    p.add_argument("--arc-combine", choices=["mean", "max"], dest="arc_combine")
    p.add_argument("--collapse", choices=["mean", "sum", "max"])
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("fit", help="fit a logistic risk model on labeled rows")
    p.add_argument("--predictors", help="comma-separated feature columns")
    p.add_argument("--standardize", action="store_true", help="fit on z-scored predictors")
    common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("score", help="rank clients by model probability")
    p.add_argument("--model", help="model JSON path or paper:model1..paper:model4")
    p.add_argument("--top-k", type=int, dest="top_k")
    common(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("alerts", help="tacit-link components and wake-up-call alerts")
    p.add_argument("--flags", help="extra flagged party ids, one per line")
    common(p)
    p.set_defaults(func=cmd_alerts)

    p = sub.add_parser("generate", help="generate a synthetic scenario")
    p.add_argument("--out", required=True, type=Path, help="output directory")
    p.add_argument("--preset", choices=sorted(PRESETS), default="small")
    p.add_argument("--scenario", help="scenario TOML (overrides --preset)")
    p.add_argument("--seed", type=int, help="seed override")
    common(p, run_dir=False)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("export", help="export finalized networks (GraphML/DOT) only")
    p.add_argument("--threshold", type=float, help="high-risk arc filter for all networks")
    p.add_argument("--arc-combine", choices=["mean", "max"], dest="arc_combine")
    p.add_argument("--collapse", choices=["mean", "sum", "max"])
    common(p)
    p.set_defaults(func=cmd_export)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
