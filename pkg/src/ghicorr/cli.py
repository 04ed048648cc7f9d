"""Batch front-end: generate scenarios, validate data files, run experiments.

Exit codes: 0 success, 1 spec failure under --strict, 2 usage/config/data
error. All outputs are deterministic for a given (config, seed) and are
written atomically (temp file + rename). Configs are single JSON documents;
see README for the schemas.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass

from .data import align, daylight_filter, parse_met_csv, parse_nwp_csv
from .errors import ConfigError, GhicorrError
from .features import BaselineSpec, FeatureVariant
from .model_selection import EvaluationReport, ModelSpec, ProtocolConfig, evaluate_experiment
from .synth import (
    ScenarioConfig,
    generate_scenario,
    scenario_config_from_dict,
    scenario_config_to_dict,
    scenario_to_csv,
    with_seed,
)

FIGURE_GROUPS = (
    ("baselines", ("raw_wrf_", "persistence_")),
    ("base", ("base_",)),
    ("neighbor", ("neighbor_",)),
    ("lag", ("lag1_", "lag24_")),
    ("ensemble", ("ensemble_", "ensemble_lag24_")),
)


def _atomic_write(path: str, payload: bytes) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(payload)
    os.replace(tmp, path)


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(path, "file not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(path, f"invalid JSON: {exc}") from None


def _say(quiet: bool, message: str) -> None:
    if not quiet:
        print(message)


@dataclass
class ExperimentConfig:
    scenario: ScenarioConfig | None
    files: dict | None
    baselines: bool
    variants: list[str]
    families: list[str]
    channels: list[str]
    protocol: ProtocolConfig
    report_path: str
    report_format: str


def _reject_unknown(section: dict, known, where: str) -> None:
    extra = sorted(set(section) - set(known))
    if extra:
        raise ConfigError(where, f"unknown fields {extra}")


def _parse_experiment_config(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config", "expected a JSON object")
    _reject_unknown(doc, ("data", "specs", "protocol", "output"), "config")
    data = doc.get("data")
    if not isinstance(data, dict) or len(set(data) & {"synthetic", "files"}) != 1:
        raise ConfigError("data", "need exactly one of 'synthetic' or 'files'")
    scenario = None
    files = None
    if "synthetic" in data:
        scenario = scenario_config_from_dict(data["synthetic"])
    else:
        files = data["files"]
        if not isinstance(files, dict):
            raise ConfigError("data.files", "expected an object")
        for key in ("met", "nwp", "target"):
            if key not in files:
                raise ConfigError(f"data.files.{key}", "required")
        files.setdefault("neighbors", [])

    specs = doc.get("specs", {})
    if not isinstance(specs, dict):
        raise ConfigError("specs", "expected an object")
    _reject_unknown(specs, ("baselines", "variants", "families", "channels"), "specs")
    baselines = bool(specs.get("baselines", True))
    variants = list(specs.get("variants", []))
    families = list(specs.get("families", []))
    channels = list(specs.get("channels", ["M1", "M2", "M3", "M4"]))
    for v in variants:
        if v not in ("base", "neighbor", "lag1", "lag24", "ensemble", "ensemble_lag24"):
            raise ConfigError("specs.variants", f"unknown variant {v!r}")
    for f in families:
        if f not in ("knn", "forest", "boost"):
            raise ConfigError("specs.families", f"unknown family {f!r}")
    if variants and not families:
        raise ConfigError("specs.families", "variants listed but no families")

    proto = doc.get("protocol", {})
    if not isinstance(proto, dict):
        raise ConfigError("protocol", "expected an object")
    _reject_unknown(proto, ("test_fraction", "split_mode", "k", "n_samples", "seed"),
                    "protocol")
    try:
        protocol = ProtocolConfig(
            test_fraction=float(proto.get("test_fraction", 0.2)),
            split_mode=str(proto.get("split_mode", "random")),
            k=int(proto.get("k", 5)),
            n_samples=int(proto.get("n_samples", 25)),
            seed=int(proto.get("seed", 0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError("protocol", str(exc)) from None
    if protocol.k < 2:
        raise ConfigError("protocol.k", f"must be >= 2, got {protocol.k}")
    if not 0.0 < protocol.test_fraction < 1.0:
        raise ConfigError("protocol.test_fraction", "must be in (0, 1)")
    if protocol.split_mode not in ("random", "chronological"):
        raise ConfigError("protocol.split_mode", f"unknown mode {protocol.split_mode!r}")

    output = doc.get("output", {})
    if not isinstance(output, dict) or "report" not in output:
        raise ConfigError("output.report", "required")
    _reject_unknown(output, ("report", "format"), "output")
    report_format = output.get("format", "json")
    if report_format not in ("json", "csv"):
        raise ConfigError("output.format", f"must be json or csv, got {report_format!r}")

    return ExperimentConfig(
        scenario=scenario, files=files, baselines=baselines, variants=variants,
        families=families, channels=channels, protocol=protocol,
        report_path=str(output["report"]), report_format=report_format,
    )


def _build_specs(cfg: ExperimentConfig, channel_set) -> list[ModelSpec]:
    specs: list[ModelSpec] = []
    channels = [c for c in cfg.channels if c in channel_set]
    if cfg.baselines:
        for ch in channels:
            specs.append(ModelSpec.for_baseline(BaselineSpec("raw_wrf", channel=ch)))
        specs.append(ModelSpec.for_baseline(BaselineSpec("persistence", lag_hours=1)))
        specs.append(ModelSpec.for_baseline(BaselineSpec("persistence", lag_hours=24)))
    for kind in cfg.variants:
        if kind in ("ensemble", "ensemble_lag24"):
            for family in cfg.families:
                specs.append(ModelSpec.for_variant(FeatureVariant(kind), family))
        else:
            for ch in channels:
                for family in cfg.families:
                    specs.append(ModelSpec.for_variant(FeatureVariant(kind, ch), family))
    if not specs:
        raise ConfigError("specs", "configuration selects no model specs")
    return specs


def _load_dataset(cfg: ExperimentConfig):
    if cfg.scenario is not None:
        scenario = generate_scenario(cfg.scenario)
        met = scenario.all_met()
        nwp = scenario.all_nwp()
        target = cfg.scenario.target
        neighbors = cfg.scenario.neighbors
    else:
        with open(cfg.files["met"], "rb") as fh:
            met = parse_met_csv(fh.read())
        with open(cfg.files["nwp"], "rb") as fh:
            nwp = parse_nwp_csv(fh.read())
        target = cfg.files["target"]
        neighbors = tuple(cfg.files.get("neighbors", []))
    return daylight_filter(align(met, nwp, target, neighbors))


def _figure_files(report: EvaluationReport, report_path: str) -> list[str]:
    stem, _ = os.path.splitext(report_path)
    written = []
    for group, prefixes in FIGURE_GROUPS:
        rows = [e for e in report.entries
                if e.status == "ok" and any(e.label.startswith(p) for p in prefixes)]
        if not rows:
            continue
        lines = ["label,nrmse"]
        lines += [f"{e.label},{e.test_nrmse!r}" for e in rows]
        path = f"{stem}_fig_{group}.csv"
        _atomic_write(path, ("\n".join(lines) + "\n").encode("utf-8"))
        written.append(path)
    return written


def cmd_synth(config_path: str, out_dir: str, seed: int | None = None,
              quiet: bool = False) -> int:
    try:
        cfg = scenario_config_from_dict(_load_json(config_path))
        if seed is not None:
            cfg = with_seed(cfg, seed)
            cfg.validate()
        scenario = generate_scenario(cfg)
        met_bytes, nwp_bytes = scenario_to_csv(scenario)
    except GhicorrError as exc:
        print(f"synth: config error -- {exc}", file=sys.stderr)
        return 2
    met_path = os.path.join(out_dir, "met.csv")
    nwp_path = os.path.join(out_dir, "nwp.csv")
    meta_path = os.path.join(out_dir, "scenario.json")
    meta = {
        "config": scenario_config_to_dict(cfg),
        "met_rows": len(scenario.all_met()),
        "nwp_rows": len(scenario.all_nwp()),
        "met_sha256": hashlib.sha256(met_bytes).hexdigest(),
        "nwp_sha256": hashlib.sha256(nwp_bytes).hexdigest(),
    }
    try:
        os.makedirs(out_dir, exist_ok=True)
        _atomic_write(met_path, met_bytes)
        _atomic_write(nwp_path, nwp_bytes)
        _atomic_write(meta_path, (json.dumps(meta, indent=2, sort_keys=True) + "\n").encode())
    except OSError as exc:
        print(f"synth: cannot write outputs -- {exc}", file=sys.stderr)
        return 2
    _say(quiet, f"wrote {met_path}, {nwp_path}, {meta_path}")
    return 0


def cmd_run(config_path: str, seed: int | None = None, strict: bool = False,
            quiet: bool = False) -> int:
    try:
        cfg = _parse_experiment_config(_load_json(config_path))
        if seed is not None:
            cfg.protocol = ProtocolConfig(
                test_fraction=cfg.protocol.test_fraction,
                split_mode=cfg.protocol.split_mode,
                k=cfg.protocol.k,
                n_samples=cfg.protocol.n_samples,
                seed=seed,
            )
            if cfg.scenario is not None:
                cfg.scenario = with_seed(cfg.scenario, seed)
        ds = _load_dataset(cfg)
        specs = _build_specs(cfg, ds.channel_set)
    except (GhicorrError, OSError) as exc:
        print(f"run: config/data error -- {exc}", file=sys.stderr)
        return 2

    report = evaluate_experiment(ds, specs, cfg.protocol)
    payload = report.to_json() if cfg.report_format == "json" else report.to_csv()
    try:
        out_dir = os.path.dirname(cfg.report_path)
        if out_dir:
            os.makedirs(out_dir, exist_ok=True)
        _atomic_write(cfg.report_path, payload.encode("utf-8"))
        figures = _figure_files(report, cfg.report_path)
    except OSError as exc:
        print(f"run: cannot write outputs -- {exc}", file=sys.stderr)
        return 2

    failed = [e for e in report.entries if e.status != "ok"]
    for e in report.entries:
        if e.status == "ok":
            _say(quiet, f"  {e.label:<28} nrmse={e.test_nrmse:.4f} (n_test={e.n_test})")
        else:
            _say(quiet, f"  {e.label:<28} FAILED: {e.message}")
    _say(quiet, f"report: {cfg.report_path}")
    for path in figures:
        _say(quiet, f"figure data: {path}")
    if failed:
        print(f"run: {len(failed)} spec(s) failed", file=sys.stderr)
        if strict:
            return 1
    return 0


def cmd_validate(met_path: str, nwp_path: str, quiet: bool = False) -> int:
    try:
        with open(met_path, "rb") as fh:
            met = parse_met_csv(fh.read())
        with open(nwp_path, "rb") as fh:
            nwp = parse_nwp_csv(fh.read())
    except (GhicorrError, OSError) as exc:
        print(f"validate: {exc}", file=sys.stderr)
        return 2

    met_keys = {(m.date, m.time.hour_of_day) for m in met}
    nwp_keys = {(o.date, o.time.hour_of_day) for o in nwp}
    stations = sorted({m.station_id for m in met})
    series = sorted({(o.channel, o.location_id) for o in nwp})
    _say(quiet, f"met rows: {len(met)}  stations: {len(stations)}")
    for st in stations:
        rows = [m for m in met if m.station_id == st]
        dates = sorted(r.date for r in rows)
        _say(quiet, f"  {st}: {len(rows)} rows, {dates[0]} .. {dates[-1]}")
    _say(quiet, f"nwp rows: {len(nwp)}  series: {len(series)}")
    for ch, loc in series:
        rows = [o for o in nwp if o.channel == ch and o.location_id == loc]
        dates = sorted(r.date for r in rows)
        _say(quiet, f"  {ch}/{loc}: {len(rows)} rows, {dates[0]} .. {dates[-1]}")
    _say(quiet, f"di clamp flags: met={sum(m.di_clamped for m in met)} "
                f"nwp={sum(o.di_clamped for o in nwp)}")
    _say(quiet, f"rh clip flags: met={sum(m.rh_clipped for m in met)} "
                f"nwp={sum(o.rh_clipped for o in nwp)}")
    _say(quiet, f"timestamp overlap (met vs nwp): {len(met_keys & nwp_keys)} hours")
    _say(quiet, f"alignment would drop: {len(met_keys - nwp_keys)} met-only hours, "
                f"{len(nwp_keys - met_keys)} nwp-only hours")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ghicorr",
        description="Irradiance forecast correction toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--strict", action="store_true",
                       help="exit 1 if any spec fails")
        p.add_argument("--quiet", action="store_true",
                       help="suppress normal output")

    p_synth = sub.add_parser("synth", help="generate a synthetic scenario")
    p_synth.add_argument("--config", required=True, help="scenario config JSON")
    p_synth.add_argument("--out", required=True, help="output directory")
    common(p_synth)

    p_run = sub.add_parser("run", help="run an experiment suite")
    p_run.add_argument("--config", required=True, help="experiment config JSON")
    common(p_run)

    p_val = sub.add_parser("validate", help="check met/NWP CSV files")
    p_val.add_argument("met", help="met CSV path")
    p_val.add_argument("nwp", help="NWP CSV path")
    common(p_val)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "synth":
        return cmd_synth(args.config, args.out, seed=args.seed, quiet=args.quiet)
    if args.command == "run":
        return cmd_run(args.config, seed=args.seed, strict=args.strict, quiet=args.quiet)
    return cmd_validate(args.met, args.nwp, quiet=args.quiet)


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
