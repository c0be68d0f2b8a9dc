"""Command-line front end: run experiments, analyze logs, emit patterns.

Configuration files are flat INI text (configparser) with one section per
concern::

    [run]
    experiment = E5
    model = QM
    detector = spad
    pairs = 100000
    seed = 42

    [detector]            ; optional field-level overrides of the preset
    efficiency = 0.8

    [geometry]            ; screen experiments only
    slit_separation = 300e-6

Exit codes: 0 success, 2 malformed config (the message names the offending
key), 3 no self-consistent history, 4 missing or corrupt logs.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .configs import ExperimentName, MeasurementConfig, catalog
from .errors import (
    ConfigError,
    DegenerateMarginalError,
    InsufficientDataError,
    NoConsistentHistoryError,
)
from .harness import (
    DETECTOR_PRESETS,
    CoincidenceResult,
    DetectorId,
    DetectorModel,
    match_coincidences,
    read_clicks_csv,
    run_experiment,
    run_screen_experiment,
    write_clicks_csv,
    write_outcomes_csv,
    write_screen_outcomes_csv,
)
from .models import ModelKind, ModelSpec, RetroPolicy, declared_distribution
from .quantum import OUTCOME_BY_CODE, Basis, SideOutcome
from .screen import (
    ScreenCondition,
    SlitGeometry,
    conditioned_pattern,
    empirical_visibility,
    histogram_pattern,
    sample_positions_from_uniforms,
    write_pattern_csv,
)
from .stats import (
    JointTable,
    TestReport,
    Verdict,
    lower_outcome_for_detector,
    binary_correlation,
    build_table,
    chi_square_test,
    power_sweep,
    sequence_test,
)

__all__ = ["RunConfig", "load_run_config", "analyze_logs", "build_parser", "main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_HISTORY = 3
EXIT_MISSING_LOGS = 4

_MODEL_NAMES = {
    "qm": ModelKind.QM,
    "localrealistball": ModelKind.LOCAL_REALIST_BALL,
    "ball": ModelKind.LOCAL_REALIST_BALL,
    "retrocausalconsistent": ModelKind.RETROCAUSAL_CONSISTENT,
    "retro": ModelKind.RETROCAUSAL_CONSISTENT,
    "superdeterministic": ModelKind.SUPERDETERMINISTIC,
    "superdet": ModelKind.SUPERDETERMINISTIC,
}
_POLICY_NAMES = {
    "paperstrict": RetroPolicy.PAPER_STRICT,
    "strict": RetroPolicy.PAPER_STRICT,
    "novikovuniform": RetroPolicy.NOVIKOV_UNIFORM,
    "novikov": RetroPolicy.NOVIKOV_UNIFORM,
}
_CONDITION_NAMES = {c.value.lower(): c for c in ScreenCondition}


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Everything one simulated run needs, as parsed from a config file."""

    experiment: ExperimentName
    model: ModelSpec
    detector: DetectorModel
    pairs: int
    seed: int
    output_dir: Path
    geometry: Optional[SlitGeometry] = None
    jobs: int = 1

    def measurement(self) -> MeasurementConfig:
        return catalog(self.experiment, pair_count=self.pairs, seed=self.seed)


def _parse_model(raw: str, policy_raw: Optional[str]) -> ModelSpec:
    kind = _MODEL_NAMES.get(raw.strip().lower())
    if kind is None:
        raise ConfigError(f"key 'model': unknown model {raw!r} "
                          f"(choose from {sorted(set(m.value for m in ModelKind))})")
    if policy_raw is None:
        return ModelSpec(kind)
    policy = _POLICY_NAMES.get(policy_raw.strip().lower())
    if policy is None:
        raise ConfigError(f"key 'retro_policy': unknown policy {policy_raw!r}")
    return ModelSpec(kind, policy)


def _section_floats(parser: configparser.ConfigParser, section: str,
                    cls, defaults) -> dict:
    """Read a section's keys as floats onto a dataclass's fields."""
    known = {f.name for f in dataclasses.fields(cls)}
    out = {}
    for key, raw in parser.items(section):
        if key not in known:
            raise ConfigError(f"key '{section}.{key}': unknown field "
                              f"(choose from {sorted(known)})")
        try:
            out[key] = float(raw)
        except ValueError:
            raise ConfigError(f"key '{section}.{key}': not a number: {raw!r}") from None
    return {**defaults, **out}


def load_run_config(path) -> RunConfig:
    """Parse an INI run configuration, raising ConfigError naming bad keys."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from None
    if not parser.has_section("run"):
        raise ConfigError("missing [run] section")
    run = dict(parser.items("run"))

    known = {"experiment", "model", "retro_policy", "detector", "pairs",
             "seed", "output_dir", "jobs"}
    for key in run:
        if key not in known:
            raise ConfigError(f"key 'run.{key}': unknown key "
                              f"(choose from {sorted(known)})")
    for key in ("experiment", "model"):
        if key not in run:
            raise ConfigError(f"key 'run.{key}' is required")

    try:
        experiment = ExperimentName(run["experiment"].strip().upper())
    except ValueError:
        raise ConfigError(f"key 'run.experiment': unknown experiment "
                          f"{run['experiment']!r} (choose E1..E6)") from None
    model = _parse_model(run["model"], run.get("retro_policy"))

    def _int(key: str, default: int) -> int:
        if key not in run:
            return default
        try:
            return int(run[key])
        except ValueError:
            raise ConfigError(f"key 'run.{key}': not an integer: {run[key]!r}") from None

    pairs = _int("pairs", 100_000)
    if pairs < 1:
        raise ConfigError(f"key 'run.pairs': must be >= 1, got {pairs}")
    seed = _int("seed", 0)
    jobs = _int("jobs", 1)
    if jobs < 1:
        raise ConfigError(f"key 'run.jobs': must be >= 1, got {jobs}")

    preset_name = run.get("detector", "ideal").strip().lower()
    if preset_name not in DETECTOR_PRESETS:
        raise ConfigError(f"key 'run.detector': unknown preset {preset_name!r} "
                          f"(choose from {sorted(DETECTOR_PRESETS)})")
    det_fields = dataclasses.asdict(DETECTOR_PRESETS[preset_name])
    if parser.has_section("detector"):
        det_fields = _section_floats(parser, "detector", DetectorModel, det_fields)
    try:
        detector = DetectorModel(**det_fields)
    except ConfigError as exc:
        raise ConfigError(f"section [detector]: {exc}") from None

    geometry = None
    if parser.has_section("geometry"):
        geo_fields = _section_floats(parser, "geometry", SlitGeometry,
                                     dataclasses.asdict(SlitGeometry()))
        try:
            geometry = SlitGeometry(**geo_fields)
        except ValueError as exc:
            raise ConfigError(f"section [geometry]: {exc}") from None
    if experiment is ExperimentName.E6 and geometry is None:
        geometry = SlitGeometry()

    return RunConfig(
        experiment=experiment,
        model=model,
        detector=detector,
        pairs=pairs,
        seed=seed,
        output_dir=Path(run.get("output_dir", ".")),
        geometry=geometry,
        jobs=jobs,
    )


# --- summaries ---------------------------------------------------------------


def _cell_key(upper: SideOutcome, lower: SideOutcome) -> str:
    return f"{upper.value}|{lower.value}"


def _table_dict(table: JointTable) -> dict:
    return {_cell_key(*cell): n
            for cell, n in sorted(table.counts.items(),
                                  key=lambda kv: _cell_key(*kv[0]))}


def _z_scores(table: JointTable, oracle) -> dict:
    scores = {}
    n = table.total
    for cell, p in sorted(oracle.items(), key=lambda kv: _cell_key(*kv[0])):
        if p <= 0.0:
            continue
        sigma = math.sqrt(n * p * (1.0 - p)) if 0.0 < p < 1.0 else 0.0
        diff = table.count(*cell) - n * p
        scores[_cell_key(*cell)] = diff / sigma if sigma else 0.0
    return scores


def _detector_dict(det: DetectorModel) -> dict:
    return dataclasses.asdict(det)


def _json_dump(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _run_click_experiment(cfg: RunConfig, out: Path) -> dict:
    mc = cfg.measurement()
    result = run_experiment(mc, cfg.model, cfg.detector, n_jobs=cfg.jobs)
    write_clicks_csv(out / "clicks.csv", result.clicks)
    write_outcomes_csv(out / "outcomes.csv", result.raw)
    got = match_coincidences(result.clicks, cfg.detector.coincidence_window,
                             cfg.detector.lower_path_delay)
    table = build_table(got, lower_whichway=mc.lower_basis is Basis.WHICH_WAY)
    oracle = declared_distribution(cfg.model, mc)
    return {
        "experiment": cfg.experiment.value,
        "model": str(cfg.model),
        "detector": _detector_dict(cfg.detector),
        "pairs": cfg.pairs,
        "seed": cfg.seed,
        "duration_s": result.duration,
        "clicks": len(result.clicks),
        "darkClicks": int((result.clicks.pair_id == -1).sum()),
        "coincidences": got.n_matched,
        "singlesUpper": got.singles_upper,
        "singlesLower": got.singles_lower,
        "empiricalTable": _table_dict(table),
        "oracleTable": {_cell_key(*c): p for c, p in sorted(
            oracle.items(), key=lambda kv: _cell_key(*kv[0]))},
        "perCellZ": _z_scores(table, oracle),
    }


def _run_screen_experiment(cfg: RunConfig, out: Path) -> dict:
    mc = cfg.measurement()
    result = run_screen_experiment(mc, cfg.model, cfg.geometry, cfg.detector,
                                   n_jobs=cfg.jobs)
    write_clicks_csv(out / "clicks.csv", result.clicks)
    write_screen_outcomes_csv(out / "outcomes.csv", result)
    hits = result.hits_by_outcome()
    period = cfg.geometry.fringe_period
    window = 4 * period
    vis = {o.value: empirical_visibility(xs, period, window)
           for o, xs in sorted(hits.items(), key=lambda kv: kv[0].value)}
    vis["pooled"] = empirical_visibility(result.pooled_hits(), period, window)
    lower_counts = {o.value: int(xs.size)
                    for o, xs in sorted(hits.items(), key=lambda kv: kv[0].value)}
    return {
        "experiment": cfg.experiment.value,
        "model": str(cfg.model),
        "detector": _detector_dict(cfg.detector),
        "geometry": dataclasses.asdict(cfg.geometry),
        "pairs": cfg.pairs,
        "seed": cfg.seed,
        "duration_s": result.duration,
        "clicks": len(result.clicks),
        "darkClicks": int((result.clicks.pair_id == -1).sum()),
        "lowerCounts": lower_counts,
        "visibility": vis,
    }


def cmd_run(args: argparse.Namespace) -> int:
    try:
        cfg = load_run_config(args.config)
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seed=args.seed)
        if args.out is not None:
            cfg = dataclasses.replace(cfg, output_dir=Path(args.out))
        out = cfg.output_dir
        out.mkdir(parents=True, exist_ok=True)
        if cfg.measurement().screen_mode:
            summary = _run_screen_experiment(cfg, out)
        else:
            summary = _run_click_experiment(cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NoConsistentHistoryError as exc:
        print(f"no self-consistent history: {exc}", file=sys.stderr)
        return EXIT_NO_HISTORY
    _json_dump(summary, out / "summary.json")
    if not args.quiet:
        print(f"wrote {out / 'clicks.csv'}, {out / 'outcomes.csv'}, "
              f"{out / 'summary.json'}")
        for key in ("empiricalTable", "visibility"):
            if key in summary:
                print(f"{key}:")
                for cell, value in summary[key].items():
                    print(f"  {cell:>14}  {value}")
    return EXIT_OK


# --- analyze -----------------------------------------------------------------


_RIVALS = {
    "LocalRealistBall": ModelSpec(ModelKind.LOCAL_REALIST_BALL),
    "RetrocausalConsistent/PaperStrict": ModelSpec(
        ModelKind.RETROCAUSAL_CONSISTENT, RetroPolicy.PAPER_STRICT),
    "Superdeterministic": ModelSpec(ModelKind.SUPERDETERMINISTIC),
}


def _ordered_outcome_pairs(got: CoincidenceResult, lower_whichway: bool):
    """Matched outcome pairs in upper-click time order."""
    order = np.argsort(got.clicks.timestamp[got.upper_idx], kind="stable")
    pairs = []
    for k in order:
        u = int(got.upper_detectors[k])
        lo = int(got.lower_detectors[k])
        pairs.append((OUTCOME_BY_CODE[u],
                      lower_outcome_for_detector(lo, lower_whichway)))
    return pairs


def analyze_logs(log_dir: Path, alpha: float = 1e-6) -> dict:
    """Rebuild coincidences from a run's logs and apply the test battery.

    Raises FileNotFoundError / ValueError on missing or corrupt inputs
    (mapped to exit code 4 by the command wrapper).
    """
    summary_path = log_dir / "summary.json"
    clicks_path = log_dir / "clicks.csv"
    if not summary_path.exists():
        raise FileNotFoundError(f"missing {summary_path}")
    if not clicks_path.exists():
        raise FileNotFoundError(f"missing {clicks_path}")
    summary = json.loads(summary_path.read_text())
    for key in ("experiment", "model", "detector", "pairs", "seed"):
        if key not in summary:
            raise ValueError(f"summary.json lacks key {key!r}")
    clicks = read_clicks_csv(clicks_path)
    det = DetectorModel(**summary["detector"])
    mc = catalog(summary["experiment"], pair_count=int(summary["pairs"]),
                 seed=int(summary["seed"]))
    got = match_coincidences(clicks, det.coincidence_window, det.lower_path_delay)
    report: dict = {
        "experiment": summary["experiment"],
        "model": summary["model"],
        "alpha": alpha,
        "coincidences": got.n_matched,
        "tests": [],
        "correlation": None,
        "visibility": None,
    }

    if mc.screen_mode:
        geometry = SlitGeometry(**summary["geometry"])
        period = geometry.fringe_period
        window = 4 * period
        on_screen = got.upper_detectors == int(DetectorId.SCREEN)
        xs_all = got.clicks.screen_x[got.upper_idx[on_screen]]
        vis = {"pooled": empirical_visibility(xs_all, period, window)}
        for det_id in sorted(set(got.lower_detectors.tolist())):
            mask = got.lower_detectors == det_id
            xs = got.clicks.screen_x[got.upper_idx[mask]]
            if xs.size:
                vis[DetectorId(det_id).name] = empirical_visibility(
                    xs, period, window)
        report["visibility"] = vis
        return report

    lower_ww = mc.lower_basis is Basis.WHICH_WAY
    table = build_table(got, lower_whichway=lower_ww)
    report["table"] = _table_dict(table)

    tests: list[TestReport] = []
    qm_pred = declared_distribution(ModelSpec(ModelKind.QM), mc)
    try:
        tests.append(dataclasses.replace(
            chi_square_test(table, qm_pred, on_reject=Verdict.FAVORS_RIVAL),
            test_name="chi_square_vs_QM"))
    except InsufficientDataError:
        pass
    for label, rival in _RIVALS.items():
        pred = declared_distribution(rival, mc)
        if pred.cells == qm_pred.cells:
            continue  # statistically indistinguishable; nothing to test
        try:
            tests.append(dataclasses.replace(
                chi_square_test(table, pred, on_reject=Verdict.FAVORS_QM),
                test_name=f"chi_square_vs_{label}"))
        except InsufficientDataError:
            pass
    if mc.has_feedback:
        tests.append(sequence_test(_ordered_outcome_pairs(got, lower_ww), alpha))
    report["tests"] = [t.to_dict() for t in tests]

    try:
        report["correlation"] = binary_correlation(table.without_absorber())
    except (DegenerateMarginalError, ValueError):
        report["correlation"] = None
    return report


def _print_report(report: dict) -> None:
    print(f"experiment {report['experiment']}  model {report['model']}  "
          f"coincidences {report['coincidences']}")
    if report.get("tests"):
        name_w = max(len(t["testName"]) for t in report["tests"]) + 2
        print(f"{'test':<{name_w}}{'statistic':>12}  {'p-value':>10}  verdict")
        for t in report["tests"]:
            print(f"{t['testName']:<{name_w}}{t['statistic']:>12.4g}  "
                  f"{t['pValue']:>10.3g}  {t['verdict']}")
    if report.get("correlation") is not None:
        print(f"correlation (eraser ports, absorber dropped): "
              f"{report['correlation']:+.4f}")
    if report.get("visibility"):
        for name, v in report["visibility"].items():
            print(f"visibility[{name}]: {v:.4f}")


def cmd_analyze(args: argparse.Namespace) -> int:
    log_dir = Path(args.out if args.out is not None else ".")
    try:
        report = analyze_logs(log_dir, alpha=args.alpha)
    except (FileNotFoundError, ValueError, KeyError, TypeError) as exc:
        print(f"cannot analyze logs in {log_dir}: {exc}", file=sys.stderr)
        return EXIT_MISSING_LOGS
    _json_dump(report, log_dir / "report.json")
    if not args.quiet:
        _print_report(report)
        print(f"wrote {log_dir / 'report.json'}")
    return EXIT_OK


# --- fringe ------------------------------------------------------------------


def _geometry_from_args(args: argparse.Namespace) -> SlitGeometry:
    if args.config is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        with open(args.config) as fh:
            parser.read_file(fh)
        if not parser.has_section("geometry"):
            raise ConfigError("missing [geometry] section")
        fields = _section_floats(parser, "geometry", SlitGeometry,
                                 dataclasses.asdict(SlitGeometry()))
        return SlitGeometry(**fields)
    return SlitGeometry(
        slit_width=args.slit_width,
        slit_separation=args.slit_separation,
        wavelength=args.wavelength,
        screen_distance=args.screen_distance,
    )


def cmd_fringe(args: argparse.Namespace) -> int:
    try:
        geometry = _geometry_from_args(args)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out if args.out is not None else ".")
    out.mkdir(parents=True, exist_ok=True)
    if args.condition == "all":
        conditions = list(ScreenCondition)
    else:
        conditions = [_CONDITION_NAMES[args.condition.lower()]]
    written = []
    for condition in conditions:
        pattern = conditioned_pattern(geometry, condition)
        path = out / f"pattern_{condition.value}.csv"
        write_pattern_csv(pattern, path)
        written.append(path)
        if args.mc_hits:
            rng = np.random.default_rng(args.seed if args.seed is not None else 0)
            xs = sample_positions_from_uniforms(pattern, rng.random(args.mc_hits))
            hist = histogram_pattern(xs, pattern.xs, weight=pattern.weight)
            hist_path = out / f"histogram_{condition.value}.csv"
            write_pattern_csv(hist, hist_path)
            written.append(hist_path)
    if not args.quiet:
        for path in written:
            print(f"wrote {path}")
    return EXIT_OK


# --- sweep and presets -------------------------------------------------------


def _float_list(raw: str, flag: str) -> list[float]:
    try:
        return [float(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"key '{flag}': expected comma-separated numbers, "
                          f"got {raw!r}") from None


def cmd_sweep(args: argparse.Namespace) -> int:
    try:
        etas = _float_list(args.efficiencies, "--efficiencies")
        darks = _float_list(args.dark_rates, "--dark-rates")
        truth = _parse_model(args.truth, None)
        rival = _parse_model(args.rival, args.retro_policy)
        mc = catalog(args.experiment)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    sweep = power_sweep(truth, rival, mc, etas, darks, alpha=args.alpha,
                        trials=args.trials,
                        seed=args.seed if args.seed is not None else 0)
    out = Path(args.out if args.out is not None else ".")
    out.mkdir(parents=True, exist_ok=True)
    path = out / "sweep.csv"
    with open(path, "w", newline="") as fh:
        fh.write("efficiency,darkRate,medianPairs,ciLow,ciHigh,trials\n")
        for cell in sweep.cells:
            d = cell.to_dict()
            fh.write(f"{d['efficiency']:g},{d['darkRate']:g},"
                     f"{d['medianPairs']},{d['ciLow']},{d['ciHigh']},"
                     f"{d['trials']}\n")
    if not args.quiet:
        print(f"wrote {path}")
        for cell in sweep.cells:
            d = cell.to_dict()
            print(f"  eta={d['efficiency']:g} dark={d['darkRate']:g}/s "
                  f"-> {d['medianPairs']} pairs")
    return EXIT_OK


def cmd_presets(args: argparse.Namespace) -> int:
    print("detector presets:")
    for name, det in DETECTOR_PRESETS.items():
        print(f"  {name:>6}: efficiency={det.efficiency:g} "
              f"dark_rate={det.dark_rate:g}/s jitter={det.jitter_sigma:g}s "
              f"window={det.coincidence_window:g}s pair_rate={det.pair_rate:g}/s")
    print("experiments:")
    for name in ExperimentName:
        mc = catalog(name)
        mode = "screen" if mc.screen_mode else (
            f"upper={mc.upper_basis.value} lower={mc.lower_basis.value}"
            + (" + feedback wiring" if mc.has_feedback else ""))
        print(f"  {name.value}: {mode}")
    return EXIT_OK


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eraserlab",
        description="Monte Carlo bench for entangled-pair eraser experiments "
                    "and their would-be classical explanations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--quiet", action="store_true", help="suppress chatter")

    p_run = sub.add_parser("run", help="simulate one experiment from a config file")
    p_run.add_argument("--config", required=True, help="INI run configuration")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_an = sub.add_parser("analyze", help="apply the test battery to run logs")
    p_an.add_argument("--alpha", type=float, default=1e-6,
                      help="significance level for the sequence test")
    common(p_an)
    p_an.set_defaults(func=cmd_analyze)

    p_fr = sub.add_parser("fringe", help="write screen pattern CSVs")
    p_fr.add_argument("--config", default=None, help="INI file with [geometry]")
    p_fr.add_argument("--condition", default="all",
                      choices=["all"] + [c.value for c in ScreenCondition])
    p_fr.add_argument("--slit-width", type=float, default=30e-6)
    p_fr.add_argument("--slit-separation", type=float, default=150e-6)
    p_fr.add_argument("--wavelength", type=float, default=700e-9)
    p_fr.add_argument("--screen-distance", type=float, default=1.0)
    p_fr.add_argument("--mc-hits", type=int, default=0,
                      help="also write a Monte Carlo histogram of this many hits")
    common(p_fr)
    p_fr.set_defaults(func=cmd_fringe)

    p_sw = sub.add_parser("sweep", help="pairs-to-rejection over a detector grid")
    p_sw.add_argument("--experiment", default="E5")
    p_sw.add_argument("--truth", default="QM")
    p_sw.add_argument("--rival", default="retro")
    p_sw.add_argument("--retro-policy", default="PaperStrict")
    p_sw.add_argument("--efficiencies", default="1.0,0.8,0.5,0.2")
    p_sw.add_argument("--dark-rates", default="0,100")
    p_sw.add_argument("--alpha", type=float, default=1e-6)
    p_sw.add_argument("--trials", type=int, default=200)
    common(p_sw)
    p_sw.set_defaults(func=cmd_sweep)

    p_pr = sub.add_parser("presets", help="list detector presets and experiments")
    p_pr.set_defaults(func=cmd_presets)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
