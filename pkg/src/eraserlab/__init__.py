"""Monte Carlo laboratory for delayed-choice quantum-eraser experiments.

The package is organised in layers:

- :mod:`eraserlab.quantum` — exact two-photon state algebra and Born-rule
  probabilities for every detector arrangement.
- :mod:`eraserlab.screen` — continuous screen patterns, fringe visibility,
  and position sampling.
- :mod:`eraserlab.models` — the quantum model plus three rival ontologies
  (local ball, retrocausal-consistent, superdeterministic) behind one
  sampling interface.
- :mod:`eraserlab.configs` — the experiment catalog (E1–E6) and validation.
- :mod:`eraserlab.harness` — detector imperfections, timestamped click
  streams, chunk-deterministic parallel batches, coincidence matching.
- :mod:`eraserlab.stats` — joint-count tables, discrimination tests, and
  detector-requirement power sweeps.
- :mod:`eraserlab.cli` — the ``eraserlab`` command-line front end.
"""

from __future__ import annotations

from .configs import (
    ExperimentName,
    FeedbackEffect,
    FeedbackRule,
    MeasurementConfig,
    catalog,
)
from .errors import (
    ConfigError,
    DegenerateMarginalError,
    DegenerateWindowError,
    EraserLabError,
    IllegalBasisError,
    InsufficientDataError,
    NoConsistentHistoryError,
    UnsupportedModelError,
)
from .harness import (
    DETECTOR_PRESETS,
    ClickStream,
    CoincidenceResult,
    DetectorId,
    DetectorModel,
    RunResult,
    ScreenRunResult,
    active_detectors,
    match_coincidences,
    run_experiment,
    run_screen_experiment,
)
from .models import (
    ModelKind,
    ModelPrediction,
    ModelSpec,
    RetroPolicy,
    declared_distribution,
    sample_batch,
    simulate_pair,
)
from .quantum import (
    Basis,
    BombResult,
    JointState,
    Side,
    SideOutcome,
    TemporalOrder,
    bomb_probabilities,
    branch_decomposition,
    eraser_rotate,
    joint_distribution,
    make_entangled_state,
    measure_sequential,
    measure_side,
    side_marginal,
)
from .screen import (
    ScreenCondition,
    ScreenPattern,
    SlitGeometry,
    conditioned_pattern,
    empirical_visibility,
    histogram_pattern,
    sample_screen_position,
    visibility,
)
from .stats import (
    JointTable,
    PowerTable,
    TestReport,
    Verdict,
    build_table,
    binary_correlation,
    chi_square_test,
    pairs_to_significance,
    power_sweep,
    sequence_test,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # quantum
    "Side", "Basis", "SideOutcome", "TemporalOrder", "JointState",
    "make_entangled_state", "eraser_rotate", "joint_distribution",
    "side_marginal", "branch_decomposition", "measure_side",
    "measure_sequential", "BombResult", "bomb_probabilities",
    # screen
    "ScreenCondition", "SlitGeometry", "ScreenPattern", "conditioned_pattern",
    "visibility", "empirical_visibility", "histogram_pattern",
    "sample_screen_position",
    # models
    "ModelKind", "RetroPolicy", "ModelSpec", "ModelPrediction",
    "declared_distribution", "simulate_pair", "sample_batch",
    # configs
    "ExperimentName", "FeedbackEffect", "FeedbackRule", "MeasurementConfig",
    "catalog",
    # harness
    "DetectorId", "DetectorModel", "DETECTOR_PRESETS", "ClickStream",
    "CoincidenceResult", "RunResult", "ScreenRunResult", "active_detectors",
    "run_experiment", "run_screen_experiment", "match_coincidences",
    # stats
    "Verdict", "JointTable", "TestReport", "build_table",
    "binary_correlation", "sequence_test", "pairs_to_significance",
    "chi_square_test", "PowerTable", "power_sweep",
    # errors
    "EraserLabError", "IllegalBasisError", "NoConsistentHistoryError",
    "DegenerateWindowError", "DegenerateMarginalError",
    "InsufficientDataError", "UnsupportedModelError", "ConfigError",
]
