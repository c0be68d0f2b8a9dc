"""Batch experiment driver: timestamps, detector imperfections, coincidences.

Pairs are simulated in fixed-size chunks, each with its own RNG substream
derived from the run seed, and each chunk draws the same fixed layout of
uniforms/normals.  The output is therefore byte-identical whether chunks run
serially or on a thread pool.  Dark counts come from a dedicated substream
so they never perturb the per-pair draws.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterator, Optional

import numpy as np

from ._kernels import match_nearest
from .configs import MeasurementConfig
from .errors import ConfigError, DegenerateWindowError, UnsupportedModelError
from .models import (
    BatchOutcomes,
    ModelKind,
    ModelSpec,
    sample_batch_from_uniforms,
)
from .quantum import BASIS_BY_CODE, OUTCOME_BY_CODE, OUTCOME_CODE, Basis, SideOutcome
from .screen import (
    ScreenCondition,
    ScreenPattern,
    SlitGeometry,
    conditioned_pattern,
    sample_positions_by_row,
)

__all__ = [
    "CHUNK",
    "DetectorId",
    "DetectorModel",
    "DETECTOR_PRESETS",
    "ClickRecord",
    "ClickStream",
    "CoincidenceRecord",
    "CoincidenceResult",
    "RunResult",
    "ScreenRunResult",
    "active_detectors",
    "run_experiment",
    "run_screen_experiment",
    "match_coincidences",
    "write_clicks_csv",
    "write_outcomes_csv",
    "write_screen_outcomes_csv",
    "read_clicks_csv",
]

CHUNK = 8192  # pairs per RNG substream, independent of worker count


class DetectorId(IntEnum):
    """Physical detectors: U-row upper side, D-row lower side, plus screen."""

    U1 = 0
    U2 = 1
    U3 = 2
    U4 = 3
    D1 = 4
    D2 = 5
    D3 = 6
    D4 = 7
    SCREEN = 8


def _upper_detector_codes(upper_code: np.ndarray) -> np.ndarray:
    # upper outcome codes P1,P2,E3,E4 = 0..3 match U1..U4 directly
    return upper_code


def _lower_detector_codes(lower_code: np.ndarray) -> np.ndarray:
    # lower P1..E4 -> D1..D4; the absorber click (code 4) is also D1
    return 4 + np.where(lower_code < 4, lower_code, 0)


@dataclass(frozen=True)
class DetectorModel:
    """Detection efficiency, noise, timing, and source rate in one bundle."""

    efficiency: float = 1.0
    dark_rate: float = 0.0
    jitter_sigma: float = 0.0
    coincidence_window: float = 1e-9
    pair_rate: float = 1e5
    lower_path_delay: float = 50e-9

    def __post_init__(self) -> None:
        if not 0.0 <= self.efficiency <= 1.0:
            raise ConfigError(f"efficiency must be in [0, 1], got {self.efficiency}")
        if self.dark_rate < 0:
            raise ConfigError(f"dark_rate must be >= 0, got {self.dark_rate}")
        if self.jitter_sigma < 0:
            raise ConfigError(f"jitter_sigma must be >= 0, got {self.jitter_sigma}")
        if not self.coincidence_window > 0:
            raise ConfigError("coincidence_window must be positive")
        if not self.pair_rate > 0:
            raise ConfigError("pair_rate must be positive")
        if self.lower_path_delay < 0:
            raise ConfigError("lower_path_delay must be >= 0")


DETECTOR_PRESETS = {
    "ideal": DetectorModel(),
    "spad": DetectorModel(efficiency=0.5, dark_rate=100.0, jitter_sigma=50e-12,
                          coincidence_window=1e-9, pair_rate=1e5),
    "mkid": DetectorModel(efficiency=0.8, dark_rate=1.0, jitter_sigma=100e-9,
                          coincidence_window=2e-6, pair_rate=1e4),
}


@dataclass(frozen=True)
class ClickRecord:
    detector: DetectorId
    timestamp: float
    pair_id: Optional[int] = None  # None for dark counts
    screen_x: Optional[float] = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.timestamp) and self.timestamp >= 0):
            raise ValueError(f"timestamp must be finite and >= 0, got {self.timestamp}")


@dataclass(frozen=True)
class ClickStream:
    """Column-oriented click log; ``pair_id`` −1 and ``screen_x`` NaN mean absent."""

    detector: np.ndarray  # int64 DetectorId values
    timestamp: np.ndarray  # float64 seconds
    pair_id: np.ndarray  # int64, -1 for dark counts
    screen_x: np.ndarray  # float64, NaN for non-screen clicks

    def __len__(self) -> int:
        return len(self.detector)

    def record(self, i: int) -> ClickRecord:
        pid = int(self.pair_id[i])
        x = float(self.screen_x[i])
        return ClickRecord(
            DetectorId(int(self.detector[i])),
            float(self.timestamp[i]),
            pid if pid >= 0 else None,
            x if math.isfinite(x) else None,
        )

    def records(self) -> Iterator[ClickRecord]:
        for i in range(len(self)):
            yield self.record(i)

    @staticmethod
    def empty() -> "ClickStream":
        return ClickStream(
            np.empty(0, dtype=np.int64),
            np.empty(0, dtype=np.float64),
            np.empty(0, dtype=np.int64),
            np.empty(0, dtype=np.float64),
        )

    @staticmethod
    def concat(parts: list["ClickStream"]) -> "ClickStream":
        if not parts:
            return ClickStream.empty()
        return ClickStream(
            np.concatenate([p.detector for p in parts]),
            np.concatenate([p.timestamp for p in parts]),
            np.concatenate([p.pair_id for p in parts]),
            np.concatenate([p.screen_x for p in parts]),
        )

    def sorted_by_time(self) -> "ClickStream":
        order = np.lexsort((self.pair_id, self.detector, self.timestamp))
        return ClickStream(
            self.detector[order],
            self.timestamp[order],
            self.pair_id[order],
            self.screen_x[order],
        )


def active_detectors(config: MeasurementConfig) -> tuple[DetectorId, ...]:
    """Detectors powered for this configuration (dark counts apply to these)."""
    if config.screen_mode:
        upper: tuple[DetectorId, ...] = (DetectorId.SCREEN,)
    elif config.upper_basis is Basis.WHICH_WAY:
        upper = (DetectorId.U1, DetectorId.U2)
    else:
        upper = (DetectorId.U3, DetectorId.U4)
    if config.lower_basis is Basis.WHICH_WAY:
        lower: tuple[DetectorId, ...] = (DetectorId.D1, DetectorId.D2)
    elif config.lower_basis is Basis.ERASER and not config.has_feedback:
        lower = (DetectorId.D3, DetectorId.D4)
    else:  # hybrid, or eraser with wiring that can arm the absorber
        lower = (DetectorId.D1, DetectorId.D3, DetectorId.D4)
    return upper + lower


# --- click experiments ------------------------------------------------------


@dataclass(frozen=True)
class RunResult:
    config: MeasurementConfig
    model: ModelSpec
    detector: DetectorModel
    clicks: ClickStream  # time-sorted, dark counts included
    raw: BatchOutcomes  # noiseless ground truth, indexed by pair id
    duration: float

    def raw_outcome(self, pair_id: int):
        return self.raw.outcome(pair_id)


def _chunk_bounds(n: int) -> list[tuple[int, int]]:
    return [(s, min(s + CHUNK, n)) for s in range(0, n, CHUNK)]


def _dark_clicks(rng: np.random.Generator, detectors: tuple[DetectorId, ...],
                 rate: float, duration: float,
                 screen_halfwidth: float = 0.0) -> ClickStream:
    parts = []
    for det_id in detectors:
        k = int(rng.poisson(rate * duration)) if rate > 0 else 0
        times = rng.random(k) * duration
        if det_id is DetectorId.SCREEN and screen_halfwidth > 0:
            xs = (rng.random(k) * 2.0 - 1.0) * screen_halfwidth
        else:
            xs = np.full(k, np.nan)
        parts.append(ClickStream(
            np.full(k, int(det_id), dtype=np.int64),
            times,
            np.full(k, -1, dtype=np.int64),
            xs,
        ))
    return ClickStream.concat(parts)


def run_experiment(config: MeasurementConfig, model: ModelSpec,
                   det: DetectorModel, n_jobs: int = 1) -> RunResult:
    """Simulate a full click-detector run.

    Per pair: emission at pair_id/pair_rate, model outcome (feedback driven
    by the detected upper click), per-side survival with probability
    ``efficiency``, Gaussian timestamp jitter, and the lower-path delay.
    Dark counts ride on every powered detector for the whole duration.
    """
    if config.screen_mode:
        raise ConfigError("screen-mode configs are driven by run_screen_experiment")
    n = config.pair_count
    root = np.random.SeedSequence(config.seed)
    bounds = _chunk_bounds(n)
    children = root.spawn(len(bounds) + 1)

    def do_chunk(k: int) -> tuple[BatchOutcomes, ClickStream]:
        start, stop = bounds[k]
        m = stop - start
        rng = np.random.default_rng(children[k])
        # fixed draw layout per chunk (see module docstring)
        u_detect_up = rng.random(m)
        u_detect_lo = rng.random(m)
        u_atom = rng.random(m)
        z_up = rng.standard_normal(m)
        z_lo = rng.standard_normal(m)
        detected_up = u_detect_up < det.efficiency
        detected_lo = u_detect_lo < det.efficiency
        batch = sample_batch_from_uniforms(model, config, u_atom, detected_up)
        pair_ids = np.arange(start, stop, dtype=np.int64)
        emit = pair_ids / det.pair_rate
        t_up = emit + z_up * det.jitter_sigma
        t_lo = emit + det.lower_path_delay + z_lo * det.jitter_sigma
        upper = ClickStream(
            _upper_detector_codes(batch.upper_code[detected_up]),
            t_up[detected_up],
            pair_ids[detected_up],
            np.full(int(detected_up.sum()), np.nan),
        )
        lower = ClickStream(
            _lower_detector_codes(batch.lower_code[detected_lo]),
            t_lo[detected_lo],
            pair_ids[detected_lo],
            np.full(int(detected_lo.sum()), np.nan),
        )
        return batch, ClickStream.concat([upper, lower])

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(do_chunk, range(len(bounds))))
    else:
        results = [do_chunk(k) for k in range(len(bounds))]

    raw = BatchOutcomes(
        upper_code=np.concatenate([b.upper_code for b, _ in results]),
        lower_code=np.concatenate([b.lower_code for b, _ in results]),
        basis_code=np.concatenate([b.basis_code for b, _ in results]),
        path=np.concatenate([b.path for b, _ in results]),
        tag=np.concatenate([b.tag for b, _ in results]),
    )
    duration = n / det.pair_rate + det.lower_path_delay
    darks = _dark_clicks(np.random.default_rng(children[-1]),
                         active_detectors(config), det.dark_rate, duration)
    clicks = ClickStream.concat([c for _, c in results] + [darks]).sorted_by_time()
    return RunResult(config, model, det, clicks, raw, duration)


# --- coincidence matching ---------------------------------------------------


@dataclass(frozen=True)
class CoincidenceRecord:
    upper: ClickRecord
    lower: ClickRecord
    delta_t: float  # lower-minus-upper after delay compensation


@dataclass(frozen=True)
class CoincidenceResult:
    """Matched pairs plus bookkeeping for the leftovers."""

    upper_idx: np.ndarray  # indices into the matched ClickStream
    lower_idx: np.ndarray
    delta_t: np.ndarray
    clicks: ClickStream
    singles_upper: int
    singles_lower: int

    def __len__(self) -> int:
        return len(self.upper_idx)

    @property
    def n_matched(self) -> int:
        return len(self.upper_idx)

    @property
    def upper_detectors(self) -> np.ndarray:
        return self.clicks.detector[self.upper_idx]

    @property
    def lower_detectors(self) -> np.ndarray:
        return self.clicks.detector[self.lower_idx]

    @property
    def upper_pair_ids(self) -> np.ndarray:
        return self.clicks.pair_id[self.upper_idx]

    @property
    def lower_pair_ids(self) -> np.ndarray:
        return self.clicks.pair_id[self.lower_idx]

    def records(self) -> Iterator[CoincidenceRecord]:
        for k in range(len(self.upper_idx)):
            yield CoincidenceRecord(
                self.clicks.record(int(self.upper_idx[k])),
                self.clicks.record(int(self.lower_idx[k])),
                float(self.delta_t[k]),
            )


def match_coincidences(clicks: ClickStream, window: float,
                       lower_delay: float = 0.0) -> CoincidenceResult:
    """Greedy nearest-neighbor pairing of upper-side and lower-side clicks.

    Lower timestamps are shifted back by ``lower_delay`` before comparison
    (the electronic delay line compensating the longer lower path).  Each
    click is used at most once; ties go to the earlier lower click.
    """
    if not window > 0:
        raise DegenerateWindowError(f"coincidence window must be positive, got {window}")
    det = clicks.detector
    upper_mask = (det <= 3) | (det == int(DetectorId.SCREEN))
    lower_mask = (det >= 4) & (det <= 7)
    upper_pos = np.flatnonzero(upper_mask)
    lower_pos = np.flatnonzero(lower_mask)
    t_up = clicks.timestamp[upper_pos]
    t_lo = clicks.timestamp[lower_pos] - lower_delay
    up_order = np.argsort(t_up, kind="stable")
    lo_order = np.argsort(t_lo, kind="stable")
    iu, il = match_nearest(t_up[up_order], t_lo[lo_order], window)
    upper_idx = upper_pos[up_order[iu]]
    lower_idx = lower_pos[lo_order[il]]
    delta = (clicks.timestamp[lower_idx] - lower_delay) - clicks.timestamp[upper_idx]
    return CoincidenceResult(
        upper_idx=upper_idx,
        lower_idx=lower_idx,
        delta_t=delta,
        clicks=clicks,
        singles_upper=int(len(upper_pos) - len(iu)),
        singles_lower=int(len(lower_pos) - len(il)),
    )


# --- screen experiments -----------------------------------------------------


_QM_ROW_OUTCOMES = {
    Basis.ERASER: (SideOutcome.E3, SideOutcome.E4),
    Basis.WHICH_WAY: (SideOutcome.P1, SideOutcome.P2),
}
_QM_ROW_PATTERNS = {
    Basis.ERASER: (ScreenCondition.ON_D3, ScreenCondition.ON_D4),
    Basis.WHICH_WAY: (ScreenCondition.ON_D1, ScreenCondition.ON_D2),
}


@dataclass(frozen=True)
class ScreenRunResult:
    config: MeasurementConfig
    model: ModelSpec
    geometry: SlitGeometry
    detector: DetectorModel
    clicks: ClickStream  # screen hits + lower clicks + darks, time-sorted
    raw_lower_code: np.ndarray  # ground-truth lower outcome per pair
    raw_x: np.ndarray  # ground-truth screen position per pair
    raw_path: np.ndarray
    raw_tag: np.ndarray
    screen_detected: np.ndarray
    lower_detected: np.ndarray
    duration: float

    def hits_by_outcome(self) -> dict[SideOutcome, np.ndarray]:
        """Screen positions grouped by lower outcome (both sides detected)."""
        both = self.screen_detected & self.lower_detected
        out: dict[SideOutcome, np.ndarray] = {}
        for code in np.unique(self.raw_lower_code[both]):
            mask = both & (self.raw_lower_code == code)
            out[OUTCOME_BY_CODE[int(code)]] = self.raw_x[mask]
        return out

    def pooled_hits(self) -> np.ndarray:
        both = self.screen_detected & self.lower_detected
        return self.raw_x[both]


def run_screen_experiment(config: MeasurementConfig, model: ModelSpec,
                          geometry: SlitGeometry, det: DetectorModel,
                          n_jobs: int = 1) -> ScreenRunResult:
    """Simulate the screen variant: lower outcome first, then the screen hit.

    QM draws the position from the pattern conditioned on the partner's
    outcome; the ball model sends each photon through its hidden slit, so
    positions always follow a single-slit envelope.
    """
    if not config.screen_mode:
        raise ConfigError("config is not a screen-mode experiment")
    if model.kind not in (ModelKind.QM, ModelKind.LOCAL_REALIST_BALL):
        raise UnsupportedModelError(
            f"screen runs support QM and LocalRealistBall, got {model}"
        )
    lb = config.lower_basis
    if model.kind is ModelKind.QM:
        row_patterns = [conditioned_pattern(geometry, c) for c in _QM_ROW_PATTERNS[lb]]
    else:
        # ball photons traverse one slit: envelope patterns keyed by path
        row_patterns = [
            conditioned_pattern(geometry, ScreenCondition.ON_D1),
            conditioned_pattern(geometry, ScreenCondition.ON_D2),
        ]
    qm_codes = np.array([OUTCOME_CODE[o] for o in _QM_ROW_OUTCOMES[lb]], dtype=np.int64)
    w_first = row_patterns[0].weight / (row_patterns[0].weight + row_patterns[1].weight)

    n = config.pair_count
    root = np.random.SeedSequence(config.seed)
    bounds = _chunk_bounds(n)
    children = root.spawn(len(bounds) + 1)

    def do_chunk(k: int):
        start, stop = bounds[k]
        m = stop - start
        rng = np.random.default_rng(children[k])
        u_detect_scr = rng.random(m)
        u_detect_lo = rng.random(m)
        u_a = rng.random(m)
        u_b = rng.random(m)
        z_scr = rng.standard_normal(m)
        z_lo = rng.standard_normal(m)
        u_x = rng.random(m)
        if model.kind is ModelKind.QM:
            rows = np.where(u_a < w_first, 0, 1).astype(np.int64)
            lower_code = qm_codes[rows]
            path = np.zeros(m, dtype=np.int64)
            tag = np.zeros(m, dtype=np.int64)
        else:
            path = np.where(u_a < 0.5, 1, 2).astype(np.int64)
            tag = np.where(u_b < 0.5, 3, 4).astype(np.int64)
            rows = path - 1
            lower_code = (path - 1) if lb is Basis.WHICH_WAY else (tag - 1)
            lower_code = lower_code.astype(np.int64)
        xs = sample_positions_by_row(row_patterns, rows, u_x)
        detected_scr = u_detect_scr < det.efficiency
        detected_lo = u_detect_lo < det.efficiency
        pair_ids = np.arange(start, stop, dtype=np.int64)
        emit = pair_ids / det.pair_rate
        t_scr = emit + z_scr * det.jitter_sigma
        t_lo = emit + det.lower_path_delay + z_lo * det.jitter_sigma
        screen_clicks = ClickStream(
            np.full(int(detected_scr.sum()), int(DetectorId.SCREEN), dtype=np.int64),
            t_scr[detected_scr],
            pair_ids[detected_scr],
            xs[detected_scr],
        )
        lower_clicks = ClickStream(
            _lower_detector_codes(lower_code[detected_lo]),
            t_lo[detected_lo],
            pair_ids[detected_lo],
            np.full(int(detected_lo.sum()), np.nan),
        )
        return (lower_code, xs, path, tag, detected_scr, detected_lo,
                ClickStream.concat([screen_clicks, lower_clicks]))

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(do_chunk, range(len(bounds))))
    else:
        results = [do_chunk(k) for k in range(len(bounds))]

    duration = n / det.pair_rate + det.lower_path_delay
    halfwidth = float(row_patterns[0].xs[-1] + 0.5 * row_patterns[0].bin_width)
    darks = _dark_clicks(np.random.default_rng(children[-1]),
                         active_detectors(config), det.dark_rate, duration,
                         screen_halfwidth=halfwidth)
    clicks = ClickStream.concat([r[6] for r in results] + [darks]).sorted_by_time()
    return ScreenRunResult(
        config=config,
        model=model,
        geometry=geometry,
        detector=det,
        clicks=clicks,
        raw_lower_code=np.concatenate([r[0] for r in results]),
        raw_x=np.concatenate([r[1] for r in results]),
        raw_path=np.concatenate([r[2] for r in results]),
        raw_tag=np.concatenate([r[3] for r in results]),
        screen_detected=np.concatenate([r[4] for r in results]),
        lower_detected=np.concatenate([r[5] for r in results]),
        duration=duration,
    )


# --- CSV input/output -------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def write_clicks_csv(path, clicks: ClickStream) -> None:
    """Columns: pairId (empty for dark counts), detectorId, timestamp_s, screenX_m."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pairId", "detectorId", "timestamp_s", "screenX_m"])
        for i in range(len(clicks)):
            pid = int(clicks.pair_id[i])
            x = float(clicks.screen_x[i])
            writer.writerow([
                pid if pid >= 0 else "",
                DetectorId(int(clicks.detector[i])).name,
                _fmt(float(clicks.timestamp[i])),
                _fmt(x) if math.isfinite(x) else "",
            ])


def read_clicks_csv(path) -> ClickStream:
    detectors, times, pids, xs = [], [], [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"pairId", "detectorId", "timestamp_s", "screenX_m"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValueError(f"{path}: expected columns {sorted(required)}")
        for row in reader:
            detectors.append(int(DetectorId[row["detectorId"]]))
            times.append(float(row["timestamp_s"]))
            pids.append(int(row["pairId"]) if row["pairId"] else -1)
            xs.append(float(row["screenX_m"]) if row["screenX_m"] else math.nan)
    return ClickStream(
        np.asarray(detectors, dtype=np.int64),
        np.asarray(times, dtype=np.float64),
        np.asarray(pids, dtype=np.int64),
        np.asarray(xs, dtype=np.float64),
    )


def write_outcomes_csv(path, raw: BatchOutcomes) -> None:
    """Ground-truth log: pairId, upper, lower, resolvedLowerBasis, hiddenPath, hiddenTag."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pairId", "upper", "lower", "resolvedLowerBasis",
                         "hiddenPath", "hiddenTag"])
        for i in range(len(raw)):
            path_v = int(raw.path[i])
            tag_v = int(raw.tag[i])
            writer.writerow([
                i,
                OUTCOME_BY_CODE[int(raw.upper_code[i])].value,
                OUTCOME_BY_CODE[int(raw.lower_code[i])].value,
                BASIS_BY_CODE[int(raw.basis_code[i])].value,
                path_v if path_v else "",
                tag_v if tag_v else "",
            ])


def write_screen_outcomes_csv(path, result: ScreenRunResult) -> None:
    """Screen-run ground truth; the upper column holds the screen position."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pairId", "upper", "lower", "resolvedLowerBasis",
                         "hiddenPath", "hiddenTag"])
        basis_name = result.config.lower_basis.value
        for i in range(len(result.raw_lower_code)):
            path_v = int(result.raw_path[i])
            tag_v = int(result.raw_tag[i])
            writer.writerow([
                i,
                _fmt(float(result.raw_x[i])),
                OUTCOME_BY_CODE[int(result.raw_lower_code[i])].value,
                basis_name,
                path_v if path_v else "",
                tag_v if tag_v else "",
            ])
