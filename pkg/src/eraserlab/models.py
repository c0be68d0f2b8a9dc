"""Rival per-pair outcome models sharing one interface.

Four ways the pair source might work:

  QM                    Born-rule sequential measurement with collapse.
  LocalRealistBall      each pair carries a definite path (1/2) and a shared
                        splitter tag (3/4) fixing every port outcome.
  RetrocausalConsistent ball-like hidden variables that may depend on the
                        future apparatus state; only self-consistent
                        histories of the feedback loop are admitted.
  Superdeterministic    samples the QM joint outcome table directly, then
                        back-fills hidden variables to match — statistically
                        indistinguishable from QM by construction.

Every (model, config) pair reduces to a finite table of outcome atoms
(outcome pair, resolved lower basis, hidden variables, probability), so
batch sampling is a single categorical draw per pair and the analytic
distribution falls out by marginalizing the same table.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, NamedTuple, Optional

import numpy as np

from ._kernels import categorical_sample
from .configs import FeedbackRule, MeasurementConfig
from .errors import DegenerateMarginalError, NoConsistentHistoryError
from .quantum import (
    BASIS_CODE,
    BASIS_BY_CODE,
    OUTCOME_BY_CODE,
    OUTCOME_CODE,
    Basis,
    Side,
    SideOutcome,
    branch_decomposition,
    joint_distribution,
    make_entangled_state,
)

__all__ = [
    "ModelKind",
    "RetroPolicy",
    "ModelSpec",
    "HiddenVariable",
    "PairOutcome",
    "ModelPrediction",
    "AtomTable",
    "BatchOutcomes",
    "History",
    "consistent_histories",
    "atom_tables",
    "declared_distribution",
    "simulate_pair",
    "sample_batch",
    "sample_batch_from_uniforms",
    "QM",
    "BALL",
    "RETRO_STRICT",
    "RETRO_NOVIKOV",
    "SUPERDET",
]

PROB_EPS = 1e-15


class ModelKind(Enum):
    QM = "QM"
    LOCAL_REALIST_BALL = "LocalRealistBall"
    RETROCAUSAL_CONSISTENT = "RetrocausalConsistent"
    SUPERDETERMINISTIC = "Superdeterministic"


class RetroPolicy(Enum):
    """How the retrocausal model breaks ties among self-consistent histories.

    PAPER_STRICT keeps only histories in which the feedback never armed the
    absorber, yielding a single deterministic outcome; NOVIKOV_UNIFORM keeps
    every fixed point with its natural weight.
    """

    PAPER_STRICT = "PaperStrict"
    NOVIKOV_UNIFORM = "NovikovUniform"


@dataclass(frozen=True)
class ModelSpec:
    kind: ModelKind
    retro_policy: RetroPolicy = RetroPolicy.PAPER_STRICT

    def __str__(self) -> str:
        if self.kind is ModelKind.RETROCAUSAL_CONSISTENT:
            return f"{self.kind.value}/{self.retro_policy.value}"
        return self.kind.value


QM = ModelSpec(ModelKind.QM)
BALL = ModelSpec(ModelKind.LOCAL_REALIST_BALL)
RETRO_STRICT = ModelSpec(ModelKind.RETROCAUSAL_CONSISTENT, RetroPolicy.PAPER_STRICT)
RETRO_NOVIKOV = ModelSpec(ModelKind.RETROCAUSAL_CONSISTENT, RetroPolicy.NOVIKOV_UNIFORM)
SUPERDET = ModelSpec(ModelKind.SUPERDETERMINISTIC)


@dataclass(frozen=True)
class HiddenVariable:
    """Per-pair hidden reality: which path, and what both splitters will say."""

    path: int
    splitter_tag: int
    extra: Optional[tuple] = None

    def __post_init__(self) -> None:
        if self.path not in (1, 2):
            raise ValueError(f"path must be 1 or 2, got {self.path}")
        if self.splitter_tag not in (3, 4):
            raise ValueError(f"splitter_tag must be 3 or 4, got {self.splitter_tag}")


@dataclass(frozen=True)
class PairOutcome:
    upper: SideOutcome
    lower: SideOutcome
    resolved_lower_basis: Basis
    hidden: Optional[HiddenVariable] = None


class Atom(NamedTuple):
    """One cell of a model's finite outcome distribution."""

    upper: SideOutcome
    lower: SideOutcome
    lower_basis: Basis
    path: int  # 0 when the model carries no hidden path
    tag: int  # 0 when the model carries no splitter tag
    prob: float


@dataclass(frozen=True)
class ModelPrediction:
    """Analytic joint outcome table for one (model, config)."""

    cells: dict[tuple[SideOutcome, SideOutcome], float]

    def probability(self, upper: SideOutcome, lower: SideOutcome) -> float:
        return self.cells.get((upper, lower), 0.0)

    def conditioned(
        self, keep: Callable[[SideOutcome, SideOutcome], bool]
    ) -> "ModelPrediction":
        """Renormalized table restricted to cells passing ``keep``."""
        kept = {k: p for k, p in self.cells.items() if keep(*k)}
        total = sum(kept.values())
        if total <= 0.0:
            raise DegenerateMarginalError("conditioning removed all probability")
        return ModelPrediction({k: p / total for k, p in kept.items()})

    def items(self):
        return self.cells.items()


class AtomTable:
    """Sampling-ready arrays over a model's outcome atoms."""

    def __init__(self, atoms: list[Atom]):
        atoms = [a for a in atoms if a.prob > PROB_EPS]
        if not atoms:
            raise ValueError("atom table is empty")
        total = sum(a.prob for a in atoms)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"atom probabilities sum to {total!r}")
        self.atoms = tuple(atoms)
        self.upper_code = np.array([OUTCOME_CODE[a.upper] for a in atoms], dtype=np.int64)
        self.lower_code = np.array([OUTCOME_CODE[a.lower] for a in atoms], dtype=np.int64)
        self.basis_code = np.array([BASIS_CODE[a.lower_basis] for a in atoms], dtype=np.int64)
        self.path = np.array([a.path for a in atoms], dtype=np.int64)
        self.tag = np.array([a.tag for a in atoms], dtype=np.int64)
        probs = np.array([a.prob for a in atoms], dtype=np.float64)
        self.cdf = np.cumsum(probs / total)
        self.cdf[-1] = 1.0

    def sample_indices(self, u: np.ndarray) -> np.ndarray:
        return categorical_sample(self.cdf, np.asarray(u, dtype=np.float64))

    def joint(self) -> ModelPrediction:
        cells: dict[tuple[SideOutcome, SideOutcome], float] = {}
        for a in self.atoms:
            key = (a.upper, a.lower)
            cells[key] = cells.get(key, 0.0) + a.prob
        return ModelPrediction(cells)


# --- per-model atom enumeration --------------------------------------------


def _qm_atoms(config: MeasurementConfig, feedback_live: bool) -> list[Atom]:
    state = make_entangled_state()
    if not config.has_feedback:
        table = joint_distribution(state, config.upper_basis, config.lower_basis)
        return [
            Atom(u, l, config.lower_basis, 0, 0, p)
            for (u, l), p in table.items()
            if p > PROB_EPS
        ]
    atoms = []
    for upper, p_u, collapsed in branch_decomposition(state, Side.UPPER, config.upper_basis):
        if collapsed is None:
            continue
        lb = config.resolved_lower_basis(upper, upper_detected=feedback_live)
        for lower, p_l, _ in branch_decomposition(collapsed, Side.LOWER, lb):
            if p_l > PROB_EPS:
                atoms.append(Atom(upper, lower, lb, 0, 0, p_u * p_l))
    return atoms


_PORT_BY_TAG = {3: SideOutcome.E3, 4: SideOutcome.E4}
_PATH_OUT = {1: SideOutcome.P1, 2: SideOutcome.P2}


def _ball_outcome(basis: Basis, path: int, tag: int) -> SideOutcome:
    if basis is Basis.WHICH_WAY:
        return _PATH_OUT[path]
    if basis is Basis.ERASER:
        return _PORT_BY_TAG[tag]
    # hybrid: the path decides between absorption and the eraser splitter
    if path == 1:
        return SideOutcome.D1_CLICK
    return _PORT_BY_TAG[tag]


def _ball_atoms(config: MeasurementConfig, feedback_live: bool) -> list[Atom]:
    atoms = []
    for path in (1, 2):
        for tag in (3, 4):
            upper = _ball_outcome(config.upper_basis, path, tag)
            lb = config.resolved_lower_basis(upper, upper_detected=feedback_live)
            lower = _ball_outcome(lb, path, tag)
            atoms.append(Atom(upper, lower, lb, path, tag, 0.25))
    return atoms


def _implied_paths(upper: SideOutcome, lower: SideOutcome) -> tuple[int, ...]:
    # the lower side measures path most directly; fall back to the upper side
    for outcome in (lower, upper):
        if outcome is SideOutcome.P1 or outcome is SideOutcome.D1_CLICK:
            return (1,)
        if outcome is SideOutcome.P2:
            return (2,)
    return (1, 2)


def _implied_tags(upper: SideOutcome, lower: SideOutcome) -> tuple[int, ...]:
    # the upper side reads the eraser port in every cataloged config; when
    # both sides report (possibly different) ports, the upper one wins
    for outcome in (upper, lower):
        if outcome is SideOutcome.E3:
            return (3,)
        if outcome is SideOutcome.E4:
            return (4,)
    return (3, 4)


def _superdet_atoms(config: MeasurementConfig, feedback_live: bool) -> list[Atom]:
    """QM outcome atoms with hidden variables painted on afterwards."""
    atoms = []
    for a in _qm_atoms(config, feedback_live):
        paths = _implied_paths(a.upper, a.lower)
        tags = _implied_tags(a.upper, a.lower)
        w = a.prob / (len(paths) * len(tags))
        for path in paths:
            for tag in tags:
                atoms.append(a._replace(path=path, tag=tag, prob=w))
    return atoms


class History(NamedTuple):
    """One candidate story for a retrocausally influenced pair."""

    d1_on: bool
    path: int
    tag: int
    coin: int
    upper: SideOutcome
    lower: SideOutcome
    lower_basis: Basis


def _retro_upper(basis: Basis, d1_on: bool, path: int, tag: int, coin: int) -> SideOutcome:
    if basis is Basis.ERASER and d1_on:
        # arming the absorber measures the partner's path, so the upper
        # eraser port must be re-randomized: the coin replaces the tag
        return _PORT_BY_TAG[coin]
    return _ball_outcome(basis, path, tag)


def consistent_histories(
    model: ModelSpec,
    config: MeasurementConfig,
    wiring: Optional[FeedbackRule] = None,
    feedback_live: bool = True,
) -> list[tuple[History, float]]:
    """Enumerate self-consistent histories with renormalized weights.

    A history assumes an absorber state, draws hidden variables (path, tag)
    and the re-randomization coin uniformly, derives both outcomes, and is
    kept iff the wiring applied to those outcomes reproduces the assumed
    state.  Without wiring every history is trivially a fixed point.
    """
    if model.kind is not ModelKind.RETROCAUSAL_CONSISTENT:
        raise ValueError(f"consistent_histories applies to the retrocausal model, got {model}")
    if wiring is None:
        wiring = config.feedback
    if wiring is not None:
        assumed_states = [False, True]
    else:
        assumed_states = [config.lower_basis is Basis.HYBRID_D1]

    kept: list[tuple[History, float]] = []
    prior = 1.0 / len(assumed_states)
    for assumed_on in assumed_states:
        lb = Basis.HYBRID_D1 if assumed_on else (
            Basis.ERASER if wiring is not None else config.lower_basis
        )
        for path in (1, 2):
            for tag in (3, 4):
                for coin in (3, 4):
                    upper = _retro_upper(config.upper_basis, assumed_on, path, tag, coin)
                    lower = _ball_outcome(lb, path, tag)
                    implied_on = bool(
                        wiring is not None
                        and feedback_live
                        and upper == wiring.trigger
                    )
                    if wiring is not None and implied_on != assumed_on:
                        continue
                    if (
                        model.retro_policy is RetroPolicy.PAPER_STRICT
                        and wiring is not None
                        and assumed_on
                    ):
                        continue
                    kept.append(
                        (History(assumed_on, path, tag, coin, upper, lower, lb),
                         prior / 8.0)
                    )
    total = sum(w for _, w in kept)
    if total <= 0.0:
        raise NoConsistentHistoryError(
            f"no self-consistent history for {model} under the given wiring"
        )
    return [(h, w / total) for h, w in kept]


def _retro_atoms(model: ModelSpec, config: MeasurementConfig,
                 feedback_live: bool) -> list[Atom]:
    return [
        Atom(h.upper, h.lower, h.lower_basis, h.path, h.tag, w)
        for h, w in consistent_histories(model, config, feedback_live=feedback_live)
    ]


_ATOM_BUILDERS = {
    ModelKind.QM: _qm_atoms,
    ModelKind.LOCAL_REALIST_BALL: _ball_atoms,
    ModelKind.SUPERDETERMINISTIC: _superdet_atoms,
}


@lru_cache(maxsize=128)
def atom_tables(model: ModelSpec, config: MeasurementConfig) -> tuple[AtomTable, AtomTable]:
    """(detected, missed) outcome tables for a (model, config) pair.

    The first table applies when the upper click is detected and can drive
    any feedback wiring; the second when the click is lost, leaving the
    absorber unarmed.  Without wiring the two coincide.
    """
    if config.screen_mode:
        raise ValueError("screen-mode configs are driven by run_screen_experiment")
    if model.kind is ModelKind.RETROCAUSAL_CONSISTENT:
        detected = AtomTable(_retro_atoms(model, config, True))
        missed = AtomTable(_retro_atoms(model, config, False))
    else:
        build = _ATOM_BUILDERS[model.kind]
        detected = AtomTable(build(config, True))
        missed = AtomTable(build(config, False)) if config.has_feedback else detected
    return detected, missed


def declared_distribution(model: ModelSpec, config: MeasurementConfig) -> ModelPrediction:
    """Closed-form joint outcome table (ideal detectors)."""
    detected, _ = atom_tables(model, config)
    return detected.joint()


def simulate_pair(model: ModelSpec, config: MeasurementConfig,
                  rng: np.random.Generator) -> PairOutcome:
    """Draw one pair's outcome (ideal detection: feedback wiring live)."""
    detected, _ = atom_tables(model, config)
    idx = int(detected.sample_indices(np.array([rng.random()]))[0])
    atom = detected.atoms[idx]
    hidden = None
    if atom.path:
        hidden = HiddenVariable(atom.path, atom.tag)
    return PairOutcome(atom.upper, atom.lower, atom.lower_basis, hidden)


@dataclass(frozen=True)
class BatchOutcomes:
    """Struct-of-arrays outcome batch (codes index OUTCOME_BY_CODE etc.)."""

    upper_code: np.ndarray
    lower_code: np.ndarray
    basis_code: np.ndarray
    path: np.ndarray
    tag: np.ndarray

    def __len__(self) -> int:
        return len(self.upper_code)

    def joint_counts(self) -> dict[tuple[SideOutcome, SideOutcome], int]:
        combined = self.upper_code * 8 + self.lower_code
        values, counts = np.unique(combined, return_counts=True)
        return {
            (OUTCOME_BY_CODE[v // 8], OUTCOME_BY_CODE[v % 8]): int(c)
            for v, c in zip(values, counts)
        }

    def outcome(self, i: int) -> PairOutcome:
        hidden = None
        if self.path[i]:
            hidden = HiddenVariable(int(self.path[i]), int(self.tag[i]))
        return PairOutcome(
            OUTCOME_BY_CODE[self.upper_code[i]],
            OUTCOME_BY_CODE[self.lower_code[i]],
            BASIS_BY_CODE[self.basis_code[i]],
            hidden,
        )


def sample_batch_from_uniforms(
    model: ModelSpec,
    config: MeasurementConfig,
    u: np.ndarray,
    detected_mask: Optional[np.ndarray] = None,
) -> BatchOutcomes:
    """Batch sampling from externally supplied uniforms (one per pair).

    ``detected_mask`` marks pairs whose upper click reaches the electronics;
    missed clicks fall back to the unarmed-absorber table.  Every pair
    consumes exactly one uniform regardless, keeping the draw layout fixed
    for deterministic chunked execution.
    """
    detected, missed = atom_tables(model, config)
    u = np.asarray(u, dtype=np.float64)
    idx = detected.sample_indices(u)
    if detected_mask is not None and missed is not detected and not detected_mask.all():
        idx_missed = missed.sample_indices(u)
        return BatchOutcomes(
            upper_code=np.where(detected_mask, detected.upper_code[idx], missed.upper_code[idx_missed]),
            lower_code=np.where(detected_mask, detected.lower_code[idx], missed.lower_code[idx_missed]),
            basis_code=np.where(detected_mask, detected.basis_code[idx], missed.basis_code[idx_missed]),
            path=np.where(detected_mask, detected.path[idx], missed.path[idx_missed]),
            tag=np.where(detected_mask, detected.tag[idx], missed.tag[idx_missed]),
        )
    return BatchOutcomes(
        upper_code=detected.upper_code[idx],
        lower_code=detected.lower_code[idx],
        basis_code=detected.basis_code[idx],
        path=detected.path[idx],
        tag=detected.tag[idx],
    )


def sample_batch(model: ModelSpec, config: MeasurementConfig, n: int,
                 rng: np.random.Generator,
                 detected_mask: Optional[np.ndarray] = None) -> BatchOutcomes:
    """Vectorized n-pair batch: one categorical draw per pair."""
    return sample_batch_from_uniforms(model, config, rng.random(n), detected_mask)
