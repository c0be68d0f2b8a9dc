"""Exact amplitude mechanics for one path-entangled photon pair.

The pair lives in a 2x2 complex amplitude array indexed by
(upper photon path, lower photon path), each path in {1, 2}.  Three
measurements are supported per side:

* which-way: projective readout of the path index,
* eraser: projective readout in the symmetric/antisymmetric path basis
  e3 = (|1> + |2>)/sqrt(2), e4 = (|1> - |2>)/sqrt(2),
* hybrid (lower side only): an absorbing detector parked on path 1,
  followed by the eraser splitter for the path-2 survivors.  This is a
  two-stage cascade, not a projective basis, but its branch operators
  still form a complete POVM.

Amplitudes are plain Python/NumPy complex numbers throughout.  All
operations are pure; sampling takes an explicit ``numpy.random.Generator``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import IllegalBasisError

SQRT_HALF = math.sqrt(0.5)

#: tolerance for exact-arithmetic checks (normalization, completeness)
NORM_TOL = 1e-12


class Side(Enum):
    UPPER = "upper"
    LOWER = "lower"


class Basis(Enum):
    WHICH_WAY = "which_way"
    ERASER = "eraser"
    HYBRID_D1 = "hybrid_d1"


class SideOutcome(Enum):
    P1 = "P1"  # which-way, path 1
    P2 = "P2"  # which-way, path 2
    E3 = "E3"  # eraser, symmetric port
    E4 = "E4"  # eraser, antisymmetric port
    D1_CLICK = "D1Click"  # hybrid absorber fired


# stable integer codes used by the batch kernels and CSV layer
OUTCOME_CODE = {
    SideOutcome.P1: 0,
    SideOutcome.P2: 1,
    SideOutcome.E3: 2,
    SideOutcome.E4: 3,
    SideOutcome.D1_CLICK: 4,
}
OUTCOME_BY_CODE = [SideOutcome.P1, SideOutcome.P2, SideOutcome.E3, SideOutcome.E4, SideOutcome.D1_CLICK]

BASIS_CODE = {Basis.WHICH_WAY: 0, Basis.ERASER: 1, Basis.HYBRID_D1: 2}
BASIS_BY_CODE = [Basis.WHICH_WAY, Basis.ERASER, Basis.HYBRID_D1]

#: outcomes a basis can produce
BASIS_OUTCOMES = {
    Basis.WHICH_WAY: (SideOutcome.P1, SideOutcome.P2),
    Basis.ERASER: (SideOutcome.E3, SideOutcome.E4),
    Basis.HYBRID_D1: (SideOutcome.D1_CLICK, SideOutcome.E3, SideOutcome.E4),
}

#: eraser splitter: rows are the output ports (e3, e4); its own inverse
ERASER_MATRIX = np.array([[SQRT_HALF, SQRT_HALF], [SQRT_HALF, -SQRT_HALF]])


class TemporalOrder(Enum):
    UPPER_FIRST = "upper_first"
    LOWER_FIRST = "lower_first"


@dataclass(frozen=True)
class JointState:
    """Normalized 2x2 amplitude array over (upper path, lower path)."""

    amp: np.ndarray

    def __post_init__(self):
        arr = np.array(self.amp, dtype=complex)
        if arr.shape != (2, 2):
            raise ValueError(f"amp must be 2x2, got shape {arr.shape}")
        if not np.all(np.isfinite(arr.view(float))):
            raise ValueError("amplitudes must be finite")
        total = float(np.sum(np.abs(arr) ** 2))
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalized: sum |amp|^2 = {total!r}")
        arr.setflags(write=False)
        object.__setattr__(self, "amp", arr)

    def probability_mass(self) -> float:
        return float(np.sum(np.abs(self.amp) ** 2))


def make_entangled_state() -> JointState:
    """The source state: (|1>|1> + |2>|2>) / sqrt(2)."""
    amp = np.zeros((2, 2), dtype=complex)
    amp[0, 0] = SQRT_HALF
    amp[1, 1] = SQRT_HALF
    return JointState(amp)


def eraser_rotate(state: JointState, side: Side) -> JointState:
    """Rewrite one side's path amplitudes in the eraser-port basis.

    Applies the symmetric/antisymmetric splitter matrix to the chosen index.
    The matrix is real, symmetric and self-inverse, so applying it twice on
    the same side is the identity.
    """
    if side is Side.UPPER:
        amp = ERASER_MATRIX @ state.amp
    else:
        amp = state.amp @ ERASER_MATRIX
    return JointState(amp)


def _branch_operators(basis: Basis) -> dict[SideOutcome, np.ndarray]:
    """Per-outcome branch operators B acting on one side's path index.

    Unnormalized post-measurement amplitude for outcome o is B_o applied to
    that side; probabilities are the squared norms.  Each set satisfies the
    completeness relation sum B!B = I.
    """
    p1 = np.array([[1.0, 0.0], [0.0, 0.0]])
    p2 = np.array([[0.0, 0.0], [0.0, 1.0]])
    e3 = 0.5 * np.array([[1.0, 1.0], [1.0, 1.0]])
    e4 = 0.5 * np.array([[1.0, -1.0], [-1.0, 1.0]])
    if basis is Basis.WHICH_WAY:
        return {SideOutcome.P1: p1, SideOutcome.P2: p2}
    if basis is Basis.ERASER:
        return {SideOutcome.E3: e3, SideOutcome.E4: e4}
    # hybrid: absorb path 1, else eraser on the path-2 remainder
    return {
        SideOutcome.D1_CLICK: p1,
        SideOutcome.E3: e3 @ p2,
        SideOutcome.E4: e4 @ p2,
    }


def _check_bases(upper_basis: Basis, lower_basis: Basis) -> None:
    if upper_basis is Basis.HYBRID_D1:
        raise IllegalBasisError("hybrid D1 measurement is defined on the lower side only")


def _check_side_basis(side: Side, basis: Basis) -> None:
    if side is Side.UPPER and basis is Basis.HYBRID_D1:
        raise IllegalBasisError("hybrid D1 measurement is defined on the lower side only")


def _apply_branch(amp: np.ndarray, op: np.ndarray, side: Side) -> np.ndarray:
    if side is Side.UPPER:
        return op @ amp
    return amp @ op.T


def joint_distribution(
    state: JointState, upper_basis: Basis, lower_basis: Basis
) -> dict[tuple[SideOutcome, SideOutcome], float]:
    """Born-rule joint outcome table for simultaneous two-side measurement.

    Returns a probability for every outcome pair the two bases can produce;
    the table sums to 1 within NORM_TOL.
    """
    _check_bases(upper_basis, lower_basis)
    upper_ops = _branch_operators(upper_basis)
    lower_ops = _branch_operators(lower_basis)
    table: dict[tuple[SideOutcome, SideOutcome], float] = {}
    for ou, bu in upper_ops.items():
        partial = _apply_branch(state.amp, bu, Side.UPPER)
        for ol, bl in lower_ops.items():
            amp2 = _apply_branch(partial, bl, Side.LOWER)
            table[(ou, ol)] = float(np.sum(np.abs(amp2) ** 2))
    total = sum(table.values())
    assert abs(total - 1.0) <= NORM_TOL, f"branch probabilities sum to {total!r}"
    return table


def side_marginal(
    state: JointState, side: Side, basis: Basis
) -> dict[SideOutcome, float]:
    """Outcome probabilities for measuring one side alone."""
    _check_side_basis(side, basis)
    ops = _branch_operators(basis)
    return {
        o: float(np.sum(np.abs(_apply_branch(state.amp, b, side)) ** 2))
        for o, b in ops.items()
    }


def branch_decomposition(
    state: JointState, side: Side, basis: Basis
) -> list[tuple[SideOutcome, float, JointState | None]]:
    """All one-side measurement branches as (outcome, probability, collapsed).

    The collapsed entry is the normalized post-measurement pair state, or
    None for branches of (numerically) zero probability.  Probabilities sum
    to one.
    """
    _check_side_basis(side, basis)
    out = []
    for outcome, op in _branch_operators(basis).items():
        branch = _apply_branch(state.amp, op, side)
        prob = float(np.sum(np.abs(branch) ** 2))
        if prob < NORM_TOL:
            out.append((outcome, prob, None))
        else:
            out.append((outcome, prob, JointState(branch / math.sqrt(prob))))
    return out


def measure_side(
    state: JointState, side: Side, basis: Basis, rng: np.random.Generator
) -> tuple[SideOutcome, JointState]:
    """Sample one side's outcome and collapse the pair state.

    The collapsed state is the normalized branch amplitude; for the hybrid
    D1 click the lower photon is absorbed, but the path-1 column is kept as
    bookkeeping so the upper side can still be measured.
    """
    branches = branch_decomposition(state, side, basis)
    u = rng.random()
    acc = 0.0
    pick = -1
    for k, (_, prob, collapsed) in enumerate(branches):
        acc += prob
        if collapsed is not None:
            pick = k  # last live branch soaks up rounding in the cumsum
            if u < acc:
                break
    if pick < 0:
        raise RuntimeError("no branch carries probability")
    outcome, _, collapsed = branches[pick]
    return outcome, collapsed


def measure_sequential(
    state: JointState,
    order: TemporalOrder,
    upper_basis: Basis,
    lower_basis: Basis,
    rng: np.random.Generator,
) -> tuple[SideOutcome, SideOutcome]:
    """Measure both sides one after the other with collapse in between.

    Returns (upper outcome, lower outcome) regardless of order.  Both sides
    are projective cascades on different tensor factors, so the induced joint
    distribution equals joint_distribution either way.
    """
    _check_bases(upper_basis, lower_basis)
    if order is TemporalOrder.UPPER_FIRST:
        upper, collapsed = measure_side(state, Side.UPPER, upper_basis, rng)
        lower, _ = measure_side(collapsed, Side.LOWER, lower_basis, rng)
    else:
        lower, collapsed = measure_side(state, Side.LOWER, lower_basis, rng)
        upper, _ = measure_side(collapsed, Side.UPPER, upper_basis, rng)
    return upper, lower


# --- Elitzur-Vaidman bomb test -------------------------------------------

class BombResult(Enum):
    EXPLODE = "explode"
    DETECTOR_BRIGHT = "bright"
    DETECTOR_DARK = "dark"


def bomb_probabilities(bomb_live: bool) -> dict[BombResult, float]:
    """Analytic outcome table for the interferometer with a bomb in path 1.

    Computed from the two-beamsplitter amplitudes: a dud leaves the
    interferometer balanced, so the dark port cancels exactly; a live bomb
    acts as a which-way detector on its path.  The splitter is applied in
    scalar arithmetic (not a BLAS matvec) so the balanced dark port cancels
    to an exact 0.0 rather than an FMA residue.
    """
    def splitter(a0: float, a1: float) -> tuple[float, float]:
        return SQRT_HALF * a0 + SQRT_HALF * a1, SQRT_HALF * a0 - SQRT_HALF * a1

    entry = splitter(1.0, 0.0)  # (path0, path1) amplitudes
    if not bomb_live:
        bright, dark = splitter(*entry)
        return {
            BombResult.EXPLODE: 0.0,
            BombResult.DETECTOR_BRIGHT: bright ** 2,
            BombResult.DETECTOR_DARK: dark ** 2,
        }
    p_explode = entry[1] ** 2
    bright, dark = splitter(1.0, 0.0)  # renormalized survivor rides path 0
    p_pass = 1.0 - p_explode
    return {
        BombResult.EXPLODE: p_explode,
        BombResult.DETECTOR_BRIGHT: p_pass * bright ** 2,
        BombResult.DETECTOR_DARK: p_pass * dark ** 2,
    }


def bomb_test(bomb_live: bool, rng: np.random.Generator) -> BombResult:
    """One run of the bomb test: explode, bright-port click, or dark-port click."""
    probs = bomb_probabilities(bomb_live)
    u = rng.random()
    acc = 0.0
    results = list(probs)
    for r in results[:-1]:
        acc += probs[r]
        if u < acc:
            return r
    return results[-1]
