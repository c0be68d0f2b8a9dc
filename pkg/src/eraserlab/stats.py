"""Joint tables, correlation measures, and model-discrimination tests.

The centerpiece is the exponential-sequence argument: the strict
retrocausal model predicts the feedback experiment yields (E3, E3) on
every pair, so each observed pair halves the probability that quantum
mechanics could have produced a surviving all-(E3, E3) record — and a
single different outcome refutes the strict model outright (likelihood
exactly zero, reported as a -inf log-likelihood ratio, not smoothed away).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy import stats as _sps

from .configs import MeasurementConfig
from .errors import DegenerateMarginalError, InsufficientDataError
from .harness import CoincidenceResult, DetectorId
from .models import ModelPrediction, ModelSpec, declared_distribution
from .quantum import OUTCOME_BY_CODE, Basis, SideOutcome

__all__ = [
    "Verdict",
    "JointTable",
    "TestReport",
    "DEFAULT_GROUPING",
    "build_table",
    "lower_outcome_for_detector",
    "binary_correlation",
    "sequence_test",
    "pairs_to_significance",
    "chi_square_test",
    "PowerCell",
    "PowerTable",
    "power_sweep",
]


class Verdict(Enum):
    FAVORS_QM = "FavorsQM"
    FAVORS_RIVAL = "FavorsRival"
    INCONCLUSIVE = "Inconclusive"


Cell = tuple[SideOutcome, SideOutcome]


@dataclass(frozen=True)
class JointTable:
    """Counts of (upper outcome, lower outcome) coincidences."""

    counts: Mapping[Cell, int]
    total: int

    def __post_init__(self) -> None:
        if any(c < 0 for c in self.counts.values()):
            raise ValueError("counts must be non-negative")
        if sum(self.counts.values()) != self.total:
            raise ValueError("total must equal the sum of counts")

    @staticmethod
    def from_counts(counts: Mapping[Cell, int]) -> "JointTable":
        clean = {cell: int(n) for cell, n in counts.items() if n}
        return JointTable(clean, sum(clean.values()))

    def count(self, upper: SideOutcome, lower: SideOutcome) -> int:
        return self.counts.get((upper, lower), 0)

    def frequency(self, upper: SideOutcome, lower: SideOutcome) -> float:
        return self.count(upper, lower) / self.total if self.total else 0.0

    def restricted(self, keep: Callable[[SideOutcome, SideOutcome], bool]) -> "JointTable":
        """Sub-table of the cells for which ``keep(upper, lower)`` is true."""
        return JointTable.from_counts(
            {cell: n for cell, n in self.counts.items() if keep(*cell)}
        )

    def without_absorber(self) -> "JointTable":
        """Drop rows where either side is the absorber click."""
        d1 = SideOutcome.D1_CLICK
        return self.restricted(lambda u, lo: u is not d1 and lo is not d1)

    def marginal(self, side: int) -> dict[SideOutcome, int]:
        out: dict[SideOutcome, int] = {}
        for cell, n in self.counts.items():
            out[cell[side]] = out.get(cell[side], 0) + n
        return out


@dataclass(frozen=True)
class TestReport:
    __test__ = False  # not a pytest class, despite the name

    test_name: str
    statistic: float
    p_value: float
    log_likelihood_ratio: float  # rival vs QM; may be -inf
    n_pairs: int
    verdict: Verdict

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p_value must be in [0, 1], got {self.p_value}")

    def to_dict(self) -> dict:
        llr = self.log_likelihood_ratio
        return {
            "testName": self.test_name,
            "statistic": self.statistic,
            "pValue": self.p_value,
            "logLikelihoodRatio": "-inf" if llr == -math.inf else llr,
            "nPairs": self.n_pairs,
            "verdict": self.verdict.value,
        }


# --- table construction -----------------------------------------------------


def lower_outcome_for_detector(code: int, lower_whichway: bool) -> SideOutcome:
    if code == int(DetectorId.D1):
        return SideOutcome.P1 if lower_whichway else SideOutcome.D1_CLICK
    if code == int(DetectorId.D2):
        return SideOutcome.P2
    if code == int(DetectorId.D3):
        return SideOutcome.E3
    if code == int(DetectorId.D4):
        return SideOutcome.E4
    raise ValueError(f"detector code {code} is not a lower-side detector")


def build_table(coincidences: CoincidenceResult,
                lower_whichway: bool = False) -> JointTable:
    """Tally matched detector pairs into a joint outcome table.

    Accidentals are *not* cleaned out: a dark count matched into a pair is
    tallied wherever its detector id points, exactly as a lab would see it.
    A D1 click reads as the which-way port P1 when ``lower_whichway`` is
    set, and as the absorber click otherwise.
    """
    counts: dict[Cell, int] = {}
    uppers = coincidences.upper_detectors
    lowers = coincidences.lower_detectors
    for u_code, l_code in zip(uppers.tolist(), lowers.tolist()):
        if u_code > 3:
            raise ValueError("screen hits carry positions, not binary outcomes")
        cell = (OUTCOME_BY_CODE[u_code],
                lower_outcome_for_detector(l_code, lower_whichway))
        counts[cell] = counts.get(cell, 0) + 1
    return JointTable.from_counts(counts)


DEFAULT_GROUPING: Mapping[SideOutcome, int] = {
    SideOutcome.P1: +1,
    SideOutcome.P2: -1,
    SideOutcome.E3: +1,
    SideOutcome.E4: -1,
}


def binary_correlation(table: JointTable,
                       grouping: Mapping[SideOutcome, int] = DEFAULT_GROUPING) -> float:
    """Empirical correlation of the two sides mapped to +-1 by ``grouping``."""
    if table.total == 0:
        raise DegenerateMarginalError("empty table has no correlation")
    for cell, n in table.counts.items():
        for o in cell:
            if n and o not in grouping:
                raise ValueError(f"no +-1 grouping for outcome {o.value}")
            if n and grouping[o] not in (-1, +1):
                raise ValueError("grouping values must be +-1")
    n_tot = table.total
    mean_u = sum(grouping[c[0]] * n for c, n in table.counts.items()) / n_tot
    mean_l = sum(grouping[c[1]] * n for c, n in table.counts.items()) / n_tot
    var_u = 1.0 - mean_u ** 2
    var_l = 1.0 - mean_l ** 2
    if var_u <= 0.0 or var_l <= 0.0:
        raise DegenerateMarginalError("one side is constant; correlation undefined")
    e_ul = sum(grouping[c[0]] * grouping[c[1]] * n for c, n in table.counts.items()) / n_tot
    return (e_ul - mean_u * mean_l) / math.sqrt(var_u * var_l)


# --- the exponential-sequence argument --------------------------------------

_QUIET_CELL = (SideOutcome.E3, SideOutcome.E3)


def sequence_test(outcomes: Sequence[Cell], alpha: float = 1e-6) -> TestReport:
    """Exact test of the strict retrocausal prediction on ordered feedback data.

    The strict model says every pair lands in (E3, E3); QM gives that cell
    probability 1/2.  With N the length of the initial all-(E3, E3) run,
    the exact QM p-value of such a run is (1/2)^N.  Verdicts: any other
    outcome anywhere refutes the strict model (likelihood 0 -> FavorsQM);
    an unbroken record long enough that (1/2)^N < alpha is FavorsRival;
    anything shorter is Inconclusive.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    outcomes = list(outcomes)
    n_prefix = 0
    for cell in outcomes:
        if cell != _QUIET_CELL:
            break
        n_prefix += 1
    p_value = 0.5 ** n_prefix
    broken = n_prefix < len(outcomes)
    if not outcomes:
        verdict = Verdict.INCONCLUSIVE
        llr = 0.0
    elif broken:
        verdict = Verdict.FAVORS_QM
        llr = -math.inf
    else:
        llr = n_prefix * math.log(2.0)
        verdict = Verdict.FAVORS_RIVAL if p_value < alpha else Verdict.INCONCLUSIVE
    return TestReport(
        test_name="sequence",
        statistic=float(n_prefix),
        p_value=p_value,
        log_likelihood_ratio=llr,
        n_pairs=len(outcomes),
        verdict=verdict,
    )


def pairs_to_significance(alpha: float) -> int:
    """Smallest N with (1/2)^N <= alpha."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    n = max(1, math.ceil(-math.log2(alpha)))
    while 0.5 ** n > alpha:  # guard against log rounding
        n += 1
    while n > 1 and 0.5 ** (n - 1) <= alpha:
        n -= 1
    return n


# --- goodness of fit --------------------------------------------------------


def _pool_cells(observed: list[int], expected: list[float],
                min_expected: float = 5.0) -> tuple[list[int], list[float]]:
    """Merge low-expectation cells (smallest first) until all pass the floor."""
    order = np.argsort(expected, kind="stable")
    pooled_obs: list[int] = []
    pooled_exp: list[float] = []
    acc_obs, acc_exp = 0, 0.0
    for i in order:
        acc_obs += observed[i]
        acc_exp += expected[i]
        if acc_exp >= min_expected:
            pooled_obs.append(acc_obs)
            pooled_exp.append(acc_exp)
            acc_obs, acc_exp = 0, 0.0
    if acc_exp > 0.0 or acc_obs > 0:
        if pooled_exp:
            pooled_obs[-1] += acc_obs
            pooled_exp[-1] += acc_exp
        else:
            pooled_obs.append(acc_obs)
            pooled_exp.append(acc_exp)
    return pooled_obs, pooled_exp


def _model_log_likelihood_ratio(table: JointTable, predicted: ModelPrediction) -> float:
    """Multinomial log-likelihood of the model against the saturated fit."""
    llr = 0.0
    for cell, n in table.counts.items():
        if n == 0:
            continue
        p = predicted.probability(*cell)
        if p == 0.0:
            return -math.inf
        llr += n * math.log(p * table.total / n)
    return llr


def chi_square_test(table: JointTable, predicted: ModelPrediction,
                    alpha: float = 0.05,
                    on_reject: Verdict = Verdict.FAVORS_QM) -> TestReport:
    """Pearson goodness-of-fit of a coincidence table against a model table.

    Cells with expected count < 5 are pooled (smallest expectations merged
    together) before the statistic is formed; degrees of freedom are
    pooled-cells − 1.  Observing any event the model rules out is an exact
    refutation: p = 0 regardless of counts.  ``on_reject`` names the verdict
    issued when p < alpha — rejecting the QM table favors the rival and
    vice versa.
    """
    if table.total == 0:
        raise InsufficientDataError("empty table")
    support = {cell: p for cell, p in predicted.items() if p > 0.0}
    llr = _model_log_likelihood_ratio(table, predicted)
    impossible = sum(n for cell, n in table.counts.items() if cell not in support)
    if impossible:
        return TestReport(
            test_name="chi_square",
            statistic=math.inf,
            p_value=0.0,
            log_likelihood_ratio=llr,
            n_pairs=table.total,
            verdict=on_reject,
        )
    if len(support) == 1:
        # point prediction and all data in that cell: nothing to reject
        return TestReport(
            test_name="chi_square",
            statistic=0.0,
            p_value=1.0,
            log_likelihood_ratio=llr,
            n_pairs=table.total,
            verdict=Verdict.INCONCLUSIVE,
        )
    cells = sorted(support, key=lambda c: (c[0].value, c[1].value))
    observed = [table.count(*c) for c in cells]
    expected = [support[c] * table.total for c in cells]
    pooled_obs, pooled_exp = _pool_cells(observed, expected)
    if len(pooled_obs) < 2:
        raise InsufficientDataError(
            f"pooling left {len(pooled_obs)} cell(s); need at least 2"
        )
    chi2 = float(sum((o - e) ** 2 / e for o, e in zip(pooled_obs, pooled_exp)))
    dof = len(pooled_obs) - 1
    p_value = float(_sps.chi2.sf(chi2, dof))
    verdict = on_reject if p_value < alpha else Verdict.INCONCLUSIVE
    return TestReport(
        test_name="chi_square",
        statistic=chi2,
        p_value=p_value,
        log_likelihood_ratio=llr,
        n_pairs=table.total,
        verdict=verdict,
    )


# --- power sweep -------------------------------------------------------------


@dataclass(frozen=True)
class PowerCell:
    efficiency: float
    dark_rate: float
    reachable: bool
    median_pairs: Optional[float]
    ci_low: Optional[float]
    ci_high: Optional[float]
    n_trials: int

    def to_dict(self) -> dict:
        return {
            "efficiency": self.efficiency,
            "darkRate": self.dark_rate,
            "medianPairs": self.median_pairs if self.reachable else "unreachable",
            "ciLow": self.ci_low,
            "ciHigh": self.ci_high,
            "trials": self.n_trials,
        }


@dataclass(frozen=True)
class PowerTable:
    truth: ModelSpec
    rival: ModelSpec
    alpha: float
    cells: tuple[PowerCell, ...]

    def cell(self, efficiency: float, dark_rate: float) -> PowerCell:
        for c in self.cells:
            if c.efficiency == efficiency and c.dark_rate == dark_rate:
                return c
        raise KeyError((efficiency, dark_rate))


def _median_with_ci(samples: np.ndarray) -> tuple[float, float, float]:
    """Sample median with a distribution-free 95% order-statistic interval."""
    srt = np.sort(samples)
    n = srt.size
    med = float(np.median(srt))
    lo_rank = int(_sps.binom.ppf(0.025, n, 0.5))
    hi_rank = min(n - 1, int(_sps.binom.ppf(0.975, n, 0.5)))
    return med, float(srt[lo_rank]), float(srt[hi_rank])


def _slot_probabilities(truth_cells: list[tuple[Cell, float]],
                        rival: ModelPrediction,
                        det_active: tuple[int, int],
                        efficiency: float, dark_rate: float,
                        window: float) -> tuple[float, float]:
    """Per emitted pair: P(coincidence recorded), P(it refutes the rival).

    A slot records a coincidence when each side yields a click — real
    (probability eta) or a dark count landing inside the window.  Dark
    clicks pick a powered detector uniformly, so with darks present every
    outcome cell is reachable and cells outside the rival's support refute
    it.  This is a per-slot approximation of the greedy matcher, valid when
    window * rates << 1.
    """
    n_up, n_lo = det_active
    p_dark_up = 1.0 - math.exp(-n_up * dark_rate * 2.0 * window)
    p_dark_lo = 1.0 - math.exp(-n_lo * dark_rate * 2.0 * window)
    eta = efficiency
    p_click_up = eta + (1.0 - eta) * p_dark_up
    p_click_lo = eta + (1.0 - eta) * p_dark_lo
    p_coinc = p_click_up * p_click_lo
    if p_coinc == 0.0:
        return 0.0, 0.0

    # outcome distribution of a recorded coincidence
    upper_outcomes = sorted({c[0] for c, _ in truth_cells}, key=lambda o: o.value)
    lower_outcomes = sorted({c[1] for c, _ in truth_cells}, key=lambda o: o.value)
    p_refute = 0.0
    for (u, lo), p_true in truth_cells:
        # both real
        w = eta * eta * p_true
        if rival.probability(u, lo) == 0.0:
            p_refute += w
        # real upper + dark lower (uniform over lower detectors)
        w_ul = eta * (1.0 - eta) * p_dark_lo * p_true
        for lo_d in lower_outcomes:
            if rival.probability(u, lo_d) == 0.0:
                p_refute += w_ul / len(lower_outcomes)
        # dark upper + real lower
        w_lu = (1.0 - eta) * p_dark_up * eta * p_true
        for u_d in upper_outcomes:
            if rival.probability(u_d, lo) == 0.0:
                p_refute += w_lu / len(upper_outcomes)
    # both dark
    w_dd = (1.0 - eta) ** 2 * p_dark_up * p_dark_lo
    for u_d in upper_outcomes:
        for lo_d in lower_outcomes:
            if rival.probability(u_d, lo_d) == 0.0:
                p_refute += w_dd / (len(upper_outcomes) * len(lower_outcomes))
    return p_coinc, p_refute


def power_sweep(truth: ModelSpec, rival: ModelSpec, config: MeasurementConfig,
                efficiencies: Iterable[float], dark_rates: Iterable[float],
                alpha: float = 1e-6, trials: int = 200,
                max_pairs: int = 10_000_000, seed: int = 0,
                window: float = 1e-9) -> PowerTable:
    """Monte Carlo estimate of emitted pairs needed to reject the rival.

    The data-generating model is ``truth``; for each (efficiency, darkRate)
    grid point the sweep simulates coincidence slots until one refutes the
    rival outright (an outcome the rival gives probability zero), repeated
    over ``trials`` independent streams.  Rivals that share the truth
    model's full support — or grid points that never record a refuting
    coincidence within ``max_pairs`` — report the "unreachable" sentinel.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    truth_pred = declared_distribution(truth, config)
    rival_pred = declared_distribution(rival, config)
    truth_cells = [(cell, p) for cell, p in truth_pred.items() if p > 0.0]
    n_up = 2
    n_lo = 3 if (config.has_feedback or config.lower_basis is Basis.HYBRID_D1) else 2
    root = np.random.SeedSequence(seed)
    grid = [(float(e), float(d)) for e in efficiencies for d in dark_rates]
    streams = root.spawn(len(grid))
    cells: list[PowerCell] = []
    for (eta, dark), stream in zip(grid, streams):
        p_coinc, p_refute = _slot_probabilities(
            truth_cells, rival_pred, (n_up, n_lo), eta, dark, window)
        if p_refute <= 0.0:
            cells.append(PowerCell(eta, dark, False, None, None, None, trials))
            continue
        rng = np.random.default_rng(stream)
        # pairs-to-first-refutation is geometric with success prob p_refute
        draws = rng.geometric(p_refute, size=trials).astype(np.float64)
        capped = draws > max_pairs
        if capped.all():
            cells.append(PowerCell(eta, dark, False, None, None, None, trials))
            continue
        draws[capped] = max_pairs
        med, lo, hi = _median_with_ci(draws)
        if med >= max_pairs:
            cells.append(PowerCell(eta, dark, False, None, None, None, trials))
            continue
        cells.append(PowerCell(eta, dark, True, med, lo, hi, trials))
    return PowerTable(truth, rival, alpha, tuple(cells))
