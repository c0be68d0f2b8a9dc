"""Measurement configurations: basis choices, feedback wiring, the catalog.

The six cataloged experiments:

  E1  both sides read the path directly
  E2  both sides read the eraser ports
  E3  upper eraser, lower path
  E4  upper eraser, lower hybrid (path-1 absorber D1 always armed)
  E5  upper eraser; an upper E4 click arms D1 for the partner photon
  E6  upper side replaced by the screen; lower side as configured
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

from .errors import ConfigError
from .quantum import Basis, SideOutcome, TemporalOrder

__all__ = [
    "FeedbackEffect",
    "FeedbackRule",
    "MeasurementConfig",
    "ExperimentName",
    "catalog",
]

ERASER_PORTS = (SideOutcome.E3, SideOutcome.E4)


class FeedbackEffect(Enum):
    TURN_ON_D1 = "TurnOnD1"


@dataclass(frozen=True)
class FeedbackRule:
    """Classical wiring: an upper-side outcome toggles the lower apparatus."""

    trigger: SideOutcome
    effect: FeedbackEffect = FeedbackEffect.TURN_ON_D1

    def __post_init__(self) -> None:
        if self.trigger not in ERASER_PORTS:
            raise ConfigError(
                f"feedback trigger must be an eraser-port outcome, got {self.trigger}"
            )

    def resolve(self, upper: SideOutcome, base: Basis) -> Basis:
        """Lower basis implied by wiring given the (detected) upper outcome."""
        if upper == self.trigger:
            return Basis.HYBRID_D1
        return base


@dataclass(frozen=True)
class MeasurementConfig:
    """One experiment's settings for both sides of the pair source."""

    upper_basis: Basis
    lower_basis: Basis
    feedback: Optional[FeedbackRule] = None
    pair_count: int = 100_000
    seed: int = 0
    temporal_order: TemporalOrder = TemporalOrder.UPPER_FIRST
    screen_mode: bool = False

    def __post_init__(self) -> None:
        if self.upper_basis is Basis.HYBRID_D1:
            raise ConfigError("the hybrid absorber sits on the lower side only")
        if self.feedback is not None and self.lower_basis is not Basis.ERASER:
            raise ConfigError(
                "feedback wiring overrides the lower basis per pair and needs "
                f"a plain eraser default, got {self.lower_basis}"
            )
        if self.screen_mode and self.lower_basis is Basis.HYBRID_D1:
            raise ConfigError("screen runs need a plain lower basis")
        if self.screen_mode and self.feedback is not None:
            raise ConfigError("screen runs do not support feedback wiring")
        if self.pair_count < 1:
            raise ConfigError(f"pair_count must be >= 1, got {self.pair_count}")

    def resolved_lower_basis(self, upper: SideOutcome,
                             upper_detected: bool = True) -> Basis:
        """Per-pair lower basis after any feedback wiring has acted.

        A missed upper click never fires the wiring: the toggle is driven by
        the detector's electrical output, not by the photon itself.
        """
        if self.feedback is None or not upper_detected:
            return self.lower_basis
        return self.feedback.resolve(upper, self.lower_basis)

    @property
    def has_feedback(self) -> bool:
        return self.feedback is not None


class ExperimentName(Enum):
    E1 = "E1"
    E2 = "E2"
    E3 = "E3"
    E4 = "E4"
    E5 = "E5"
    E6 = "E6"


_CATALOG = {
    ExperimentName.E1: dict(upper_basis=Basis.WHICH_WAY, lower_basis=Basis.WHICH_WAY),
    ExperimentName.E2: dict(upper_basis=Basis.ERASER, lower_basis=Basis.ERASER),
    ExperimentName.E3: dict(upper_basis=Basis.ERASER, lower_basis=Basis.WHICH_WAY),
    ExperimentName.E4: dict(upper_basis=Basis.ERASER, lower_basis=Basis.HYBRID_D1),
    ExperimentName.E5: dict(
        upper_basis=Basis.ERASER,
        lower_basis=Basis.ERASER,
        feedback=FeedbackRule(SideOutcome.E4),
    ),
    ExperimentName.E6: dict(
        upper_basis=Basis.ERASER,  # placeholder; the screen replaces this side
        lower_basis=Basis.ERASER,
        screen_mode=True,
    ),
}


def catalog(name: ExperimentName | str, pair_count: int = 100_000,
            seed: int = 0, **overrides) -> MeasurementConfig:
    """Stock configuration for one of the cataloged experiments."""
    if isinstance(name, str):
        try:
            name = ExperimentName(name.upper())
        except ValueError:
            raise ConfigError(f"unknown experiment {name!r}") from None
    cfg = MeasurementConfig(pair_count=pair_count, seed=seed, **_CATALOG[name])
    return replace(cfg, **overrides) if overrides else cfg
