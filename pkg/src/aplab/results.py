"""Run outputs shared by the time-stepping drivers and the experiment runner."""

from __future__ import annotations

from dataclasses import dataclass, field

from .grid import Field2D

__all__ = ["StepRecord", "RunResult"]


@dataclass
class StepRecord:
    """Per-step diagnostics: discrete mass and solver outcome."""

    step: int
    t: float
    mass: float
    residual_norm: float = 0.0
    iterations: int = 0


@dataclass
class RunResult:
    """Snapshots, per-step diagnostics, error metrics, manifest metadata.

    ``errors`` entries are filled by the experiment layer (they require a
    reference solution); the stepping drivers leave the list empty.
    """

    snapshots: list[tuple[float, Field2D]] = field(default_factory=list)
    diagnostics: list[StepRecord] = field(default_factory=list)
    errors: list = field(default_factory=list)
    manifest: dict = field(default_factory=dict)

    def final_field(self) -> Field2D:
        if not self.snapshots:
            raise ValueError("run recorded no snapshots")
        return self.snapshots[-1][1]
