"""Quadrature configuration shared by the norm and level-set engines."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import DomainError


@dataclass(frozen=True)
class QuadratureConfig:
    """Node counts and stopping rules.

    ``tolerance`` is interpreted by each consumer: circle means and radial
    rules refine until successive estimates differ by less than it (relative
    at magnitude >= 1); the level-set engine treats it as the absolute
    hyperbolic-measure error budget per level (scaled up for large measures).
    """

    radial_nodes: int = 64
    angular_nodes: int = 256
    tolerance: float = 1e-9
    max_refinements: int = 10

    def __post_init__(self):
        if self.tolerance <= 0:
            raise DomainError("tolerance must be positive")
        if self.radial_nodes < 8 or self.angular_nodes < 8:
            raise DomainError("node counts must be at least 8")

    def with_tolerance(self, tolerance: float) -> "QuadratureConfig":
        return replace(self, tolerance=tolerance)


DEFAULT_CONFIG = QuadratureConfig()
