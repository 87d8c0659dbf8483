"""Safe basins of the forced escape-from-a-cubic-well problem.

Slow-flow (isolated-resonance) analysis of the safe basins, their erosion
profiles and the phase-invariant "true" safe basin, cross-validated by a
brute-force escape simulator.
"""

from wellescape.slowflow import (
    CylinderPoint,
    PhasePoint,
    SystemParams,
    WellGeometry,
)

__version__ = "0.1.0"

__all__ = [
    "CylinderPoint",
    "PhasePoint",
    "SystemParams",
    "WellGeometry",
    "__version__",
]
