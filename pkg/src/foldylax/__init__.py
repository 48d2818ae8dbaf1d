"""Acoustic scattering by clouds of small impedance obstacles.

Point-scatterer (Foldy-Lax) far fields with a boundary-integral reference
solver for spheres, scaling-regime diagnostics, and convergence-rate studies.

Imports are lazy (PEP 562) so the command-line entry point can cap BLAS
thread counts before numpy initializes.
"""

from ._version import __version__

_EXPORTS = {
    # geometry
    "RegimeParams": "geometry", "IncidentWave": "geometry",
    "ScattererCloud": "geometry", "CloudStats": "geometry",
    "generate_grid_cloud": "geometry", "cloud_stats": "geometry",
    "layer_count": "geometry",
    # kernels
    "phi": "kernels", "plane_wave": "kernels", "farfield_kernel": "kernels",
    "fibonacci_sphere": "kernels",
    # point-scatterer solver
    "Variant": "foldy", "ScatteringCoefficient": "foldy", "coefficient": "foldy",
    "FoldyLaxSystem": "foldy", "FoldyLaxSolution": "foldy", "FarFieldGrid": "foldy",
    "InvertibilityReport": "foldy", "assemble": "foldy", "solve": "foldy",
    "farfield": "foldy", "invertibility_report": "foldy",
    "charge_bound_check": "foldy",
    # boundary-integral oracle
    "SphereSpectra": "oracle", "sphere_operator_spectra": "oracle",
    "BieSystem": "oracle", "assemble_bie": "oracle", "solve_bie": "oracle",
    "SurfaceDensity": "oracle", "bie_farfield": "oracle",
    "mie_reference": "oracle", "optical_theorem_residual": "oracle",
    # analysis
    "OracleSettings": "analysis", "RateFit": "analysis", "fit_rate": "analysis",
    "farfield_error": "analysis", "convergence_study": "analysis",
    "ConvergenceStudy": "analysis", "oracle_farfield": "analysis",
    "regime_sweep": "analysis", "predicted_slope": "analysis",
    # io
    "save_cloud": "io", "load_cloud": "io",
}

# exceptions are cheap: export them eagerly
from .errors import (CapacityExceeded, CoincidentCenters, CoincidentPoints,  # noqa: E402
                     FoldylaxError, GridMismatch, InfeasibleOracle,
                     MissingRegime, NonUnitDirection, OverlappingSpheres,
                     RegimeViolation, ResonanceGuard, SeriesNotConverged,
                     SingularSystem, SphericalPole, ZeroImpedance)

__all__ = sorted(set(_EXPORTS) | {
    "__version__", "FoldylaxError", "RegimeViolation", "CapacityExceeded",
    "OverlappingSpheres", "CoincidentPoints", "CoincidentCenters",
    "NonUnitDirection", "ZeroImpedance", "SphericalPole", "SingularSystem",
    "MissingRegime", "ResonanceGuard", "SeriesNotConverged", "GridMismatch",
    "InfeasibleOracle",
})


def __getattr__(name):
    try:
        module = _EXPORTS[name]
    except KeyError:
        raise AttributeError(f"module {__name__!r} has no attribute {name!r}") from None
    import importlib
    return getattr(importlib.import_module(f".{module}", __name__), name)


def __dir__():
    return __all__
