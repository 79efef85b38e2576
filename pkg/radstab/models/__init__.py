"""Models package for radstab data structures."""

# This package contains the records passed between analyzers:
# grids, coefficient fields, solutions and reports

from .carleman import CarlemanConfig, EstimatePoint, EstimateReport
from .coefficients import (
    AdmissibilityBounds,
    AdmissibilityReport,
    CoefficientField,
    PhaseKernel,
    SourceFactor,
)
from .energy import EnergyTrace, IdentityResidual, InequalityReport
from .geometry import (
    BoundaryFace,
    BoundaryPartition,
    BoundarySet,
    MeshSpec,
    PhaseSpace,
    SpatialMesh,
    VelocitySet,
)
from .pipeline import PipelineOutput, RunSetup
from .stability import (
    EnsembleSummary,
    HolderFit,
    MeasurementTrace,
    StabilityOptions,
    StabilityReport,
)
from .transport import AngularDensityField, ForwardOptions, ProblemData

__all__ = [
    # Geometry models
    "MeshSpec",
    "SpatialMesh",
    "BoundaryFace",
    "VelocitySet",
    "BoundarySet",
    "BoundaryPartition",
    "PhaseSpace",
    # Coefficient models
    "CoefficientField",
    "PhaseKernel",
    "SourceFactor",
    "AdmissibilityBounds",
    "AdmissibilityReport",
    # Transport models
    "ProblemData",
    "ForwardOptions",
    "AngularDensityField",
    # Energy models
    "EnergyTrace",
    "InequalityReport",
    "IdentityResidual",
    # Weighted-estimate models
    "CarlemanConfig",
    "EstimatePoint",
    "EstimateReport",
    # Stability models
    "MeasurementTrace",
    "StabilityOptions",
    "StabilityReport",
    "HolderFit",
    "EnsembleSummary",
    # Pipeline models
    "RunSetup",
    "PipelineOutput",
]
