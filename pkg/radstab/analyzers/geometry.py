"""Construction of the mesh, the discrete ordinates and the inflow/outflow partition.

The spatial domain is a rectangle Ω ⊂ ℝ² split into a uniform cell grid. The
velocity set is the annulus v0 ≤ |v| ≤ v1 discretized by a product of an
equispaced angular rule and a radial midpoint rule, with polar weights
ρ Δρ Δθ so that the weights sum to the annulus area exactly. When v0 = v1 the
set degenerates to the circle of radius v0 with weights v0 Δθ.

Example:
    >>> from radstab.analyzers.geometry import Geometry
    >>> from radstab.models.geometry import MeshSpec
    >>> geometry = Geometry()
    >>> mesh = geometry.build_mesh(MeshSpec(extents=(1.0, 1.0), cells_per_axis=(4, 4)))
    >>> vset = geometry.build_velocity_set(1.0, 1.0, n_angles=4, n_speeds=1)
    >>> geometry.min_observation_time(mesh, vset)
    2.0

"""

import logging
import math
from typing import Optional

import numpy as np

from ..exceptions import ConfigurationError, DomainError, ObservationTimeError
from ..models.geometry import (
    BoundaryFace,
    BoundaryPartition,
    BoundarySet,
    MeshSpec,
    PhaseSpace,
    SpatialMesh,
    VelocitySet,
)

logger = logging.getLogger(__name__)

DEFAULT_RELATIVE_TOL = 1e-12


class Geometry:
    """Builders for the discrete phase space Ω × V and its boundary sets."""

    def build_mesh(self, spec: MeshSpec) -> SpatialMesh:
        """Build a uniform rectangular mesh with its boundary faces.

        Faces are numbered left (x = x0, bottom to top), right, bottom
        (left to right), then top.

        Args:
            spec: Origin, extents and cells per axis.

        Returns:
            SpatialMesh with outward unit normals and face areas.

        Raises:
            ConfigurationError: If an extent or a resolution is not positive.

        """
        origin = np.asarray(spec.origin, dtype=float)
        extents = np.asarray(spec.extents, dtype=float)
        cells = tuple(int(c) for c in spec.cells_per_axis)
        if origin.shape != (2,) or extents.shape != (2,) or len(cells) != 2:
            raise ConfigurationError("Mesh origin, extents and resolution need two entries each")
        if np.any(extents <= 0):
            raise ConfigurationError(f"Mesh extents must be positive, got {extents.tolist()}")
        if any(c <= 0 for c in cells) or any(c != r for c, r in zip(cells, spec.cells_per_axis)):
            raise ConfigurationError(
                f"Cells per axis must be positive integers, got {list(spec.cells_per_axis)}"
            )

        nx, ny = cells
        h = extents / np.array(cells, dtype=float)
        x0, y0 = origin
        x1, y1 = origin + extents
        faces = []

        def _add(cell: int, normal, area: float, center, side: str) -> None:
            faces.append(
                BoundaryFace(
                    face_id=len(faces),
                    cell=cell,
                    normal=normal,
                    area=float(area),
                    center=(float(center[0]), float(center[1])),
                    side=side,
                )
            )

        for iy in range(ny):
            _add(0 * ny + iy, (-1.0, 0.0), h[1], (x0, y0 + (iy + 0.5) * h[1]), "left")
        for iy in range(ny):
            _add((nx - 1) * ny + iy, (1.0, 0.0), h[1], (x1, y0 + (iy + 0.5) * h[1]), "right")
        for ix in range(nx):
            _add(ix * ny + 0, (0.0, -1.0), h[0], (x0 + (ix + 0.5) * h[0], y0), "bottom")
        for ix in range(nx):
            _add(ix * ny + ny - 1, (0.0, 1.0), h[0], (x0 + (ix + 0.5) * h[0], y1), "top")

        mesh = SpatialMesh(
            origin=origin,
            extents=extents,
            cells_per_axis=(nx, ny),
            cell_size=h,
            boundary_faces=faces,
        )
        logger.debug("Built %dx%d mesh with %d boundary faces", nx, ny, len(faces))
        return mesh

    def build_velocity_set(
        self, v0: float, v1: float, n_angles: int, n_speeds: int = 1
    ) -> VelocitySet:
        """Build the discrete ordinates on the annulus v0 ≤ |v| ≤ v1.

        Angles are θ_k = 2πk / n_angles, so n_angles = 4 gives the axis
        directions. Speeds are the midpoints of n_speeds equal shells, or the
        single speed v0 when v0 = v1.

        Args:
            v0: Smallest speed, strictly positive.
            v1: Largest speed, v1 ≥ v0.
            n_angles: Number of directions, at least 4.
            n_speeds: Number of radial shells, at least 1.

        Returns:
            VelocitySet whose weights sum to π(v1² - v0²), or 2πv0 when v0 = v1.

        Raises:
            DomainError: If v0 ≤ 0 (the zero velocity must stay outside V̄).
            ConfigurationError: If v0 > v1 or a count is too small.

        """
        if not v0 > 0:
            raise DomainError(
                f"Smallest speed v0 must be positive (0 must lie outside V), got {v0}"
            )
        if v0 > v1:
            raise ConfigurationError(f"Speed range is empty: v0={v0} > v1={v1}")
        if int(n_angles) != n_angles or n_angles < 4:
            raise ConfigurationError(f"n_angles must be an integer ≥ 4, got {n_angles}")
        if int(n_speeds) != n_speeds or n_speeds < 1:
            raise ConfigurationError(f"n_speeds must be an integer ≥ 1, got {n_speeds}")
        n_angles, n_speeds = int(n_angles), int(n_speeds)

        d_theta = 2.0 * math.pi / n_angles
        theta = d_theta * np.arange(n_angles)
        if v0 == v1:
            speeds = np.array([float(v0)])
            shell_measure = np.array([float(v0)])
            n_speeds = 1
        else:
            d_rho = (v1 - v0) / n_speeds
            speeds = v0 + (np.arange(n_speeds) + 0.5) * d_rho
            shell_measure = speeds * d_rho

        rho, th = np.meshgrid(speeds, theta, indexing="ij")
        ordinates = np.column_stack([(rho * np.cos(th)).ravel(), (rho * np.sin(th)).ravel()])
        # Exact zeros on the axes keep tangential pairs exactly tangential.
        ordinates[np.abs(ordinates) < 1e-15 * v1] = 0.0
        weights = np.repeat(shell_measure * d_theta, n_angles)
        return VelocitySet(
            ordinates=ordinates,
            weights=weights,
            v_min_speed=float(v0),
            v_max_speed=float(v1),
            n_angles=n_angles,
            n_speeds=n_speeds,
        )

    def classify_boundary(
        self, mesh: SpatialMesh, vset: VelocitySet, tol: Optional[float] = None
    ) -> BoundaryPartition:
        """Split boundary (face, ordinate) pairs by the sign of ν·v.

        Args:
            mesh: The spatial mesh.
            vset: The velocity set.
            tol: Pairs with |ν·v| < tol are tangential and belong to neither
                side. Defaults to 1e-12 · v1.

        Returns:
            BoundaryPartition with outflow (ν·v > 0) and inflow (ν·v < 0) sets.

        """
        if tol is None:
            tol = DEFAULT_RELATIVE_TOL * vset.v_max_speed
        if tol < 0:
            raise ConfigurationError(f"Tangential tolerance must be nonnegative, got {tol}")
        dots = mesh.face_normals @ vset.ordinates.T  # (n_faces, J)
        faces, ordinates = np.meshgrid(
            np.arange(dots.shape[0]), np.arange(dots.shape[1]), indexing="ij"
        )

        def _select(mask: np.ndarray) -> BoundarySet:
            return BoundarySet(
                faces=faces[mask].astype(int),
                ordinates=ordinates[mask].astype(int),
                nu_dot_v=dots[mask],
            )

        plus = dots > tol
        minus = dots < -tol
        return BoundaryPartition(
            gamma_plus=_select(plus),
            gamma_minus=_select(minus),
            tol=float(tol),
            n_tangential=int(np.count_nonzero(~(plus | minus))),
        )

    def phase_space(
        self, spec: MeshSpec, v0: float, v1: float, n_angles: int, n_speeds: int = 1
    ) -> PhaseSpace:
        """Build mesh, velocity set and partition in one call."""
        mesh = self.build_mesh(spec)
        vset = self.build_velocity_set(v0, v1, n_angles, n_speeds)
        return PhaseSpace(mesh=mesh, vset=vset, partition=self.classify_boundary(mesh, vset))

    def projection_range(self, mesh: SpatialMesh, vset: VelocitySet):
        """Return (min, max) of v·x over corners × ordinates.

        v·x is linear in x, so the rectangle corners give the exact extrema
        for each ordinate.
        """
        projections = mesh.corners @ vset.ordinates.T
        return float(np.min(projections)), float(np.max(projections))

    def min_observation_time(
        self, mesh: SpatialMesh, vset: VelocitySet, beta: Optional[float] = None
    ) -> float:
        """Smallest horizon for which boundary data determines the interior.

        Returns (max v·x - min v·x) / D with D = beta when given and
        min_j |v_j|² otherwise.

        Raises:
            DomainError: If beta is given outside (0, min_j |v_j|²).

        """
        r_min, r_max = self.projection_range(mesh, vset)
        min_speed_sq = vset.min_speed_squared
        if beta is None:
            denominator = min_speed_sq
        else:
            check_beta(beta, min_speed_sq)
            denominator = beta
        return (r_max - r_min) / denominator

    def require_observation_time(
        self, mesh: SpatialMesh, vset: VelocitySet, horizon: float, beta: Optional[float] = None
    ) -> float:
        """Raise ObservationTimeError unless horizon exceeds the minimal time."""
        t_min = self.min_observation_time(mesh, vset, beta)
        if not horizon > t_min:
            which = "beta" if beta is not None else "min |v|²"
            raise ObservationTimeError(
                f"Horizon T={horizon:.6g} must exceed (max v·x - min v·x)/{which} = {t_min:.6g}",
                condition="observation-time",
            )
        return t_min


def check_beta(beta: float, min_speed_sq: float) -> None:
    """Raise DomainError unless 0 < beta < min_j |v_j|²."""
    if not 0 < beta < min_speed_sq:
        raise DomainError(
            f"Weight slope beta={beta} must satisfy 0 < beta < min |v|² = {min_speed_sq:.6g}"
        )
