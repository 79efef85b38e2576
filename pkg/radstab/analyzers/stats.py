"""Statistical Methods for Stability Ensembles and Refinement Studies.

This module contains the summary statistics used to judge experiment
ensembles (ratio spread, geometric mean, log spread) and the log-log fits
behind the Hölder exponent and the empirical convergence order. Each method
documents its formula, interpretation and a worked example.
"""

import math
from typing import Any, Dict, Sequence

import numpy as np
from scipy import stats as sps

from ..exceptions import InsufficientDataError, ValidationError


class Stats:
    """A collection of statistical methods for numerical experiment analysis.

    This class provides ratio-ensemble summaries, least-squares slopes in
    log-log coordinates and refinement diagnostics. All inputs are plain
    sequences of floats so the methods serve every experiment family.
    """

    def ratio_spread(self, ratios: Sequence[float]) -> Dict[str, float]:
        """Summarize the ratios ρ of an ensemble.

        A both-sided estimate C⁻¹ ≤ ρ ≤ C holds across an ensemble exactly when
        the spread ρ_max/ρ_min is at most C². The geometric mean is the natural
        center of ratios, and the log spread is the same quantity on an
        additive scale.

        Mathematical Formula:
            spread = ρ_max / ρ_min
            geometric_mean = exp(mean(log ρ))
            log_spread = log(ρ_max) - log(ρ_min)

        Args:
            ratios (Sequence[float]): Finite positive ratios

        Returns:
            Dict[str, float]: Dictionary containing:
                - 'rho_min': Smallest ratio
                - 'rho_max': Largest ratio
                - 'spread': rho_max / rho_min (≥ 1)
                - 'geometric_mean': Geometric mean of the ratios
                - 'log_spread': Natural log of the spread

        Raises:
            InsufficientDataError: If no ratios are given
            ValidationError: If a ratio is not finite and positive

        Example:
            >>> stats = Stats()
            >>> summary = stats.ratio_spread([2.0, 4.0, 8.0])
            >>> print(summary["spread"], summary["geometric_mean"])  # Output: 4.0 4.0

        """
        values = np.asarray(ratios, dtype=float)
        if values.size == 0:
            raise InsufficientDataError("No ratios to summarize")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise ValidationError("Ratios must be finite and positive")
        logs = np.log(values)
        rho_min, rho_max = float(values.min()), float(values.max())
        return {
            "rho_min": rho_min,
            "rho_max": rho_max,
            "spread": rho_max / rho_min,
            "geometric_mean": float(np.exp(logs.mean())),
            "log_spread": float(logs.max() - logs.min()),
        }

    def log_log_fit(self, x: Sequence[float], y: Sequence[float]) -> Dict[str, float]:
        """Least-squares line through (log x, log y).

        Mathematical Formula:
            log y ≈ slope · log x + intercept

        Args:
            x (Sequence[float]): Positive abscissae, at least two distinct values
            y (Sequence[float]): Positive ordinates

        Returns:
            Dict[str, float]: Dictionary containing:
                - 'slope': Fitted exponent
                - 'intercept': Fitted log-constant
                - 'residual': Root-mean-square residual in log space
                - 'stderr': Standard error of the slope
                - 'r_squared': Coefficient of determination

        Example:
            >>> stats = Stats()
            >>> fit = stats.log_log_fit([1.0, 10.0, 100.0], [3.0, 30.0, 300.0])
            >>> print(round(fit["slope"], 6))  # Output: 1.0

        """
        lx = np.log(self._positive(x, "x"))
        ly = np.log(self._positive(y, "y"))
        if lx.size != ly.size:
            raise ValidationError(f"Fit needs paired data, got {lx.size} and {ly.size} values")
        if lx.size < 2 or np.ptp(lx) == 0:
            raise InsufficientDataError("Fit needs at least two distinct abscissae")
        fit = sps.linregress(lx, ly)
        predicted = fit.intercept + fit.slope * lx
        residual = float(np.sqrt(np.mean((ly - predicted) ** 2)))
        stderr = float(fit.stderr) if np.isfinite(fit.stderr) else 0.0
        return {
            "slope": float(fit.slope),
            "intercept": float(fit.intercept),
            "residual": residual,
            "stderr": stderr,
            "r_squared": float(fit.rvalue**2) if np.isfinite(fit.rvalue) else 1.0,
        }

    def convergence_order(
        self, mesh_sizes: Sequence[float], errors: Sequence[float]
    ) -> Dict[str, Any]:
        """Empirical order p of errors behaving like C·h^p.

        Theory:
            - The global slope comes from a log-log fit over all resolutions
            - Pairwise orders log(e_i/e_{i+1}) / log(h_i/h_{i+1}) expose
              pre-asymptotic behaviour on coarse meshes

        Args:
            mesh_sizes (Sequence[float]): Cell sizes h, one per resolution
            errors (Sequence[float]): Error norms, one per resolution

        Returns:
            Dict[str, Any]: Dictionary containing:
                - 'order': Fitted slope
                - 'pairwise': List of orders between consecutive resolutions
                - 'residual': Root-mean-square residual of the fit

        Example:
            >>> stats = Stats()
            >>> result = stats.convergence_order([0.1, 0.05, 0.025], [0.4, 0.2, 0.1])
            >>> print(round(result["order"], 6))  # Output: 1.0

        """
        h = self._positive(mesh_sizes, "mesh_sizes")
        e = self._positive(errors, "errors")
        fit = self.log_log_fit(h, e)
        pairwise = [
            math.log(e[i] / e[i + 1]) / math.log(h[i] / h[i + 1]) for i in range(h.size - 1)
        ]
        return {"order": fit["slope"], "pairwise": pairwise, "residual": fit["residual"]}

    def decades(self, values: Sequence[float]) -> float:
        """Number of decades log10(max/min) spanned by positive values."""
        data = self._positive(values, "values")
        return float(math.log10(data.max() / data.min()))

    @staticmethod
    def _positive(values: Sequence[float], name: str) -> np.ndarray:
        data = np.asarray(values, dtype=float)
        if not np.all(np.isfinite(data)) or np.any(data <= 0):
            raise ValidationError(f"{name} must be finite and positive")
        return data
