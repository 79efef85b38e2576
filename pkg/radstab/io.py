"""Result emission: CSV tables, JSON reports, binary dumps and the run manifest.

Every file written through a ``ResultWriter`` is recorded, and the manifest
lists all of them, so an output directory never holds unreferenced files.
CSV floats are written with 17 significant digits, and JSON with sorted keys,
so identical runs give byte-identical files.
"""

import json
import logging
import math
import platform
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
import ruamel.yaml
import scipy

from .models.pipeline import PipelineOutput

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars and arrays, tuples and non-finite floats for JSON."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return "inf" if value > 0 else ("-inf" if value < 0 else "nan")
    return value


def dumps(payload: Any) -> str:
    """Deterministic JSON text."""
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2) + "\n"


def package_versions() -> Dict[str, str]:
    """Versions of the interpreter and the numerical stack."""
    from . import __version__

    return {
        "python": platform.python_version(),
        "radstab": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
        "ruamel.yaml": ruamel.yaml.__version__,
    }


class ResultWriter:
    """Writes artifacts into one output directory and tracks them."""

    def __init__(self, directory):
        """Create the output directory if needed."""
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.artifacts: List[Dict[str, str]] = []

    def _record(self, path: Path, kind: str) -> Path:
        self.artifacts.append({"path": path.name, "kind": kind})
        logger.debug("Wrote %s", path)
        return path

    def write_table(self, name: str, table: pd.DataFrame) -> Path:
        """Write a DataFrame as ``<name>.csv``."""
        path = self.directory / f"{name}.csv"
        table.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        return self._record(path, "csv")

    def write_json(self, name: str, payload: Any) -> Path:
        """Write ``<name>.json`` with sorted keys."""
        path = self.directory / f"{name}.json"
        path.write_text(dumps(payload), encoding="utf-8")
        return self._record(path, "json")

    def write_array(self, name: str, array: np.ndarray, metadata: Dict[str, Any]) -> Path:
        """Write ``<name>.npy`` and its ``<name>.json`` sidecar."""
        path = self.directory / f"{name}.npy"
        np.save(path, np.ascontiguousarray(array))
        self._record(path, "npy")
        sidecar = dict(metadata, dtype=str(array.dtype), file=path.name)
        self.write_json(f"{name}.meta", sidecar)
        return path

    def write_output(self, output: PipelineOutput) -> None:
        """Write every table, report and array of a pipeline result."""
        for name, table in sorted(output.tables.items()):
            self.write_table(name, table)
        for name, report in sorted(output.reports.items()):
            self.write_json(name, report)
        for name, (array, metadata) in sorted(output.arrays.items()):
            self.write_array(name, array, metadata)

    def write_manifest(
        self,
        config: Dict[str, Any],
        seeds: Dict[str, Any],
        wall_time: float,
        summary: Optional[Dict[str, Any]] = None,
        incomplete: bool = False,
        error: Optional[str] = None,
    ) -> Path:
        """Write ``manifest.json`` listing the config echo, versions and all artifacts."""
        manifest = {
            "config": config,
            "versions": package_versions(),
            "seeds": seeds,
            "wall_time_seconds": wall_time,
            "summary": summary or {},
            "incomplete": incomplete,
            "error": error,
            "artifacts": list(self.artifacts),
        }
        path = self.directory / "manifest.json"
        path.write_text(dumps(manifest), encoding="utf-8")
        logger.info("Manifest with %d artifacts written to %s", len(self.artifacts), path)
        return path


def read_manifest(directory) -> Dict[str, Any]:
    """Load ``manifest.json`` from an output directory."""
    return json.loads((Path(directory) / "manifest.json").read_text(encoding="utf-8"))
