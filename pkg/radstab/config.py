"""Run configuration: a strict YAML schema mapped onto nested dataclasses.

Every section of the file corresponds to one dataclass below; unknown keys at
any level are rejected with the dotted key in the message, and every numeric
value is checked against the preconditions of the module that consumes it
before any solve starts.

Example configuration::

    subcommand: stability-ensemble
    mesh: {extents: [1.0, 1.0], cells: [32, 32]}
    velocity: {v0: 1.0, v1: 1.0, n_angles: 8}
    coefficients:
      sigma_a: {kind: constant, params: {value: 0.2}}
      sigma_s: {kind: constant, params: {value: 0.1}}
      phase: {kind: isotropic}
    time: {horizon_margin: 1.1, cfl_factor: 0.9}
    carleman: {beta: 0.5}
    ensemble: {kind: linearized, count: 20, amplitude: 0.1, seed: 7}

"""

import logging
from dataclasses import MISSING, dataclass, field, fields, is_dataclass, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union, get_args, get_origin, get_type_hints

import numpy as np
from ruamel.yaml import YAML
from ruamel.yaml.error import YAMLError

from .analyzers.geometry import Geometry, check_beta
from .analyzers.presets import Presets
from .analyzers.transport import COLLISION_UPDATES
from .exceptions import ConfigurationError, DomainError, HypothesisError
from .models.geometry import MeshSpec

logger = logging.getLogger(__name__)

SUBCOMMANDS = (
    "forward",
    "linearized",
    "carleman-check",
    "energy-check",
    "stability-ensemble",
    "holder-sweep",
)
PHASE_KINDS = ("isotropic", "von_mises")
INFLOW_MODES = ("initial", "zero", "constant")
ENSEMBLE_KINDS = ("linearized", "sigma_t", "sigma_s")
HOLDER_PROBLEMS = ("linearized", "sigma_t")


@dataclass
class FieldSpec:
    """A preset name plus its parameters (see ``Presets``)."""

    kind: str = "constant"
    params: Dict[str, Any] = field(default_factory=dict)


@dataclass
class MeshConfig:
    """Rectangle [origin, origin + extents] split into cells[0] × cells[1] cells."""

    origin: Tuple[float, float] = (0.0, 0.0)
    extents: Tuple[float, float] = (1.0, 1.0)
    cells: Tuple[int, int] = (16, 16)


@dataclass
class VelocityConfig:
    """Annulus v0 ≤ |v| ≤ v1 with n_angles × n_speeds ordinates."""

    v0: float = 1.0
    v1: float = 1.0
    n_angles: int = 8
    n_speeds: int = 1


@dataclass
class PhaseConfig:
    """Scattering kernel: ``isotropic`` or ``von_mises`` with a concentration κ ≥ 0."""

    kind: str = "isotropic"
    concentration: float = 0.0


@dataclass
class CoefficientsConfig:
    """Absorption, scattering and the phase kernel."""

    sigma_a: FieldSpec = field(default_factory=lambda: FieldSpec("constant", {"value": 0.2}))
    sigma_s: FieldSpec = field(default_factory=lambda: FieldSpec("constant", {"value": 0.1}))
    phase: PhaseConfig = field(default_factory=PhaseConfig)


@dataclass
class InflowConfig:
    """Inflow data: the Γ- trace of the initial data, zero, or a constant."""

    mode: str = "initial"
    value: float = 0.0


@dataclass
class SourceConfig:
    """Unknown source f and its known factor R for the linearized problem."""

    f: FieldSpec = field(
        default_factory=lambda: FieldSpec("gaussian", {"amplitude": 1.0, "width": 0.1})
    )
    factor: FieldSpec = field(default_factory=lambda: FieldSpec("constant", {"value": 1.0}))


@dataclass
class TimeConfig:
    """Horizon and time step.

    A missing horizon is ``horizon_margin`` times the minimal observation
    time; a missing dt is the largest step with Courant number cfl_factor.
    """

    horizon: Optional[float] = None
    horizon_margin: float = 1.1
    dt: Optional[float] = None
    cfl_factor: float = 0.9
    collision: str = "exponential"


@dataclass
class CarlemanSection:
    """Weight slope, parameter range and the number of source runs checked."""

    beta: float = 0.5
    s_range: Optional[Tuple[float, float]] = None
    n_s: int = 8
    runs: int = 5


@dataclass
class EnsembleConfig:
    """Random-perturbation ensemble and its spread threshold."""

    kind: str = "linearized"
    count: int = 20
    amplitude: float = 0.1
    seed: int = 0
    threads: int = 1
    threshold: float = 50.0
    side: str = "plus"
    weighted: bool = True
    hold_sigma_t: bool = True


@dataclass
class HolderConfig:
    """Amplitude sweep for the Hölder exponent fit."""

    problem: str = "linearized"
    amplitudes: Tuple[float, ...] = (0.0005, 0.001, 0.003, 0.01, 0.03, 0.1)


@dataclass
class AdmissibilityConfig:
    """Bound M of the admissible class; None skips the reports."""

    M: Optional[float] = None


@dataclass
class OutputConfig:
    """Output directory and optional binary field dumps."""

    directory: str = "radstab-out"
    dump_fields: bool = False


@dataclass
class RunConfig:
    """A complete, validated run description."""

    subcommand: str = "forward"
    mesh: MeshConfig = field(default_factory=MeshConfig)
    velocity: VelocityConfig = field(default_factory=VelocityConfig)
    coefficients: CoefficientsConfig = field(default_factory=CoefficientsConfig)
    initial: FieldSpec = field(default_factory=lambda: FieldSpec("constant", {"value": 1.0}))
    inflow: InflowConfig = field(default_factory=InflowConfig)
    source: SourceConfig = field(default_factory=SourceConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    carleman: CarlemanSection = field(default_factory=CarlemanSection)
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    holder: HolderConfig = field(default_factory=HolderConfig)
    admissibility: AdmissibilityConfig = field(default_factory=AdmissibilityConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self) -> Dict[str, Any]:
        """Plain nested dictionary, suitable for a JSON echo."""
        return _plain(self)


def _plain(value: Any) -> Any:
    if is_dataclass(value):
        return {f.name: _plain(getattr(value, f.name)) for f in fields(value)}
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def _coerce(value: Any, hint: Any, key: str) -> Any:
    """Convert a YAML scalar or sequence to the annotated type."""
    origin = get_origin(hint)
    if origin is Union:
        args = [a for a in get_args(hint) if a is not type(None)]
        return None if value is None else _coerce(value, args[0], key)
    if value is None:
        raise ConfigurationError(f"{key} must not be empty")
    if is_dataclass(hint):
        return _build(hint, value, key)
    if origin is tuple:
        if not isinstance(value, (list, tuple)):
            raise ConfigurationError(f"{key} must be a list, got {value!r}")
        args = get_args(hint)
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(_coerce(v, args[0], f"{key}[{i}]") for i, v in enumerate(value))
        if len(value) != len(args):
            raise ConfigurationError(f"{key} needs {len(args)} entries, got {len(value)}")
        return tuple(_coerce(v, a, f"{key}[{i}]") for i, (v, a) in enumerate(zip(value, args)))
    if origin is dict:
        if not isinstance(value, dict):
            raise ConfigurationError(f"{key} must be a mapping, got {value!r}")
        return dict(value)
    if hint is bool:
        if not isinstance(value, bool):
            raise ConfigurationError(f"{key} must be true or false, got {value!r}")
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigurationError(f"{key} must be an integer, got {value!r}")
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(f"{key} must be a number, got {value!r}")
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            raise ConfigurationError(f"{key} must be a string, got {value!r}")
        return value
    return value


def _build(cls, data: Any, prefix: str = ""):
    """Instantiate a config dataclass from a mapping, rejecting unknown keys."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"{prefix or 'config'} must be a mapping, got {data!r}")
    hints = get_type_hints(cls)
    names = {f.name for f in fields(cls)}
    for key in data:
        if key not in names:
            dotted = f"{prefix}.{key}" if prefix else str(key)
            raise ConfigurationError(f"Unknown configuration key '{dotted}'")
    kwargs = {}
    for f in fields(cls):
        if f.name in data:
            dotted = f"{prefix}.{f.name}" if prefix else f.name
            kwargs[f.name] = _coerce(data[f.name], hints[f.name], dotted)
        elif f.default is MISSING and f.default_factory is MISSING:
            raise ConfigurationError(f"Missing configuration key '{prefix}.{f.name}'")
    return cls(**kwargs)


def load_yaml(path: Union[str, Path]) -> Dict[str, Any]:
    """Read a YAML mapping with the safe loader."""
    yaml = YAML(typ="safe")
    source = Path(path)
    if not source.is_file():
        raise ConfigurationError(f"Configuration file {source} does not exist")
    try:
        with source.open("r", encoding="utf-8") as fh:
            data = yaml.load(fh)
    except YAMLError as exc:
        raise ConfigurationError(f"Cannot parse {source}: {exc}") from exc
    return data or {}


def parse_config(
    source: Union[str, Path, Dict[str, Any]],
    subcommand: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> RunConfig:
    """Load, build and validate a run configuration.

    Args:
        source: Path of a YAML file or an already-loaded mapping.
        subcommand: Overrides the file's ``subcommand``.
        overrides: Dotted keys (e.g. ``ensemble.seed``) set after loading.

    Returns:
        Fully validated RunConfig with defaults filled in.

    Raises:
        ConfigurationError: On parse failures, unknown keys or invalid values.
        HypothesisError: If a hypothesis the subcommand relies on fails.

    """
    data = dict(source) if isinstance(source, dict) else load_yaml(source)
    if subcommand is not None:
        data["subcommand"] = subcommand
    config = _build(RunConfig, data)
    for dotted, value in (overrides or {}).items():
        if value is not None:
            config = _set_dotted(config, dotted, value)
    validate_config(config)
    logger.debug("Parsed %s configuration", config.subcommand)
    return config


def _set_dotted(config: RunConfig, dotted: str, value: Any) -> RunConfig:
    section, _, name = dotted.partition(".")
    current = getattr(config, section, None)
    if current is None or not hasattr(current, name):
        raise ConfigurationError(f"Unknown configuration key '{dotted}'")
    hint = get_type_hints(type(current))[name]
    updated = replace(current, **{name: _coerce(value, hint, dotted)})
    return replace(config, **{section: updated})


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigurationError(message)


def validate_config(config: RunConfig) -> None:
    """Check every value against the preconditions of the module consuming it."""
    _require(
        config.subcommand in SUBCOMMANDS,
        f"subcommand must be one of {SUBCOMMANDS}, got '{config.subcommand}'",
    )
    velocity, time = config.velocity, config.time
    _require(velocity.v0 <= velocity.v1, f"velocity.v0={velocity.v0} exceeds v1={velocity.v1}")
    _require(
        0 < time.cfl_factor <= 1, f"time.cfl_factor must lie in (0, 1], got {time.cfl_factor}"
    )
    _require(
        time.collision in COLLISION_UPDATES,
        f"time.collision must be one of {COLLISION_UPDATES}, got '{time.collision}'",
    )
    _require(time.horizon is None or time.horizon > 0, "time.horizon must be positive")
    _require(time.dt is None or time.dt > 0, "time.dt must be positive")
    _require(time.horizon_margin > 1, "time.horizon_margin must exceed 1")
    phase = config.coefficients.phase
    _require(phase.kind in PHASE_KINDS, f"coefficients.phase.kind must be one of {PHASE_KINDS}")
    _require(phase.concentration >= 0, "coefficients.phase.concentration must be nonnegative")
    _require(config.inflow.mode in INFLOW_MODES, f"inflow.mode must be one of {INFLOW_MODES}")
    ensemble = config.ensemble
    _require(ensemble.kind in ENSEMBLE_KINDS, f"ensemble.kind must be one of {ENSEMBLE_KINDS}")
    _require(ensemble.count >= 0, "ensemble.count must be nonnegative")
    _require(ensemble.amplitude > 0, "ensemble.amplitude must be positive")
    _require(ensemble.threads >= 1, "ensemble.threads must be at least 1")
    _require(ensemble.threshold >= 1, "ensemble.threshold must be at least 1")
    _require(ensemble.side in ("plus", "full"), "ensemble.side must be 'plus' or 'full'")
    _require(
        not (ensemble.side == "full" and ensemble.weighted),
        "ensemble.weighted requires ensemble.side 'plus' (ν·v < 0 on the inflow side)",
    )
    holder = config.holder
    _require(holder.problem in HOLDER_PROBLEMS, f"holder.problem must be one of {HOLDER_PROBLEMS}")
    _require(all(a > 0 for a in holder.amplitudes), "holder.amplitudes must be positive")
    _require(
        len(set(holder.amplitudes)) >= 4
        and np.log10(max(holder.amplitudes) / min(holder.amplitudes)) > 2,
        "holder.amplitudes need four distinct values spanning more than two decades",
    )
    carleman = config.carleman
    _require(carleman.n_s >= 2, "carleman.n_s must be at least 2")
    _require(carleman.runs >= 1, "carleman.runs must be at least 1")
    _require(
        config.admissibility.M is None or config.admissibility.M > 0,
        "admissibility.M must be positive",
    )

    geometry = Geometry()
    try:
        mesh = geometry.build_mesh(
            MeshSpec(config.mesh.origin, config.mesh.extents, config.mesh.cells)
        )
        vset = geometry.build_velocity_set(
            velocity.v0, velocity.v1, velocity.n_angles, velocity.n_speeds
        )
    except DomainError as exc:
        raise ConfigurationError(f"velocity: {exc}") from exc
    try:
        check_beta(carleman.beta, vset.min_speed_squared)
    except DomainError as exc:
        raise ConfigurationError(
            f"carleman.beta={carleman.beta} violates the beta-range condition: {exc}"
        ) from exc

    uses_beta = uses_weight_slope(config)
    if time.horizon is not None and config.subcommand != "forward":
        geometry.require_observation_time(
            mesh, vset, time.horizon, carleman.beta if uses_beta else None
        )

    if config.subcommand in ("linearized", "stability-ensemble", "holder-sweep"):
        phase_space = geometry.phase_space(
            MeshSpec(config.mesh.origin, config.mesh.extents, config.mesh.cells),
            velocity.v0,
            velocity.v1,
            velocity.n_angles,
            velocity.n_speeds,
        )
        presets = Presets()
        if config.subcommand == "linearized" or problem_kind(config) == "linearized":
            factor = presets.generate(
                phase_space, config.source.factor.kind, config.source.factor.params
            )
            if np.any(factor <= 0):
                raise HypothesisError(
                    "source.factor violates the positive-source-factor condition "
                    f"R(x, v, 0) > 0 on Ω × V (minimum {np.min(factor):.3g})",
                    condition="positive-source-factor",
                )
        else:
            initial = presets.generate(phase_space, config.initial.kind, config.initial.params)
            if np.any(initial <= 0):
                raise HypothesisError(
                    "initial violates the positive-initial-data condition "
                    f"a(x, v) > 0 on Ω × V (minimum {np.min(initial):.3g})",
                    condition="positive-initial-data",
                )


def problem_kind(config: RunConfig) -> str:
    """The experiment family a stability-ensemble or holder-sweep run perturbs."""
    if config.subcommand == "holder-sweep":
        return config.holder.problem
    return config.ensemble.kind


def uses_weight_slope(config: RunConfig) -> bool:
    """True when the observation time is measured with beta instead of min |v|²."""
    return config.subcommand in ("linearized", "carleman-check") or (
        config.subcommand in ("stability-ensemble", "holder-sweep")
        and problem_kind(config) == "linearized"
    )
