from dataclasses import asdict, dataclass, field, fields
from typing import Any, Optional
import inspect
import json

from expnls.nls.collocation import collocation_nodes
from expnls.nls.integrators import StepCountError, StepperConfig, step_count
from expnls.nls.method import MethodFamily, MethodSpec, NodeFamily
from expnls.nls.phi import ContourConfig
from expnls.nls.problems import PROBLEMS
from expnls.nls.spectral import Grid, make_grid

OBSERVERS = ("mass", "energy", "phase_error", "angular_momentum")


class ConfigError(ValueError):
    pass


def _reject_duplicates(pairs: list[tuple[str, Any]]) -> dict:
    out = {}
    for key, value in pairs:
        if key in out:
            raise ConfigError(f"Duplicate key {key!r}")
        out[key] = value
    return out


def _reject_constant(name: str):
    raise ConfigError(f"Non-finite number {name} is not allowed")


def _take(cls, data: Any, where: str) -> dict:
    """Check data is an object whose keys all name fields of cls."""
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be an object")
    names = {f.name for f in fields(cls)}
    for key in data:
        if key not in names:
            raise ConfigError(f"Unknown key {where}.{key}")
    return data


def _build(cls, data: Any, where: str):
    data = _take(cls, data, where)
    try:
        return cls(**data)
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid {where}: {e}") from e


@dataclass(frozen=True)
class AxisConfig:
    x_left: float
    x_right: float
    p: int


@dataclass(frozen=True)
class GridConfig:
    """One axis entry is reused on every axis."""

    dims: int
    axes: tuple[AxisConfig, ...]

    def build(self, workers: Optional[int] = None) -> Grid:
        grid = make_grid(self.dims, [(a.x_left, a.x_right, a.p) for a in self.axes])
        return Grid(axes=grid.axes, workers=workers)


@dataclass(frozen=True)
class ProblemConfig:
    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate_name()
        self.validate_params()

    def validate_name(self):
        if self.name not in PROBLEMS:
            raise ConfigError(
                f"Unknown problem {self.name!r}, expected one of {sorted(PROBLEMS)}"
            )

    def validate_params(self):
        accepted = inspect.signature(PROBLEMS[self.name].builder).parameters
        for key in self.params:
            if key == "grid" or key not in accepted:
                raise ConfigError(f"Unknown key problem.params.{key} for {self.name}")


@dataclass(frozen=True)
class MethodConfig:
    family: str
    stages: Optional[int] = None
    nodes: str = "gauss"
    order: Optional[int] = None

    def to_spec(self) -> MethodSpec:
        try:
            spec = MethodSpec(
                family=MethodFamily(self.family),
                stages=self.stages,
                nodes=NodeFamily(self.nodes),
                order=self.order,
            )
            if spec.stages is not None:
                # stage range depends on the node family
                collocation_nodes(spec.stages, spec.nodes)
            return spec
        except ValueError as e:
            raise ConfigError(f"Invalid method {asdict(self)}: {e}") from e


@dataclass(frozen=True)
class RunConfig:
    """
    A whole experiment: one problem on one grid, any number of methods and steps.

    Attributes:
        T: final time, a multiple of every h.
        h: time steps; run takes exactly one.
        observers: series recorded per step, a subset of OBSERVERS.
        snapshots: times at which 2D densities are dumped, multiples of h.
    """

    problem: ProblemConfig
    grid: GridConfig
    methods: tuple[MethodConfig, ...]
    T: float
    h: tuple[float, ...]
    observers: tuple[str, ...] = ("mass", "energy", "phase_error")
    snapshots: tuple[float, ...] = ()
    stepper: StepperConfig = field(default_factory=StepperConfig)
    contour: ContourConfig = field(default_factory=ContourConfig)
    output_dir: str = "out"

    def __post_init__(self):
        self.validate_grid()
        self.validate_methods()
        self.validate_steps()
        self.validate_observers()
        self.validate_snapshots()

    def validate_grid(self):
        expected = PROBLEMS[self.problem.name].dims
        if self.grid.dims != expected:
            raise ConfigError(
                f"Problem {self.problem.name} needs a {expected}D grid, got grid.dims={self.grid.dims}"
            )

    def validate_methods(self):
        if not self.methods:
            raise ConfigError("methods must list at least one method")
        for method in self.methods:
            method.to_spec()

    def validate_steps(self):
        if not self.h:
            raise ConfigError("h must list at least one time step")
        for h in self.h:
            try:
                step_count(self.T, h)
            except StepCountError as e:
                raise ConfigError(f"Invalid h: {e}") from e

    def validate_observers(self):
        for name in self.observers:
            if name not in OBSERVERS:
                raise ConfigError(f"Unknown observer {name!r}, expected one of {OBSERVERS}")

    def validate_snapshots(self):
        if self.snapshots and self.grid.dims != 2:
            raise ConfigError("snapshots are only written for 2D problems")
        for t in self.snapshots:
            if not 0 <= t <= self.T:
                raise ConfigError(f"Snapshot time {t} lies outside [0, {self.T}]")
            for h in self.h:
                count = round(t / h)
                if abs(count * h - t) > 1e-12 * max(abs(t), h):
                    raise ConfigError(f"Snapshot time {t} is not a multiple of h={h}")

    @property
    def method_specs(self) -> list[MethodSpec]:
        return [m.to_spec() for m in self.methods]

    def as_dict(self) -> dict:
        out = asdict(self)
        out["methods"] = [asdict(m) for m in self.methods]
        out["grid"]["axes"] = [asdict(a) for a in self.grid.axes]
        for key in ("h", "observers", "snapshots"):
            out[key] = list(out[key])
        return out

    def to_json(self) -> str:
        """Canonical serialization: sorted keys, 2-space indent."""
        return json.dumps(self.as_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, data: Any) -> "RunConfig":
        data = dict(_take(cls, data, "config"))
        for required in ("problem", "grid", "methods", "T", "h"):
            if required not in data:
                raise ConfigError(f"Missing key config.{required}")
        grid = _take(GridConfig, data["grid"], "grid")
        if not isinstance(grid.get("axes"), list):
            raise ConfigError("grid.axes must be a list")
        axes = tuple(
            _build(AxisConfig, axis, f"grid.axes[{i}]") for i, axis in enumerate(grid["axes"])
        )
        data["grid"] = _build(GridConfig, {**grid, "axes": axes}, "grid")
        data["problem"] = _build(ProblemConfig, data["problem"], "problem")
        if not isinstance(data["methods"], list):
            raise ConfigError("methods must be a list")
        data["methods"] = tuple(
            _build(MethodConfig, m, f"methods[{i}]") for i, m in enumerate(data["methods"])
        )
        if "stepper" in data:
            data["stepper"] = _build(StepperConfig, data["stepper"], "stepper")
        if "contour" in data:
            data["contour"] = _build(ContourConfig, data["contour"], "contour")
        for key in ("h", "observers", "snapshots"):
            if key in data:
                value = data[key]
                data[key] = tuple(value) if isinstance(value, list) else (value,)
        try:
            return cls(**data)
        except ConfigError:
            raise
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid config: {e}") from e

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(
                text, object_pairs_hook=_reject_duplicates, parse_constant=_reject_constant
            )
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config is not valid JSON: {e}") from e
        return cls.from_dict(data)
