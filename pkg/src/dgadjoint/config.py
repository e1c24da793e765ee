"""Run configuration: flat ``section.key = value`` text files."""
from __future__ import annotations

from dataclasses import dataclass, field, fields

from .basis import QUAD_MODES
from .mesh import BOUNDARY_KINDS
from .models import CONTINUOUS, ELEMENTWISE, FORMS, MODEL_KINDS
from .objective import CostSpec
from .problems import DIRECTION_PRESETS, PULSE_WIDTH, Problem, canonical_problem
from .timestep import STORAGE_POLICIES


class ConfigError(ValueError):
    """Invalid configuration; ``key`` is the dotted path of the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.replace(",", " ").split())


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(",", " ").split())


def _optional_int(text: str):
    return None if text.strip().lower() in ("", "auto", "none") else int(text)


@dataclass
class RunConfig:
    model_kind: str = "advection"
    model_amplitude: float = 0.2
    model_rho: float = 1.2
    model_c_layout: str = CONTINUOUS
    model_form: str = "strong"
    model_pulse_width: float = PULSE_WIDTH
    mesh_x_left: float = 0.0
    mesh_x_right: float = 1.0
    mesh_K: int = 8
    mesh_boundary: str | None = None
    basis_N: int = 3
    basis_quadrature: str = "collocation"
    time_T: float = 1.0
    time_n_steps: int | None = None
    time_safety: float = 0.5
    cost_weight: float = 1.0
    cost_terminal_weight: float = 0.0
    cost_boundary_weight: float = 0.0
    cost_beta: float = 0.0
    storage_policy: str = "store-all"
    storage_interval: int | None = None
    direction_preset: str = "smooth"
    direction_index: int | None = None
    verify_epsilons: tuple[float, ...] = tuple(10.0 ** -k for k in range(2, 9))
    verify_pairs: int = 20
    convergence_orders: tuple[int, ...] = (1, 2, 3)
    convergence_levels: tuple[int, ...] = (8, 16, 32)
    output_dir: str = "output"
    seed: int = 0
    source: str = field(default="<defaults>", compare=False)

    _parsers = {
        "time_n_steps": _optional_int, "storage_interval": _optional_int, "direction_index": _optional_int,
        "mesh_boundary": lambda s: None if s.strip().lower() in ("", "auto", "none") else s.strip(),
        "verify_epsilons": _floats, "convergence_orders": _ints, "convergence_levels": _ints,
    }

    @staticmethod
    def key_of(attr: str) -> str:
        return attr if "_" not in attr or attr == "seed" else attr.replace("_", ".", 1)

    @classmethod
    def keys(cls) -> dict[str, str]:
        """Dotted key -> attribute name."""
        return {cls.key_of(f.name): f.name for f in fields(cls) if f.name != "source"}

    def resolved_lines(self) -> list[str]:
        return [f"{k} = {_format(getattr(self, a))}" for k, a in self.keys().items()]

    def validate(self) -> "RunConfig":
        def need(ok, attr, msg):
            if not ok:
                raise ConfigError(self.key_of(attr), msg)

        need(self.model_kind in MODEL_KINDS, "model_kind", f"expected one of {MODEL_KINDS}")
        need(self.model_c_layout in (CONTINUOUS, ELEMENTWISE), "model_c_layout",
             f"expected {CONTINUOUS!r} or {ELEMENTWISE!r}")
        need(self.model_form in FORMS, "model_form", f"expected one of {FORMS}")
        need(self.model_rho > 0, "model_rho", "must be positive")
        need(0 <= self.model_amplitude < 1, "model_amplitude", "must lie in [0, 1) to keep coefficients positive")
        need(self.model_pulse_width > 0, "model_pulse_width", "must be positive")
        need(self.mesh_x_right > self.mesh_x_left, "mesh_x_right", "must exceed mesh.x_left")
        need(self.mesh_K >= 1, "mesh_K", "must be a positive integer")
        need(self.mesh_boundary is None or self.mesh_boundary in BOUNDARY_KINDS, "mesh_boundary",
             f"expected one of {BOUNDARY_KINDS}")
        need(self.basis_N >= 1, "basis_N", "must be a positive integer")
        need(self.basis_quadrature in QUAD_MODES, "basis_quadrature", f"expected one of {QUAD_MODES}")
        need(self.time_T > 0, "time_T", "must be positive")
        need(self.time_n_steps is None or self.time_n_steps >= 1, "time_n_steps", "must be positive or auto")
        need(self.time_safety > 0, "time_safety", "must be positive")
        for attr in ("cost_weight", "cost_terminal_weight", "cost_boundary_weight", "cost_beta"):
            need(getattr(self, attr) >= 0, attr, "must be non-negative")
        need(self.storage_policy in STORAGE_POLICIES, "storage_policy", f"expected one of {STORAGE_POLICIES}")
        need(self.storage_interval is None or self.storage_interval >= 1, "storage_interval",
             "must be positive or auto")
        need(self.direction_preset in DIRECTION_PRESETS, "direction_preset", f"expected one of {DIRECTION_PRESETS}")
        eps = self.verify_epsilons
        need(len(eps) >= 2 and all(e > 0 for e in eps) and all(b < a for a, b in zip(eps, eps[1:])),
             "verify_epsilons", "need at least two positive, strictly decreasing values")
        need(self.verify_pairs >= 1, "verify_pairs", "must be positive")
        need(len(self.convergence_orders) >= 1 and min(self.convergence_orders) >= 1, "convergence_orders",
             "need positive orders")
        lv = self.convergence_levels
        need(len(lv) >= 2 and min(lv) >= 1 and all(b > a for a, b in zip(lv, lv[1:])), "convergence_levels",
             "need at least two increasing element counts")
        return self

    def cost(self) -> CostSpec:
        return CostSpec(weight=self.cost_weight, terminal_weight=self.cost_terminal_weight,
                        boundary_weight=self.cost_boundary_weight, beta=self.cost_beta)

    def problem(self, K: int | None = None) -> Problem:
        try:
            prob = canonical_problem(
                self.model_kind, K=K or self.mesh_K, order=self.basis_N, quad_mode=self.basis_quadrature,
                T=self.time_T, n_steps=self.time_n_steps, c_layout=self.model_c_layout, form=self.model_form,
                cost=self.cost(), safety=self.time_safety, boundary_kind=self.mesh_boundary,
                domain=(self.mesh_x_left, self.mesh_x_right), amplitude=self.model_amplitude,
                pulse_width=self.model_pulse_width, rho=self.model_rho)
            prob.cost.validate(prob.spec, prob.n_steps)
        except ValueError as exc:
            raise ConfigError("model", str(exc)) from exc
        return prob


def _format(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, tuple):
        return ", ".join(repr(v) for v in value)
    return str(value)


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    keys = RunConfig.keys()
    defaults = RunConfig()
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {raw.strip()!r}")
        key, _, value = (s.strip() for s in line.partition("="))
        if key not in keys:
            raise ConfigError(key, "unknown key")
        attr = keys[key]
        parser = RunConfig._parsers.get(attr) or _scalar_parser(getattr(defaults, attr))
        try:
            values[attr] = parser(value)
        except ValueError as exc:
            raise ConfigError(key, f"cannot parse {value!r}: {exc}") from exc
    return RunConfig(source=source, **values).validate()


def _scalar_parser(default):
    if isinstance(default, bool):
        return lambda s: s.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int
    if isinstance(default, float):
        return float
    return str


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig().validate()
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from exc
    return parse_config(text, source=str(path))
