"""Experiment configuration: a flat dotted-key text format.

One `key = value` pair per line, `#` comments, blank lines ignored.  Unknown
keys are hard errors, as are duplicates; missing keys fall back to documented
defaults where a default exists.  Parse errors carry line numbers and
validation errors name the offending field.

Example::

    model.gamma = 1.5
    model.chi = 0.5
    domain.kind = radial
    domain.radius = 1
    domain.n = 3
    grid.shape = 200
    initial.v0.kind = constant
    initial.v0.value = 0.5
    solver.t_end = 20
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import (
    Constant,
    CosineBump,
    Descriptor,
    DomainKind,
    DomainSpec,
    GaussianBump,
    ModelParams,
)
from .solver import AdvectionScheme, SolverConfig


class ConfigError(ValueError):
    """Malformed or invalid configuration document."""


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelParams
    domain: DomainSpec
    grid_shape: tuple[int, ...]
    u0_spec: Descriptor
    v0_spec: Descriptor
    solver: SolverConfig
    monitor_p: float = 2.0
    interp_q: float | None = None
    c_gn: float = 1.0
    output_dir: str = "out"
    emit_svg: bool = False

    def __post_init__(self) -> None:
        if self.monitor_p <= 1.0:
            raise ConfigError("monitor.p must exceed 1")
        if self.c_gn <= 0.0:
            raise ConfigError("conditions.c_gn must be positive")


_KNOWN_KEYS = {
    "model.chi", "model.lambda", "model.mu", "model.c", "model.gamma",
    "model.n",
    "domain.kind", "domain.length", "domain.lengths", "domain.radius",
    "domain.n",
    "grid.shape",
    "initial.u0.kind", "initial.u0.value", "initial.u0.amplitude",
    "initial.u0.baseline", "initial.u0.center", "initial.u0.width",
    "initial.v0.kind", "initial.v0.value", "initial.v0.amplitude",
    "initial.v0.baseline", "initial.v0.center", "initial.v0.width",
    "solver.t_end", "solver.dt_init", "solver.cfl_safety", "solver.dt_min",
    "solver.blowup_threshold", "solver.scheme", "solver.record_every",
    "monitor.p", "monitor.interp_q",
    "conditions.c_gn",
    "output.dir", "output.svg",
}


@dataclass
class _Raw:
    text: str
    line: int
    used: bool = field(default=False)


def _tokenize(text: str) -> dict[str, _Raw]:
    entries: dict[str, _Raw] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value")
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        if key in entries:
            raise ConfigError(
                f"line {lineno}: duplicate key '{key}' "
                f"(first set on line {entries[key].line})"
            )
        entries[key] = _Raw(text=value, line=lineno)
    return entries


class _Doc:
    def __init__(self, entries: dict[str, _Raw]):
        self.entries = entries

    def _fetch(self, key: str, cast, default):
        raw = self.entries.get(key)
        if raw is None:
            if default is _REQUIRED:
                raise ConfigError(f"missing required key '{key}'")
            return default
        raw.used = True
        try:
            return cast(raw.text)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"line {raw.line}: bad value for '{key}': {exc}") from exc

    def get_float(self, key: str, default=None):
        return self._fetch(key, float, default)

    def get_int(self, key: str, default=None):
        return self._fetch(key, lambda s: int(s, 10), default)

    def get_str(self, key: str, default=None):
        return self._fetch(key, str, default)

    def get_bool(self, key: str, default=None):
        def cast(s: str) -> bool:
            low = s.lower()
            if low in ("true", "false"):
                return low == "true"
            raise ValueError(f"expected true or false, got {s!r}")

        return self._fetch(key, cast, default)

    def get_float_list(self, key: str, default=None):
        return self._fetch(
            key, lambda s: tuple(float(x) for x in s.split(",")), default
        )

    def get_int_list(self, key: str, default=None):
        return self._fetch(
            key, lambda s: tuple(int(x, 10) for x in s.split(",")), default
        )

    def line_of(self, key: str) -> int:
        return self.entries[key].line


_REQUIRED = object()


def _validated(name: str, build):
    try:
        return build()
    except ConfigError:
        raise
    except (ValueError, ArithmeticError) as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def _parse_domain(doc: _Doc) -> DomainSpec:
    kind_s = doc.get_str("domain.kind", _REQUIRED).lower()
    try:
        kind = DomainKind(kind_s)
    except ValueError:
        raise ConfigError(
            f"line {doc.line_of('domain.kind')}: domain.kind must be one of "
            f"interval, box2, box3, radial; got '{kind_s}'"
        ) from None
    if kind is DomainKind.RADIAL_BALL:
        radius = doc.get_float("domain.radius", 1.0)
        radial_n = doc.get_int("domain.n", 3)
        return _validated(
            "domain", lambda: DomainSpec(kind, (radius,), radial_n=radial_n)
        )
    if kind is DomainKind.INTERVAL:
        length = doc.get_float("domain.length", 1.0)
        return _validated("domain", lambda: DomainSpec(kind, (length,)))
    axes = 2 if kind is DomainKind.BOX2 else 3
    lengths = doc.get_float_list("domain.lengths", tuple([1.0] * axes))
    return _validated("domain", lambda: DomainSpec(kind, lengths))


def _parse_descriptor(doc: _Doc, prefix: str, domain: DomainSpec) -> Descriptor:
    kind = doc.get_str(f"{prefix}.kind", "constant").lower()
    if kind == "constant":
        return Constant(value=doc.get_float(f"{prefix}.value", 1.0))
    if kind == "cosine":
        return CosineBump(
            amplitude=doc.get_float(f"{prefix}.amplitude", 0.5),
            baseline=doc.get_float(f"{prefix}.baseline", 1.0),
        )
    if kind == "gaussian":
        if domain.kind is DomainKind.RADIAL_BALL:
            default_center: tuple[float, ...] = (0.0,)
        else:
            default_center = tuple(e / 2.0 for e in domain.extents)
        center = doc.get_float_list(f"{prefix}.center", default_center)
        return GaussianBump(
            amplitude=doc.get_float(f"{prefix}.amplitude", 0.5),
            center=center,
            width=doc.get_float(f"{prefix}.width", 0.1),
            baseline=doc.get_float(f"{prefix}.baseline", 1.0),
        )
    raise ConfigError(
        f"line {doc.line_of(f'{prefix}.kind')}: {prefix}.kind must be one of "
        f"constant, cosine, gaussian; got '{kind}'"
    )


def parse_config(text: str) -> ExperimentConfig:
    """Parse and fully validate a configuration document."""
    doc = _Doc(_tokenize(text))

    domain = _parse_domain(doc)
    if domain.kind is DomainKind.RADIAL_BALL:
        default_n = domain.radial_n
    else:
        default_n = domain.ndim

    def build_model() -> ModelParams:
        rates = {}
        for key, label, default in (
            ("model.chi", "chi", 1.0), ("model.lambda", "lambda", 1.0),
            ("model.mu", "mu", 1.0), ("model.c", "c", 0.0),
        ):
            value = doc.get_float(key, default)
            if value < 0:
                raise ConfigError(
                    f"line {doc.line_of(key)}: {label} must be nonnegative"
                )
            rates[label] = value
        return ModelParams(
            chi=rates["chi"],
            lam=rates["lambda"],
            mu=rates["mu"],
            c=rates["c"],
            gamma=doc.get_float("model.gamma", 2.0),
            n=doc.get_int("model.n", default_n),
        )

    model = _validated("model", build_model)

    shape_raw = doc.get_int_list("grid.shape", tuple([128] * domain.ndim))
    if len(shape_raw) == 1 and domain.ndim > 1:
        shape = tuple([shape_raw[0]] * domain.ndim)
    else:
        shape = shape_raw
    if len(shape) != domain.ndim:
        raise ConfigError(
            f"grid.shape has {len(shape)} entries but the domain has "
            f"{domain.ndim} axis/axes"
        )
    if any(s < 4 for s in shape):
        raise ConfigError("grid.shape entries must be >= 4")

    u0_spec = _parse_descriptor(doc, "initial.u0", domain)
    v0_spec = _parse_descriptor(doc, "initial.v0", domain)

    scheme_s = doc.get_str("solver.scheme", "upwind").lower()
    try:
        scheme = AdvectionScheme(scheme_s)
    except ValueError:
        raise ConfigError(
            f"line {doc.line_of('solver.scheme')}: solver.scheme must be "
            f"upwind or central, got '{scheme_s}'"
        ) from None

    def build_solver() -> SolverConfig:
        return SolverConfig(
            t_end=doc.get_float("solver.t_end", 1.0),
            dt_init=doc.get_float("solver.dt_init", 1e-2),
            cfl_safety=doc.get_float("solver.cfl_safety", 0.4),
            dt_min=doc.get_float("solver.dt_min", 1e-10),
            blowup_threshold=doc.get_float("solver.blowup_threshold", 1e6),
            advection_scheme=scheme,
            record_every=doc.get_float("solver.record_every", 0.1),
        )

    solver = _validated("solver", build_solver)

    interp_q = doc.get_float("monitor.interp_q", None)

    def build_config() -> ExperimentConfig:
        return ExperimentConfig(
            model=model,
            domain=domain,
            grid_shape=shape,
            u0_spec=u0_spec,
            v0_spec=v0_spec,
            solver=solver,
            monitor_p=doc.get_float("monitor.p", 2.0),
            interp_q=interp_q,
            c_gn=doc.get_float("conditions.c_gn", 1.0),
            output_dir=doc.get_str("output.dir", "out"),
            emit_svg=doc.get_bool("output.svg", False),
        )

    cfg = _validated("config", build_config)
    for key, raw in doc.entries.items():
        if not raw.used:
            raise ConfigError(
                f"line {raw.line}: key '{key}' does not apply to this "
                f"configuration (check the domain and descriptor kinds)"
            )
    return cfg
