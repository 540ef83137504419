"""Run configuration: a flat `key = value` text format with one canonical
serialization (sorted keys, shortest round-trip float repr), so a byte hash
of the canonical form identifies a run.

Values parse strictly against the schema below; unknown keys are errors.
Optional values use the literal `none`; booleans are `true`/`false`; lists
are comma-separated. Command-line overrides are `KEY=VALUE` pairs applied on
top of a parsed file, then re-canonicalized.
"""

import hashlib
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

from .evolve import EvolutionConfig
from .grid import GridSpec, make_grid
from .sobolev import SobolevSpec, default_spec


class ConfigError(ValueError):
    """Malformed, unknown, or out-of-range configuration input."""


def _parse_bool(s: str) -> bool:
    if s == "true":
        return True
    if s == "false":
        return False
    raise ConfigError(f"expected true/false, got {s!r}")


def _emit_float(v: float) -> str:
    return repr(float(v))


def _parse_opt_float(s: str) -> Optional[float]:
    return None if s == "none" else float(s)


def _parse_opt_int(s: str) -> Optional[int]:
    return None if s == "none" else int(s)


def _emit_opt(v, emit) -> str:
    return "none" if v is None else emit(v)


def _parse_float_list(s: str) -> Tuple[float, ...]:
    if not s.strip():
        return ()
    return tuple(float(x) for x in s.split(","))


def _parse_int_list(s: str) -> Tuple[int, ...]:
    if not s.strip():
        return ()
    return tuple(int(x) for x in s.split(","))


def _emit_list(v, emit) -> str:
    return ",".join(emit(x) for x in v)


# key -> (parse, emit, default)
SCHEMA = {
    "grid.n": (int, str, 2),
    "grid.k": (int, str, 1),
    "grid.box_length": (float, _emit_float, 16 * 3.141592653589793),
    "grid.points_per_axis": (int, str, 64),
    "grid.torus_modes": (int, str, 8),
    "grid.split_index": (_parse_opt_int, lambda v: _emit_opt(v, str), None),
    "evolve.kappa": (int, str, 1),
    "evolve.final_time": (float, _emit_float, 1.0),
    "evolve.dt": (float, _emit_float, 1.0 / 64),
    "evolve.stride": (int, str, 1),
    "evolve.dealias": (_parse_bool, lambda v: "true" if v else "false", True),
    "evolve.boundary_margin": (float, _emit_float, 0.1),
    "space.epsilon": (float, _emit_float, 0.1),
    "space.theta": (_parse_opt_int, lambda v: _emit_opt(v, str), None),
    "space.rho": (_parse_opt_float, lambda v: _emit_opt(v, _emit_float), None),
    "space.variant": (str, str, "auto"),
    "data.delta": (float, _emit_float, 1e-2),
    "data.decay_rate": (_parse_opt_float, lambda v: _emit_opt(v, _emit_float), None),
    "data.seed": (int, str, 0),
    "data.envelope_width": (_parse_opt_float, lambda v: _emit_opt(v, _emit_float), None),
    "data.band_limit": (_parse_opt_float, lambda v: _emit_opt(v, _emit_float), None),
    "sim.qnorm": (float, _emit_float, 4.0),
    "picard.tol": (float, _emit_float, 1e-10),
    "picard.max_iter": (int, str, 25),
    "scatter.probe_times": (_parse_float_list, lambda v: _emit_list(v, _emit_float), (2.0, 4.0, 8.0, 16.0)),
    "scatter.decay_q": (float, _emit_float, 4.0),
    "scan.id": (str, str, "strichartz"),
    "scan.samples": (int, str, 100),
    "scan.seed": (int, str, 0),
    "scan.p": (float, _emit_float, 4.0),
    "scan.q": (float, _emit_float, 4.0),
    "scan.alpha": (_parse_int_list, lambda v: _emit_list(v, str), ()),
    "scan.r": (float, _emit_float, 0.0),
    "scan.s": (float, _emit_float, 0.6),
    "scan.eps": (float, _emit_float, 0.1),
    "scan.final_time": (float, _emit_float, 4.0),
    "scan.n_times": (int, str, 33),
    "scan.m_list": (_parse_float_list, lambda v: _emit_list(v, _emit_float), (-10.0, 0.0, 10.0)),
    "scan.band_index": (int, str, 1),
    "scan.x_band_limit": (_parse_opt_float, lambda v: _emit_opt(v, _emit_float), None),
    "scan.double": (_parse_bool, lambda v: "true" if v else "false", False),
}


@dataclass
class RunConfig:
    values: Dict[str, object]

    @classmethod
    def defaults(cls) -> "RunConfig":
        return cls({key: default for key, (_, _, default) in SCHEMA.items()})

    @classmethod
    def parse(cls, text: str) -> "RunConfig":
        cfg = cls.defaults()
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            cfg.set(key, value)
        return cfg

    def set(self, key: str, value: str) -> None:
        if key not in SCHEMA:
            raise ConfigError(f"unknown configuration key {key!r}")
        parse, _, _ = SCHEMA[key]
        try:
            self.values[key] = parse(value)
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from exc

    def with_overrides(self, overrides: Sequence[str]) -> "RunConfig":
        out = RunConfig(dict(self.values))
        for item in overrides:
            if "=" not in item:
                raise ConfigError(f"override must be KEY=VALUE, got {item!r}")
            key, value = item.split("=", 1)
            out.set(key.strip(), value.strip())
        return out

    def canonical(self) -> str:
        lines = []
        for key in sorted(SCHEMA):
            _, emit, _ = SCHEMA[key]
            lines.append(f"{key} = {emit(self.values[key])}")
        return "\n".join(lines) + "\n"

    def hash(self) -> str:
        return hashlib.sha256(self.canonical().encode("ascii")).hexdigest()

    def __getitem__(self, key: str):
        return self.values[key]

    # -- typed views -------------------------------------------------------

    def grid(self) -> GridSpec:
        try:
            return make_grid(
                self["grid.n"],
                self["grid.k"],
                self["grid.box_length"],
                self["grid.points_per_axis"],
                self["grid.torus_modes"],
                split_index=self["grid.split_index"],
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def evolution(self) -> EvolutionConfig:
        try:
            return EvolutionConfig(
                kappa=self["evolve.kappa"],
                final_time=self["evolve.final_time"],
                dt=self["evolve.dt"],
                dealias=self["evolve.dealias"],
                boundary_margin=self["evolve.boundary_margin"],
                stride=self["evolve.stride"],
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def sobolev_spec(self, grid: GridSpec) -> SobolevSpec:
        auto = default_spec(grid, self["space.epsilon"])
        theta = self["space.theta"] if self["space.theta"] is not None else auto.theta
        rho = self["space.rho"] if self["space.rho"] is not None else auto.rho
        variant = self["space.variant"]
        if variant == "auto":
            variant = auto.variant
        try:
            return SobolevSpec(theta=theta, rho=rho, variant=variant)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
