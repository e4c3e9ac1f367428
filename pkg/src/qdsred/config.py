"""Run configuration: parameters, seed and tolerances, read from YAML."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

import yaml

from .errors import ConfigError, NonGenericParameter
from .laurent import DEFAULT_LAMBDA, DEFAULT_Q, qpow

FORMAT_VERSION = 1

DEFAULT_TOLERANCES: dict[str, float] = {
    "trace": 1e-9,
    "interpolation": 1e-10,
    "ll13": 1e-12,
    "tt13": 1e-10,
    "reduction": 1e-10,
    "structural_zero": 1e-9,
    "identity": 1e-12,
    "p31": 1e-10,
    "p32": 1e-10,
    "p32_detect": 1e-6,
    "l43": 1e-10,
    "involutivity": 1e-9,
    "factor": 1e-12,
    "quotient": 1e-9,
    "jdelta": 1e-10,
    "jacobi": 1e-4,
}

DEFAULT_DELTA: dict[int, complex] = {1: 0.3}


def parse_complex(x: Any, name: str = "value") -> complex:
    """Accept a number, a ``[re, im]`` pair or a string such as ``2.3-0.7j``."""
    try:
        if isinstance(x, (list, tuple)):
            if len(x) != 2:
                raise ValueError
            return complex(float(x[0]), float(x[1]))
        if isinstance(x, str):
            return complex(x.replace(" ", ""))
        return complex(x)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: cannot read {x!r} as a complex number") from exc


def complex_record(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


@dataclass(frozen=True)
class RunConfig:
    q: complex = DEFAULT_Q
    lam: complex = DEFAULT_LAMBDA
    z_window: tuple[int, int] = (-5, 5)
    D_max: int = 5
    seed: int = 20240611
    epsilon_generic: float = 1e-12
    tolerances: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    delta: Mapping[int, complex] = field(default_factory=dict)
    trials: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "q", complex(self.q))
        object.__setattr__(self, "lam", complex(self.lam))
        tol = dict(DEFAULT_TOLERANCES)
        tol.update({str(k): float(v) for k, v in self.tolerances.items()})
        object.__setattr__(self, "tolerances", tol)

    def validate(self) -> "RunConfig":
        """Check |q| < 1, q != 0 and the generic-size guard on the z-window."""
        if self.q == 0 or abs(self.q) >= 1:
            raise NonGenericParameter(f"q = {self.q} must satisfy 0 < |q| < 1")
        lo, hi = self.z_window
        if lo > hi:
            raise ConfigError("z_window must be (lo, hi) with lo <= hi")
        if self.D_max < 0:
            raise ConfigError("D_max must be non-negative")
        if self.seed < 0:
            raise ConfigError("seed must be an unsigned integer")
        span = max(abs(lo), abs(hi))
        for m in range(1, span + 1):
            if abs(1 - qpow(self.q, self.lam * m)) < self.epsilon_generic:
                raise NonGenericParameter(f"|1 - q^(lambda*{m})| is below epsilon_generic")
        for m, v in self.delta.items():
            if m == 0 and v != 0:
                raise ConfigError("delta_0 must vanish")
        return self

    def tol(self, name: str) -> float:
        return self.tolerances[name]

    def n_trials(self, name: str, default: int) -> int:
        return int(self.trials.get(name, default))

    def with_overrides(self, seed: int | None = None, tolerances: Mapping[str, float] | None = None) -> "RunConfig":
        out = self
        if seed is not None:
            out = replace(out, seed=int(seed))
        if tolerances:
            merged = dict(out.tolerances)
            merged.update(tolerances)
            out = replace(out, tolerances=merged)
        return out

    def delta_or_default(self) -> dict[int, complex]:
        return dict(self.delta) if any(abs(v) > 0 for v in self.delta.values()) else dict(DEFAULT_DELTA)

    def to_records(self) -> dict:
        return {
            "format": FORMAT_VERSION,
            "q": complex_record(self.q),
            "lambda": complex_record(self.lam),
            "z_window": list(self.z_window),
            "D_max": self.D_max,
            "seed": self.seed,
            "epsilon_generic": self.epsilon_generic,
            "tolerances": {k: self.tolerances[k] for k in sorted(self.tolerances)},
            "delta": {int(m): complex_record(complex(v)) for m, v in sorted(self.delta.items())},
            "trials": {k: int(v) for k, v in sorted(self.trials.items())},
        }

    @classmethod
    def from_mapping(cls, rec: Mapping) -> "RunConfig":
        if not isinstance(rec, Mapping):
            raise ConfigError("configuration must be a mapping")
        fmt = rec.get("format")
        if fmt != FORMAT_VERSION:
            raise ConfigError(f"unsupported format {fmt!r}; expected {FORMAT_VERSION}")
        known = {"format", "q", "lambda", "z_window", "D_max", "seed", "epsilon_generic", "tolerances", "delta", "trials"}
        extra = set(rec) - known
        if extra:
            raise ConfigError(f"unknown configuration keys: {sorted(extra)}")
        kw: dict[str, Any] = {}
        try:
            if "q" in rec:
                kw["q"] = parse_complex(rec["q"], "q")
            if "lambda" in rec:
                kw["lam"] = parse_complex(rec["lambda"], "lambda")
            if "z_window" in rec:
                lo, hi = rec["z_window"]
                kw["z_window"] = (int(lo), int(hi))
            if "D_max" in rec:
                kw["D_max"] = int(rec["D_max"])
            if "seed" in rec:
                kw["seed"] = int(rec["seed"])
            if "epsilon_generic" in rec:
                kw["epsilon_generic"] = float(rec["epsilon_generic"])
            if "tolerances" in rec:
                tol = rec["tolerances"] or {}
                unknown = set(tol) - set(DEFAULT_TOLERANCES)
                if unknown:
                    raise ConfigError(f"unknown tolerance names: {sorted(unknown)}")
                kw["tolerances"] = {str(k): float(v) for k, v in tol.items()}
            if "delta" in rec:
                kw["delta"] = {int(m): parse_complex(v, f"delta[{m}]") for m, v in (rec["delta"] or {}).items()}
            if "trials" in rec:
                kw["trials"] = {str(k): int(v) for k, v in (rec["trials"] or {}).items()}
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid configuration value: {exc}") from exc
        return cls(**kw)

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        return cls.from_mapping(load_yaml(path))


def load_yaml(path: str | Path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc


def dump_yaml(data: Any) -> str:
    return yaml.safe_dump(data, sort_keys=False, default_flow_style=None, width=100)


def parse_tolerance_override(text: str) -> tuple[str, float]:
    """``NAME=VALUE`` from the command line."""
    if "=" not in text:
        raise ConfigError(f"tolerance override {text!r} is not NAME=VALUE")
    name, value = text.split("=", 1)
    name = name.strip()
    if name not in DEFAULT_TOLERANCES:
        raise ConfigError(f"unknown tolerance name {name!r}")
    try:
        return name, float(value)
    except ValueError as exc:
        raise ConfigError(f"tolerance {name} needs a number, got {value!r}") from exc
