"""Scenario configuration: presets, flat ``key=value`` files and overrides."""

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .relaxation import TAU_DEFAULT

SCENARIOS = ("smooth_periodic", "riemann", "cylinder", "custom")
COMPARE = ("none", "euler", "ns")
CUSTOM_REQUIRED = ("t_end", "rho_l", "u_l", "T_l", "rho_r", "u_r", "T_r")


@dataclass
class ScenarioConfig:
    scenario: str = "custom"
    d_x: int = 1
    d_v: int = 2
    lower: tuple = (-1.0,)
    upper: tuple = (1.0,)
    nx: tuple = (100,)
    nv: int = 32
    vmax: float = None  # None: |u| + 8 sqrt(T) over the initial/boundary states
    eps: float = 1e-2
    nu: float = 0.0
    c_tau: float = TAU_DEFAULT
    omega: float = 1.0
    cfl: float = 0.5
    cfl_limit: float = 0.9
    t_end: float = None
    max_steps: int = 0
    snapshots: tuple = ()
    out: str = None
    compare: str = "none"
    limiter: str = "minmod"
    moment_correction: bool = True
    spd_floor_limit: int = 1000
    bc: str = "outflow"
    # smooth_periodic
    A0: float = 0.5
    T0: float = 0.125
    u0: tuple = (0.5, 0.5)
    # two-state data (riemann, custom)
    mach: float = 2.5
    rho_l: float = 1.0
    u_l: tuple = (0.0, 0.0)
    T_l: float = 1.0
    rho_r: float = 1.0
    u_r: tuple = (0.0, 0.0)
    T_r: float = 1.0
    # cylinder
    T_w: float = 1.05
    radius: float = 1.0
    rho_i: float = 1.0
    T_i: float = 1.0

    def validate(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario: unknown scenario {self.scenario!r}; choose from {SCENARIOS}")
        if self.t_end is None:
            raise ConfigError("t_end: missing (required)")
        if self.t_end < 0:
            raise ConfigError("t_end: must be >= 0")
        if not self.eps > 0:
            raise ConfigError("eps: must be > 0")
        if not -1.0 <= self.nu < 1.0:
            raise ConfigError(f"nu: must lie in [-1, 1) (Pr = 1/(1-nu)), got {self.nu}")
        if not 0 < self.cfl <= 1:
            raise ConfigError("cfl: must lie in (0, 1]")
        if self.cfl > self.cfl_limit:
            raise ConfigError("cfl: exceeds cfl_limit")
        if self.nv < 4:
            raise ConfigError("nv: must be >= 4")
        if self.vmax is not None and not self.vmax > 0:
            raise ConfigError("vmax: must be > 0")
        if len(self.nx) != self.d_x or len(self.lower) != self.d_x or len(self.upper) != self.d_x:
            raise ConfigError(f"nx: expected {self.d_x} value(s) for d_x={self.d_x}")
        if any(n < 4 for n in self.nx):
            raise ConfigError("nx: need at least 4 cells per axis")
        if self.compare not in COMPARE:
            raise ConfigError(f"compare: must be one of {COMPARE}")
        if self.compare != "none" and self.d_x != 1:
            raise ConfigError("compare: fluid reference is 1-D only")
        if self.limiter not in ("minmod", "vanleer"):
            raise ConfigError("limiter: must be minmod or vanleer")
        if self.bc not in ("periodic", "outflow"):
            raise ConfigError("bc: must be periodic or outflow")
        if self.c_tau <= 0:
            raise ConfigError("c_tau: must be > 0")
        for key in ("rho_l", "rho_r", "T_l", "T_r", "T0", "T_w", "T_i", "rho_i"):
            if not getattr(self, key) > 0:
                raise ConfigError(f"{key}: must be > 0")
        if self.max_steps < 0:
            raise ConfigError("max_steps: must be >= 0")
        return self

    def echo(self):
        """``key=value`` lines describing every field."""
        return [f"{f.name}={_format(getattr(self, f.name))}" for f in dataclasses.fields(self)]


def preset(name):
    """Fully populated configuration for a named scenario."""
    if name == "smooth_periodic":
        return ScenarioConfig(scenario=name, nx=(100,), nv=32, eps=1e-2, nu=-1.0, t_end=20.0,
                              snapshots=(0.0, 5.0, 10.0, 20.0), bc="periodic")
    if name == "riemann":
        return ScenarioConfig(scenario=name, nx=(200,), nv=32, eps=0.5, nu=0.5, t_end=0.4,
                              snapshots=riemann_snapshots(0.5), mach=2.5, u_l=(2.5 * np.sqrt(2.0), 0.0),
                              T_r=1.05)
    if name == "cylinder":
        return ScenarioConfig(scenario=name, d_x=2, lower=(-8.0, -8.0), upper=(8.0, 8.0), nx=(64, 64),
                              nv=24, eps=1e-2, nu=-1.0, t_end=30.0, snapshots=(1.0, 6.0, 16.0, 30.0),
                              mach=0.1, T_w=1.05)
    if name == "custom":
        return ScenarioConfig(scenario=name)
    raise ConfigError(f"scenario: unknown scenario {name!r}; choose from {SCENARIOS}")


def riemann_snapshots(eps):
    return (0.1, 0.2, 0.3) if eps <= 1e-3 else (0.1, 0.25, 0.4)


_ALIASES = {"tend": "t_end", "v_max": "vmax", "n_v": "nv", "n_x": "nx"}


def parse_config(path=None, overrides=None):
    """Merge a preset, an optional config file and overrides into a validated config.

    Later sources win. Unknown keys raise :class:`ConfigError`.
    """
    values = {}
    if path is not None:
        values.update(read_config_file(path))
    for k, v in (overrides or {}).items():
        if v is not None:
            values[_ALIASES.get(k, k)] = v
    values = {_ALIASES.get(k, k): v for k, v in values.items()}
    known = {f.name: f for f in dataclasses.fields(ScenarioConfig)}
    unknown = sorted(set(values) - set(known))
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown key")
    name = values.get("scenario", "custom")
    if name not in SCENARIOS:
        raise ConfigError(f"scenario: unknown scenario {name!r}; choose from {SCENARIOS}")
    cfg = preset(name)
    if name == "custom":
        missing = [k for k in CUSTOM_REQUIRED if k not in values]
        if missing:
            raise ConfigError(f"{missing[0]}: missing (required for custom scenario)")
    for k, v in values.items():
        setattr(cfg, k, _coerce(k, v, known[k]))
    if len(cfg.nx) == 1 and cfg.d_x > 1:
        cfg.nx = cfg.nx * cfg.d_x
    if cfg.scenario == "riemann" and "snapshots" not in values:
        cfg.snapshots = riemann_snapshots(cfg.eps)
        if "t_end" not in values:
            cfg.t_end = cfg.snapshots[-1]
    if cfg.scenario == "riemann" and "u_l" not in values:
        cfg.u_l = (cfg.mach * np.sqrt(2.0), 0.0)
    return cfg.validate()


def read_config_file(path):
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key] = value
    return values


def _coerce(key, value, fld):
    default = fld.default
    try:
        if key in ("lower", "upper", "u0", "u_l", "u_r", "snapshots"):
            return _floats(value)
        if key == "nx":
            return tuple(int(v) for v in _items(value))
        if key in ("scenario", "out", "compare", "limiter", "bc"):
            return None if value is None else str(value)
        if key == "moment_correction":
            if isinstance(value, str):
                if value.lower() in ("1", "true", "yes", "on"):
                    return True
                if value.lower() in ("0", "false", "no", "off"):
                    return False
                raise ValueError(value)
            return bool(value)
        if key in ("d_x", "d_v", "nv", "max_steps", "spd_floor_limit"):
            return int(value)
        if key in ("vmax", "t_end") and (value is None or str(value).lower() == "auto"):
            return None
        if isinstance(default, float) or default is None:
            return float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: cannot parse {value!r}") from exc
    return value


def _items(value):
    if isinstance(value, str):
        return [s for s in value.replace(" ", "").split(",") if s]
    return list(np.atleast_1d(value))


def _floats(value):
    return tuple(float(v) for v in _items(value))


def _format(v):
    if isinstance(v, tuple):
        return ",".join(_format(x) for x in v)
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)
