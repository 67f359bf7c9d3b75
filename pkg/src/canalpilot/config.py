"""Runtime configuration, readable from a flat key=value file."""

from dataclasses import dataclass, fields
from pathlib import Path

from .input_mapping import CLASSIFICATION_LITERAL, CLASSIFICATION_PROSE


@dataclass
class Config:
    # controller
    advance_rate: float = 20.0       # states per second of autonomous travel
    gain: float = 0.05               # correction speed, m/s at full stick
    deadzone: float = 0.15           # stick magnitude below which input is null
    beta_max: float = 1.25           # max radial extension ratio during corrections
    overshoot_cap_m: float = 0.05    # absolute cap on extension beyond r(s)
    shrink_window: int = 10          # disks over which sanctioned excess retires
    classification: str = CLASSIFICATION_PROSE
    # canal construction
    n_states: int = 200
    r_min: float = 0.01
    axis_window: int = 5
    smoothing_scale: float = 1e-4    # spline penalty = scale * (arc length)^2
    align_fraction: float = 0.2

    def __post_init__(self):
        if self.classification not in (CLASSIFICATION_PROSE, CLASSIFICATION_LITERAL):
            raise ValueError(f"classification must be 'prose' or 'literal', "
                             f"got {self.classification!r}")
        if self.advance_rate <= 0 or self.gain < 0 or not 0 <= self.deadzone < 1:
            raise ValueError("invalid controller configuration values")
        if self.beta_max < 1.0 or self.overshoot_cap_m < 0 or self.shrink_window < 1:
            raise ValueError("invalid extension configuration values")


def load_config(path) -> Config:
    """Parse a flat key=value file ('#' starts a comment)."""
    values = {}
    types = {f.name: f.type for f in fields(Config)}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in types:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        kind = types[key]
        if kind is int:
            values[key] = int(value)
        elif kind is float:
            values[key] = float(value)
        else:
            values[key] = value
    return Config(**values)


def save_config(cfg: Config, path) -> None:
    lines = [f"{f.name}={getattr(cfg, f.name)}" for f in fields(Config)]
    Path(path).write_text("\n".join(lines) + "\n")


def config_to_dict(cfg: Config) -> dict:
    return {f.name: getattr(cfg, f.name) for f in fields(Config)}


def config_from_dict(data: dict) -> Config:
    known = {f.name for f in fields(Config)}
    return Config(**{k: v for k, v in data.items() if k in known})
