"""Tracker configuration and its flat ``key = value`` file format."""
from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, fields
from pathlib import Path

from .regularizer import RegularizerSpec


@dataclass(frozen=True)
class TrackerConfig:
    # sample geometry
    search_area_scale: float = 4.0
    cell_size: int = 4
    max_grid: int = 50
    features: str = "hog"
    window: bool = True
    # regularizer
    reg_mu: float = 0.1
    reg_eta: float = 3.0
    reg_beta: float = 0.8
    reg_keep: float = 0.999
    # training
    output_sigma_factor: float = 1.0 / 16
    learning_rate: float = 0.025
    gs_sweeps: int = 4
    symmetric_gs: bool = False
    # detection
    n_scales: int = 7
    scale_step: float = 1.01
    newton_iters: int = 5
    threads: int = 1

    def __post_init__(self):
        if self.features not in ("gray", "hog"):
            raise ValueError(f"features must be 'gray' or 'hog', got {self.features!r}")
        if self.n_scales < 1 or self.n_scales % 2 == 0:
            raise ValueError("n_scales must be a positive odd number")
        if self.cell_size < 1 or self.max_grid < 3:
            raise ValueError("cell_size must be >= 1 and max_grid >= 3")
        if not self.search_area_scale > 0 or not self.scale_step > 0:
            raise ValueError("search_area_scale and scale_step must be positive")
        self.regularizer  # validates the penalty parameters

    @property
    def regularizer(self) -> RegularizerSpec:
        return RegularizerSpec(self.reg_mu, self.reg_eta, self.reg_beta, self.reg_keep)

    def replace(self, **changes) -> "TrackerConfig":
        return dataclasses.replace(self, **changes)

    def to_text(self) -> str:
        return "".join(f"{f.name} = {_fmt(getattr(self, f.name))}\n" for f in fields(self))

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]

    @classmethod
    def from_text(cls, text: str, source: str = "<config>") -> "TrackerConfig":
        types = {f.name: f.type for f in fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in types:
                raise ValueError(f"{source}:{lineno}: unknown key {key!r}")
            values[key] = _parse(types[key], value, f"{source}:{lineno}")
        return cls(**values)

    @classmethod
    def load(cls, path) -> "TrackerConfig":
        path = Path(path)
        return cls.from_text(path.read_text(), str(path))


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value) if isinstance(value, float) else str(value)


def _parse(kind, value: str, where: str):
    try:
        if kind in (bool, "bool"):
            low = value.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
        if kind in (int, "int"):
            return int(value)
        if kind in (float, "float"):
            return float(value)
        return value
    except ValueError:
        raise ValueError(f"{where}: cannot parse {value!r} as {kind}") from None
