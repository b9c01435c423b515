"""Run configuration shared by the verification suite and the command line."""
from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from typing import Mapping

from .scalars import PrecisionPolicy

ENV_PREFIX = "ADELIC_"
MAX_PRECISION_BITS = 4096
FORMATS = ("md", "csv", "json")


@dataclass(frozen=True)
class Config:
    precision_bits: int = 128
    search_radius: int = 3
    denom_bound: int = 4
    dimension_cap: int = 5000
    integer_cap_bits: int = 10**6
    output_format: str = "json"
    seed: int = 42
    convexity_trials: int = 500
    # statement-id prefixes to run; empty means everything
    only: tuple[str, ...] = field(default=())

    def __post_init__(self):
        for name in ("precision_bits", "dimension_cap", "integer_cap_bits", "convexity_trials"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.search_radius < 0 or self.denom_bound < 1:
            raise ValueError("search_radius must be >= 0 and denom_bound >= 1")
        if not 32 <= self.precision_bits <= MAX_PRECISION_BITS:
            raise ValueError(f"precision_bits must lie in [32, {MAX_PRECISION_BITS}]")
        if self.output_format not in FORMATS:
            raise ValueError(f"output_format must be one of {FORMATS}")

    @property
    def policy(self) -> PrecisionPolicy:
        return PrecisionPolicy(self.precision_bits, MAX_PRECISION_BITS, self.integer_cap_bits)

    def numeric_policy(self, bits: int) -> PrecisionPolicy:
        """Policy for checks that demand a fixed minimum precision (e.g. 256 bits)."""
        start = max(bits, self.precision_bits)
        return PrecisionPolicy(start, max(start, MAX_PRECISION_BITS), self.integer_cap_bits)

    def selected(self, statement_id: str) -> bool:
        return not self.only or any(statement_id == s or statement_id.startswith(s + ".") for s in self.only)

    def wants(self, group: str) -> bool:
        """True if any statement of ``group`` can be selected."""
        return not self.only or any(s == group or s.startswith(group + ".") or group.startswith(s + ".") for s in self.only)

    def to_json(self) -> dict:
        out = dataclasses.asdict(self)
        out["only"] = list(self.only)
        return out

    def replace(self, **changes) -> "Config":
        return dataclasses.replace(self, **changes)


def from_env(base: Config | None = None, environ: Mapping[str, str] | None = None) -> Config:
    """Apply ADELIC_<FIELD> environment overrides (e.g. ADELIC_SEARCH_RADIUS=2)."""
    base = base or Config()
    environ = os.environ if environ is None else environ
    changes: dict = {}
    for f in dataclasses.fields(Config):
        raw = environ.get(ENV_PREFIX + f.name.upper())
        if raw is None:
            continue
        if f.name == "only":
            changes[f.name] = tuple(s for s in raw.split(",") if s)
        elif f.name == "output_format":
            changes[f.name] = raw
        else:
            changes[f.name] = int(raw)
    return dataclasses.replace(base, **changes)
