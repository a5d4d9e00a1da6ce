"""Run configuration shared by the library entry points and the CLI."""
from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace

ENV_PREFIX = "COVDEX_"


@dataclass(frozen=True)
class RunConfig:
    seed: int = 42
    tol: float = 1e-3
    slack: float = 1e-6
    starts: int = 32
    m_cap: int = 64
    cell_budget: int = 10**7
    output: str = "json"

    def __post_init__(self):
        if not (self.tol > 0 and self.slack > 0):
            raise ValueError("tol and slack must be positive")
        if self.starts < 1 or self.m_cap < 1 or self.cell_budget < 1:
            raise ValueError("starts, m_cap and cell_budget must be at least 1")
        if self.output not in ("json", "table"):
            raise ValueError("output must be 'json' or 'table'")

    @classmethod
    def resolve(cls, flags: dict | None = None, environ=None) -> "RunConfig":
        """Flags beat ``COVDEX_*`` environment variables, which beat the defaults."""
        environ = os.environ if environ is None else environ
        values = {}
        for f in fields(cls):
            raw = environ.get(ENV_PREFIX + f.name.upper())
            if raw is not None:
                values[f.name] = _coerce(f.name, raw)
        for k, v in (flags or {}).items():
            if v is not None:
                values[k] = v
        return cls(**values)

    def but(self, **changes) -> "RunConfig":
        return replace(self, **changes)


def _coerce(name: str, raw: str):
    if name in ("seed", "starts", "m_cap"):
        return int(raw)
    if name == "cell_budget":
        return int(float(raw))
    if name in ("tol", "slack"):
        return float(raw)
    return raw


DEFAULT = RunConfig()
