"""Service wiring: artifact locations, bind address, and session limits.

Values come from the ``[service]`` section of the shared config file,
overridden by CLI flags (and, for the bind address, environment
variables handled at the CLI layer).
"""

from __future__ import annotations

from dataclasses import dataclass

from ..config import build, section
from ..errors import ContractViolation

REQUIRED_ARTIFACTS = ("dataset", "proxy", "clusters", "agent")


@dataclass
class ServiceConfig:
    dataset: str | None = None
    proxy: str | None = None
    clusters: str | None = None
    agent: str | None = None
    host: str = "127.0.0.1"
    port: int = 8000
    max_sessions: int = 64
    session_ttl: float = 3600.0
    n_steps: int = 10
    satisfaction: float = 0.95
    journal: str | None = None
    page_limit: int = 50

    def __post_init__(self) -> None:
        if self.max_sessions < 1:
            raise ContractViolation(f"max_sessions must be >= 1, got {self.max_sessions}")
        if self.session_ttl <= 0:
            raise ContractViolation(f"session_ttl must be positive, got {self.session_ttl}")
        if self.n_steps < 1:
            raise ContractViolation(f"n_steps must be >= 1, got {self.n_steps}")
        if not 0.0 <= self.satisfaction <= 1.0:
            raise ContractViolation(
                f"satisfaction must lie in [0, 1], got {self.satisfaction}"
            )
        if self.page_limit < 1:
            raise ContractViolation(f"page_limit must be >= 1, got {self.page_limit}")


def service_config(config: dict, **overrides) -> ServiceConfig:
    """Merge the [service] section with non-None overrides (flags win)."""
    values = section(config, "service")
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    cfg = build(ServiceConfig, values, "service")
    missing = [name for name in REQUIRED_ARTIFACTS if getattr(cfg, name) is None]
    if missing:
        raise ContractViolation(
            "service config is missing artifact paths: " + ", ".join(missing)
        )
    return cfg
