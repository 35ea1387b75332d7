"""Single-file run configuration.

One TOML or JSON file configures every pipeline stage, keyed by section
(``synth``, ``preprocess``, ``proxy``, ``agent``, ``lstm``, ``evaluate``,
``service``).  Sections map straight onto the stage config dataclasses;
unknown keys are rejected so typos fail loudly instead of silently
running defaults.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .errors import ContractViolation, LoadError


def load_config(path: str | Path | None) -> dict:
    if path is None:
        return {}
    path = Path(path)
    if not path.exists():
        raise LoadError(f"config file {path} does not exist")
    if path.suffix == ".toml":
        try:
            return tomllib.loads(path.read_text())
        except tomllib.TOMLDecodeError as exc:
            raise LoadError(f"{path}: invalid TOML: {exc}") from exc
    if path.suffix == ".json":
        try:
            return json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise LoadError(f"{path}: invalid JSON: {exc}") from exc
    raise LoadError(f"config file {path} must end in .toml or .json")


def section(config: dict, name: str) -> dict:
    value = config.get(name, {})
    if not isinstance(value, dict):
        raise ContractViolation(f"config section [{name}] must be a table")
    return dict(value)


def build(cls, values: dict, where: str):
    """Instantiate a config dataclass, rejecting unknown keys.

    List values are coerced to tuples where the dataclass default is a
    tuple, since TOML and JSON have no tuple syntax.
    """
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(values) - set(known)
    if unknown:
        raise ContractViolation(
            f"unknown keys in [{where}]: {', '.join(sorted(unknown))}"
        )
    coerced = {}
    for key, value in values.items():
        default = known[key].default
        if isinstance(value, list) and isinstance(default, tuple):
            value = tuple(value)
        coerced[key] = value
    return cls(**coerced)
