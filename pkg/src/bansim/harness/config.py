"""Flat key-value scenario configs with `[section]` headers.

Values are parsed as int, then float, then string; comma-separated values
become lists.  The raw file bytes are hashed so every result table can
name the exact config that produced it.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

EXPERIMENTS = (
    "ber_sweep",
    "channel_stats",
    "doa_hist",
    "cma_convergence",
    "mud_compare",
    "la_sim",
    "broadcast_sim",
)


class ConfigError(ValueError):
    pass


def _parse_scalar(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


def _parse_value(text: str):
    if "," in text:
        return [_parse_scalar(p.strip()) for p in text.split(",")]
    return _parse_scalar(text)


@dataclass
class ScenarioConfig:
    experiment: str
    sections: dict[str, dict] = field(default_factory=dict)
    seed: int = 0
    output_dir: str = "."
    config_hash: str = ""

    def section(self, name: str) -> dict:
        return self.sections.get(name, {})

    def require(self, section: str, key: str):
        try:
            return self.sections[section][key]
        except KeyError:
            raise ConfigError(f"missing required key [{section}] {key}") from None


def parse_config(text: str, experiment: str) -> ScenarioConfig:
    if experiment not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {experiment!r}; choose one of {EXPERIMENTS}"
        )
    sections: dict[str, dict] = {}
    current = "common"
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected `key = value`, got {raw!r}")
        key, value = line.split("=", 1)
        sections.setdefault(current, {})[key.strip()] = _parse_value(value.strip())
    common = sections.get("common", {})
    if "seed" not in common:
        raise ConfigError("config must set `seed` in the [common] section")
    cfg = ScenarioConfig(
        experiment=experiment,
        sections=sections,
        seed=int(common["seed"]),
        output_dir=str(common.get("out", ".")),
        config_hash=hashlib.sha256(text.encode()).hexdigest()[:16],
    )
    return cfg
