import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import yaml


class ConfigError(Exception):
    """Base exception for configuration errors."""

    pass


BUILTIN_DEFAULTS: Dict[str, Any] = {
    "q": 2,
    "budget": 100_000_000,
    "jobs": 1,
    "max_total_degree": 8,
    "precision": -8,
    "primes": [2, 3, 5, 7, 11, 13],
    "max_height": 12,
    "output": "tsv",
}


@dataclass
class Config:
    """Resolved settings for one run: a named profile merged over the file-wide defaults."""

    profile: Optional[str]
    settings: Dict[str, Any]
    global_defaults: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def builtin(cls) -> "Config":
        return cls(profile=None, settings={}, global_defaults={})

    def _get(self, key: str) -> Any:
        # Priority: profile > defaults > built-in
        if key in self.settings:
            return self.settings[key]
        if key in self.global_defaults:
            return self.global_defaults[key]
        return BUILTIN_DEFAULTS[key]

    def _get_int(self, key: str, minimum: Optional[int] = None) -> int:
        value = self._get(key)
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"'{key}' must be an integer, got {value!r}")
        if minimum is not None and value < minimum:
            raise ConfigError(f"'{key}' must be >= {minimum}, got {value}")
        return value

    def get_q(self) -> int:
        return self._get_int("q", minimum=2)

    def get_budget(self) -> int:
        return self._get_int("budget", minimum=1)

    def get_jobs(self) -> int:
        return self._get_int("jobs", minimum=1)

    def get_max_total_degree(self) -> int:
        return self._get_int("max_total_degree", minimum=0)

    def get_precision(self) -> int:
        return self._get_int("precision")

    def get_max_height(self) -> int:
        return self._get_int("max_height", minimum=0)

    def get_primes(self) -> List[int]:
        primes = self._get("primes")
        if not isinstance(primes, list) or not all(isinstance(p, int) and p >= 2 for p in primes):
            raise ConfigError(f"'primes' must be a list of integers >= 2, got {primes!r}")
        return list(primes)

    def get_output(self) -> str:
        output = self._get("output")
        if output not in ("tsv", "json"):
            raise ConfigError(f"'output' must be 'tsv' or 'json', got {output!r}")
        return output


class ConfigLoader:
    def __init__(self, config_path: Optional[str] = None):
        self.config_path = config_path or self._resolve_default_config_path()

    def _resolve_default_config_path(self) -> str:
        # Priority: ./.toricount/config.yaml -> ~/.config/toricount/config.yaml
        local_config = os.path.join(os.getcwd(), ".toricount", "config.yaml")
        if os.path.exists(local_config):
            return local_config

        user_config = os.path.expanduser("~/.config/toricount/config.yaml")
        if os.path.exists(user_config):
            return user_config

        return local_config

    def exists(self) -> bool:
        return os.path.exists(self.config_path)

    def load(self, profile_name: Optional[str] = None) -> Config:
        if not self.exists():
            raise ConfigError(f"Configuration file not found at: {self.config_path}")

        try:
            with open(self.config_path, "r") as f:
                raw_config = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"Failed to parse config file: {e}")

        if not isinstance(raw_config, dict):
            raise ConfigError("Configuration root must be a mapping.")

        global_defaults = raw_config.get("defaults") or {}
        profiles = raw_config.get("profiles") or {}
        if not isinstance(global_defaults, dict) or not isinstance(profiles, dict):
            raise ConfigError("'defaults' and 'profiles' must be mappings.")

        target = profile_name or raw_config.get("default")
        if not target and profiles:
            # Implicit default: first profile
            target = next(iter(profiles))

        if target and target not in profiles:
            raise ConfigError(f"Profile '{target}' not found in configuration.")

        settings = dict(profiles[target]) if target else {}
        return Config(profile=target, settings=settings, global_defaults=dict(global_defaults))
