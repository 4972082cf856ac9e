"""JSON fan files: ``{"name": ..., "rays": [[...], ...], "max_cones": [[...], ...]}``."""

import json
from dataclasses import dataclass
from typing import Any, List

from toricount.toric import Fan

FIELDS = ("name", "rays", "max_cones")


class FanFileError(Exception):
    """Raised when a fan file cannot be read or does not have the expected shape."""

    pass


def _int_rows(value: Any, what: str) -> List[List[int]]:
    if not isinstance(value, list):
        raise FanFileError(f"'{what}' must be a list of integer lists")
    rows = []
    for k, row in enumerate(value):
        if not isinstance(row, list) or not all(isinstance(c, int) and not isinstance(c, bool) for c in row):
            raise FanFileError(f"'{what}[{k}]' must be a list of integers, got {row!r}")
        rows.append(list(row))
    return rows


@dataclass(frozen=True)
class FanFile:
    name: str
    rays: List[List[int]]
    max_cones: List[List[int]]

    @classmethod
    def parse(cls, text: str) -> "FanFile":
        """Parse a JSON object with the fields ``name``, ``rays`` and ``max_cones``.

        ``rays`` and ``max_cones`` are required. A missing ``name`` parses as the empty string, which
        ``to_fan`` keeps as the fan name. Any other field is rejected.

        Raises:
            FanFileError: on malformed JSON, unknown or missing fields, or bad ray and cone rows.
        """
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as e:
            raise FanFileError(f"invalid JSON: {e}")
        if not isinstance(raw, dict):
            raise FanFileError("fan file root must be an object")
        unknown = sorted(set(raw) - set(FIELDS))
        if unknown:
            raise FanFileError(f"unknown fields: {', '.join(unknown)}")
        missing = [key for key in ("rays", "max_cones") if key not in raw]
        if missing:
            raise FanFileError(f"missing fields: {', '.join(missing)}")
        name = raw.get("name", "")
        if not isinstance(name, str):
            raise FanFileError(f"'name' must be a string, got {name!r}")

        rays = _int_rows(raw["rays"], "rays")
        if not rays:
            raise FanFileError("'rays' must not be empty")
        if len({len(r) for r in rays}) != 1:
            raise FanFileError("all rays must have the same length")
        seen = set()
        for k, ray in enumerate(rays):
            if tuple(ray) in seen:
                raise FanFileError(f"ray {k} = {ray} is a duplicate")
            seen.add(tuple(ray))

        max_cones = _int_rows(raw["max_cones"], "max_cones")
        for k, cone in enumerate(max_cones):
            bad = [i for i in cone if i < 0 or i >= len(rays)]
            if bad:
                raise FanFileError(f"max_cones[{k}] refers to rays {bad} outside 0..{len(rays) - 1}")
        return cls(name, rays, max_cones)

    @classmethod
    def load(cls, path: str) -> "FanFile":
        try:
            with open(path, "r", encoding="utf-8") as f:
                text = f.read()
        except OSError as e:
            raise FanFileError(f"cannot read {path}: {e}")
        return cls.parse(text)

    @classmethod
    def from_fan(cls, fan: Fan) -> "FanFile":
        return cls(fan.name, [list(r) for r in fan.rays], [list(c) for c in fan.max_cones])

    def to_fan(self) -> Fan:
        return Fan(tuple(tuple(r) for r in self.rays), tuple(tuple(c) for c in self.max_cones), self.name)

    def dumps(self) -> str:
        return json.dumps({"name": self.name, "rays": self.rays, "max_cones": self.max_cones}, indent=2) + "\n"

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.dumps())
