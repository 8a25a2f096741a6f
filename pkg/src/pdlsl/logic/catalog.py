"""Symbol catalogs: the legal articulators, directions, places and configurations."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..errors import ConfigError
from .syntax import DIRECTIONS, At, Cfg, Dir, Direction, Sort, Touch


@dataclass(frozen=True)
class Catalog:
    articulators: tuple[str, ...]
    places: tuple[str, ...]
    configs: tuple[str, ...]
    directions: tuple[Direction, ...] = DIRECTIONS
    _universe: frozenset = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        for name in ("articulators", "places", "configs"):
            values = tuple(getattr(self, name))
            if len(set(values)) != len(values):
                raise ConfigError(f"duplicate id in catalog {name}: {values}")
            object.__setattr__(self, name, values)
        dirs = tuple(Direction(str(d)) for d in self.directions)
        # keep canonical order regardless of declaration order
        object.__setattr__(self, "directions", tuple(d for d in DIRECTIONS if d in dirs))
        if not self.directions:
            raise ConfigError("catalog declares no directions")
        if not self.articulators:
            raise ConfigError("catalog declares no articulators")

    def domain(self, sort: Sort) -> tuple:
        if sort is Sort.ARTICULATOR:
            return self.articulators
        if sort is Sort.PLACE:
            return self.places
        if sort is Sort.CONFIG:
            return self.configs
        if sort is Sort.DIRECTION:
            return self.directions
        raise ValueError(f"sort {sort} has no static domain")

    def has(self, sort: Sort, name: str) -> bool:
        if sort is Sort.DIRECTION:
            return name in {d.value for d in self.directions}
        if sort is Sort.POSTURE:
            return False
        return name in self.domain(sort)

    def sorts_of(self, name: str) -> list[Sort]:
        return [s for s in (Sort.ARTICULATOR, Sort.DIRECTION, Sort.PLACE, Sort.CONFIG)
                if self.has(s, name)]

    def universe(self) -> frozenset:
        """Every ground atom the catalogs can generate."""
        if self._universe is None:
            atoms = []
            arts = self.articulators
            for b1 in arts:
                for b2 in arts:
                    if b1 != b2:
                        atoms.extend(Dir(b1, d, b2) for d in self.directions)
            atoms.extend(Cfg(b, c) for b in arts for c in self.configs)
            atoms.extend(At(b, p) for b in arts for p in self.places)
            atoms.extend(Touch(a, b) for i, a in enumerate(arts) for b in arts[i + 1:])
            object.__setattr__(self, "_universe", frozenset(atoms))
        return self._universe

    def to_dict(self) -> dict:
        return {
            "articulators": list(self.articulators),
            "directions": [d.value for d in self.directions],
            "places": list(self.places),
            "configs": list(self.configs),
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    @classmethod
    def from_dict(cls, data: dict) -> Catalog:
        try:
            return cls(
                articulators=tuple(data["articulators"]),
                places=tuple(data.get("places", ())),
                configs=tuple(data.get("configs", ())),
                directions=tuple(data.get("directions", [d.value for d in DIRECTIONS])),
            )
        except KeyError as exc:
            raise ConfigError(f"catalog is missing key {exc}") from None
        except ValueError as exc:
            raise ConfigError(f"bad catalog entry: {exc}") from None


def _parse_key_values(text: str) -> dict:
    data: dict[str, list[str]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"catalog line {lineno}: expected 'key = a, b, c'")
        key, _, values = line.partition("=")
        data[key.strip()] = [v.strip() for v in values.split(",") if v.strip()]
    return data


def load_catalog(path: str | Path) -> Catalog:
    """Read a catalog from JSON or from ``key = a, b, c`` lines."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        data = json.loads(text)
    else:
        data = _parse_key_values(text)
    return Catalog.from_dict(data)


def default_catalog() -> Catalog:
    text = resources.files("pdlsl.data").joinpath("catalog.txt").read_text(encoding="utf-8")
    return Catalog.from_dict(_parse_key_values(text))
