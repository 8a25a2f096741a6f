"""Tracking traces: loading, gap filling and 3D to 2D projection.

Coordinates are image coordinates with the y axis pointing down.  Traces are
stored column-wise: one ``(n, dims)`` float array per articulator with NaN
rows for frames where the articulator was not tracked.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import TraceError
from .logic.catalog import Catalog

DEFAULT_MAX_GAP = 3
HEAD_WIDTH_COLUMN = "HEAD_w"


@dataclass(frozen=True)
class Frame:
    index: int
    time: float
    positions: dict[str, tuple[float, ...] | None]
    config_labels: dict[str, str]
    scale: float


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Trace:
    times: np.ndarray                       # (n,) milliseconds
    positions: Mapping[str, np.ndarray]     # articulator -> (n, dims), NaN = absent
    configs: Mapping[str, tuple]            # articulator -> per-frame label or None
    scale: np.ndarray                       # (n,) body-scale length, > 0
    frame_rate: float
    source: str = ""
    dims: int = 2
    first_index: int = 0
    _frames: list = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.times)
        if n == 0:
            raise TraceError(f"{self.source or 'trace'}: zero frames")
        if np.any(np.diff(self.times) <= 0):
            raise TraceError(f"{self.source or 'trace'}: timestamps must strictly increase")
        scale = np.broadcast_to(np.asarray(self.scale, dtype=float), (n,)).copy()
        if not np.all(scale > 0):
            raise TraceError(f"{self.source or 'trace'}: body scale must be positive")
        object.__setattr__(self, "scale", _readonly(scale))
        object.__setattr__(self, "times", _readonly(np.asarray(self.times, dtype=float).copy()))
        pos = {}
        for art, arr in self.positions.items():
            arr = np.asarray(arr, dtype=float).reshape(n, -1).copy()
            if arr.shape[1] != self.dims:
                raise TraceError(f"{art}: expected {self.dims} coordinates, got {arr.shape[1]}")
            pos[art] = _readonly(arr)
        object.__setattr__(self, "positions", pos)
        cfg = {art: tuple(v) for art, v in self.configs.items()}
        for art, labels in cfg.items():
            if len(labels) != n:
                raise TraceError(f"{art}: {len(labels)} config labels for {n} frames")
        object.__setattr__(self, "configs", cfg)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def articulators(self) -> tuple[str, ...]:
        return tuple(self.positions)

    def tracked(self, art: str) -> np.ndarray:
        """Boolean mask of frames where ``art`` has a position."""
        arr = self.positions.get(art)
        if arr is None:
            return np.zeros(len(self), dtype=bool)
        return ~np.isnan(arr).any(axis=1)

    def position(self, art: str, i: int) -> np.ndarray | None:
        arr = self.positions.get(art)
        if arr is None or np.isnan(arr[i]).any():
            return None
        return arr[i]

    def label(self, art: str, i: int) -> str | None:
        labels = self.configs.get(art)
        return None if labels is None else labels[i]

    def frame(self, i: int) -> Frame:
        return Frame(
            index=self.first_index + i,
            time=float(self.times[i]),
            positions={a: (None if (p := self.position(a, i)) is None else tuple(map(float, p)))
                       for a in self.positions},
            config_labels={a: l for a in self.configs if (l := self.label(a, i)) is not None},
            scale=float(self.scale[i]),
        )

    @property
    def frames(self) -> list[Frame]:
        if self._frames is None:
            object.__setattr__(self, "_frames", [self.frame(i) for i in range(len(self))])
        return self._frames

    def with_positions(self, positions: Mapping[str, np.ndarray], dims: int | None = None) -> Trace:
        return replace(self, positions=positions, dims=dims or self.dims, _frames=None)

    def without_configs(self) -> Trace:
        return replace(self, configs={}, _frames=None)


def _cell(value) -> float:
    if value is None:
        return math.nan
    if isinstance(value, (int, float)):
        return float(value)
    text = str(value).strip()
    if not text:
        return math.nan
    try:
        return float(text)
    except ValueError:
        return math.nan


def _columns(fieldnames, catalog: Catalog | None, source: str):
    if not fieldnames:
        raise TraceError(f"{source}: missing header")
    names = [f.strip() for f in fieldnames]
    for required in ("frame", "t_ms"):
        if required not in names:
            raise TraceError(f"{source}: header lacks required column {required!r}")
    coords: dict[str, dict[str, str]] = {}
    cfg_cols: dict[str, str] = {}
    width_col = None
    for name in names:
        if name in ("frame", "t_ms"):
            continue
        if name == HEAD_WIDTH_COLUMN:
            width_col = name
            continue
        art, _, suffix = name.rpartition("_")
        if not art or suffix not in ("x", "y", "z", "cfg"):
            raise TraceError(f"{source}: unrecognized column {name!r}")
        if catalog is not None and art not in catalog.articulators:
            raise TraceError(f"{source}: unknown articulator column {name!r}")
        if suffix == "cfg":
            cfg_cols[art] = name
        else:
            coords.setdefault(art, {})[suffix] = name
    dims = None
    for art, axes in coords.items():
        if "x" not in axes or "y" not in axes:
            raise TraceError(f"{source}: articulator {art} needs both _x and _y columns")
        d = 3 if "z" in axes else 2
        if dims is not None and d != dims:
            raise TraceError(f"{source}: mixed 2D and 3D articulator columns")
        dims = d
    return coords, cfg_cols, width_col, dims or 2


def trace_from_rows(rows: list[dict], fieldnames, *, catalog: Catalog | None = None,
                    source: str = "", frame_rate: float | None = None,
                    scale: float | None = None) -> Trace:
    """Build a trace from dict rows using the ``<ART>_x/_y[/_z][/_cfg]`` convention."""
    coords, cfg_cols, width_col, dims = _columns(fieldnames, catalog, source)
    if not rows:
        raise TraceError(f"{source}: zero frames")
    n = len(rows)
    try:
        index = [int(float(r["frame"])) for r in rows]
        times = np.array([float(r["t_ms"]) for r in rows])
    except (TypeError, ValueError, KeyError) as exc:
        raise TraceError(f"{source}: bad frame/t_ms value ({exc})") from None
    if np.any(np.diff(times) <= 0):
        bad = int(np.argmax(np.diff(times) <= 0)) + 1
        raise TraceError(f"{source}: non-monotone timestamp at row {bad}")
    if index != list(range(index[0], index[0] + n)):
        raise TraceError(f"{source}: frame indices must be contiguous")
    axes = ("x", "y", "z")[:dims]
    positions = {}
    for art, cols in coords.items():
        arr = np.array([[_cell(r.get(cols[a])) for a in axes] for r in rows], dtype=float)
        # a position with any missing coordinate is absent as a whole
        arr[np.isnan(arr).any(axis=1)] = np.nan
        positions[art] = arr
    configs = {}
    for art, col in cfg_cols.items():
        configs[art] = tuple((str(r.get(col) or "").strip() or None) for r in rows)
    if width_col is not None:
        widths = np.array([_cell(r.get(width_col)) for r in rows])
        fallback = scale if scale is not None else np.nanmedian(widths)
        if np.isnan(fallback):
            fallback = 1.0
        scale_arr = np.where(np.isnan(widths) | (widths <= 0), fallback, widths)
    else:
        scale_arr = np.full(n, float(scale) if scale is not None else 1.0)
    if frame_rate is None:
        frame_rate = 1000.0 / float(np.median(np.diff(times))) if n > 1 else 25.0
    return Trace(times=times, positions=positions, configs=configs, scale=scale_arr,
                 frame_rate=frame_rate, source=source, dims=dims, first_index=index[0])


def load_trace(path: str | Path, format: str | None = None, catalog: Catalog | None = None,
               *, scale: float | None = None, frame_rate: float | None = None) -> Trace:
    """Read a CSV or JSON trace file.

    Empty or unparseable coordinate cells become absent positions.  ``scale``
    is the body-scale length used when the file has no ``HEAD_w`` column.
    """
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".") or "csv").lower()
    source = str(path)
    if fmt == "csv":
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            fieldnames = reader.fieldnames
            rows = list(reader)
    elif fmt == "json":
        data = json.loads(path.read_text(encoding="utf-8"))
        if not isinstance(data, list):
            raise TraceError(f"{source}: expected a JSON array of frame objects")
        rows = data
        fieldnames = list(dict.fromkeys(k for r in rows for k in r)) if rows else None
    else:
        raise TraceError(f"unsupported trace format {fmt!r}")
    return trace_from_rows(rows, fieldnames, catalog=catalog, source=source,
                           frame_rate=frame_rate, scale=scale)


def project_2d(t: Trace) -> Trace:
    """Drop the depth (camera axis) coordinate of a 3D trace."""
    if t.dims != 3:
        raise TraceError(f"project_2d needs a 3D trace, got dims={t.dims}")
    return t.with_positions({a: p[:, :2] for a, p in t.positions.items()}, dims=2)


def _fill(arr: np.ndarray, max_gap: int) -> np.ndarray:
    out = arr.copy()
    missing = np.isnan(arr).any(axis=1)
    n = len(arr)
    i = 0
    while i < n:
        if not missing[i]:
            i += 1
            continue
        j = i
        while j < n and missing[j]:
            j += 1
        # run [i, j); interior runs only
        if i > 0 and j < n and j - i <= max_gap:
            a, b = arr[i - 1], arr[j]
            span = j - i + 1
            for k in range(i, j):
                w = (k - i + 1) / span
                out[k] = a + w * (b - a)
        i = j
    return out


def fill_gaps(t: Trace, max_gap: int = DEFAULT_MAX_GAP) -> Trace:
    """Linearly interpolate interior runs of at most ``max_gap`` absent frames."""
    if max_gap < 0:
        raise ValueError("max_gap must be >= 0")
    if max_gap == 0:
        return t
    return t.with_positions({a: _fill(p, max_gap) for a, p in t.positions.items()})


def write_trace_csv(t: Trace, path: str | Path) -> None:
    """Write a trace in the CSV layout accepted by :func:`load_trace`."""
    axes = ("x", "y", "z")[:t.dims]
    header = ["frame", "t_ms"]
    for art in t.positions:
        header += [f"{art}_{a}" for a in axes]
    for art in t.configs:
        header.append(f"{art}_cfg")
    header.append(HEAD_WIDTH_COLUMN)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i in range(len(t)):
            row = [t.first_index + i, f"{t.times[i]:g}"]
            for art, arr in t.positions.items():
                row += ["" if np.isnan(v) else f"{v:.6g}" for v in arr[i]]
            for art in t.configs:
                row.append(t.configs[art][i] or "")
            row.append(f"{t.scale[i]:.6g}")
            w.writerow(row)
