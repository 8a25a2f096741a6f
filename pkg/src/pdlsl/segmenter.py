"""Hold/movement segmentation from articulator speed."""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass

import numpy as np

from .errors import SegmentationError
from .trace import Trace


class Kind(str, enum.Enum):
    HOLD = "Hold"
    MOVEMENT = "Movement"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Segment:
    kind: Kind
    start: int
    end: int  # inclusive

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError(f"empty segment {self.start}..{self.end}")

    def __len__(self) -> int:
        return self.end - self.start + 1

    @property
    def is_hold(self) -> bool:
        return self.kind is Kind.HOLD


@dataclass(frozen=True)
class SegParams:
    v_hold: float = 0.5    # body scales per second
    min_hold: int = 3      # frames
    smooth_w: int = 5      # frames, odd

    def validate(self) -> list[str]:
        problems = []
        if not self.v_hold > 0:
            problems.append("v_hold must be > 0")
        if int(self.min_hold) != self.min_hold or self.min_hold < 1:
            problems.append("min_hold must be an integer >= 1")
        if int(self.smooth_w) != self.smooth_w or self.smooth_w < 1 or self.smooth_w % 2 == 0:
            problems.append("smooth_w must be an odd integer >= 1")
        return problems

    def to_dict(self) -> dict:
        return asdict(self)


def frame_speed(t: Trace) -> np.ndarray:
    """Per-frame speed in body scales per second, max over tracked articulators.

    Frame ``i`` gets the speed of the step from ``i-1`` to ``i``; frame 0 copies
    frame 1.  Frames where no articulator is tracked on both ends are NaN.
    """
    n = len(t)
    if not any(t.tracked(a).any() for a in t.positions):
        raise SegmentationError(f"{t.source or 'trace'}: no articulator is ever tracked")
    if n == 1:
        return np.zeros(1)
    dt = np.diff(t.times) / 1000.0
    scale = t.scale[1:]
    speeds = []
    for arr in t.positions.values():
        step = np.linalg.norm(np.diff(arr, axis=0), axis=1)
        speeds.append(step / dt / scale)
    stacked = np.vstack(speeds)
    with np.errstate(all="ignore"):
        all_nan = np.isnan(stacked).all(axis=0)
        best = np.where(all_nan, np.nan, np.max(np.where(np.isnan(stacked), -np.inf, stacked), axis=0))
    return np.concatenate([best[:1], best])


def smooth(values: np.ndarray, width: int) -> np.ndarray:
    """Centered moving average; windows shrink at the edges, NaNs are skipped."""
    if width <= 1:
        return np.nan_to_num(values, nan=0.0)
    half = width // 2
    valid = ~np.isnan(values)
    v = np.where(valid, values, 0.0)
    csum = np.concatenate([[0.0], np.cumsum(v)])
    ccount = np.concatenate([[0], np.cumsum(valid)])
    idx = np.arange(len(values))
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half + 1, len(values))
    total = csum[hi] - csum[lo]
    count = ccount[hi] - ccount[lo]
    return np.divide(total, count, out=np.zeros_like(total), where=count > 0)


def _runs(mask: np.ndarray) -> list[tuple[bool, int, int]]:
    change = np.flatnonzero(np.diff(mask.astype(np.int8))) + 1
    starts = np.concatenate([[0], change])
    ends = np.concatenate([change - 1, [len(mask) - 1]])
    return [(bool(mask[s]), int(s), int(e)) for s, e in zip(starts, ends)]


def segment(t: Trace, params: SegParams = SegParams()) -> list[Segment]:
    """Split a trace into alternating Hold and Movement segments covering every frame."""
    problems = params.validate()
    if problems:
        raise SegmentationError("; ".join(problems))
    speed = smooth(frame_speed(t), int(params.smooth_w))
    hold = speed < params.v_hold
    for is_hold, s, e in _runs(hold):
        if is_hold and e - s + 1 < params.min_hold:
            hold[s:e + 1] = False
    return [Segment(Kind.HOLD if h else Kind.MOVEMENT, s, e) for h, s, e in _runs(hold)]


def write_segments_csv(segs: list[Segment], fh, offset: int = 0, params: SegParams | None = None):
    if params is not None:
        for k, v in params.to_dict().items():
            fh.write(f"# {k}={v}\n")
    fh.write("kind,start,end\n")
    for s in segs:
        fh.write(f"{s.kind.value},{s.start + offset},{s.end + offset}\n")


def read_segments_csv(fh, offset: int = 0) -> list[Segment]:
    out = []
    for line in fh:
        line = line.strip()
        if not line or line.startswith("#") or line.startswith("kind,"):
            continue
        kind, start, end = line.split(",")
        out.append(Segment(Kind(kind), int(start) - offset, int(end) - offset))
    return out
