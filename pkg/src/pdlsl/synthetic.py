"""Analytic keyframed traces for tests, demos and benchmarks.

Poses are given in body scales relative to the head, y down.  Between two
keyframes an articulator follows a cosine-eased straight line, so its speed
is zero at both keyframes; repeating a pose at two consecutive keyframes
yields a hold.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .trace import Trace

SCALE = 40.0                 # pixels per body scale
HEAD_PX = (320.0, 100.0)
FPS = 25.0

Pose = Mapping[str, tuple[float, float]]

REST: dict[str, tuple[float, float]] = {"RH": (-0.2, 7.5), "LH": (0.2, 6.0)}


@dataclass(frozen=True)
class Case:
    """A synthetic trace with the hold intervals and annotation it was built to contain."""

    name: str
    trace: Trace
    holds: tuple[tuple[int, int], ...]
    property: str | None = None
    interval: tuple[int, int] | None = None
    notes: dict = field(default_factory=dict)


def keyframe_trace(keys: Sequence[tuple[int, Pose]], n: int, *,
                   labels: Mapping[str, Sequence[tuple[int, int, str]]] | None = None,
                   scale: float = SCALE, fps: float = FPS, head=HEAD_PX,
                   source: str = "synthetic") -> Trace:
    """Build a 2D trace from ``(frame, pose)`` keyframes.

    ``labels`` maps an articulator to ``(start, end, label)`` spans, inclusive.
    HEAD is tracked at ``head`` unless a pose moves it.
    """
    keys = sorted(keys, key=lambda k: k[0])
    arts = sorted({a for _, pose in keys for a in pose} | {"HEAD"})
    frames = np.arange(n)
    positions = {}
    for art in arts:
        pts = [(f, np.asarray(pose[art], dtype=float)) for f, pose in keys if art in pose]
        if art == "HEAD" and not pts:
            pts = [(0, np.zeros(2))]
        out = np.empty((n, 2))
        kf = np.array([f for f, _ in pts])
        for i in frames:
            k = int(np.searchsorted(kf, i, side="right")) - 1
            if k < 0:
                out[i] = pts[0][1]
            elif k >= len(pts) - 1:
                out[i] = pts[-1][1]
            else:
                (f0, p0), (f1, p1) = pts[k], pts[k + 1]
                u = (i - f0) / (f1 - f0)
                w = 0.5 - 0.5 * np.cos(np.pi * u)
                out[i] = p0 + w * (p1 - p0)
        positions[art] = out * scale + np.asarray(head)
    configs = {}
    for art, spans in (labels or {}).items():
        col: list[str | None] = [None] * n
        for s, e, label in spans:
            for i in range(max(s, 0), min(e, n - 1) + 1):
                col[i] = label
        configs[art] = tuple(col)
    times = frames * (1000.0 / fps)
    return Trace(times=times, positions=positions, configs=configs,
                 scale=np.full(n, scale), frame_rate=fps, source=source)


def _moved(pose: Pose, **changes) -> dict:
    return {**pose, **changes}


def _holds(keys) -> tuple[tuple[int, int], ...]:
    out = []
    for (f0, p0), (f1, p1) in zip(keys, keys[1:]):
        if dict(p0) == dict(p1):
            out.append((f0, f1))
    return tuple(out)


def constant_case(n: int = 200) -> Case:
    keys = [(0, REST)]
    return Case("constant", keyframe_trace(keys, n, source="constant"), ((0, n - 1),))


def three_phase_case(n: int = 200) -> Case:
    """Hold, one movement, hold."""
    up = _moved(REST, RH=(-2.0, 3.0))
    keys = [(0, REST), (69, REST), (89, up), (n - 1, up)]
    return Case("three_phase", keyframe_trace(keys, n, source="three_phase"), _holds(keys))


def opposition_case(n: int = 200, labelled: bool = True) -> Case:
    """Hands brought to either side of the body with the same configuration, then lowered."""
    opp = {"RH": (-1.5, 3.0), "LH": (1.5, 3.0)}
    keys = [(0, REST), (39, REST), (59, opp), (139, opp), (159, REST), (n - 1, REST)]
    labels = {"RH": [(59, 139, "L_FORM")], "LH": [(59, 139, "L_FORM")]} if labelled else None
    t = keyframe_trace(keys, n, labels=labels, source="opposition")
    return Case("opposition", t, _holds(keys), "opposition", (59, 139))


def tap_case(n: int = 200) -> Case:
    """Hands apart, brought together for one hold, then apart again."""
    apart = {"RH": (-2.0, 3.0), "LH": (2.0, 3.0)}
    touch = {"RH": (-0.1, 3.0), "LH": (0.1, 3.0)}
    keys = [(0, REST), (29, REST), (49, apart), (79, apart), (94, touch), (114, touch),
            (129, apart), (159, apart), (179, REST), (n - 1, REST)]
    t = keyframe_trace(keys, n, source="tap")
    return Case("tap", t, _holds(keys), "tap", (49, 159))


def _one_hand_signing(anchor: tuple[float, float], n: int, source: str, prop: str) -> Case:
    up = {"RH": (-2.0, 3.0), "LH": anchor}
    keys = [(0, REST), (29, REST), (49, up), (79, up),
            (94, _moved(up, RH=(-3.0, 1.5))), (119, _moved(up, RH=(-3.0, 1.5))),
            (134, _moved(up, RH=(-1.5, 4.5))), (159, _moved(up, RH=(-1.5, 4.5))),
            (174, _moved(up, RH=(-2.5, 2.0))), (n - 1, _moved(up, RH=(-2.5, 2.0)))]
    t = keyframe_trace(keys, n, source=source)
    return Case(source, t, _holds(keys), prop, (49, n - 1))


def buoy_case(n: int = 200) -> Case:
    """Both hands rise, then the right hand alone moves through three more holds."""
    return _one_hand_signing((1.5, 3.0), n, "buoy", "buoy")


def head_anchor_case(n: int = 200) -> Case:
    """Like :func:`buoy_case` but the left hand rests against the head."""
    return _one_hand_signing((0.2, 0.0), n, "head_anchor", "head_anchor")


def always_touching_case(n: int = 200) -> Case:
    """Hands in contact for the whole trace while moving together."""
    a = {"RH": (-0.1, 3.0), "LH": (0.1, 3.0)}
    b = {"RH": (1.4, 2.0), "LH": (1.6, 2.0)}
    keys = [(0, a), (49, a), (69, b), (119, b), (139, a), (n - 1, a)]
    return Case("always_touching", keyframe_trace(keys, n, source="always_touching"), _holds(keys))


def random_case(n: int = 10_000, seed: int = 0) -> Case:
    """Long trace alternating random holds and movements of RH, LH and HEAD."""
    rng = np.random.default_rng(seed)
    configs = ["L_FORM", "FIST_FORM", "KEY_CONFIG", "BEAK_CONFIG", "OPENPALM_CONFIG"]
    pose = {"RH": REST["RH"], "LH": REST["LH"], "HEAD": (0.0, 0.0)}
    keys = [(0, pose)]
    labels: dict[str, list] = {"RH": [], "LH": []}
    f = 0
    while True:
        hold = int(rng.integers(20, 50))
        move = int(rng.integers(12, 25))
        if f + hold + move >= n - 1:
            break
        f += hold
        keys.append((f, pose))
        for art in ("RH", "LH"):
            labels[art].append((keys[-2][0], f, configs[int(rng.integers(len(configs)))]))
        pose = {"RH": tuple(rng.uniform([-3.0, 0.0], [0.5, 6.0])),
                "LH": tuple(rng.uniform([-0.5, 0.0], [3.0, 6.0])),
                "HEAD": tuple(rng.uniform(-0.3, 0.3, size=2)) if rng.random() < 0.2 else pose["HEAD"]}
        f += move
        keys.append((f, pose))
    keys.append((n - 1, pose))
    t = keyframe_trace(keys, n, labels=labels, source=f"random-{seed}")
    return Case(f"random-{seed}", t, _holds(keys))


def property_cases() -> list[Case]:
    return [opposition_case(), tap_case(), buoy_case(), head_anchor_case()]
