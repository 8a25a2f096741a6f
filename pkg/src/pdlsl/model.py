"""Model extraction: holds become propositional states, movements become edges."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import ModelError
from .logic.catalog import Catalog
from .logic.parser import parse_formula, parse_program
from .logic.printer import print_action, print_atom
from .logic.syntax import At, Atomic, Cfg, Dir, Direction, Move, Prop, Touch, Trill
from .segmenter import Kind, Segment
from .trace import Trace

REFERENCE = "HEAD"  # origin of the body-centric frame used by place regions


@dataclass(frozen=True)
class ModelParams:
    tau_touch: float = 0.35
    theta_move: float = 0.5
    theta_trill: float = 1.0

    def validate(self) -> list[str]:
        return [f"{k} must be > 0" for k, v in asdict(self).items() if not v > 0]

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class RegionCatalog:
    """Place rectangles ``(x0, y0, x1, y1)`` relative to HEAD, in body scales, y down."""

    regions: Mapping[str, tuple[float, float, float, float]]

    def __post_init__(self):
        fixed = {}
        for place, rect in self.regions.items():
            x0, y0, x1, y1 = (float(v) for v in rect)
            if x0 > x1 or y0 > y1:
                raise ModelError(f"region {place}: inverted rectangle {rect}")
            fixed[place] = (x0, y0, x1, y1)
        object.__setattr__(self, "regions", fixed)

    def contains(self, place: str, rel) -> bool:
        x0, y0, x1, y1 = self.regions[place]
        return x0 <= rel[0] <= x1 and y0 <= rel[1] <= y1

    def missing(self, catalog: Catalog) -> list[str]:
        return [p for p in catalog.places if p not in self.regions]

    def digest(self) -> str:
        blob = json.dumps(self.regions, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    @classmethod
    def from_dict(cls, data: Mapping) -> RegionCatalog:
        return cls({k: tuple(v) for k, v in data.items() if not k.startswith("_")})


def load_regions(path: str | Path) -> RegionCatalog:
    return RegionCatalog.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def default_regions() -> RegionCatalog:
    text = resources.files("pdlsl.data").joinpath("regions.json").read_text(encoding="utf-8")
    return RegionCatalog.from_dict(json.loads(text))


@dataclass(frozen=True)
class StateNode:
    id: int
    interval: tuple[int, int]
    props_true: frozenset
    props_false: frozenset
    props_unknown: frozenset

    def value(self, atom) -> bool | None:
        if atom in self.props_true:
            return True
        if atom in self.props_false:
            return False
        return None


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    actions: frozenset
    interval: tuple[int, int] | None = None  # movement frames realizing the edge

    @property
    def is_loop(self) -> bool:
        return self.src == self.dst


@dataclass(frozen=True, eq=False)
class Lts:
    states: tuple[StateNode, ...]
    edges: tuple[Edge, ...]
    universe: frozenset
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.states)

    def validate(self) -> None:
        """Raise ModelError unless the partition and chain invariants hold."""
        for s in self.states:
            parts = (s.props_true, s.props_false, s.props_unknown)
            if sum(map(len, parts)) != len(self.universe) or frozenset().union(*parts) != self.universe:
                raise ModelError(f"state {s.id}: atom sets do not partition the universe")
        for a, b in zip(self.states, self.states[1:]):
            if a.interval[1] >= b.interval[0]:
                raise ModelError(f"states {a.id} and {b.id} are not time-ordered")
        chain = sorted((e.src, e.dst) for e in self.edges if not e.is_loop)
        if chain != [(i, i + 1) for i in range(len(self.states) - 1)]:
            raise ModelError("chain edges do not form a path through the states in order")
        for e in self.edges:
            if not e.actions or any(not isinstance(a, (Move, Trill)) for a in e.actions):
                raise ModelError(f"edge {e.src}->{e.dst}: bad action set")

    def to_json(self, offset: int = 0) -> dict:
        def atoms(xs):
            return sorted(print_atom(a) for a in xs)

        return {
            "states": [
                {"id": s.id, "interval": [s.interval[0] + offset, s.interval[1] + offset],
                 "true": atoms(s.props_true), "false": atoms(s.props_false),
                 "unknown": atoms(s.props_unknown)}
                for s in self.states
            ],
            "edges": [
                {"from": e.src, "to": e.dst,
                 "actions": sorted(print_action(a) for a in e.actions),
                 "interval": None if e.interval is None
                 else [e.interval[0] + offset, e.interval[1] + offset]}
                for e in self.edges
            ],
            "metadata": {**self.metadata, "frame_offset": offset},
        }

    @classmethod
    def from_json(cls, data: Mapping, catalog: Catalog | None = None) -> Lts:
        meta = dict(data.get("metadata", {}))
        if catalog is None:
            if "catalog" not in meta:
                raise ModelError("LTS JSON has no embedded catalog; pass one explicitly")
            catalog = Catalog.from_dict(meta["catalog"])
        offset = int(meta.get("frame_offset", 0))
        cache: dict[str, object] = {}

        def atom(text):
            if text not in cache:
                node = parse_formula(text, catalog)
                if not isinstance(node, Prop):
                    raise ModelError(f"not an atom: {text!r}")
                cache[text] = node.atom
            return cache[text]

        def action(text):
            node = parse_program(text, catalog)
            if not isinstance(node, Atomic):
                raise ModelError(f"not an atomic action: {text!r}")
            return node.action

        try:
            states = tuple(
                StateNode(int(s["id"]), (s["interval"][0] - offset, s["interval"][1] - offset),
                          frozenset(map(atom, s["true"])), frozenset(map(atom, s["false"])),
                          frozenset(map(atom, s["unknown"])))
                for s in data["states"])
            edges = tuple(
                Edge(int(e["from"]), int(e["to"]), frozenset(map(action, e["actions"])),
                     None if e.get("interval") is None
                     else (e["interval"][0] - offset, e["interval"][1] - offset))
                for e in data["edges"])
        except (KeyError, TypeError, IndexError) as exc:
            raise ModelError(f"malformed LTS JSON: {exc}") from None
        universe = frozenset().union(*(s.props_true | s.props_false | s.props_unknown
                                       for s in states)) if states else frozenset()
        meta.pop("frame_offset", None)
        lts = cls(states, edges, universe, meta)
        lts.validate()
        return lts


# -- evaluation of atoms and actions ------------------------------------------


def representative_frame(t: Trace, start: int, end: int, articulators) -> int:
    """Median frame of the interval where every articulator is tracked, else where any is."""
    frames = np.arange(start, end + 1)
    present = [t.tracked(a)[start:end + 1] for a in articulators if a in t.positions]
    if present:
        stack = np.vstack(present)
        for mask in (stack.all(axis=0), stack.any(axis=0)):
            if mask.any():
                cand = frames[mask]
                return int(cand[(len(cand) - 1) // 2])
    return int(frames[(len(frames) - 1) // 2])


def _atom_value(atom, pos, t: Trace, k: int, regions: RegionCatalog, params: ModelParams):
    scale = t.scale[k]
    if isinstance(atom, Dir):
        p1, p2 = pos.get(atom.b1), pos.get(atom.b2)
        if p1 is None or p2 is None:
            return None
        v = p1 - p2
        return Direction.from_vector(v[0], v[1]) == atom.d
    if isinstance(atom, Touch):
        p1, p2 = pos.get(atom.b1), pos.get(atom.b2)
        if p1 is None or p2 is None:
            return None
        return bool(np.linalg.norm(p1 - p2) < params.tau_touch * scale)
    if isinstance(atom, At):
        p, ref = pos.get(atom.b), pos.get(REFERENCE)
        if p is None or ref is None or atom.p not in regions.regions:
            return None
        return regions.contains(atom.p, (p - ref) / scale)
    if isinstance(atom, Cfg):
        if pos.get(atom.b) is None:
            return None
        label = t.label(atom.b, k)
        if label is None:
            return None
        return label == atom.c
    raise TypeError(atom)


def eval_props_at(t: Trace, k: int, catalog: Catalog, regions: RegionCatalog,
                  params: ModelParams = ModelParams()):
    pos = {a: t.position(a, k) for a in catalog.articulators}
    pos = {a: p for a, p in pos.items() if p is not None}
    true, false, unknown = set(), set(), set()
    for atom in catalog.universe():
        v = _atom_value(atom, pos, t, k, regions, params)
        (unknown if v is None else true if v else false).add(atom)
    return frozenset(true), frozenset(false), frozenset(unknown)


def eval_props(t: Trace, hold: Segment, catalog: Catalog, regions: RegionCatalog,
               params: ModelParams = ModelParams()):
    """Three-valued atom evaluation at the representative frame of a hold."""
    if hold.kind is not Kind.HOLD:
        raise ModelError(f"eval_props needs a Hold segment, got {hold.kind}")
    if len(hold) <= 0:
        raise ModelError("empty hold interval")
    k = representative_frame(t, hold.start, hold.end, catalog.articulators)
    return eval_props_at(t, k, catalog, regions, params)


def eval_actions(t: Trace, mv: Segment, catalog: Catalog,
                 params: ModelParams = ModelParams()) -> frozenset:
    """Directed move, trill or nothing for each tracked articulator of a movement.

    Displacement is measured from the frame preceding the movement (the end of
    the previous hold) to the movement's last frame.
    """
    if mv.kind is not Kind.MOVEMENT:
        raise ModelError(f"eval_actions needs a Movement segment, got {mv.kind}")
    lo = max(mv.start - 1, 0)
    scale = float(np.mean(t.scale[lo:mv.end + 1]))
    out = set()
    for b in catalog.articulators:
        if b not in t.positions:
            continue
        arr = t.positions[b][lo:mv.end + 1]
        pts = arr[~np.isnan(arr).any(axis=1)]
        if len(pts) < 2:
            continue
        net = pts[-1] - pts[0]
        path = float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())
        if np.linalg.norm(net) >= params.theta_move * scale:
            out.add(Move(b, Direction.from_vector(net[0], net[1])))
        elif path >= params.theta_trill * scale:
            out.add(Trill(b))
    return frozenset(out)


# -- assembly -----------------------------------------------------------------


def _normalize(segs: list[Segment], n: int) -> list[Segment]:
    if not segs:
        raise ModelError("empty segment list")
    pos = 0
    for k, s in enumerate(segs):
        if s.start != pos:
            raise ModelError(f"segment {k} starts at {s.start}, expected {pos}")
        if k and s.kind == segs[k - 1].kind:
            raise ModelError(f"segments {k - 1} and {k} do not alternate")
        pos = s.end + 1
    if pos != n:
        raise ModelError(f"segments cover {pos} frames, trace has {n}")
    segs = list(segs)
    H, M = Kind.HOLD, Kind.MOVEMENT
    if segs[0].kind is M:
        first = segs[0]
        if len(segs) > 1 and len(first) == 1:
            segs[:2] = [Segment(H, 0, segs[1].end)]
        elif len(first) > 1:
            segs[:1] = [Segment(H, 0, 0), Segment(M, 1, first.end)]
    if segs[-1].kind is M:
        last = segs[-1]
        if len(segs) > 1 and len(last) == 1:
            segs[-2:] = [Segment(H, segs[-2].start, n - 1)]
        elif len(last) > 1:
            segs[-1:] = [Segment(M, last.start, n - 2), Segment(H, n - 1, n - 1)]
    if any(s.kind is M for s in (segs[0], segs[-1])):
        raise ModelError("trace is a single movement too short to anchor states")
    return segs


def build_lts(t: Trace, segs: list[Segment], catalog: Catalog, regions: RegionCatalog,
              params: ModelParams = ModelParams()) -> Lts:
    """Assemble the time-ordered LTS from a hold/movement segmentation."""
    missing = regions.missing(catalog)
    if missing:
        raise ModelError(f"no region rectangle for place(s): {', '.join(missing)}")
    only_movement = len(segs) == 1 and segs[0].kind is Kind.MOVEMENT
    segs = _normalize(segs, len(t))
    holds = segs[0::2]
    moves = segs[1::2]
    actions = [eval_actions(t, m, catalog, params) for m in moves]
    if only_movement and not actions[0]:
        raise ModelError("trace is one movement with no detectable action")

    props_cache: dict[tuple[int, int], tuple] = {}

    def props(start: int, end: int):
        if (start, end) not in props_cache:
            k = representative_frame(t, start, end, catalog.articulators)
            props_cache[(start, end)] = eval_props_at(t, k, catalog, regions, params)
        return props_cache[(start, end)]

    states: list[StateNode] = []
    edges: list[Edge] = []
    merges = {"empty_action": 0, "self_loop": 0}
    cur = [holds[0].start, holds[0].end]
    loop_actions: set = set()
    loop_span: list[int] | None = None

    def finalize():
        sid = len(states)
        states.append(StateNode(sid, (cur[0], cur[1]), *props(cur[0], cur[1])))
        if loop_actions:
            edges.append(Edge(sid, sid, frozenset(loop_actions), tuple(loop_span)))
        return sid

    for mv, acts, nxt in zip(moves, actions, holds[1:]):
        if not acts:
            cur[1] = nxt.end
            merges["empty_action"] += 1
            continue
        if all(isinstance(a, Trill) for a in acts):
            here, there = props(*cur), props(nxt.start, nxt.end)
            if here[:2] == there[:2]:
                cur[1] = nxt.end
                loop_actions |= acts
                loop_span = [mv.start if loop_span is None else loop_span[0], mv.end]
                merges["self_loop"] += 1
                continue
        sid = finalize()
        edges.append(Edge(sid, sid + 1, acts, (mv.start, mv.end)))
        cur = [nxt.start, nxt.end]
        loop_actions = set()
        loop_span = None
    finalize()
    edges.sort(key=lambda e: (e.src, e.dst))
    meta = {
        "model_params": params.to_dict(),
        "catalog": catalog.to_dict(),
        "catalog_hash": catalog.digest(),
        "regions_hash": regions.digest(),
        "merges": merges,
        "source": t.source,
    }
    return Lts(tuple(states), tuple(edges), catalog.universe(), meta)
