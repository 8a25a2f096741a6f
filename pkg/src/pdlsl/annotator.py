"""Annotation proposals from satisfied properties, and scoring against gold."""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .checker import Mode, ModelChecker, Verdict, template_results
from .errors import EvaluationError, ParseError
from .logic.catalog import Catalog, default_catalog
from .logic.parser import Definition, parse_definitions
from .logic.reduce import beta_reduce, check_acyclic
from .logic.syntax import And, Box, Star, as_implication
from .model import Lts

log = logging.getLogger(__name__)

HEAD_ANCHOR_REGION = (
    r"\s:Articulator, w:Articulator, posture:Posture . ( buoy(s, posture) & at(w,HEAD) )"
)


# -- property database --------------------------------------------------------


@dataclass
class PropertyDB:
    catalog: Catalog
    definitions: dict[str, Definition] = field(default_factory=dict)

    @property
    def env(self) -> dict[str, object]:
        return {name: d.value for name, d in self.definitions.items()}

    @property
    def properties(self) -> list[str]:
        return [name for name, d in self.definitions.items() if not d.helper]

    def __len__(self) -> int:
        return len(self.properties)

    def __contains__(self, name: str) -> bool:
        return name in self.definitions

    def reduced(self, name: str):
        return beta_reduce(self.definitions[name].value, self.env, self.catalog)

    def extend(self, text: str) -> PropertyDB:
        """Append definitions parsed from ``text``; names must be new."""
        defs = parse_definitions(text, self.catalog, known=self.env)
        clash = [d.name for d in defs if d.name in self.definitions]
        if clash:
            raise ParseError(f"duplicate definition {clash[0]!r}", defs[0].line, 1)
        merged = dict(self.definitions)
        merged.update({d.name: d for d in defs})
        return PropertyDB(self.catalog, merged)

    def replace(self, name: str, text: str) -> PropertyDB:
        """Redefine ``name`` in place (same position, same helper flag)."""
        old = self.definitions[name]
        env = {k: v for k, v in self.env.items() if k != name}
        (new,) = parse_definitions(f"{name} = {text}", self.catalog, known=env)
        merged = {k: (Definition(name, new.value, old.helper, old.line) if k == name else v)
                  for k, v in self.definitions.items()}
        return PropertyDB(self.catalog, merged)


def parse_property_db(text: str, catalog: Catalog | None = None) -> PropertyDB:
    catalog = catalog or default_catalog()
    defs = parse_definitions(text, catalog)
    db = PropertyDB(catalog, {d.name: d for d in defs})
    check_acyclic(db.env)
    return db


def load_property_db(path: str | Path, catalog: Catalog | None = None) -> PropertyDB:
    return parse_property_db(Path(path).read_text(encoding="utf-8"), catalog)


def default_property_db(catalog: Catalog | None = None) -> PropertyDB:
    text = resources.files("pdlsl.data").joinpath("properties.pdlsl").read_text(encoding="utf-8")
    return parse_property_db(text, catalog)


# -- annotation ---------------------------------------------------------------


@dataclass(frozen=True)
class Annotation:
    property: str
    start: int
    end: int
    binding: Mapping[str, str]
    verdict: Verdict
    witness_states: tuple[int, ...]

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError(f"annotation interval {self.start}..{self.end} is empty")
        if not self.witness_states or list(self.witness_states) != sorted(self.witness_states):
            raise ValueError("witness states must be nonempty and time-ordered")

    def to_json(self, offset: int = 0) -> dict:
        return {
            "property": self.property,
            "start": self.start + offset,
            "end": self.end + offset,
            "binding": dict(self.binding),
            "verdict": self.verdict.value,
            "states": list(self.witness_states),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> Annotation:
        return cls(str(data["property"]), int(data["start"]), int(data["end"]),
                   dict(data.get("binding", {})), Verdict(data.get("verdict", "true")),
                   tuple(data.get("states") or (0,)))


def _witness(mc: ModelChecker, f, s: int, accept) -> set[int] | None:
    """States visited while confirming that ``f`` holds non-vacuously at ``s``.

    Every antecedent of an implication chain must itself be accepted and
    witnessed, and every box on the way needs a successor; for a starred
    program that means at least one real step.  None when vacuous.
    """
    imp = as_implication(f)
    if imp is not None:
        ante, cons = imp
        if mc.verdict(ante, s) not in accept:
            return None
        w1 = _witness(mc, ante, s, accept)
        w2 = None if w1 is None else _witness(mc, cons, s, accept)
        return None if w2 is None else w1 | w2
    if isinstance(f, And):
        w1 = _witness(mc, f.left, s, accept)
        w2 = None if w1 is None else _witness(mc, f.right, s, accept)
        return None if w2 is None else w1 | w2
    if isinstance(f, Box):
        if isinstance(f.program, Star) and not mc.matrix(f.program.arg)[s].any():
            return None
        succ = mc.successors(f.program, s)
        if not succ:
            return None
        out = {s}
        for t in succ:
            w = _witness(mc, f.body, t, accept)
            if w is None:
                return None
            out |= w
        return out
    return {s}


_RANK = {Verdict.TRUE: 0, Verdict.UNKNOWN: 1}


def _keep_maximal(cands: list[Annotation]) -> list[Annotation]:
    """One annotation per interval, dropping intervals nested in an equally strong one."""
    best: dict[tuple[int, int], Annotation] = {}
    for a in cands:
        key = (a.start, a.end)
        if key not in best or _RANK[a.verdict] < _RANK[best[key].verdict]:
            best[key] = a
    kept = []
    for a in best.values():
        nested = any(
            (b.start, b.end) != (a.start, a.end) and b.start <= a.start and a.end <= b.end
            and _RANK[b.verdict] <= _RANK[a.verdict]
            for b in best.values())
        if not nested:
            kept.append(a)
    return sorted(kept, key=lambda a: (a.start, a.end))


def annotate(m: Lts, db: PropertyDB, mode: Mode | str = Mode.STRICT,
             allow_vacuous: bool = False, properties: Iterable[str] | None = None) -> list[Annotation]:
    """Run every property of ``db`` over ``m`` and map satisfying states to frame intervals.

    An annotation spans from the satisfying state to the last state its
    witness visited.  With ``allow_vacuous`` raw satisfaction is reported and
    each annotation covers the satisfying state only.
    """
    mode = Mode(mode)
    accept = {Verdict.TRUE} if mode is Mode.STRICT else {Verdict.TRUE, Verdict.UNKNOWN}
    mc = ModelChecker(m)
    states = m.states
    out: list[Annotation] = []
    for name in (properties or db.properties):
        template = db.reduced(name)
        results = template_results(mc, template, db.catalog, mode)
        cands = []
        for i, rows in results.items():
            for binding, verdict, ground in rows:
                if allow_vacuous:
                    wit = {i}
                else:
                    wit = _witness(mc, ground, i, accept)
                    if wit is None:
                        continue
                order = sorted(wit)
                cands.append(Annotation(
                    property=name,
                    start=states[i].interval[0],
                    end=max(states[w].interval[1] for w in order),
                    binding={k: str(v) for k, v in binding.items()},
                    verdict=verdict,
                    witness_states=tuple(states[w].id for w in order),
                ))
        out.extend(_keep_maximal(cands))
    order = {name: k for k, name in enumerate(db.properties)}
    return sorted(out, key=lambda a: (a.start, a.end, order.get(a.property, len(order))))


def write_annotations(anns: Iterable[Annotation], fh, offset: int = 0,
                      meta: Mapping | None = None) -> None:
    if meta is not None:
        fh.write(json.dumps({"meta": meta}, sort_keys=True) + "\n")
    for a in anns:
        fh.write(json.dumps(a.to_json(offset), sort_keys=True) + "\n")


def read_annotations(path: str | Path) -> list[Annotation]:
    out = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            data = json.loads(line)
            if "meta" in data and "property" not in data:
                continue
            try:
                out.append(Annotation.from_json(data))
            except (KeyError, ValueError) as exc:
                raise EvaluationError(f"{path}:{lineno}: bad annotation ({exc})") from None
    return out


# -- evaluation ---------------------------------------------------------------


@dataclass(frozen=True)
class GoldAnnotation:
    property: str
    start: int
    end: int


def read_gold(path: str | Path) -> list[GoldAnnotation]:
    """Read ``property,start,end`` rows (header optional)."""
    out = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
                continue
            if lineno == 1 and [c.strip() for c in row] == ["property", "start", "end"]:
                continue
            if len(row) != 3:
                raise EvaluationError(f"{path}:{lineno}: expected property,start,end")
            try:
                g = GoldAnnotation(row[0].strip(), int(row[1]), int(row[2]))
            except ValueError:
                raise EvaluationError(f"{path}:{lineno}: start/end must be integers") from None
            if g.start > g.end:
                raise EvaluationError(f"{path}:{lineno}: start > end")
            out.append(g)
    return out


@dataclass(frozen=True)
class SummaryRow:
    property: str
    hits: int
    misses: int
    erroneous: int


@dataclass
class MatchTable:
    rows: list[str]                  # gold property names
    cols: list[str]                  # predicted property names
    counts: dict[tuple[str, str], int]
    false_positives: dict[str, int]
    skipped: dict[str, int] = field(default_factory=dict)

    def cell(self, gold: str, pred: str) -> int:
        return self.counts.get((gold, pred), 0)

    def erroneous(self, gold: str) -> int:
        """Verifications of other properties on frames annotated with ``gold``."""
        return sum(self.cell(gold, p) for p in self.cols if p != gold)

    def to_text(self) -> str:
        width = max([len(n) for n in self.rows + self.cols] + [len("False P."), 6]) + 2
        lines = ["gold \\ predicted".ljust(width) + "".join(c.rjust(width) for c in self.cols)]
        for g in self.rows:
            lines.append(g.ljust(width) + "".join(str(self.cell(g, p)).rjust(width) for p in self.cols))
        lines.append("False P.".ljust(width)
                     + "".join(str(self.false_positives.get(p, 0)).rjust(width) for p in self.cols))
        return "\n".join(lines)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["gold"] + self.cols)
        for g in self.rows:
            w.writerow([g] + [self.cell(g, p) for p in self.cols])
        w.writerow(["FALSE_POSITIVE"] + [self.false_positives.get(p, 0) for p in self.cols])
        return buf.getvalue()


def _overlaps(a, b, min_iou: float | None) -> bool:
    inter = min(a.end, b.end) - max(a.start, b.start) + 1
    if inter < 1:
        return False
    if min_iou is None:
        return True
    union = max(a.end, b.end) - min(a.start, b.start) + 1
    return inter / union >= min_iou


def evaluate(pred: Iterable[Annotation], gold: Iterable[GoldAnnotation],
             properties: list[str] | None = None, *, count_unknown: bool = False,
             min_iou: float | None = None) -> tuple[MatchTable, list[SummaryRow]]:
    """Matching table and per-property hit/miss/erroneous summary.

    A prediction matches a gold annotation when their frame intervals share at
    least one frame (and reach ``min_iou`` when given).  Cell (g, p) counts
    predictions of p overlapping some gold g, so a prediction may count in
    several rows.  Unknown-verdict predictions are ignored unless
    ``count_unknown``.
    """
    pred = list(pred)
    gold = list(gold)
    if properties is None:
        names = sorted({a.property for a in pred} | {g.property for g in gold})
    else:
        names = list(properties)
    known = set(names)
    skipped = {"gold_unknown_property": 0, "pred_unknown_property": 0, "pred_unknown_verdict": 0}
    gold_ok = []
    for g in gold:
        if g.property in known:
            gold_ok.append(g)
        else:
            log.warning("gold annotation for unknown property %r skipped", g.property)
            skipped["gold_unknown_property"] += 1
    pred_ok = []
    for a in pred:
        if a.property not in known:
            log.warning("prediction for unknown property %r skipped", a.property)
            skipped["pred_unknown_property"] += 1
        elif a.verdict is Verdict.UNKNOWN and not count_unknown:
            skipped["pred_unknown_verdict"] += 1
        else:
            pred_ok.append(a)

    counts = {(g, p): 0 for g in names for p in names}
    fps = {p: 0 for p in names}
    for a in pred_ok:
        hit_rows = {g.property for g in gold_ok if _overlaps(a, g, min_iou)}
        for g in hit_rows:
            counts[(g, a.property)] += 1
        if not hit_rows:
            fps[a.property] += 1
    table = MatchTable(names, names, counts, fps, skipped)

    summary = []
    for name in names:
        mine = [g for g in gold_ok if g.property == name]
        preds = [a for a in pred_ok if a.property == name]
        hits = sum(1 for g in mine if any(_overlaps(a, g, min_iou) for a in preds))
        summary.append(SummaryRow(name, hits, len(mine) - hits, table.erroneous(name)))
    return table, summary


def summary_text(summary: list[SummaryRow]) -> str:
    width = max([len(r.property) for r in summary] + [8]) + 2
    lines = ["property".ljust(width) + "hit".rjust(6) + "miss".rjust(6) + "erroneous".rjust(11)]
    for r in summary:
        lines.append(r.property.ljust(width) + f"{r.hits:6d}{r.misses:6d}{r.erroneous:11d}")
    return "\n".join(lines)


def summary_csv(summary: list[SummaryRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["property", "hits", "misses", "erroneous"])
    for r in summary:
        w.writerow([r.property, r.hits, r.misses, r.erroneous])
    return buf.getvalue()
