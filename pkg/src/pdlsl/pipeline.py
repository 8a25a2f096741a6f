"""Staged pipeline: trace → segments → LTS → annotations, with a file-backed config."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Callable, Mapping

import tomli

from .annotator import (
    HEAD_ANCHOR_REGION, Annotation, PropertyDB, annotate, default_property_db,
    load_property_db,
)
from .checker import Mode
from .errors import ConfigError, InvariantError, ModelError, PdlslError
from .logic.catalog import Catalog, default_catalog, load_catalog
from .model import Lts, ModelParams, RegionCatalog, build_lts, default_regions, load_regions
from .segmenter import Segment, SegParams, segment
from .trace import Trace, fill_gaps, load_trace, project_2d

CONFIG_ENV = "PDLSL_CONFIG"


@dataclass(frozen=True)
class PipelineConfig:
    format: str | None = None           # trace format; None = from file suffix
    max_gap: int = 3
    scale: float | None = None          # body scale when the trace has no HEAD_w column
    v_hold: float = 0.5
    min_hold: int = 3
    smooth_w: int = 5
    tau_touch: float = 0.35
    theta_move: float = 0.5
    theta_trill: float = 1.0
    catalog: str | None = None          # None = shipped defaults
    regions: str | None = None
    db: str | None = None
    mode: str = "strict"
    allow_vacuous: bool = False
    head_anchor: str = "touch"
    count_unknown: bool = False
    min_iou: float | None = None
    report_format: str = "text"

    @property
    def seg_params(self) -> SegParams:
        return SegParams(self.v_hold, self.min_hold, self.smooth_w)

    @property
    def model_params(self) -> ModelParams:
        return ModelParams(self.tau_touch, self.theta_move, self.theta_trill)

    def snapshot(self) -> dict:
        return asdict(self)

    def updated(self, **overrides) -> PipelineConfig:
        """Copy with every non-None override applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


_KEYS = {f.name for f in fields(PipelineConfig)}


def config_from_mapping(data: Mapping) -> PipelineConfig:
    """Flatten an optional one-level table layout into a config."""
    flat: dict = {}
    for key, value in data.items():
        if isinstance(value, Mapping):
            flat.update(value)
        else:
            flat[key] = value
    flat = {k.replace("-", "_"): v for k, v in flat.items()}
    unknown = sorted(set(flat) - _KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    return PipelineConfig(**flat)


def load_config(path: str | Path | None = None) -> PipelineConfig:
    """Read a TOML config; falls back to ``$PDLSL_CONFIG``, then to defaults."""
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return PipelineConfig()
    p = Path(path)
    try:
        data = tomli.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc.strerror}") from None
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{p}: {exc}") from None
    try:
        return config_from_mapping(data)
    except TypeError as exc:
        raise ConfigError(f"{p}: {exc}") from None


def validate_config(cfg: PipelineConfig) -> list[str]:
    """Human-readable problems, each naming the offending key; empty when valid."""
    out = []
    for key in ("v_hold", "tau_touch", "theta_move", "theta_trill"):
        v = getattr(cfg, key)
        if not isinstance(v, (int, float)) or not v > 0:
            out.append(f"{key}: must be > 0, got {v!r}")
    for key, lo in (("min_hold", 1), ("max_gap", 0), ("smooth_w", 1)):
        v = getattr(cfg, key)
        if not isinstance(v, int) or isinstance(v, bool) or v < lo:
            out.append(f"{key}: must be an integer >= {lo}, got {v!r}")
    if isinstance(cfg.smooth_w, int) and cfg.smooth_w % 2 == 0:
        out.append(f"smooth_w: must be odd, got {cfg.smooth_w}")
    if cfg.scale is not None and not (isinstance(cfg.scale, (int, float)) and cfg.scale > 0):
        out.append(f"scale: must be > 0, got {cfg.scale!r}")
    if cfg.min_iou is not None and not (isinstance(cfg.min_iou, (int, float)) and 0 < cfg.min_iou <= 1):
        out.append(f"min_iou: must be in (0, 1], got {cfg.min_iou!r}")
    choices = {"mode": ("strict", "optimistic"), "head_anchor": ("touch", "region"),
               "report_format": ("text", "csv"), "format": (None, "csv", "json")}
    for key, allowed in choices.items():
        if getattr(cfg, key) not in allowed:
            shown = ", ".join(a for a in allowed if a)
            out.append(f"{key}: must be one of {shown}, got {getattr(cfg, key)!r}")
    for key in ("catalog", "regions", "db"):
        path = getattr(cfg, key)
        if path is not None and not Path(path).is_file():
            out.append(f"{key}: file not found: {path}")
    return out


# -- stages -------------------------------------------------------------------


@dataclass(frozen=True)
class Stage:
    """A pipeline step with declared input and output types."""

    name: str
    consumes: type | None
    produces: type
    run: Callable


def check_stages(stages: list[Stage]) -> None:
    for a, b in zip(stages, stages[1:]):
        if a.produces is not b.consumes:
            raise ConfigError(f"stage {b.name!r} consumes {getattr(b.consumes, '__name__', b.consumes)} "
                              f"but {a.name!r} produces {a.produces.__name__}")


@dataclass
class Resources:
    catalog: Catalog
    regions: RegionCatalog
    db: PropertyDB


def load_resources(cfg: PipelineConfig) -> Resources:
    catalog = load_catalog(cfg.catalog) if cfg.catalog else default_catalog()
    regions = load_regions(cfg.regions) if cfg.regions else default_regions()
    db = load_property_db(cfg.db, catalog) if cfg.db else default_property_db(catalog)
    if cfg.head_anchor == "region" and "head_anchor" in db:
        db = db.replace("head_anchor", HEAD_ANCHOR_REGION)
    return Resources(catalog, regions, db)


@dataclass(frozen=True)
class Segmentation:
    trace: Trace
    segments: list[Segment]


class StageError(PdlslError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineResult:
    trace: Trace
    segments: list[Segment]
    lts: Lts
    annotations: list[Annotation]
    config: PipelineConfig
    resources: Resources = field(repr=False)

    @property
    def offset(self) -> int:
        return self.trace.first_index

    def meta(self) -> dict:
        return artifact_meta(self.config, self.resources, self.trace.source)


def artifact_meta(cfg: PipelineConfig, res: Resources, source: str = "") -> dict:
    return {"config": cfg.snapshot(), "catalog_hash": res.catalog.digest(),
            "regions_hash": res.regions.digest(), "source": source}


def default_stages(cfg: PipelineConfig, res: Resources, *,
                   segmenter: Callable[[Trace], list] | None = None) -> list[Stage]:
    def prepare(source) -> Trace:
        t = source if isinstance(source, Trace) else load_trace(source, cfg.format, res.catalog,
                                                                 scale=cfg.scale)
        if t.dims == 3:
            t = project_2d(t)
        return fill_gaps(t, cfg.max_gap)

    seg = segmenter or (lambda t: segment(t, cfg.seg_params))
    return [
        Stage("trace", None, Trace, prepare),
        Stage("segment", Trace, Segmentation, lambda t: Segmentation(t, list(seg(t)))),
        Stage("model", Segmentation, Lts, lambda sg: build_lts(sg.trace, sg.segments, res.catalog,
                                                               res.regions, cfg.model_params)),
        Stage("annotate", Lts, list, lambda m: annotate(m, res.db, Mode(cfg.mode), cfg.allow_vacuous)),
    ]


def run_pipeline(cfg: PipelineConfig, trace_path: str | Path | Trace, *, res: Resources | None = None,
                 segmenter: Callable[[Trace], list] | None = None,
                 upto: str = "annotate") -> PipelineResult:
    """Run the stages in order, stopping after ``upto``; stage errors name their stage."""
    problems = validate_config(cfg)
    if problems:
        raise ConfigError("; ".join(problems))
    res = res or load_resources(cfg)
    stages = default_stages(cfg, res, segmenter=segmenter)
    check_stages(stages)
    trace = segs = lts = None
    anns: list = []
    value = trace_path
    for stage in stages:
        try:
            value = stage.run(value)
        except PdlslError as exc:
            raise StageError(stage.name, exc) from exc
        if stage.name == "trace":
            trace = value
        elif stage.name == "segment":
            segs = value.segments
        elif stage.name == "model":
            lts = value
            try:
                lts.validate()
            except ModelError as exc:
                raise InvariantError(f"[model] {exc}") from exc
        else:
            anns = value
        if stage.name == upto:
            break
    return PipelineResult(trace, segs, lts, anns, cfg, res)


def lts_document(result: PipelineResult) -> dict:
    doc = result.lts.to_json(result.offset)
    doc["metadata"]["config"] = result.config.snapshot()
    return doc


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"
