"""Hand-encoded models shared by several test modules."""

from __future__ import annotations

from pdlsl.logic.catalog import Catalog
from pdlsl.logic.syntax import DIRECTIONS, At, Cfg, Dir, Move, Trill
from pdlsl.model import Edge, Lts, StateNode

# Hand-drawn four-state model. R/D is the right hand,
# L/G the left one.
MODELING_CATALOG = Catalog(
    articulators=("RH", "LH"),
    places=("TORSE", "R_SIDEOFBODY", "L_SIDEOFBODY", "CENTEROFBODY", "R_SIDEOFHEAD"),
    configs=("L_CONFIG", "KEY_CONFIG", "BEAK_CONFIG", "OPENPALM_CONFIG"),
    directions=tuple(DIRECTIONS),
)

MODELING_TRUE = (
    {Dir("RH", "NE", "LH"), At("LH", "TORSE"), At("RH", "R_SIDEOFBODY")},
    {Dir("RH", "W", "LH"), At("LH", "L_SIDEOFBODY"), At("RH", "R_SIDEOFBODY"), Cfg("RH", "KEY_CONFIG")},
    {Dir("RH", "W", "LH"), At("LH", "CENTEROFBODY"), At("RH", "R_SIDEOFHEAD"), Cfg("RH", "BEAK_CONFIG")},
    {Dir("RH", "W", "LH"), At("LH", "L_SIDEOFBODY"), At("RH", "R_SIDEOFBODY"),
     Cfg("RH", "OPENPALM_CONFIG")},
)
MODELING_FALSE = ({Cfg("RH", "L_CONFIG")}, set(), set(), set())


def modeling_lts() -> Lts:
    """Four states; every atom not listed above is unknown."""
    universe = MODELING_CATALOG.universe()
    states = tuple(
        StateNode(i, (10 * i, 10 * i + 5), frozenset(t), frozenset(f), universe - t - f)
        for i, (t, f) in enumerate(zip(MODELING_TRUE, MODELING_FALSE))
    )
    edges = (
        Edge(0, 1, frozenset({Move("LH", "NE")})),
        Edge(1, 1, frozenset({Trill("RH"), Trill("LH")})),
        Edge(1, 2, frozenset({Move("LH", "SW")})),
        Edge(2, 3, frozenset({Move("LH", "NE")})),
    )
    return Lts(states, edges, universe, {"catalog": MODELING_CATALOG.to_dict()})


def single_state_lts(true_atoms, catalog: Catalog, false_rest: bool = True) -> Lts:
    universe = catalog.universe()
    t = frozenset(true_atoms)
    rest = universe - t
    st = StateNode(0, (0, 9), t, rest if false_rest else frozenset(), frozenset() if false_rest else rest)
    return Lts((st,), (), universe, {"catalog": catalog.to_dict()})
