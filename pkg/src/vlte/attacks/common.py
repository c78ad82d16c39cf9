"""Shared plumbing for the attack scenarios."""

from __future__ import annotations

from typing import Optional

from ..codec import PlmnId
from ..radio_env import CellConfig, Legitimacy
from ..seeding import derive_seed
from ..trace import NullSink, TraceSink
from ..world import World, WorldConfig, build_world

ROGUE_CELL_ID = 99
# time by which a TCU on the -18 dB testbed cell has finished its first attach
SETTLE_MS = 10_000


class ChannelUnavailable(Exception):
    pass


def trial_world(cfg: WorldConfig, seed: int, label: str, index: int,
                trace: Optional[TraceSink]) -> World:
    trace = trace if trace is not None else NullSink()
    trace.set_context(f"{label}[{index}]")
    return build_world(cfg, derive_seed(seed, label, index), trace)


def rogue_cell(plmn, tac: int, gain_db: float, *, cell_id: int = ROGUE_CELL_ID, powered: bool = True,
               acquire_prob: Optional[float] = None) -> CellConfig:
    return CellConfig(cell_id, plmn if isinstance(plmn, PlmnId) else PlmnId.parse(str(plmn)), tac,
                      dl_gain_db=gain_db, legitimacy=Legitimacy.Rogue, powered=powered,
                      acquire_prob=acquire_prob)


def legit_cell(cfg: WorldConfig) -> CellConfig:
    return next(c for c in cfg.cells if c.legitimacy == Legitimacy.Legitimate)


def refs(world: World, events) -> list[str]:
    return [world.trace.ref(e.seq) for e in events if e.seq >= 0]
