"""Assembles a radio environment, cores, base stations and one TCU from a config."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Optional

from .rogue import RogueNode
from .codec import EeaAlg, PlmnId
from .epc import Core, CoreFault, EnodeB, SubscriberRecord
from .radio_env import CellConfig, Legitimacy, RadioEnvironment, RadioParams
from .seeding import derive_seed
from .tcu import SimProfile, TcuMachine, TcuPolicy, TcuTiming
from .trace import NullSink, TraceSink


@dataclass
class CoreConfig:
    name: str
    plmn: PlmnId
    subscribers: list = field(default_factory=list)
    signing_key: Optional[bytes] = None
    allowed_ciphers: tuple = tuple(EeaAlg)
    faults: list = field(default_factory=list)


@dataclass
class WorldConfig:
    cells: list = field(default_factory=list)
    cores: list = field(default_factory=list)
    sims: list = field(default_factory=list)
    policy: TcuPolicy = field(default_factory=TcuPolicy.observed)
    timing: TcuTiming = field(default_factory=TcuTiming)
    radio: RadioParams = field(default_factory=RadioParams)
    imei: str = "356938035643809"

    def core(self, name: str) -> CoreConfig:
        for c in self.cores:
            if c.name == name:
                return c
        raise KeyError(name)


@dataclass
class World:
    env: RadioEnvironment
    cores: dict
    nodes: dict
    tcu: TcuMachine
    cfg: WorldConfig

    @property
    def trace(self) -> TraceSink:
        return self.env.trace

    def run_for(self, ms: int) -> None:
        self.env.advance(ms)

    def rogue_nodes(self) -> dict:
        return {cid: n for cid, n in self.nodes.items() if isinstance(n, RogueNode)}


def build_world(cfg: WorldConfig, seed: int, trace: Optional[TraceSink] = None, power_on: bool = True) -> World:
    """Fresh, independent world; ``cfg`` is copied so runs never share mutable state."""
    cfg = copy.deepcopy(cfg)
    trace = trace if trace is not None else NullSink()
    env = RadioEnvironment(cfg.radio, derive_seed(seed, "env"), trace)
    cores = {}
    for cc in cfg.cores:
        core = Core(cc.name, cc.plmn, cc.subscribers, signing_key=cc.signing_key,
                    seed=derive_seed(seed, f"core:{cc.name}"), trace=trace, allowed_ciphers=cc.allowed_ciphers)
        core.now = lambda env=env: env.now_ms
        for fault in cc.faults:
            core.inject_fault(fault)
        cores[cc.name] = core
    nodes = {}
    for cell_cfg in cfg.cells:
        if cell_cfg.legitimacy == Legitimacy.Rogue or cell_cfg.core_link is None:
            node = RogueNode(derive_seed(seed, f"rogue:{cell_cfg.cell_id}"))
        else:
            node = EnodeB(cores[cell_cfg.core_link])
        nodes[cell_cfg.cell_id] = node
        env.add_cell(cell_cfg, node)
    tcu = TcuMachine(env, cfg.sims, cfg.policy, cfg.timing, imei=cfg.imei, seed=derive_seed(seed, "tcu"))
    world = World(env, cores, nodes, tcu, cfg)
    if power_on:
        tcu.power_cycle()
    return world


def add_rogue_cell(world: World, cell_cfg: CellConfig, seed: int) -> RogueNode:
    node = RogueNode(derive_seed(seed, f"rogue:{cell_cfg.cell_id}"))
    world.nodes[cell_cfg.cell_id] = node
    world.env.add_cell(cell_cfg, node)
    return node


# --- convenience builders for tests and bundled scenarios -------------------

def test_credentials(imsi: str) -> tuple[bytes, bytes]:
    """Deterministic Ki/OPc for a test IMSI (not secret, only reproducible)."""
    import hashlib

    digest = hashlib.sha256(b"vlte-test-sim:" + imsi.encode()).digest()
    return digest[:16], digest[16:]


def network_key(plmn: str) -> bytes:
    import hashlib

    return hashlib.sha256(b"vlte-sib-key:" + plmn.encode()).digest()[:16]


def provision(plmn: str, *, msin: str = "0000000001", kind: str = "pSIM", sim_id: Optional[str] = None,
              selectors=(), corrupt: bool = False, enabled: bool = True):
    """A matching (SubscriberRecord, SimProfile) pair for ``plmn``.

    ``corrupt`` breaks the IMSI/PLMN prefix relation on the card only.
    """
    imsi = (plmn + msin)[:15]
    ki, opc = test_credentials(imsi)
    sub = SubscriberRecord(imsi, ki, opc, PlmnId.parse(plmn))
    card_imsi = str((int(imsi[0]) + 1) % 10) + imsi[1:] if corrupt else imsi
    sim = SimProfile(
        sim_id=sim_id or f"{kind.lower()}-{plmn}",
        kind=kind,
        imsi=card_imsi,
        iccid="89" + (imsi + "0000")[:17],
        ki=ki,
        opc=opc,
        home_plmn=PlmnId.parse(plmn),
        admin_state="Enabled" if enabled else "Disabled",
        selectors=tuple(selectors),
        network_key=network_key(plmn),
    )
    return sub, sim


def testbed(plmn: str = "310260", *, policy: Optional[TcuPolicy] = None, kind: str = "pSIM",
            legit_gain_db: float = -18.0, tac: int = 1, roaming_markets=("310260", "310150"),
            faults=(), sim_plmn: Optional[str] = None, corrupt_sim: bool = False,
            radio: Optional[RadioParams] = None) -> WorldConfig:
    """One legitimate cell with its own core and one provisioned SIM."""
    sub, sim = provision(sim_plmn or plmn, kind=kind, corrupt=corrupt_sim)
    if policy is None:
        policy = TcuPolicy.observed(roaming_markets=roaming_markets)
    core = CoreConfig("core-" + plmn, PlmnId.parse(plmn), [sub], signing_key=network_key(plmn),
                      faults=list(faults))
    cell = CellConfig(1, PlmnId.parse(plmn), tac, dl_gain_db=legit_gain_db, core_link=core.name)
    return WorldConfig(cells=[cell], cores=[core], sims=[sim], policy=policy,
                       radio=radio or RadioParams())
