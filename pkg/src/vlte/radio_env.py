"""Simulated time, cells and the received-power model.

The environment owns a millisecond discrete-event clock.  Every over-the-air
message is encoded to octets, logged to the trace, decoded again and handed to
the receiver after a fixed propagation delay, so the whole run exercises the
wire codec.
"""

from __future__ import annotations

import enum
import heapq
import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from .codec import PlmnId, ProtocolMessage, RrcMessage, decode, encode, is_broadcast
from .codec.textfmt import message_to_dict
from .trace import NullSink, TraceSink


class RadioError(Exception):
    pass


class DuplicateCellId(RadioError):
    pass


class NoSuchCell(RadioError):
    pass


class NotBroadcastKind(RadioError):
    pass


class Legitimacy(enum.Enum):
    Legitimate = "Legitimate"
    Rogue = "Rogue"


@dataclass
class CellConfig:
    cell_id: int
    plmn: PlmnId
    tac: int
    earfcn: int = 900
    band: int = 2
    dl_gain_db: float = 0.0
    legitimacy: Legitimacy = Legitimacy.Legitimate
    # name of the core this cell is attached to; None for stand-alone rogue cells
    core_link: Optional[str] = None
    powered: bool = True
    # probability that a receiver acquires the cell when it powers on;
    # None means "use the environment's detection table" (rogue) or 1.0 (legitimate)
    acquire_prob: Optional[float] = None

    def __post_init__(self):
        if not isinstance(self.plmn, PlmnId):
            self.plmn = PlmnId.parse(str(self.plmn))
        self.legitimacy = Legitimacy(self.legitimacy)
        if not 0 <= self.tac <= 0xFFFF:
            raise ValueError("tac must fit 16 bits")


@dataclass(frozen=True)
class CellMeasurement:
    cell_id: int
    rsrp_dbm: float
    rsrq_db: float
    sinr_db: float


@dataclass(frozen=True)
class RadioParams:
    base_rx_dbm: float = -85.0
    sigma_db: float = 0.0
    threshold_dbm: float = -103.0
    propagation_ms: int = 1
    noise_floor_dbm: float = -110.0
    # (minimum gain, acquisition probability), highest gain first; gains below
    # the last entry reuse its probability
    detection: tuple = ((-10.0, 1.0), (-15.0, 0.9))

    def acquire_probability(self, gain_db: float) -> float:
        for floor, p in self.detection:
            if gain_db >= floor:
                return p
        return self.detection[-1][1] if self.detection else 1.0


@dataclass
class Cell:
    cfg: CellConfig
    node: Any = None
    acquirable: bool = True

    @property
    def cell_id(self) -> int:
        return self.cfg.cell_id


@dataclass
class DeliveryRecord:
    cell_id: int
    kind: str
    t_ms: int
    recipients: list = field(default_factory=list)
    acknowledged: list = field(default_factory=list)
    trace_seq: int = -1


class _Event:
    __slots__ = ("due", "seq", "fn", "label", "cancelled")

    def __init__(self, due, seq, fn, label):
        self.due, self.seq, self.fn, self.label = due, seq, fn, label
        self.cancelled = False

    def __lt__(self, other):
        return (self.due, self.seq) < (other.due, other.seq)


class SimClock:
    """Events fire in (due_ms, insertion order); ``now_ms`` never decreases."""

    def __init__(self):
        self.now_ms = 0
        self._queue: list[_Event] = []
        self._counter = itertools.count()

    def schedule_at(self, due_ms: int, fn: Callable[[], Any], label: str = "") -> _Event:
        due_ms = int(due_ms)
        if due_ms < self.now_ms:
            raise ValueError(f"cannot schedule in the past ({due_ms} < {self.now_ms})")
        ev = _Event(due_ms, next(self._counter), fn, label)
        heapq.heappush(self._queue, ev)
        return ev

    def schedule(self, delay_ms: int, fn: Callable[[], Any], label: str = "") -> _Event:
        return self.schedule_at(self.now_ms + int(delay_ms), fn, label)

    @staticmethod
    def cancel(ev: Optional[_Event]) -> None:
        if ev is not None:
            ev.cancelled = True

    def pending(self) -> int:
        return sum(1 for e in self._queue if not e.cancelled)

    def advance(self, dt_ms: int) -> list[str]:
        if dt_ms < 0:
            raise ValueError("dt_ms must be non-negative")
        return self.run_until(self.now_ms + int(dt_ms))

    def run_until(self, t_ms: int) -> list[str]:
        fired = []
        while self._queue and self._queue[0].due <= t_ms:
            ev = heapq.heappop(self._queue)
            if ev.cancelled:
                continue
            self.now_ms = ev.due
            fired.append(ev.label)
            ev.fn()
        self.now_ms = max(self.now_ms, int(t_ms))
        return fired


class RadioEnvironment:
    def __init__(self, params: RadioParams = RadioParams(), seed: int = 0, trace: Optional[TraceSink] = None):
        self.params = params
        self.clock = SimClock()
        self.cells: dict[int, Cell] = {}
        self.receivers: dict[str, Any] = {}
        self.trace = trace if trace is not None else NullSink()
        self.rng = np.random.default_rng(seed)

    @property
    def now_ms(self) -> int:
        return self.clock.now_ms

    # --- cells ---------------------------------------------------------------

    def add_cell(self, cfg: CellConfig, node: Any = None) -> Cell:
        if cfg.cell_id in self.cells:
            raise DuplicateCellId(f"cell {cfg.cell_id} already exists")
        cell = Cell(cfg, node)
        self.cells[cfg.cell_id] = cell
        if cfg.powered:
            self._draw_acquisition(cell)
        self.trace.emit(self.now_ms, "env", "cell_added", cell=cfg.cell_id, plmn=str(cfg.plmn),
                        tac=cfg.tac, gain=cfg.dl_gain_db, legitimacy=cfg.legitimacy.value,
                        powered=cfg.powered, acquirable=cell.acquirable)
        return cell

    def cell(self, cell_id: int) -> Cell:
        try:
            return self.cells[cell_id]
        except KeyError:
            raise NoSuchCell(f"no cell {cell_id}") from None

    def _draw_acquisition(self, cell: Cell) -> None:
        p = cell.cfg.acquire_prob
        if p is None:
            if cell.cfg.legitimacy == Legitimacy.Rogue:
                p = self.params.acquire_probability(cell.cfg.dl_gain_db)
            else:
                p = 1.0
        # always consume one draw so the stream position does not depend on p
        cell.acquirable = bool(self.rng.random() < p)

    def set_power(self, cell_id: int, on: bool) -> None:
        cell = self.cell(cell_id)
        if on and not cell.cfg.powered:
            cell.cfg.powered = True
            self._draw_acquisition(cell)
        elif not on and cell.cfg.powered:
            cell.cfg.powered = False
            for ue in list(self.receivers.values()):
                if hasattr(ue, "on_cell_lost"):
                    ue.on_cell_lost(cell_id)
        self.trace.emit(self.now_ms, "env", "cell_power", cell=cell_id, on=on, acquirable=cell.acquirable)

    def set_cell_gain(self, cell_id: int, dl_gain_db: float) -> None:
        cell = self.cell(cell_id)
        cell.cfg.dl_gain_db = float(dl_gain_db)
        self.trace.emit(self.now_ms, "env", "cell_gain", cell=cell_id, gain=float(dl_gain_db))

    # --- measurements --------------------------------------------------------

    def rsrp(self, cell: Cell, noise: float = 0.0) -> float:
        return self.params.base_rx_dbm + cell.cfg.dl_gain_db + noise

    def scan(self, receiver_noise_seed: Optional[int] = None) -> list[CellMeasurement]:
        """Measurements of every powered, acquired cell above the detection threshold.

        Sorted by descending RSRP, ties broken by lower cell id.  With
        ``sigma_db > 0`` noise is drawn from ``receiver_noise_seed`` when given,
        otherwise from the environment stream.
        """
        rng = self.rng if receiver_noise_seed is None else np.random.default_rng(receiver_noise_seed)
        out = []
        for cid in sorted(self.cells):
            cell = self.cells[cid]
            if not cell.cfg.powered:
                continue
            noise = float(rng.normal(0.0, self.params.sigma_db)) if self.params.sigma_db > 0 else 0.0
            if not cell.acquirable:
                continue
            rsrp = self.rsrp(cell, noise)
            if rsrp < self.params.threshold_dbm:
                continue
            out.append(CellMeasurement(cid, rsrp, -10.0, rsrp - self.params.noise_floor_dbm))
        out.sort(key=lambda m: (-m.rsrp_dbm, m.cell_id))
        return out

    # --- message transport ---------------------------------------------------

    def register(self, ue) -> None:
        self.receivers[ue.ue_id] = ue

    def _transport(self, cell_id: int, direction: str, msg: ProtocolMessage, deliver: Callable, **extra) -> int:
        wire = encode(msg)
        seq = self.trace.emit(self.now_ms, direction, msg.kind.name, cell=cell_id,
                              msg=message_to_dict(msg), **extra)
        decoded = decode(wire)
        self.clock.schedule(self.params.propagation_ms, lambda: deliver(decoded), f"{direction}:{msg.kind.name}")
        return seq

    def uplink(self, cell_id: int, ue, msg: ProtocolMessage) -> int:
        cell = self.cell(cell_id)

        def deliver(m):
            if cell.cfg.powered and cell.node is not None:
                for reply in cell.node.on_uplink(self, cell, ue, m) or ():
                    self.downlink(cell_id, ue, reply)

        return self._transport(cell_id, "ul", msg, deliver, ue=ue.ue_id)

    def downlink(self, cell_id: int, ue, msg: ProtocolMessage) -> int:
        return self._transport(cell_id, "dl", msg, lambda m: ue.on_downlink(cell_id, m), ue=ue.ue_id)

    def release(self, cell_id: int, ue, reason: str) -> None:
        """Tell the cell's node that ``ue`` dropped its RRC connection."""
        cell = self.cells.get(cell_id)
        if cell is not None and cell.node is not None and hasattr(cell.node, "on_release"):
            cell.node.on_release(self, cell, ue, reason)

    def userplane(self, cell_id: int, ue, request: str) -> Optional[str]:
        cell = self.cells.get(cell_id)
        if cell is None or not cell.cfg.powered or cell.node is None or not hasattr(cell.node, "userplane"):
            return None
        return cell.node.userplane(ue, request)

    def read_sib1(self, cell_id: int) -> Optional[RrcMessage]:
        cell = self.cell(cell_id)
        if cell.node is None or not hasattr(cell.node, "sib1"):
            return None
        return decode(encode(cell.node.sib1(cell)))

    def broadcast(self, cell_id: int, msg: RrcMessage) -> DeliveryRecord:
        cell = self.cell(cell_id)
        if not is_broadcast(msg):
            raise NotBroadcastKind(f"{msg.kind.name} is not a broadcast kind")
        record = DeliveryRecord(cell_id, msg.kind.name, self.now_ms)
        if cell.cfg.powered:
            for ue_id in sorted(self.receivers):
                ue = self.receivers[ue_id]
                if getattr(ue, "serving_cell", None) != cell_id:
                    continue
                record.recipients.append(ue_id)
                if ue.acknowledges(msg):
                    record.acknowledged.append(ue_id)
        wire = encode(msg)
        record.trace_seq = self.trace.emit(
            self.now_ms, "bc", msg.kind.name, cell=cell_id, msg=message_to_dict(msg),
            recipients=record.recipients, acknowledged=record.acknowledged,
        )
        decoded = decode(wire)
        for ue_id in record.recipients:
            ue = self.receivers[ue_id]
            self.clock.schedule(self.params.propagation_ms,
                                lambda ue=ue: ue.on_broadcast(cell_id, decoded), f"bc:{msg.kind.name}")
        return record

    # --- time ----------------------------------------------------------------

    def advance(self, dt_ms: int) -> list[str]:
        return self.clock.advance(dt_ms)

    def run_until(self, t_ms: int) -> list[str]:
        return self.clock.run_until(t_ms)
