from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from ..codec import PlmnId


class SimKind(enum.Enum):
    eSIM = "eSIM"
    pSIM = "pSIM"


class AdminState(enum.Enum):
    Enabled = "Enabled"
    Disabled = "Disabled"


@dataclass
class SimProfile:
    """A SIM or eSIM profile.

    Construction accepts inconsistent data on purpose so that corrupted cards
    can be modelled; :meth:`is_valid` is the check the TCU runs at power-on.
    ``selectors`` is the operator PLMN selector list stored on the card and
    ``network_key`` the key used to check signed SIB1 broadcasts.
    """

    sim_id: str
    kind: SimKind
    imsi: str
    iccid: str
    ki: bytes
    opc: bytes
    home_plmn: PlmnId
    apn: str = "internet"
    admin_state: AdminState = AdminState.Enabled
    selectors: tuple = ()
    network_key: Optional[bytes] = None

    def __post_init__(self):
        self.kind = SimKind(self.kind)
        self.admin_state = AdminState(self.admin_state)
        if not isinstance(self.home_plmn, PlmnId):
            self.home_plmn = PlmnId.parse(str(self.home_plmn))
        self.selectors = tuple(p if isinstance(p, PlmnId) else PlmnId.parse(str(p)) for p in self.selectors)

    def problems(self) -> list[str]:
        out = []
        if not (len(self.imsi) == 15 and self.imsi.isdigit()):
            out.append("imsi must be 15 digits")
        if not self.imsi.startswith(str(self.home_plmn)):
            out.append("imsi prefix does not match home PLMN")
        if not (19 <= len(self.iccid) <= 20 and self.iccid.isdigit()):
            out.append("iccid must be 19-20 digits")
        if len(self.ki) != 16 or len(self.opc) != 16:
            out.append("ki and opc must be 16 octets")
        return out

    def is_valid(self) -> bool:
        return not self.problems()

    def selection_set(self) -> frozenset:
        return frozenset((self.home_plmn, *self.selectors))
