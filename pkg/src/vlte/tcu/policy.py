"""TCU policy profiles and timing constants."""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, fields, replace

from ..codec import PlmnId


class PlmnFilter(enum.Enum):
    PermissiveAcceptAll = "PermissiveAcceptAll"
    WhitelistStrict = "WhitelistStrict"


class Backoff(enum.Enum):
    NONE = "None"
    ExponentialRandomized = "ExponentialRandomized"


class IdentityDisclosure(enum.Enum):
    Disclose = "Disclose"
    Suppress = "Suppress"


class SmsInterface(enum.Enum):
    SilentAccept = "SilentAccept"
    Disabled = "Disabled"


class AlertSurface(enum.Enum):
    Silent = "Silent"
    Notify = "Notify"


class FallbackTarget(enum.Enum):
    AltSimProfile = "AltSimProfile"
    WiFi = "WiFi"
    NONE = "None"


_ENUM_FIELDS = {
    "stage1_plmn_filter": PlmnFilter,
    "backoff": Backoff,
    "identity_response_pre_auth": IdentityDisclosure,
    "sms_interface": SmsInterface,
    "alert_surface": AlertSurface,
}


@dataclass(frozen=True)
class TcuPolicy:
    name: str = "observed"
    stage1_plmn_filter: PlmnFilter = PlmnFilter.PermissiveAcceptAll
    whitelist: tuple = ()
    roaming_markets: tuple = ()
    attach_retry_limit: int = 5
    retry_gap_ms: int = 500
    cooldown_ms: int = 30_000
    backoff: Backoff = Backoff.NONE
    backoff_base_ms: int = 1000
    backoff_jitter_ms: int = 500
    identity_response_pre_auth: IdentityDisclosure = IdentityDisclosure.Disclose
    advertise_legacy: bool = True
    accept_null_cipher: bool = True
    sms_interface: SmsInterface = SmsInterface.SilentAccept
    alert_surface: AlertSurface = AlertSurface.Silent
    fallback_targets: tuple = (FallbackTarget.NONE,)
    # hardening switches beyond the enumerated fields above
    verify_sib1: bool = False
    conceal_identity: bool = False
    reselect_after_stall: bool = False
    health_probe_failures: int = 0
    guti_refresh_ms: int = 0
    notify_failures: bool = False

    def __post_init__(self):
        for name, cls in _ENUM_FIELDS.items():
            object.__setattr__(self, name, cls(getattr(self, name)))
        object.__setattr__(self, "fallback_targets", tuple(FallbackTarget(t) for t in self.fallback_targets))
        for name in ("whitelist", "roaming_markets"):
            object.__setattr__(self, name, tuple(
                p if isinstance(p, PlmnId) else PlmnId.parse(str(p)) for p in getattr(self, name)
            ))
        if self.attach_retry_limit < 1:
            raise ValueError("attach_retry_limit must be positive")

    @classmethod
    def observed(cls, **overrides) -> "TcuPolicy":
        return replace(cls(), **overrides)

    @classmethod
    def mitigated(cls, **overrides) -> "TcuPolicy":
        base = cls(
            name="mitigated",
            stage1_plmn_filter=PlmnFilter.WhitelistStrict,
            backoff=Backoff.ExponentialRandomized,
            identity_response_pre_auth=IdentityDisclosure.Suppress,
            advertise_legacy=False,
            accept_null_cipher=False,
            sms_interface=SmsInterface.Disabled,
            alert_surface=AlertSurface.Notify,
            fallback_targets=(FallbackTarget.AltSimProfile, FallbackTarget.WiFi),
            verify_sib1=True,
            conceal_identity=True,
            reselect_after_stall=True,
            health_probe_failures=3,
            guti_refresh_ms=300_000,
            notify_failures=True,
        )
        return replace(base, **overrides)

    @classmethod
    def named(cls, name: str, **overrides) -> "TcuPolicy":
        if name == "observed":
            return cls.observed(**overrides)
        if name == "mitigated":
            return cls.mitigated(**overrides)
        raise ValueError(f"unknown policy profile {name!r}")

    def effective_whitelist(self) -> frozenset:
        return frozenset(self.whitelist or self.roaming_markets)

    def to_dict(self) -> dict:
        d = asdict(self)
        for name in _ENUM_FIELDS:
            d[name] = getattr(self, name).value
        d["fallback_targets"] = [t.value for t in self.fallback_targets]
        d["whitelist"] = [str(p) for p in self.whitelist]
        d["roaming_markets"] = [str(p) for p in self.roaming_markets]
        return d

    @classmethod
    def field_names(cls) -> set:
        return {f.name for f in fields(cls)}


@dataclass(frozen=True)
class TcuTiming:
    tick_ms: int = 500
    acquire_ms: int = 2000
    confirm_ms: int = 500
    # (minimum RSRP, extra confirmation periods) best first; weaker cells use the last entry
    confirm_table: tuple = ((-90.0, 0), (-95.0, 1), (-100.0, 5))
    hysteresis_db: float = 2.0
    attach_guard_ms: int = 4000
    rlf_ms: int = 1000
    probe_period_ms: int = 5000

    def confirmations(self, rsrp_dbm: float) -> int:
        for floor, n in self.confirm_table:
            if rsrp_dbm >= floor:
                return n
        return self.confirm_table[-1][1]

    def dwell_ms(self, rsrp_dbm: float) -> int:
        return self.acquire_ms + self.confirm_ms * self.confirmations(rsrp_dbm)
