from .machine import (
    ConnectionStages,
    EmmState,
    HandoverOutcome,
    PowerMode,
    ProbeResult,
    SecurityContext,
    TargetNotVisible,
    TcuEvent,
    TcuMachine,
    capabilities_for,
)
from .policy import (
    AlertSurface,
    Backoff,
    FallbackTarget,
    IdentityDisclosure,
    PlmnFilter,
    SmsInterface,
    TcuPolicy,
    TcuTiming,
)
from .sim import AdminState, SimKind, SimProfile

__all__ = [name for name in dir() if not name.startswith("_")]
