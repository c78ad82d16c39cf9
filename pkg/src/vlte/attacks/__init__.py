from .capability import run_capability_probe
from .common import ROGUE_CELL_ID, ChannelUnavailable
from .fallback import FAULT_CLASSES, run_fallback_suite
from .fbs import run_fbs
from .fingerprint import classify, run_fingerprint_cases, run_plmn_fingerprint
from .handover import run_handover_hijack
from .imsi_catcher import run_imsi_catcher
from .injection import run_message_injection
from .reports import (
    OUTCOME_LABELS,
    REPORT_TYPES,
    AttachType,
    CapabilityReport,
    Channel,
    FailureBehaviorRow,
    FaultClass,
    FbsMetrics,
    HandoverReport,
    ImsiCatchReport,
    MessageInjectionReport,
    Outcome,
    PlmnClassification,
    PostState,
    SimType,
    report_from_dict,
)
from ..rogue import RogueNode

__all__ = [name for name in dir() if not name.startswith("_")]
