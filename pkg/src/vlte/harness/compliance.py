"""Maps attack reports onto UN R155 / R156 requirement rows.

A row is triggered only when its predicate fires *and* the supporting
reports carry at least one trace reference, so every positive finding can
be traced back to concrete events.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable

from ..attacks.reports import (
    CapabilityReport,
    Channel,
    FailureBehaviorRow,
    FbsMetrics,
    ImsiCatchReport,
    MessageInjectionReport,
    PostState,
    report_from_dict,
)


class Vulnerability(enum.Enum):
    IdentityExposure = 1
    RogueBaseStation = 2
    InsecureFallback = 3
    LegacyCrypto = 4
    SilentSms = 5
    EmergencyBroadcast = 6
    OtaBlocked = 7
    UpdateFailureAwareness = 8
    SupplierStack = 9


LABELS = {
    Vulnerability.IdentityExposure: "IMSI catching / identity exposure",
    Vulnerability.RogueBaseStation: "Rogue base station / lax PLMN enforcement",
    Vulnerability.InsecureFallback: "Insecure fallback / attach loops",
    Vulnerability.LegacyCrypto: "Legacy / weak crypto (e.g., null cipher, A5/3)",
    Vulnerability.SilentSms: "Silent/Binary SMS acceptance (no UI)",
    Vulnerability.EmergencyBroadcast: "Improper handling of emergency broadcasts",
    Vulnerability.OtaBlocked: "OTA blocked by rogue LTE",
    Vulnerability.UpdateFailureAwareness: "Lack of user awareness of update failures",
    Vulnerability.SupplierStack: "Supplier-dependent stack (Qualcomm / Quectel)",
}

REGULATION_REFS = {
    Vulnerability.IdentityExposure: [
        "R155 Annex 5 Table B1, Threat 7.1 (interception/monitoring), Mitigation M12; Vehicle-type 7.3.3, 7.3.7",
    ],
    Vulnerability.RogueBaseStation: [
        "R155 Annex 5 Table B1, Threat 6.1 (accepting untrusted info), 6.2 (MITM), Mitigation M10; "
        "Threat 8.1 (DoS), Mitigation M13; Vehicle-type 7.3.3–7.3.7",
    ],
    Vulnerability.InsecureFallback: [
        "R155 Table B1 Threat 8.1 (DoS), Mitigation M13; Vehicle-type 7.3.4, 7.3.6, 7.3.7.",
        "R156 7.1.3.1–7.1.3.3, 7.2.2.1.1, 7.2.2.2, 7.2.2.4, 7.2.2.5",
    ],
    Vulnerability.LegacyCrypto: [
        "R155 Table B6 Threats 26.2/26.3, Mitigation M23; Vehicle-type 7.3.8",
    ],
    Vulnerability.SilentSms: [
        "R155 Table B1 Threat 6.1, Mitigation M10; Table B4 Threat 16.2 (telematics manipulation), "
        "Mitigation M20; Vehicle-type 7.3.7",
    ],
    Vulnerability.EmergencyBroadcast: [
        "R155 Table B1 Threat 6.1, Mitigation M10; Vehicle-type 7.3.6, 7.3.7",
    ],
    Vulnerability.OtaBlocked: [
        "R155 Table B2 Threat 13.1 (DoS vs. update rollout), Mitigation M3.",
        "R156 7.1.3.1–7.1.3.2, 7.2.2.1.1, 7.2.2.2, 7.2.2.4, 7.2.2.5",
    ],
    Vulnerability.UpdateFailureAwareness: [
        "R156 7.2.2.2 (inform before), 7.2.2.4 (inform after)",
    ],
    Vulnerability.SupplierStack: [
        "R155 Vehicle-type 7.2.2.5 (supplier dependencies), 7.3.2 (supplier-related risks)",
    ],
}


@dataclass
class ComplianceFinding:
    vulnerability: Vulnerability
    triggered: bool = False
    evidence: list = field(default_factory=list)
    regulation_refs: list = field(default_factory=list)

    @property
    def label(self) -> str:
        return LABELS[self.vulnerability]

    def to_dict(self) -> dict:
        return {"row": self.vulnerability.value, "vulnerability": self.label, "triggered": self.triggered,
                "evidence": list(self.evidence), "regulation_refs": list(self.regulation_refs)}


def _tagged(reports, cls, tag, predicate=lambda r: True) -> list[str]:
    out = []
    for r in reports:
        if isinstance(r, cls) and predicate(r):
            out.extend(r.evidence.get(tag, []))
    return out


def _evidence(v: Vulnerability, reports: list) -> list[str]:
    if v == Vulnerability.IdentityExposure:
        return _tagged(reports, ImsiCatchReport, "leak", lambda r: r.attack_success)
    if v == Vulnerability.RogueBaseStation:
        return _tagged(reports, FbsMetrics, "rogue_attach", lambda r: r.post_state == PostState.Camps)
    if v == Vulnerability.InsecureFallback:
        return _tagged(reports, FailureBehaviorRow, "loop", lambda r: r.loop_trapped)
    if v == Vulnerability.LegacyCrypto:
        return _tagged(reports, CapabilityReport, "null_cipher",
                       lambda r: r.findings.get("advertises_null_cipher", False))
    if v == Vulnerability.SilentSms:
        return _tagged(reports, MessageInjectionReport, "silent_sms",
                       lambda r: r.channel == Channel.SmsIms and r.protocol_ack and not r.user_surface_event)
    if v == Vulnerability.EmergencyBroadcast:
        return _tagged(reports, MessageInjectionReport, "silent_alert",
                       lambda r: r.channel != Channel.SmsIms and r.protocol_ack and not r.user_surface_event)
    if v == Vulnerability.OtaBlocked:
        return _tagged(reports, FbsMetrics, "backend_blocked", lambda r: r.backend_blocked)
    if v == Vulnerability.UpdateFailureAwareness:
        return _tagged(reports, FailureBehaviorRow, "silent_failure", lambda r: r.state_transition_failure)
    return []


def _ref_key(ref: str):
    trace, _, seq = ref.rpartition("#")
    return (trace, int(seq) if seq.isdigit() else -1, ref)


def compliance_map(reports: Iterable) -> list[ComplianceFinding]:
    reports = [report_from_dict(r) if isinstance(r, dict) else r for r in reports]
    findings = []
    for v in Vulnerability:
        evidence = sorted(set(_evidence(v, reports)), key=_ref_key)
        findings.append(ComplianceFinding(v, bool(evidence), evidence, list(REGULATION_REFS[v])))
    return findings


def render_compliance(findings: list[ComplianceFinding]) -> str:
    lines = []
    for f in findings:
        mark = "TRIGGERED" if f.triggered else "not triggered"
        lines.append(f"[{f.vulnerability.value}] {f.label}: {mark}")
        for ref in f.regulation_refs:
            lines.append(f"    {ref}")
        if f.evidence:
            shown = ", ".join(f.evidence[:5])
            more = f" (+{len(f.evidence) - 5} more)" if len(f.evidence) > 5 else ""
            lines.append(f"    evidence: {shown}{more}")
    return "\n".join(lines) + "\n"
