from __future__ import annotations

from dataclasses import asdict, dataclass

from .types import CapabilitySet, EeaAlg, EiaAlg


@dataclass(frozen=True)
class CapabilityFindings:
    advertises_null_cipher: bool = False
    advertises_legacy_gsm: bool = False
    advertises_legacy_gprs: bool = False
    supports_null_integrity: bool = False
    sms_over_legacy_channels: bool = False

    def as_dict(self) -> dict:
        return asdict(self)


def interpret_capabilities(raw: CapabilitySet) -> CapabilityFindings:
    """Flag the weak or legacy features a capability set advertises."""
    return CapabilityFindings(
        advertises_null_cipher=EeaAlg.EEA0 in raw.eea,
        advertises_legacy_gsm=bool(raw.gsm_ciphers),
        advertises_legacy_gprs=bool(raw.gprs_ciphers),
        supports_null_integrity=EiaAlg.EIA0 in raw.eia,
        sms_over_legacy_channels=raw.classmark2_sms_pp,
    )
