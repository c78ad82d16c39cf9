"""Structured text (JSON) form of protocol messages.

Used by the ``codec`` CLI subcommand and by the trace stream.  Enum values are
written by name, octet strings as lowercase hex, PLMNs as their digit form.
"""

from __future__ import annotations

import json
from typing import Any

from .types import (
    AuthParams,
    CapabilitySet,
    EeaAlg,
    EiaAlg,
    EmmCause,
    EsmCause,
    GprsCipher,
    GsmCipher,
    IdentityType,
    Layer,
    NasKind,
    NasMessage,
    PlmnId,
    ProtocolMessage,
    RrcKind,
    RrcMessage,
    SecuritySelection,
    SmsClass,
    SmsPdu,
    WarningMessage,
    WarningSystem,
)


def _names(values) -> list[str]:
    return sorted(v.name for v in values)


def capabilities_to_dict(caps: CapabilitySet) -> dict:
    return {
        "eea": _names(caps.eea),
        "eia": _names(caps.eia),
        "gsm_ciphers": _names(caps.gsm_ciphers),
        "gprs_ciphers": _names(caps.gprs_ciphers),
        "classmark2_sms_pp": caps.classmark2_sms_pp,
    }


def capabilities_from_dict(d: dict) -> CapabilitySet:
    return CapabilitySet(
        eea=frozenset(EeaAlg[x] for x in d.get("eea", ())),
        eia=frozenset(EiaAlg[x] for x in d.get("eia", ())),
        gsm_ciphers=frozenset(GsmCipher[x] for x in d.get("gsm_ciphers", ())),
        gprs_ciphers=frozenset(GprsCipher[x] for x in d.get("gprs_ciphers", ())),
        classmark2_sms_pp=bool(d.get("classmark2_sms_pp", False)),
    )


def message_to_dict(msg: ProtocolMessage) -> dict[str, Any]:
    d: dict[str, Any] = {"layer": msg.layer.name, "kind": msg.kind.name}
    if isinstance(msg, NasMessage):
        if msg.identity_type is not None:
            d["identity_type"] = msg.identity_type.name
        if msg.identity_value is not None:
            d["identity_value"] = msg.identity_value
        if msg.emm_cause is not None:
            d["emm_cause"] = msg.emm_cause.name
        if msg.esm_cause is not None:
            d["esm_cause"] = msg.esm_cause.name
        if msg.capabilities is not None:
            d["capabilities"] = capabilities_to_dict(msg.capabilities)
        if msg.security_selection is not None:
            d["security_selection"] = {
                "cipher": msg.security_selection.cipher.name,
                "integrity": msg.security_selection.integrity.name,
            }
        if msg.auth_params is not None:
            d["auth_params"] = {
                k: getattr(msg.auth_params, k).hex()
                for k in ("rand", "autn", "res")
                if getattr(msg.auth_params, k) is not None
            }
        if msg.sms_payload is not None:
            p = msg.sms_payload
            d["sms_payload"] = {"class": p.sms_class.name, "origin": p.origin, "body": p.body.hex()}
    else:
        if msg.plmn is not None:
            d["plmn"] = str(msg.plmn)
        for k in ("tac", "cell_identity", "c_rnti", "paged_identity"):
            if getattr(msg, k) is not None:
                d[k] = getattr(msg, k)
        if msg.signature is not None:
            d["signature"] = msg.signature.hex()
        if msg.warning_payload is not None:
            w = msg.warning_payload
            d["warning_payload"] = {
                "system": w.system.name,
                "message_id": w.message_id,
                "serial": w.serial,
                "text": w.text.hex(),
            }
    return d


def message_from_dict(d: dict[str, Any]) -> ProtocolMessage:
    """Build a message from its dict form; raises KeyError/ValueError on bad input."""
    layer = Layer[d["layer"]]
    if layer == Layer.NAS:
        kw: dict[str, Any] = {}
        if "identity_type" in d:
            kw["identity_type"] = IdentityType[d["identity_type"]]
        if "identity_value" in d:
            kw["identity_value"] = str(d["identity_value"])
        if "emm_cause" in d:
            kw["emm_cause"] = EmmCause[d["emm_cause"]]
        if "esm_cause" in d:
            kw["esm_cause"] = EsmCause[d["esm_cause"]]
        if "capabilities" in d:
            kw["capabilities"] = capabilities_from_dict(d["capabilities"])
        if "security_selection" in d:
            s = d["security_selection"]
            kw["security_selection"] = SecuritySelection(EeaAlg[s["cipher"]], EiaAlg[s["integrity"]])
        if "auth_params" in d:
            kw["auth_params"] = AuthParams(**{k: bytes.fromhex(v) for k, v in d["auth_params"].items()})
        if "sms_payload" in d:
            p = d["sms_payload"]
            kw["sms_payload"] = SmsPdu(SmsClass[p["class"]], str(p["origin"]), bytes.fromhex(p.get("body", "")))
        return NasMessage(NasKind[d["kind"]], **kw)

    kw = {}
    if "plmn" in d:
        kw["plmn"] = PlmnId.parse(d["plmn"])
    for k in ("tac", "cell_identity", "c_rnti"):
        if k in d:
            kw[k] = int(d[k])
    if "paged_identity" in d:
        kw["paged_identity"] = str(d["paged_identity"])
    if "signature" in d:
        kw["signature"] = bytes.fromhex(d["signature"])
    if "warning_payload" in d:
        w = d["warning_payload"]
        kw["warning_payload"] = WarningMessage(
            WarningSystem[w["system"]], int(w["message_id"]), int(w["serial"]), bytes.fromhex(w.get("text", ""))
        )
    return RrcMessage(RrcKind[d["kind"]], **kw)


def dumps(msg: ProtocolMessage) -> str:
    return json.dumps(message_to_dict(msg), sort_keys=True)


def loads(text: str) -> ProtocolMessage:
    return message_from_dict(json.loads(text))
