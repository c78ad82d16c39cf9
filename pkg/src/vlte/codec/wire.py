"""Canonical simplified wire format.

Layout: ``[layer][kind]`` followed by every field of the kind's mask, in mask
order, each as ``[length][value]``.  Lengths are one octet except for the two
long text fields (``sms_body``, ``warning_text``) which use a two-octet
big-endian length.  The mask table below is the authoritative field list; see
docs/wire-format.md for the prose version.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .types import (
    BROADCAST_KINDS,
    AuthParams,
    CapabilitySet,
    CodecError,
    EeaAlg,
    EiaAlg,
    EmmCause,
    EsmCause,
    IdentityType,
    IllegalFieldCombination,
    Layer,
    MalformedField,
    NasKind,
    NasMessage,
    PlmnId,
    ProtocolMessage,
    RrcKind,
    RrcMessage,
    SecuritySelection,
    SmsClass,
    SmsPdu,
    Truncated,
    UnknownKind,
    WarningMessage,
    WarningSystem,
    populated,
)

MAX_IDENTITY_DIGITS = 25
MAX_RES = 16
MAX_SIGNATURE = 32
MAX_CELL_IDENTITY = 0x0FFFFFFF
C_RNTI_RANGE = (1, 65523)


# --- BCD ---------------------------------------------------------------------

def bcd_pack(digits: str) -> bytes:
    """Two digits per octet, low nibble first; odd counts pad the last high nibble with 0xF."""
    out = bytearray()
    for i in range(0, len(digits), 2):
        lo = int(digits[i])
        hi = int(digits[i + 1]) if i + 1 < len(digits) else 0xF
        out.append(hi << 4 | lo)
    return bytes(out)


def bcd_unpack(data: bytes, offset: int = 0) -> str:
    digits = []
    for i, octet in enumerate(data):
        lo, hi = octet & 0x0F, octet >> 4
        if lo > 9:
            raise MalformedField("invalid BCD digit", offset + i)
        digits.append(str(lo))
        if hi == 0xF and i == len(data) - 1:
            break
        if hi > 9:
            raise MalformedField("invalid BCD digit", offset + i)
        digits.append(str(hi))
    return "".join(digits)


# --- field codecs ------------------------------------------------------------

@dataclass(frozen=True)
class FieldSpec:
    name: str
    get: Callable[[dict], object]
    to_bytes: Callable[[object], bytes]
    from_bytes: Callable[[bytes, int], object]
    wide: bool = False


def _u8_enum(enum_cls):
    def dec(b, off):
        if len(b) != 1:
            raise MalformedField(f"{enum_cls.__name__} must be 1 octet", off)
        try:
            return enum_cls(b[0])
        except ValueError:
            raise MalformedField(f"unknown {enum_cls.__name__} code {b[0]}", off) from None
    return (lambda v: bytes([int(v)])), dec


def _fixed_uint(width, lo, hi, what):
    def enc(v):
        if not lo <= v <= hi:
            raise IllegalFieldCombination(f"{what} out of range: {v}")
        return int(v).to_bytes(width, "big")

    def dec(b, off):
        if len(b) != width:
            raise MalformedField(f"{what} must be {width} octets", off)
        v = int.from_bytes(b, "big")
        if not lo <= v <= hi:
            raise MalformedField(f"{what} out of range: {v}", off)
        return v
    return enc, dec


def _octets(min_len, max_len, what):
    def enc(v):
        if not min_len <= len(v) <= max_len:
            raise IllegalFieldCombination(f"{what} length {len(v)} outside [{min_len}, {max_len}]")
        return bytes(v)

    def dec(b, off):
        if not min_len <= len(b) <= max_len:
            raise MalformedField(f"{what} length {len(b)} outside [{min_len}, {max_len}]", off)
        return bytes(b)
    return enc, dec


def _digit_string(max_digits, what, exact=None):
    def check(s):
        if not (isinstance(s, str) and s.isascii() and s.isdigit()):
            return False
        if exact is not None:
            return len(s) in exact
        return 1 <= len(s) <= max_digits

    def enc(v):
        if not check(v):
            raise IllegalFieldCombination(f"invalid {what}: {v!r}")
        return bcd_pack(v)

    def dec(b, off):
        if not b:
            raise MalformedField(f"empty {what}", off)
        s = bcd_unpack(b, off)
        if not check(s):
            raise MalformedField(f"invalid {what}", off)
        return s
    return enc, dec


def _caps():
    def enc(v):
        return v.ms_network_capability_raw.to_bytes(2, "big")

    def dec(b, off):
        if len(b) != 2:
            raise MalformedField("capability field must be 2 octets", off)
        try:
            return CapabilitySet.from_bits(int.from_bytes(b, "big"))
        except ValueError as exc:
            raise MalformedField(str(exc), off) from None
    return enc, dec


def _selection():
    def enc(v):
        return bytes([int(v.cipher), int(v.integrity)])

    def dec(b, off):
        if len(b) != 2:
            raise MalformedField("security selection must be 2 octets", off)
        try:
            return (EeaAlg(b[0]), EiaAlg(b[1]))
        except ValueError:
            raise MalformedField("unknown algorithm code", off) from None
    return enc, dec


def _spec(name, get, codec, wide=False):
    enc, dec = codec
    return FieldSpec(name, get, enc, dec, wide)


def _attr(*path):
    def get(msg):
        v = msg
        for p in path:
            v = getattr(v, p) if v is not None else None
        return v
    return get


FIELDS = {
    s.name: s
    for s in [
        _spec("identity_type", _attr("identity_type"), _u8_enum(IdentityType)),
        _spec("identity_value", _attr("identity_value"), _digit_string(MAX_IDENTITY_DIGITS, "identity value")),
        _spec("emm_cause", _attr("emm_cause"), _u8_enum(EmmCause)),
        _spec("esm_cause", _attr("esm_cause"), _u8_enum(EsmCause)),
        _spec("capabilities", _attr("capabilities"), _caps()),
        _spec("security_selection", _attr("security_selection"), _selection()),
        _spec("rand", _attr("auth_params", "rand"), _octets(16, 16, "RAND")),
        _spec("autn", _attr("auth_params", "autn"), _octets(16, 16, "AUTN")),
        _spec("res", _attr("auth_params", "res"), _octets(0, MAX_RES, "RES")),
        _spec("sms_class", _attr("sms_payload", "sms_class"), _u8_enum(SmsClass)),
        _spec("sms_origin", _attr("sms_payload", "origin"), _digit_string(20, "SMS origin")),
        _spec("sms_body", _attr("sms_payload", "body"), _octets(0, SmsPdu.MAX_BODY, "SMS body"), wide=True),
        _spec("plmn", lambda m: str(m.plmn) if m.plmn is not None else None,
              _digit_string(6, "PLMN", exact=(5, 6))),
        _spec("tac", _attr("tac"), _fixed_uint(2, 0, 0xFFFF, "TAC")),
        _spec("cell_identity", _attr("cell_identity"), _fixed_uint(4, 0, MAX_CELL_IDENTITY, "cell identity")),
        _spec("c_rnti", _attr("c_rnti"), _fixed_uint(2, *C_RNTI_RANGE, "C-RNTI")),
        _spec("signature", _attr("signature"), _octets(0, MAX_SIGNATURE, "signature")),
        _spec("warning_system", _attr("warning_payload", "system"), _u8_enum(WarningSystem)),
        _spec("message_id", _attr("warning_payload", "message_id"), _fixed_uint(2, 0, 0xFFFF, "message id")),
        _spec("serial", _attr("warning_payload", "serial"), _fixed_uint(2, 0, 0xFFFF, "serial")),
        _spec("warning_text", _attr("warning_payload", "text"),
              _octets(0, WarningMessage.MAX_TEXT, "warning text"), wide=True),
        _spec("paged_identity", _attr("paged_identity"), _digit_string(MAX_IDENTITY_DIGITS, "paged identity")),
    ]
}

_WARNING = ("warning_system", "message_id", "serial", "warning_text")

NAS_MASKS: dict[NasKind, tuple[str, ...]] = {
    NasKind.IdentityRequest: ("identity_type",),
    NasKind.IdentityResponse: ("identity_type", "identity_value"),
    NasKind.AttachRequest: ("identity_type", "identity_value", "capabilities"),
    NasKind.AttachAccept: ("identity_type", "identity_value"),
    NasKind.AttachReject: ("emm_cause",),
    NasKind.AuthenticationRequest: ("rand", "autn"),
    NasKind.AuthenticationResponse: ("res",),
    NasKind.SecurityModeCommand: ("security_selection",),
    NasKind.SecurityModeComplete: (),
    NasKind.SecurityModeReject: (),
    NasKind.PdnConnectivityRequest: (),
    NasKind.ActivateDefaultBearerRequest: (),
    NasKind.PdnConnectivityReject: ("esm_cause",),
    NasKind.DetachRequest: (),
    NasKind.SmsTransport: ("sms_class", "sms_origin", "sms_body"),
}

RRC_MASKS: dict[RrcKind, tuple[str, ...]] = {
    RrcKind.Mib: (),
    RrcKind.Sib1: ("plmn", "tac", "cell_identity", "signature"),
    RrcKind.Sib10: _WARNING,
    RrcKind.Sib11: _WARNING,
    RrcKind.Sib12: _WARNING,
    RrcKind.Paging: ("paged_identity",),
    RrcKind.RrcConnectionRequest: (),
    RrcKind.RrcConnectionSetup: ("c_rnti",),
    RrcKind.RrcConnectionReconfiguration: ("cell_identity",),
    RrcKind.RrcConnectionRelease: (),
    RrcKind.RrcReestablishmentRequest: ("c_rnti",),
    RrcKind.RrcReestablishmentReject: (),
}

# leaf wire field -> owning message attribute
_OWNER = {
    "rand": "auth_params", "autn": "auth_params", "res": "auth_params",
    "sms_class": "sms_payload", "sms_origin": "sms_payload", "sms_body": "sms_payload",
    "warning_system": "warning_payload", "message_id": "warning_payload",
    "serial": "warning_payload", "warning_text": "warning_payload",
}
_AUTH_LEAVES = ("rand", "autn", "res")


def mask_for(msg_or_layer, kind=None) -> tuple[str, ...]:
    if kind is None:
        layer, kind = msg_or_layer.layer, msg_or_layer.kind
    else:
        layer = msg_or_layer
    return NAS_MASKS[kind] if layer == Layer.NAS else RRC_MASKS[kind]


def validate(msg: ProtocolMessage) -> None:
    """Raise IllegalFieldCombination unless ``msg`` satisfies its kind's mask."""
    if not isinstance(msg, (NasMessage, RrcMessage)):
        raise IllegalFieldCombination(f"not a protocol message: {type(msg).__name__}")
    mask = mask_for(msg)
    required = frozenset(_OWNER.get(f, f) for f in mask)
    present = populated(msg)
    if present != required:
        extra, missing = sorted(present - required), sorted(required - present)
        raise IllegalFieldCombination(
            f"{msg.kind.name}: fields {extra} not allowed, {missing} missing"
        )
    if isinstance(msg, NasMessage) and msg.auth_params is not None:
        want = {f for f in mask if f in _AUTH_LEAVES}
        have = {f for f in _AUTH_LEAVES if getattr(msg.auth_params, f) is not None}
        if want != have:
            raise IllegalFieldCombination(f"{msg.kind.name}: auth params {sorted(have)} != {sorted(want)}")
    _semantic_checks(msg)


def _semantic_checks(msg) -> None:
    if isinstance(msg, NasMessage):
        k = msg.kind
        if k == NasKind.AttachRequest and msg.identity_type not in (
            IdentityType.IMSI, IdentityType.GUTI, IdentityType.CONCEALED
        ):
            raise IllegalFieldCombination("AttachRequest identity must be IMSI, GUTI or CONCEALED")
        if k == NasKind.AttachAccept and msg.identity_type != IdentityType.GUTI:
            raise IllegalFieldCombination("AttachAccept must allocate a GUTI")
        if k == NasKind.SecurityModeCommand and not isinstance(msg.security_selection, SecuritySelection):
            raise IllegalFieldCombination("security_selection must be a SecuritySelection")
        if k == NasKind.SmsTransport and not isinstance(msg.sms_payload, SmsPdu):
            raise IllegalFieldCombination("sms_payload must be an SmsPdu")
        if msg.capabilities is not None and not isinstance(msg.capabilities, CapabilitySet):
            raise IllegalFieldCombination("capabilities must be a CapabilitySet")
    else:
        k = msg.kind
        if msg.warning_payload is not None:
            if not isinstance(msg.warning_payload, WarningMessage):
                raise IllegalFieldCombination("warning_payload must be a WarningMessage")
            etws = msg.warning_payload.system == WarningSystem.ETWS
            if etws != (k in (RrcKind.Sib10, RrcKind.Sib11)):
                raise IllegalFieldCombination("ETWS travels on SIB10/11, CMAS on SIB12")
        if msg.plmn is not None and not isinstance(msg.plmn, PlmnId):
            raise IllegalFieldCombination("plmn must be a PlmnId")


# --- encode / decode ---------------------------------------------------------

def encode(msg: ProtocolMessage) -> bytes:
    validate(msg)
    out = bytearray([int(msg.layer), int(msg.kind)])
    for name in mask_for(msg):
        spec = FIELDS[name]
        value = spec.to_bytes(spec.get(msg))
        if spec.wide:
            out += len(value).to_bytes(2, "big")
        elif len(value) > 0xFF:
            raise IllegalFieldCombination(f"{name} too long")
        else:
            out.append(len(value))
        out += value
    return bytes(out)


def decode(data: bytes) -> ProtocolMessage:
    """Inverse of :func:`encode`.  Raises a :class:`CodecError` subclass on bad input."""
    data = bytes(data)
    if len(data) < 1:
        raise Truncated("missing layer tag", 0)
    try:
        layer = Layer(data[0])
    except ValueError:
        raise UnknownKind(f"unassigned layer tag 0x{data[0]:02x}", 0) from None
    if len(data) < 2:
        raise Truncated("missing kind code", 1)
    kind_cls = NasKind if layer == Layer.NAS else RrcKind
    try:
        kind = kind_cls(data[1])
    except ValueError:
        raise UnknownKind(f"unassigned {layer.name} kind 0x{data[1]:02x}", 1) from None

    pos = 2
    leaves = {}
    for name in mask_for(layer, kind):
        spec = FIELDS[name]
        width = 2 if spec.wide else 1
        if pos + width > len(data):
            raise Truncated(f"missing length of {name}", pos)
        length = int.from_bytes(data[pos:pos + width], "big")
        pos += width
        if pos + length > len(data):
            raise Truncated(f"{name} needs {length} octets", pos)
        leaves[name] = spec.from_bytes(data[pos:pos + length], pos)
        pos += length
    if pos != len(data):
        raise IllegalFieldCombination("octets beyond the field mask", pos)

    try:
        msg = _build(layer, kind, leaves)
        validate(msg)
    except CodecError as exc:
        raise type(exc)(exc.reason, 2) from None
    except (ValueError, TypeError) as exc:
        raise MalformedField(str(exc), 2) from None
    return msg


def _build(layer, kind, leaves) -> ProtocolMessage:
    if layer == Layer.NAS:
        kw = {}
        for name in ("identity_type", "identity_value", "emm_cause", "esm_cause", "capabilities"):
            if name in leaves:
                kw[name] = leaves[name]
        if "security_selection" in leaves:
            kw["security_selection"] = SecuritySelection(*leaves["security_selection"])
        if any(f in leaves for f in _AUTH_LEAVES):
            kw["auth_params"] = AuthParams(**{f: leaves[f] for f in _AUTH_LEAVES if f in leaves})
        if "sms_class" in leaves:
            kw["sms_payload"] = SmsPdu(leaves["sms_class"], leaves["sms_origin"], leaves["sms_body"])
        return NasMessage(kind, **kw)
    kw = {}
    for name in ("tac", "cell_identity", "c_rnti", "paged_identity", "signature"):
        if name in leaves:
            kw[name] = leaves[name]
    if "plmn" in leaves:
        kw["plmn"] = PlmnId.parse(leaves["plmn"])
    if "warning_system" in leaves:
        kw["warning_payload"] = WarningMessage(
            leaves["warning_system"], leaves["message_id"], leaves["serial"], leaves["warning_text"]
        )
    return RrcMessage(kind, **kw)


def is_broadcast(msg: ProtocolMessage) -> bool:
    return isinstance(msg, RrcMessage) and msg.kind in BROADCAST_KINDS
