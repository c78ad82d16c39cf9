"""Message vocabulary: identities, capability sets, NAS/RRC messages."""

from __future__ import annotations

import enum
from dataclasses import dataclass, fields
from typing import Optional, Union


class CodecError(Exception):
    """Base class for encode/decode failures. ``offset`` is the failing octet."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (offset {offset})")
        self.reason = message
        self.offset = offset


class Truncated(CodecError):
    pass


class UnknownKind(CodecError):
    pass


class IllegalFieldCombination(CodecError):
    pass


class MalformedField(CodecError):
    pass


def _digits(value: str, name: str) -> None:
    if not isinstance(value, str) or not value.isdigit() or not value.isascii():
        raise ValueError(f"{name} must be a decimal digit string, got {value!r}")


@dataclass(frozen=True, order=True)
class PlmnId:
    mcc: str
    mnc: str

    def __post_init__(self):
        _digits(self.mcc, "mcc")
        _digits(self.mnc, "mnc")
        if len(self.mcc) != 3:
            raise ValueError(f"mcc must have 3 digits: {self.mcc!r}")
        if len(self.mnc) not in (2, 3):
            raise ValueError(f"mnc must have 2 or 3 digits: {self.mnc!r}")

    @classmethod
    def parse(cls, text: str) -> "PlmnId":
        text = str(text)
        if len(text) not in (5, 6):
            raise ValueError(f"PLMN must be 5 or 6 digits: {text!r}")
        return cls(text[:3], text[3:])

    def __str__(self) -> str:
        return self.mcc + self.mnc


class Layer(enum.IntEnum):
    NAS = 0x01
    RRC = 0x02


class NasKind(enum.IntEnum):
    IdentityRequest = 0x01
    IdentityResponse = 0x02
    AttachRequest = 0x03
    AttachAccept = 0x04
    AttachReject = 0x05
    AuthenticationRequest = 0x06
    AuthenticationResponse = 0x07
    SecurityModeCommand = 0x08
    SecurityModeComplete = 0x09
    SecurityModeReject = 0x0A
    PdnConnectivityRequest = 0x0B
    ActivateDefaultBearerRequest = 0x0C
    PdnConnectivityReject = 0x0D
    DetachRequest = 0x0E
    SmsTransport = 0x0F


class RrcKind(enum.IntEnum):
    Mib = 0x01
    Sib1 = 0x02
    Sib10 = 0x03
    Sib11 = 0x04
    Sib12 = 0x05
    Paging = 0x06
    RrcConnectionRequest = 0x07
    RrcConnectionSetup = 0x08
    RrcConnectionReconfiguration = 0x09
    RrcConnectionRelease = 0x0A
    RrcReestablishmentRequest = 0x0B
    RrcReestablishmentReject = 0x0C


BROADCAST_KINDS = frozenset({RrcKind.Sib10, RrcKind.Sib11, RrcKind.Sib12, RrcKind.Paging})
WARNING_KINDS = frozenset({RrcKind.Sib10, RrcKind.Sib11, RrcKind.Sib12})


class IdentityType(enum.IntEnum):
    IMSI = 0
    IMEI = 1
    GUTI = 2
    TMSI = 3
    # privacy-preserving attach identity used by the hardened profile
    CONCEALED = 4


class EmmCause(enum.IntEnum):
    PlmnNotAllowed = 1
    EpsServicesNotAllowed = 2
    MissingOrUnknownApn = 3
    MacFailure = 4
    UnknownUe = 5


class EsmCause(enum.IntEnum):
    UnknownPdnType = 1
    PdnTypeIpv4OnlyAllowed = 2


class EeaAlg(enum.IntEnum):
    EEA0 = 0
    EEA1 = 1
    EEA2 = 2
    EEA3 = 3


class EiaAlg(enum.IntEnum):
    EIA0 = 0
    EIA1 = 1
    EIA2 = 2
    EIA3 = 3


class GsmCipher(enum.IntEnum):
    A5_1 = 1
    A5_3 = 3


class GprsCipher(enum.IntEnum):
    GEA2 = 2
    GEA3 = 3


class SmsClass(enum.IntEnum):
    Normal = 0
    Flash = 1
    Silent = 2
    Binary = 3


class WarningSystem(enum.IntEnum):
    ETWS = 0
    CMAS = 1


# bit positions inside the 16-bit capability field; bits 13..15 reserved (zero)
_EEA_BIT = {a: int(a) for a in EeaAlg}
_EIA_BIT = {a: 4 + int(a) for a in EiaAlg}
_GSM_BIT = {GsmCipher.A5_1: 8, GsmCipher.A5_3: 9}
_GPRS_BIT = {GprsCipher.GEA2: 10, GprsCipher.GEA3: 11}
_SMS_PP_BIT = 12
CAPABILITY_RESERVED_MASK = 0xE000


@dataclass(frozen=True)
class CapabilitySet:
    eea: frozenset = frozenset()
    eia: frozenset = frozenset()
    gsm_ciphers: frozenset = frozenset()
    gprs_ciphers: frozenset = frozenset()
    classmark2_sms_pp: bool = False

    def __post_init__(self):
        object.__setattr__(self, "eea", frozenset(EeaAlg(a) for a in self.eea))
        object.__setattr__(self, "eia", frozenset(EiaAlg(a) for a in self.eia))
        object.__setattr__(self, "gsm_ciphers", frozenset(GsmCipher(a) for a in self.gsm_ciphers))
        object.__setattr__(self, "gprs_ciphers", frozenset(GprsCipher(a) for a in self.gprs_ciphers))
        object.__setattr__(self, "classmark2_sms_pp", bool(self.classmark2_sms_pp))
        if self.eea and not self.eia:
            raise ValueError("a capability set advertising EEA must advertise at least one EIA")

    @property
    def ms_network_capability_raw(self) -> int:
        bits = 0
        for a in self.eea:
            bits |= 1 << _EEA_BIT[a]
        for a in self.eia:
            bits |= 1 << _EIA_BIT[a]
        for a in self.gsm_ciphers:
            bits |= 1 << _GSM_BIT[a]
        for a in self.gprs_ciphers:
            bits |= 1 << _GPRS_BIT[a]
        if self.classmark2_sms_pp:
            bits |= 1 << _SMS_PP_BIT
        return bits

    @classmethod
    def from_bits(cls, bits: int) -> "CapabilitySet":
        if not 0 <= bits <= 0xFFFF:
            raise ValueError("capability field is 16 bits")
        if bits & CAPABILITY_RESERVED_MASK:
            raise ValueError("reserved capability bits set")

        def pick(table):
            return frozenset(k for k, b in table.items() if bits >> b & 1)

        return cls(
            eea=pick(_EEA_BIT),
            eia=pick(_EIA_BIT),
            gsm_ciphers=pick(_GSM_BIT),
            gprs_ciphers=pick(_GPRS_BIT),
            classmark2_sms_pp=bool(bits >> _SMS_PP_BIT & 1),
        )


@dataclass(frozen=True)
class SecuritySelection:
    cipher: EeaAlg
    integrity: EiaAlg

    def __post_init__(self):
        object.__setattr__(self, "cipher", EeaAlg(self.cipher))
        object.__setattr__(self, "integrity", EiaAlg(self.integrity))


@dataclass(frozen=True)
class AuthParams:
    rand: Optional[bytes] = None
    autn: Optional[bytes] = None
    res: Optional[bytes] = None


@dataclass(frozen=True)
class SmsPdu:
    sms_class: SmsClass
    origin: str
    body: bytes = b""

    MAX_BODY = 280

    def __post_init__(self):
        object.__setattr__(self, "sms_class", SmsClass(self.sms_class))
        _digits(self.origin, "origin")
        if len(self.body) > self.MAX_BODY:
            raise ValueError(f"SMS body exceeds {self.MAX_BODY} octets")


@dataclass(frozen=True)
class WarningMessage:
    system: WarningSystem
    message_id: int
    serial: int
    text: bytes = b""

    MAX_TEXT = 1024

    def __post_init__(self):
        object.__setattr__(self, "system", WarningSystem(self.system))
        for name in ("message_id", "serial"):
            v = getattr(self, name)
            if not 0 <= v <= 0xFFFF:
                raise ValueError(f"{name} must fit 16 bits")
        if len(self.text) > self.MAX_TEXT:
            raise ValueError(f"warning text exceeds {self.MAX_TEXT} octets")


@dataclass(frozen=True)
class NasMessage:
    kind: NasKind
    identity_type: Optional[IdentityType] = None
    identity_value: Optional[str] = None
    emm_cause: Optional[EmmCause] = None
    esm_cause: Optional[EsmCause] = None
    capabilities: Optional[CapabilitySet] = None
    security_selection: Optional[SecuritySelection] = None
    auth_params: Optional[AuthParams] = None
    sms_payload: Optional[SmsPdu] = None

    layer = Layer.NAS

    def __post_init__(self):
        object.__setattr__(self, "kind", NasKind(self.kind))
        if self.identity_type is not None:
            object.__setattr__(self, "identity_type", IdentityType(self.identity_type))
        if self.emm_cause is not None:
            object.__setattr__(self, "emm_cause", EmmCause(self.emm_cause))
        if self.esm_cause is not None:
            object.__setattr__(self, "esm_cause", EsmCause(self.esm_cause))


@dataclass(frozen=True)
class RrcMessage:
    kind: RrcKind
    plmn: Optional[PlmnId] = None
    tac: Optional[int] = None
    cell_identity: Optional[int] = None
    c_rnti: Optional[int] = None
    warning_payload: Optional[WarningMessage] = None
    paged_identity: Optional[str] = None
    signature: Optional[bytes] = None

    layer = Layer.RRC

    def __post_init__(self):
        object.__setattr__(self, "kind", RrcKind(self.kind))


ProtocolMessage = Union[NasMessage, RrcMessage]


def populated(msg: ProtocolMessage) -> frozenset:
    """Names of the top-level fields carrying a value (``kind`` excluded)."""
    return frozenset(f.name for f in fields(msg) if f.name != "kind" and getattr(msg, f.name) is not None)
