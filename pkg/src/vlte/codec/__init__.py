from .capabilities import CapabilityFindings, interpret_capabilities
from .textfmt import message_from_dict, message_to_dict
from .types import (
    BROADCAST_KINDS,
    WARNING_KINDS,
    AuthParams,
    CapabilitySet,
    CodecError,
    EeaAlg,
    EiaAlg,
    EmmCause,
    EsmCause,
    GprsCipher,
    GsmCipher,
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
)
from .wire import bcd_pack, bcd_unpack, decode, encode, is_broadcast, validate

__all__ = [name for name in dir() if not name.startswith("_")]
