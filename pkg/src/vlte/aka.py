"""Simplified AKA.

All outputs come from HMAC-SHA256 keyed with Ki over ``label || OPc || RAND``
with a one-octet domain label:

* ``0x01``: RES, first 8 octets
* ``0x02``: MAC carried in AUTN, first 8 octets
* ``0x03``: KASME analog, all 32 octets

AUTN is ``SQN (6 octets, zero) || AMF (0x80 0x00) || MAC``.  There is no
sequence-number tracking; freshness comes from RAND only.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass

SQN = bytes(6)
AMF = b"\x80\x00"


def _prf(ki: bytes, label: int, opc: bytes, rand: bytes) -> bytes:
    if len(ki) != 16 or len(opc) != 16 or len(rand) != 16:
        raise ValueError("Ki, OPc and RAND must be 16 octets")
    return hmac.new(ki, bytes([label]) + opc + rand, hashlib.sha256).digest()


def res(ki: bytes, opc: bytes, rand: bytes) -> bytes:
    return _prf(ki, 0x01, opc, rand)[:8]


def mac(ki: bytes, opc: bytes, rand: bytes) -> bytes:
    return _prf(ki, 0x02, opc, rand)[:8]


def kasme(ki: bytes, opc: bytes, rand: bytes) -> bytes:
    return _prf(ki, 0x03, opc, rand)


def autn(ki: bytes, opc: bytes, rand: bytes) -> bytes:
    return SQN + AMF + mac(ki, opc, rand)


def verify_autn(ki: bytes, opc: bytes, rand: bytes, received: bytes) -> bool:
    return hmac.compare_digest(autn(ki, opc, rand), bytes(received))


@dataclass(frozen=True)
class AuthVector:
    rand: bytes
    autn: bytes
    expected_res: bytes
    kasme: bytes


def vector(ki: bytes, opc: bytes, rand: bytes) -> AuthVector:
    return AuthVector(rand, autn(ki, opc, rand), res(ki, opc, rand), kasme(ki, opc, rand))


# Concealed attach identity: 4-octet nonce and a 4-octet tag, both printed as
# 10 decimal digits, so the value fits the digit-string identity field.

def conceal(ki: bytes, nonce: int) -> str:
    tag = hmac.new(ki, b"conceal" + nonce.to_bytes(4, "big"), hashlib.sha256).digest()[:4]
    return f"{nonce:010d}{int.from_bytes(tag, 'big'):010d}"


def concealed_matches(ki: bytes, value: str) -> bool:
    if len(value) != 20 or not value.isdigit():
        return False
    nonce = int(value[:10])
    return nonce < 1 << 32 and conceal(ki, nonce) == value


def sib_signature(key: bytes, plmn: str, tac: int, cell_identity: int) -> bytes:
    msg = plmn.encode() + tac.to_bytes(2, "big") + cell_identity.to_bytes(4, "big")
    return hmac.new(key, msg, hashlib.sha256).digest()[:16]
