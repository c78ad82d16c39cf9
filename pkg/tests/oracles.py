"""Reference computations written without touching the package under test.

Each helper re-derives a value from the documented format using only the
standard library, so agreement with the package is meaningful.
"""

import hashlib


def bcd(digits: str) -> bytes:
    nibbles = [int(d) for d in digits]
    if len(nibbles) % 2:
        nibbles.append(0xF)
    return bytes(nibbles[i] | nibbles[i + 1] << 4 for i in range(0, len(nibbles), 2))


def unbcd(data: bytes) -> str:
    text = "".join(f"{b & 0xF:x}{b >> 4:x}" for b in data)
    return text.rstrip("f")


def hmac_sha256(key: bytes, msg: bytes) -> bytes:
    block = 64
    if len(key) > block:
        key = hashlib.sha256(key).digest()
    key = key.ljust(block, b"\0")
    inner = hashlib.sha256(bytes(k ^ 0x36 for k in key) + msg).digest()
    return hashlib.sha256(bytes(k ^ 0x5C for k in key) + inner).digest()


def aka_res(ki: bytes, opc: bytes, rand: bytes) -> bytes:
    return hmac_sha256(ki, b"\x01" + opc + rand)[:8]


def aka_autn(ki: bytes, opc: bytes, rand: bytes) -> bytes:
    return bytes(6) + b"\x80\x00" + hmac_sha256(ki, b"\x02" + opc + rand)[:8]


def decode_identity_request(data: bytes) -> dict:
    """Hand decoder for the one-field IdentityRequest frame."""
    assert len(data) == 4, "IdentityRequest frame is four octets"
    layer, kind, length, value = data
    assert length == 1
    return {"layer": layer, "kind": kind, "identity_type": value}
