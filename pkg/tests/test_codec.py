import random

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

import oracles
from strategies import capability_sets, digits, messages
from vlte.codec import (
    CapabilitySet,
    CodecError,
    EeaAlg,
    EiaAlg,
    GprsCipher,
    GsmCipher,
    IdentityType,
    IllegalFieldCombination,
    MalformedField,
    NasKind,
    NasMessage,
    PlmnId,
    RrcKind,
    RrcMessage,
    SmsClass,
    SmsPdu,
    Truncated,
    UnknownKind,
    WarningMessage,
    WarningSystem,
    bcd_pack,
    bcd_unpack,
    decode,
    encode,
    interpret_capabilities,
    message_from_dict,
    message_to_dict,
)

ATTACH_IMSI = NasMessage(NasKind.AttachRequest, identity_type=IdentityType.IMSI,
                         identity_value="310260123456789", capabilities=CapabilitySet())


def test_identity_request_frame_matches_hand_decode():
    wire = encode(NasMessage(NasKind.IdentityRequest, identity_type=IdentityType.IMSI))
    assert wire == bytes([0x01, 0x01, 0x01, 0x00])
    assert oracles.decode_identity_request(wire) == {"layer": 1, "kind": 1, "identity_type": 0}


def test_attach_request_carries_bcd_imsi():
    wire = encode(ATTACH_IMSI)
    packed = oracles.bcd("310260123456789")
    assert packed == bytes.fromhex("13200621436587f9")
    assert packed in wire
    assert decode(wire).identity_value == "310260123456789"


def test_bcd_against_oracle_on_random_imsis():
    rng = random.Random(20240601)
    for _ in range(2000):
        s = "".join(rng.choice("0123456789") for _ in range(15))
        assert bcd_pack(s) == oracles.bcd(s)
        assert bcd_unpack(oracles.bcd(s)) == s == oracles.unbcd(bcd_pack(s))


@given(digits(1, 25))
def test_bcd_roundtrip_any_length(s):
    assert bcd_unpack(bcd_pack(s)) == s


@pytest.mark.parametrize("data,error,offset", [
    (b"", Truncated, 0),
    (b"\x03\x01", UnknownKind, 0),
    (b"\x01", Truncated, 1),
    (b"\x01\x7f", UnknownKind, 1),
    (b"\x01\x01", Truncated, 2),
    (b"\x01\x01\x01", Truncated, 3),
    (b"\x01\x01\x01\x00\x00", IllegalFieldCombination, 4),
    (b"\x01\x01\x01\x09", MalformedField, 3),
])
def test_decode_errors_name_the_offset(data, error, offset):
    with pytest.raises(error) as info:
        decode(data)
    assert info.value.offset == offset


def test_encode_rejects_mask_violation():
    with pytest.raises(IllegalFieldCombination):
        encode(NasMessage(NasKind.IdentityRequest))
    with pytest.raises(IllegalFieldCombination):
        encode(NasMessage(NasKind.AttachReject, identity_type=IdentityType.IMSI))


def test_attach_identity_and_guti_rules():
    with pytest.raises(IllegalFieldCombination):
        encode(NasMessage(NasKind.AttachRequest, identity_type=IdentityType.IMEI,
                          identity_value="356938035643809", capabilities=CapabilitySet()))
    with pytest.raises(IllegalFieldCombination):
        encode(NasMessage(NasKind.AttachAccept, identity_type=IdentityType.IMSI, identity_value="1"))


def test_warning_system_must_match_sib():
    etws_on_sib12 = RrcMessage(RrcKind.Sib12, warning_payload=WarningMessage(WarningSystem.ETWS, 1, 1))
    with pytest.raises(IllegalFieldCombination):
        encode(etws_on_sib12)


def test_sms_body_bound_is_enforced():
    with pytest.raises(ValueError):
        SmsPdu(SmsClass.Silent, "1234", bytes(281))
    msg = NasMessage(NasKind.SmsTransport, sms_payload=SmsPdu(SmsClass.Silent, "1234", bytes(280)))
    assert decode(encode(msg)) == msg


def test_plmn_text_form():
    assert str(PlmnId.parse("310260")) == "310260"
    assert PlmnId.parse("00101") == PlmnId("001", "01")
    for bad in ("3102", "31026a", "3102600"):
        with pytest.raises(ValueError):
            PlmnId.parse(bad)


@settings(max_examples=10_000, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(messages)
def test_roundtrip_ten_thousand(msg):
    wire = encode(msg)
    assert decode(wire) == msg
    assert message_from_dict(message_to_dict(msg)) == msg


@settings(max_examples=2000, deadline=None)
@given(messages, messages)
def test_encoding_is_injective(a, b):
    if a != b:
        assert encode(a) != encode(b)


@given(capability_sets())
def test_capability_bitfield_roundtrip(caps):
    bits = caps.ms_network_capability_raw
    assert 0 <= bits < 1 << 13
    assert CapabilitySet.from_bits(bits) == caps


def test_capability_bit_positions():
    assert CapabilitySet(eea={EeaAlg.EEA0}, eia={EiaAlg.EIA0}).ms_network_capability_raw == 0b1_0001
    assert CapabilitySet(gsm_ciphers={GsmCipher.A5_3}).ms_network_capability_raw == 1 << 9
    assert CapabilitySet(gprs_ciphers={GprsCipher.GEA3}).ms_network_capability_raw == 1 << 11
    assert CapabilitySet(classmark2_sms_pp=True).ms_network_capability_raw == 1 << 12
    with pytest.raises(ValueError):
        CapabilitySet.from_bits(1 << 13)
    with pytest.raises(ValueError):
        CapabilitySet(eea={EeaAlg.EEA1})


def test_fuzz_decoder_is_total():
    rng = random.Random(0xF022)
    ok = 0
    seeds = [encode(m) for m in (ATTACH_IMSI, NasMessage(NasKind.DetachRequest),
                                 RrcMessage(RrcKind.RrcConnectionSetup, c_rnti=7))]
    for i in range(100_000):
        if i % 2:
            data = bytes(rng.getrandbits(8) for _ in range(rng.randrange(0, 24)))
        else:
            # mutate a valid frame so that decoding gets past the header often
            data = bytearray(rng.choice(seeds))
            data[rng.randrange(len(data))] = rng.getrandbits(8)
            data = bytes(data)
        try:
            msg = decode(data)
        except CodecError:
            continue
        assert decode(encode(msg)) == msg
        ok += 1
    assert ok > 0


def test_interpret_capabilities_stock_tcu():
    caps = CapabilitySet(eea=set(EeaAlg), eia={EiaAlg.EIA1, EiaAlg.EIA2, EiaAlg.EIA3},
                         gsm_ciphers={GsmCipher.A5_3}, gprs_ciphers={GprsCipher.GEA2, GprsCipher.GEA3},
                         classmark2_sms_pp=True)
    assert interpret_capabilities(caps).as_dict() == {
        "advertises_null_cipher": True,
        "advertises_legacy_gsm": True,
        "advertises_legacy_gprs": True,
        "supports_null_integrity": False,
        "sms_over_legacy_channels": True,
    }


def test_interpret_capabilities_edges():
    assert not any(interpret_capabilities(CapabilitySet()).as_dict().values())
    assert interpret_capabilities(CapabilitySet(eia={EiaAlg.EIA0})).supports_null_integrity


@given(st.binary(max_size=64))
def test_decode_never_raises_foreign_errors(data):
    try:
        decode(data)
    except CodecError:
        pass
