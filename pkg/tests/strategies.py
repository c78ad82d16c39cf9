from hypothesis import strategies as st

from vlte.codec import (
    AuthParams,
    CapabilitySet,
    EeaAlg,
    EiaAlg,
    EmmCause,
    EsmCause,
    GprsCipher,
    GsmCipher,
    IdentityType,
    NasKind,
    NasMessage,
    PlmnId,
    RrcKind,
    RrcMessage,
    SecuritySelection,
    SmsClass,
    SmsPdu,
    WarningMessage,
    WarningSystem,
)


def digits(min_size=1, max_size=25):
    return st.text(alphabet="0123456789", min_size=min_size, max_size=max_size)


plmns = st.builds(lambda mcc, mnc: PlmnId(mcc, mnc), digits(3, 3), digits(2, 3))


@st.composite
def capability_sets(draw):
    eea = draw(st.frozensets(st.sampled_from(list(EeaAlg))))
    eia = draw(st.frozensets(st.sampled_from(list(EiaAlg)), min_size=1 if eea else 0))
    return CapabilitySet(
        eea,
        eia,
        draw(st.frozensets(st.sampled_from(list(GsmCipher)))),
        draw(st.frozensets(st.sampled_from(list(GprsCipher)))),
        draw(st.booleans()),
    )


octets16 = st.binary(min_size=16, max_size=16)


def _nas(kind, **fields):
    return st.builds(lambda **kw: NasMessage(kind, **kw), **fields)


nas_messages = st.one_of(
    _nas(NasKind.IdentityRequest, identity_type=st.sampled_from(list(IdentityType))),
    _nas(NasKind.IdentityResponse, identity_type=st.sampled_from(list(IdentityType)), identity_value=digits()),
    _nas(NasKind.AttachRequest,
         identity_type=st.sampled_from([IdentityType.IMSI, IdentityType.GUTI, IdentityType.CONCEALED]),
         identity_value=digits(), capabilities=capability_sets()),
    _nas(NasKind.AttachAccept, identity_type=st.just(IdentityType.GUTI), identity_value=digits()),
    _nas(NasKind.AttachReject, emm_cause=st.sampled_from(list(EmmCause))),
    _nas(NasKind.AuthenticationRequest,
         auth_params=st.builds(lambda r, a: AuthParams(rand=r, autn=a), octets16, octets16)),
    _nas(NasKind.AuthenticationResponse,
         auth_params=st.builds(lambda r: AuthParams(res=r), st.binary(max_size=16))),
    _nas(NasKind.SecurityModeCommand,
         security_selection=st.builds(SecuritySelection, st.sampled_from(list(EeaAlg)),
                                      st.sampled_from(list(EiaAlg)))),
    _nas(NasKind.PdnConnectivityReject, esm_cause=st.sampled_from(list(EsmCause))),
    _nas(NasKind.SmsTransport,
         sms_payload=st.builds(SmsPdu, st.sampled_from(list(SmsClass)), digits(1, 20),
                               st.binary(max_size=280))),
    st.sampled_from([NasMessage(k) for k in (
        NasKind.SecurityModeComplete, NasKind.SecurityModeReject, NasKind.PdnConnectivityRequest,
        NasKind.ActivateDefaultBearerRequest, NasKind.DetachRequest)]),
)


def _rrc(kind, **fields):
    return st.builds(lambda **kw: RrcMessage(kind, **kw), **fields)


@st.composite
def warnings_for(draw, kind):
    system = WarningSystem.CMAS if kind == RrcKind.Sib12 else WarningSystem.ETWS
    return WarningMessage(system, draw(st.integers(0, 0xFFFF)), draw(st.integers(0, 0xFFFF)),
                          draw(st.binary(max_size=1024)))


rrc_messages = st.one_of(
    _rrc(RrcKind.Sib1, plmn=plmns, tac=st.integers(0, 0xFFFF), cell_identity=st.integers(0, 0x0FFFFFFF),
         signature=st.binary(max_size=32)),
    *[_rrc(k, warning_payload=warnings_for(k)) for k in (RrcKind.Sib10, RrcKind.Sib11, RrcKind.Sib12)],
    _rrc(RrcKind.Paging, paged_identity=digits()),
    _rrc(RrcKind.RrcConnectionSetup, c_rnti=st.integers(1, 65523)),
    _rrc(RrcKind.RrcReestablishmentRequest, c_rnti=st.integers(1, 65523)),
    _rrc(RrcKind.RrcConnectionReconfiguration, cell_identity=st.integers(0, 0x0FFFFFFF)),
    st.sampled_from([RrcMessage(k) for k in (
        RrcKind.Mib, RrcKind.RrcConnectionRequest, RrcKind.RrcConnectionRelease,
        RrcKind.RrcReestablishmentReject)]),
)

messages = st.one_of(nas_messages, rrc_messages)
