"""Stateless identity-based network-layer authentication for mobile
multihomed routers, with a deterministic network simulator and an
IKEv2/MOBIKE timing baseline for comparison benchmarks."""

from .pairing import PairingSuite, setup
from .keys import (
    IdentityLabel,
    MasterSecret,
    PrivatePoint,
    SessionKey,
    SharedMaterial,
    derive_private_point,
    derive_session_key,
    encode_label,
    gen_master,
    shared_from_private,
)
from .wire import NimsaHeader, NimsaPacket, make_packet, verify_packet
from .endpoints import HaEndpoint, MrEndpoint, Verdict
from .ike import IkeConfig, IkeSession, IkeState, ah_protect, ah_verify
from .simnet import (
    LinkProfile,
    MetricsReport,
    Scenario,
    TABLE1_LINKS,
    TrafficSpec,
    run_scenario,
)
from .selftest import run_selftest

__version__ = "0.1.0"

__all__ = [
    "PairingSuite", "setup",
    "IdentityLabel", "MasterSecret", "PrivatePoint", "SessionKey",
    "SharedMaterial", "derive_private_point", "derive_session_key",
    "encode_label", "gen_master", "shared_from_private",
    "NimsaHeader", "NimsaPacket", "make_packet", "verify_packet",
    "HaEndpoint", "MrEndpoint", "Verdict",
    "IkeConfig", "IkeSession", "IkeState", "ah_protect", "ah_verify",
    "LinkProfile", "MetricsReport", "Scenario", "TABLE1_LINKS",
    "TrafficSpec", "run_scenario",
    "run_selftest",
]
