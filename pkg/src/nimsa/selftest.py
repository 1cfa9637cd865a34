"""Crypto, wire and endpoint property checks behind `nimsa-bench selftest`.

Each check raises AssertionError on failure.  The checks accept the
suite(s) as arguments so tests can fault-inject (wrong master secret,
corrupted parameters) and confirm the corresponding check trips.
"""

from __future__ import annotations

import random
from typing import Callable, List, Optional, Tuple

from .pairing import PairingSuite, setup
from .keys import (
    IdentityLabel,
    MasterSecret,
    derive_private_point,
    derive_session_key,
    encode_label,
    gen_master,
    shared_from_private,
)
from . import wire
from .endpoints import HaEndpoint, MrEndpoint, Verdict
from .simnet import (
    LinkProfile,
    LinkState,
    Scenario,
    TrafficSpec,
    edpf_pick,
    link_transmit,
    run_scenario,
)


def check_bilinearity(suite: PairingSuite, rng: random.Random, rounds: int = 20) -> None:
    g = suite.g1_generator
    e_gg = suite.pairing(g, g)
    for _ in range(rounds):
        a = suite.random_scalar(rng)
        b = suite.random_scalar(rng)
        lhs = suite.pairing(suite.g1_mul(a, g), suite.g1_mul(b, g))
        assert suite.gt_eq(lhs, suite.gt_pow(e_gg, a * b % suite.q)), "e(aP,bP) != e(P,P)^ab"


def check_non_degeneracy(suite: PairingSuite) -> None:
    g = suite.g1_generator
    e_gg = suite.pairing(g, g)
    assert not suite.gt_eq(e_gg, suite.gt_one()), "e(P,P) is the identity"
    assert suite.gt_eq(suite.gt_pow(e_gg, suite.q), suite.gt_one()), "e(P,P) order != q"


def check_serialization_roundtrip(suite: PairingSuite, rng: random.Random, rounds: int = 25) -> None:
    g = suite.g1_generator
    for _ in range(rounds):
        a = suite.random_scalar(rng)
        pt = suite.g1_mul(a, g)
        assert suite.deserialize_g1(suite.serialize_g1(pt)) == pt, "G1 round-trip failed"
        z = suite.gt_pow(suite.pairing(g, g), a)
        back = suite.deserialize_gt(suite.serialize_gt(z))
        assert suite.gt_eq(back, z), "GT round-trip failed"
        assert suite.deserialize_scalar(suite.serialize_scalar(a)) == a, "scalar round-trip failed"


def check_key_agreement(
    suite: PairingSuite, rng: random.Random, rounds: int = 20,
    mr_master: Optional[MasterSecret] = None, ha_master: Optional[MasterSecret] = None,
) -> None:
    """MR-side and HA-side shared material must serialize identically."""
    for i in range(rounds):
        mr_m = mr_master or gen_master(suite, rng)
        ha_m = ha_master or mr_m  # HA holds a point derived under the MR master
        mr_label = IdentityLabel(b"MR%d" % i, bytes([10, 0, i % 250, 2]), i % 4)
        ha_label = IdentityLabel(b"HA%d" % i, bytes([192, 0, 2, 1]))
        mr_priv = derive_private_point(suite, mr_m, mr_label)
        ha_priv = derive_private_point(suite, ha_m, ha_label)
        k_mr = shared_from_private(suite, mr_priv, ha_label)
        k_ha = shared_from_private(suite, ha_priv, mr_label)
        assert k_mr.k_bytes == k_ha.k_bytes, "key agreement sides disagree"


def check_label_injectivity(rng: random.Random, rounds: int = 2000) -> None:
    seen = {}
    for _ in range(rounds):
        dev = bytes(rng.randrange(256) for _ in range(rng.randrange(1, 12)))
        ip = bytes(rng.randrange(256) for _ in range(rng.choice((0, 4, 16))))
        ifn = rng.choice((None, 0, 1, 2, 255))
        enc = encode_label(dev, ip, ifn)
        key = (dev, ip, ifn)
        if enc in seen:
            assert seen[enc] == key, "label encoding collision"
        seen[enc] = key


def check_session_key_prf(suite: PairingSuite, rng: random.Random) -> None:
    m = gen_master(suite, rng)
    priv = derive_private_point(suite, m, IdentityLabel(b"MR", b"\x0a\x00\x00\x02", 0))
    mat = shared_from_private(suite, priv, IdentityLabel(b"HA", b"\xc0\x00\x02\x01"))
    k1 = derive_session_key(mat, 1)
    k1b = derive_session_key(mat, 1)
    k2 = derive_session_key(mat, 2)
    assert k1.key_bytes == k1b.key_bytes and len(k1.key_bytes) == 32
    assert k1.key_bytes != k2.key_bytes, "distinct seeds gave equal keys"
    # avalanche: flipping one seed bit should move roughly half the key bits
    base = 0xA5A5
    ka = derive_session_key(mat, base)
    flips = []
    for bit in range(16):
        kb = derive_session_key(mat, base ^ (1 << bit))
        diff = sum(bin(x ^ y).count("1") for x, y in zip(ka.key_bytes, kb.key_bytes))
        flips.append(diff / 256)
    assert sum(flips) / len(flips) >= 0.25, "PRF avalanche below 25%"


def check_wire(rng: random.Random) -> None:
    for _ in range(200):
        h = wire.NimsaHeader(
            mr_id=rng.getrandbits(64),
            if_num=rng.randrange(256),
            seed=rng.getrandbits(32),
            flags=rng.choice((0, 1)),
            auth_tag=bytes(rng.randrange(256) for _ in range(32)),
        )
        assert wire.decode_header(wire.encode_header(h)) == h, "header round-trip failed"
    from .keys import SessionKey

    sk = SessionKey(b"\x0b" * 32, 1)
    pkt = wire.make_packet(sk, b"\x0a\x00\x00\x02", b"\xc0\x00\x02\x01", 7, 0, 1, b"data")
    assert wire.verify_packet(sk, pkt), "verify of freshly tagged packet failed"
    pkt.ttl -= 1
    assert wire.verify_packet(sk, pkt), "mutable TTL must not affect the tag"
    bad = wire.NimsaPacket(pkt.ip, pkt.header, pkt.payload[:-1] + b"X")
    assert not wire.verify_packet(sk, bad), "tampered payload accepted"


def check_endpoints(suite: PairingSuite, rng: random.Random) -> None:
    master = gen_master(suite, rng)
    ha_ip = b"\xc0\x00\x02\x01"
    mr = MrEndpoint(suite, b"MR1", master, b"HA1", ha_ip)
    ha = HaEndpoint(suite, b"HA1", ha_ip)
    ha.register_mr(mr.mr_id, mr.ha_anchor_point())
    mr.on_adapter_up(0, b"\x0a\x00\x00\x02")
    assert ha.on_packet(mr.send(b"hello", 0)) == Verdict.ACCEPTED_NEW_INTERFACE
    assert ha.on_packet(mr.send(b"again", 0)) == Verdict.ACCEPTED
    old = mr.send(b"stale", 0)
    assert mr.on_adapter_change(0, b"\x0a\x00\x01\x02") is not None  # idle -> notification
    assert ha.on_packet(mr.send(b"moved", 0)) == Verdict.ACCEPTED_AFTER_HANDOVER
    assert ha.on_packet(old) == Verdict.DROP_SEED_ROLLBACK
    ha.revoke_mr(mr.mr_id)
    assert ha.on_packet(mr.send(b"revoked", 0)) == Verdict.DROP_REVOKED


def check_simnet() -> None:
    rng = random.Random(0)
    link = LinkState(LinkProfile(0, 0, 4_000_000, 50, 50))
    arrival = link_transmit(link, 1250, 0, rng)
    assert arrival == 2500 + 50_000, "analytic arrival time mismatch"
    second = link_transmit(link, 1250, 0, rng)
    assert second == arrival + 2500, "serialization chain mismatch"
    links = [LinkState(lp) for lp in (
        LinkProfile(0, 0, 4e6, 40, 50), LinkProfile(0, 0, 4e6, 60, 70),
        LinkProfile(0, 0, 4e6, 50, 60),
    )]
    assert edpf_pick(links, 1250, 0) == 0, "EDPF must pick the earliest-delivery link"
    sc = Scenario(
        links=(LinkProfile(0, 0, 4e6, 50, 50),), scheme="nimsa", measure="auth",
        traffic=TrafficSpec(type="cbr", rate_bps=1e6, packet_bytes=1250, duration_s=5),
    )
    r1 = run_scenario(sc, 42)
    r2 = run_scenario(sc, 42)
    assert r1.as_dict() == r2.as_dict(), "simulation not deterministic"
    assert r1.conservation_ok(), "packet conservation violated"
    assert r1.control_msg_count == 0, "stateless establishment sent control messages"


def run_selftest(verbose: bool = True) -> int:
    """Run every property check; returns 0 on success, 1 on any failure."""
    suite_t = setup("test", 0)
    suite_s = setup("standard")
    rng = random.Random(1234)
    checks: List[Tuple[str, Callable[[], None]]] = [
        ("bilinearity (test profile)", lambda: check_bilinearity(suite_t, rng)),
        ("bilinearity (standard profile)", lambda: check_bilinearity(suite_s, rng, rounds=2)),
        ("non-degeneracy", lambda: (check_non_degeneracy(suite_t), check_non_degeneracy(suite_s))),
        ("serialization round-trip", lambda: check_serialization_roundtrip(suite_t, rng)),
        ("key-agreement symmetry (test profile)", lambda: check_key_agreement(suite_t, rng)),
        ("key-agreement symmetry (standard profile)", lambda: check_key_agreement(suite_s, rng, rounds=2)),
        ("label injectivity", lambda: check_label_injectivity(rng)),
        ("session-key PRF", lambda: check_session_key_prf(suite_t, rng)),
        ("wire codec and HMAC", lambda: check_wire(rng)),
        ("endpoint state machines", lambda: check_endpoints(suite_t, rng)),
        ("simulator invariants", check_simnet),
    ]
    failures = 0
    for name, fn in checks:
        try:
            fn()
        except AssertionError as exc:
            failures += 1
            if verbose:
                print(f"FAIL {name}: {exc}")
        else:
            if verbose:
                print(f"PASS {name}")
    return 0 if failures == 0 else 1
