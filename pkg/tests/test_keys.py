import hashlib
import hmac
import random

import pytest
from hypothesis import given, settings, strategies as st

from nimsa.keys import (
    IdentityLabel,
    LabelEncodingError,
    MasterSecret,
    SeedContractError,
    SharedMaterial,
    derive_private_point,
    derive_session_key,
    encode_label,
    gen_master,
    shared_from_private,
)
from nimsa.selftest import check_key_agreement


def test_encode_label_exact_layout():
    ip = bytes([10, 0, 0, 2])
    assert encode_label(b"MR1", ip, 0) == b"\x00\x03MR1\x00\x04" + ip + b"\x01\x00"
    assert encode_label(b"MR1", ip) == b"\x00\x03MR1\x00\x04" + ip
    # repeatable
    assert encode_label(b"HA", bytes([192, 0, 2, 1])) == encode_label(b"HA", bytes([192, 0, 2, 1]))


def test_encode_label_distinguishes_boundary_shift():
    # same concatenated bytes, different field split
    a = encode_label(b"MR1", bytes([10, 0, 0, 2]), 0)
    b = encode_label(b"MR1", bytes([10, 0, 0, 2, 0]))
    assert a != b


def test_encode_label_errors():
    with pytest.raises(LabelEncodingError):
        encode_label(b"", b"\x01")
    with pytest.raises(LabelEncodingError):
        encode_label(b"x" * 65536, b"")
    with pytest.raises(LabelEncodingError):
        encode_label(b"MR", b"", 256)


@settings(max_examples=300, deadline=None)
@given(
    st.tuples(
        st.binary(min_size=1, max_size=12),
        st.binary(max_size=16),
        st.one_of(st.none(), st.integers(0, 255)),
    ),
    st.tuples(
        st.binary(min_size=1, max_size=12),
        st.binary(max_size=16),
        st.one_of(st.none(), st.integers(0, 255)),
    ),
)
def test_encode_label_injective(t1, t2):
    if t1 != t2:
        assert encode_label(*t1) != encode_label(*t2)


def test_gen_master_range_and_distinctness(suite):
    for i in range(100):
        a = gen_master(suite, random.Random(i)).s
        b = gen_master(suite, random.Random(i + 1000)).s
        assert 1 <= a < suite.q
        assert a != b


def test_private_point_identity_scalar(suite):
    # s = 1 leaves the hashed point unchanged
    label = IdentityLabel(b"MR1", bytes([10, 0, 0, 2]), 0)
    pt = derive_private_point(suite, MasterSecret(1), label)
    assert pt.point == suite.hash_to_g1(label.encode())


def test_private_point_doubling_oracle(suite, rng):
    label = IdentityLabel(b"MR1", bytes([10, 0, 0, 2]), 1)
    s = suite.random_scalar(rng)
    p1 = derive_private_point(suite, MasterSecret(s), label).point
    p2 = derive_private_point(suite, MasterSecret(2 * s % suite.q), label).point
    assert p2 == suite.g1_add(p1, p1)


def test_private_point_deterministic(suite, rng):
    m = gen_master(suite, rng)
    label = IdentityLabel(b"MR1", bytes([10, 0, 0, 2]), 0)
    a = derive_private_point(suite, m, label)
    b = derive_private_point(suite, m, label)
    assert suite.serialize_g1(a.point) == suite.serialize_g1(b.point)


def test_key_agreement_symmetry(suite, rng):
    check_key_agreement(suite, rng, rounds=20)


def test_key_agreement_detects_master_mismatch(suite, rng):
    # negative control: the self-test must trip when the HA record was
    # derived under a different master secret
    m1 = gen_master(suite, random.Random(1))
    m2 = gen_master(suite, random.Random(2))
    with pytest.raises(AssertionError):
        check_key_agreement(suite, rng, rounds=3, mr_master=m1, ha_master=m2)


def test_key_agreement_identity_scalar_cross_check(suite):
    mr_label = IdentityLabel(b"MR1", bytes([10, 0, 0, 2]), 0)
    ha_label = IdentityLabel(b"HA", bytes([192, 0, 2, 1]))
    one = MasterSecret(1)
    k_mr = shared_from_private(suite, derive_private_point(suite, one, mr_label), ha_label)
    k_ha = shared_from_private(suite, derive_private_point(suite, one, ha_label), mr_label)
    direct = suite.pairing(
        suite.hash_to_g1(mr_label.encode()), suite.hash_to_g1(ha_label.encode())
    )
    assert k_mr.k_bytes == k_ha.k_bytes == suite.serialize_gt(direct)


def test_shared_material_depends_on_if_num(suite, rng):
    m = gen_master(suite, rng)
    ha_label = IdentityLabel(b"HA", bytes([192, 0, 2, 1]))
    seen = set()
    for ifn in range(3):
        label = IdentityLabel(b"MR1", bytes([10, 0, 0, 2]), ifn)
        mat = shared_from_private(suite, derive_private_point(suite, m, label), ha_label)
        seen.add(mat.k_bytes)
    assert len(seen) == 3


def test_session_key_reference_vector():
    # frozen oracle: independent HKDF-style computation over a fixed
    # 42-byte material encoding 0x00..01
    k_bytes = b"\x00" * 41 + b"\x01"
    sk = derive_session_key(SharedMaterial((0, 1), k_bytes), 1)
    prk = hmac.new(b"NIMSA-v1", k_bytes, hashlib.sha256).digest()
    okm = hmac.new(prk, (1).to_bytes(4, "big") + b"\x01", hashlib.sha256).digest()
    assert sk.key_bytes == okm
    assert sk.key_bytes.hex() == (
        "debd8708f66ee8d24147b1b35cd4aed4fff2ed9194941f2c616374f4deaa365b"
    )


def test_session_key_determinism_and_distinctness():
    mat = SharedMaterial((0, 2), b"\x7f" * 42)
    k1 = derive_session_key(mat, 1)
    assert k1.key_bytes == derive_session_key(mat, 1).key_bytes
    assert len(k1.key_bytes) == 32
    assert k1.seed_used == 1
    assert k1.key_bytes != derive_session_key(mat, 2).key_bytes


def test_session_key_seed_contract():
    mat = SharedMaterial((0, 2), b"\x7f" * 42)
    with pytest.raises(SeedContractError):
        derive_session_key(mat, 0)
    with pytest.raises(SeedContractError):
        derive_session_key(mat, 1 << 32)
    derive_session_key(mat, (1 << 32) - 1)  # max seed is allowed


def test_session_key_avalanche():
    mat = SharedMaterial((0, 3), b"\x55" * 42)
    base = 0xA5A5
    ka = derive_session_key(mat, base).key_bytes
    fractions = []
    for bit in range(16):
        kb = derive_session_key(mat, base ^ (1 << bit)).key_bytes
        diff = sum(bin(x ^ y).count("1") for x, y in zip(ka, kb))
        fractions.append(diff / 256)
    assert sum(fractions) / len(fractions) >= 0.25
