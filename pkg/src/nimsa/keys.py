"""Identity-based non-interactive key derivation.

The mobile router owns a master scalar s and acts as the key generator
for its own security domain.  Each side derives a private curve point
s*H(label) for an identity label (device id, address, optional adapter
index), and the shared key material is the pairing of one side's private
point with the hash of the peer's label.  Both orders give the same GT
element, so no message exchange is needed.  A keyed-hash PRF then turns
the material plus a per-adapter seed counter into a 32-byte session key.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass, field
from typing import Optional

from .pairing import PairingSuite

PRF_DOMAIN_TAG = b"NIMSA-v1"
SESSION_KEY_LEN = 32
SEED_BYTES = 4


class LabelEncodingError(ValueError):
    """Label field too large for the canonical encoding."""


class SeedContractError(ValueError):
    """Seed counter outside the allowed range (must be 1..2^32-1)."""


def encode_label(device_id: bytes, ip: bytes, if_num: Optional[int] = None) -> bytes:
    """Injective canonical encoding of an identity label.

    Layout: ``len(device_id) || device_id || len(ip) || ip`` with 2-byte
    big-endian lengths, followed by ``0x01 || if_num`` (1 byte) when an
    adapter index is present.  Length prefixes make the map injective.
    """
    if not device_id:
        raise LabelEncodingError("device_id must be nonempty")
    if len(device_id) > 0xFFFF or len(ip) > 0xFFFF:
        raise LabelEncodingError("label field exceeds 65535 bytes")
    out = (
        len(device_id).to_bytes(2, "big")
        + device_id
        + len(ip).to_bytes(2, "big")
        + ip
    )
    if if_num is not None:
        if not 0 <= if_num <= 0xFF:
            raise LabelEncodingError("if_num must fit in one byte")
        out += b"\x01" + bytes([if_num])
    return out


@dataclass(frozen=True)
class IdentityLabel:
    """Identity of one endpoint address: device id, IP, optional adapter."""

    device_id: bytes
    ip: bytes
    if_num: Optional[int] = None

    def encode(self) -> bytes:
        return encode_label(self.device_id, self.ip, self.if_num)


@dataclass(frozen=True)
class MasterSecret:
    """Master scalar of a security domain; never leaves the device."""

    s: int

    def __repr__(self):
        return "MasterSecret(<hidden>)"


@dataclass(frozen=True)
class PrivatePoint:
    """s * H(label): the per-identity private key point."""

    point: tuple


@dataclass(frozen=True)
class SharedMaterial:
    """GT element agreed by both sides, plus its canonical byte form."""

    k_material: tuple
    k_bytes: bytes = field(repr=False)


@dataclass(frozen=True)
class SessionKey:
    """32-byte symmetric key extracted from shared material at a seed."""

    key_bytes: bytes
    seed_used: int


def gen_master(suite: PairingSuite, rng) -> MasterSecret:
    """Draw a uniform master scalar in [1, q-1] from the given RNG."""
    return MasterSecret(suite.random_scalar(rng))


def derive_private_point(
    suite: PairingSuite, master: MasterSecret, label: IdentityLabel
) -> PrivatePoint:
    return PrivatePoint(suite.g1_mul(master.s, suite.hash_to_g1(label.encode())))


def shared_from_private(
    suite: PairingSuite, own_private: PrivatePoint, peer_label: IdentityLabel
) -> SharedMaterial:
    gt = suite.pairing(own_private.point, suite.hash_to_g1(peer_label.encode()))
    return SharedMaterial(gt, suite.serialize_gt(gt))


def derive_session_key(material: SharedMaterial, seed: int) -> SessionKey:
    """Extract-then-expand keyed-hash PRF over (material, seed).

    HKDF-SHA256 shape: PRK = HMAC(tag, material bytes), then one expand
    block keyed on PRK over the 4-byte big-endian seed.  seed 0 is a
    contract violation; 1 is the initial value on adapter bring-up.
    """
    if not 1 <= seed <= 0xFFFFFFFF:
        raise SeedContractError(f"seed must be in [1, 2^32-1], got {seed}")
    prk = hmac.new(PRF_DOMAIN_TAG, material.k_bytes, hashlib.sha256).digest()
    okm = hmac.new(
        prk, seed.to_bytes(SEED_BYTES, "big") + b"\x01", hashlib.sha256
    ).digest()
    return SessionKey(okm[:SESSION_KEY_LEN], seed)
