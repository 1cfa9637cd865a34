"""Packet header codec and HMAC authentication.

Wire contract (47 bytes total, big endian):

    offset  size  field
    0       1     version (0x01)
    1       8     mr_id
    9       1     if_num
    10      4     seed counter
    14      1     flags (bit0 = notification-mode address update)
    15      32    auth_tag (HMAC-SHA-256, untruncated)

The tag covers the immutable IP fields (src, dst, payload length), the
15-byte header prefix, and the payload.  The TTL analog is mutable in
transit and deliberately excluded.
"""

from __future__ import annotations

import hmac
import hashlib
from dataclasses import dataclass, field

from .keys import SessionKey

HEADER_LEN = 47
HEADER_PREFIX_LEN = 15
TAG_LEN = 32
WIRE_VERSION = 1
FLAG_NOTIFICATION = 0x01
_RESERVED_FLAGS = 0xFE


class HeaderError(ValueError):
    """Header violates the wire contract (reserved bits, ranges, length)."""


@dataclass(frozen=True)
class NimsaHeader:
    mr_id: int
    if_num: int
    seed: int
    flags: int = 0
    auth_tag: bytes = b"\x00" * TAG_LEN
    version: int = WIRE_VERSION


@dataclass(frozen=True)
class ImmutableIpFields:
    """The part of the IP envelope a router never rewrites in transit."""

    src_ip: bytes
    dst_ip: bytes
    payload_length: int

    def encode(self) -> bytes:
        return self.src_ip + self.dst_ip + self.payload_length.to_bytes(2, "big")


@dataclass
class NimsaPacket:
    ip: ImmutableIpFields
    header: NimsaHeader
    payload: bytes = b""
    ttl: int = 64


def encode_header_prefix(mr_id: int, if_num: int, seed: int, flags: int) -> bytes:
    """The 15 header bytes in front of the auth tag."""
    if flags & _RESERVED_FLAGS:
        raise HeaderError(f"reserved flag bits set: {flags:#04x}")
    if not 0 <= mr_id < 1 << 64:
        raise HeaderError("mr_id must fit in 8 bytes")
    if not 0 <= if_num <= 0xFF:
        raise HeaderError("if_num must fit in 1 byte")
    if not 0 <= seed <= 0xFFFFFFFF:
        raise HeaderError("seed must fit in 4 bytes")
    return (
        bytes([WIRE_VERSION])
        + mr_id.to_bytes(8, "big")
        + bytes([if_num])
        + seed.to_bytes(4, "big")
        + bytes([flags])
    )


def encode_header(h: NimsaHeader) -> bytes:
    if h.version != WIRE_VERSION:
        raise HeaderError(f"unsupported version {h.version}")
    if len(h.auth_tag) != TAG_LEN:
        raise HeaderError("auth_tag must be 32 bytes")
    return encode_header_prefix(h.mr_id, h.if_num, h.seed, h.flags) + h.auth_tag


def decode_header(data: bytes) -> NimsaHeader:
    if len(data) != HEADER_LEN:
        raise HeaderError(f"header must be {HEADER_LEN} bytes, got {len(data)}")
    if data[0] != WIRE_VERSION:
        raise HeaderError(f"unsupported version {data[0]}")
    flags = data[14]
    if flags & _RESERVED_FLAGS:
        raise HeaderError(f"reserved flag bits set: {flags:#04x}")
    return NimsaHeader(
        mr_id=int.from_bytes(data[1:9], "big"),
        if_num=data[9],
        seed=int.from_bytes(data[10:14], "big"),
        flags=flags,
        auth_tag=data[15:],
    )


def compute_auth_tag(
    key: SessionKey, ip: ImmutableIpFields, header_sans_tag: bytes, payload: bytes
) -> bytes:
    """HMAC-SHA-256 over the immutable fields, header prefix and payload."""
    if len(header_sans_tag) != HEADER_PREFIX_LEN:
        raise HeaderError("header_sans_tag must be the 15-byte header prefix")
    msg = ip.encode() + header_sans_tag + payload
    return hmac.new(key.key_bytes, msg, hashlib.sha256).digest()


def make_packet(
    key: SessionKey,
    src_ip: bytes,
    dst_ip: bytes,
    mr_id: int,
    if_num: int,
    seed: int,
    payload: bytes = b"",
    flags: int = 0,
) -> NimsaPacket:
    """Build an authenticated packet in one step."""
    ip = ImmutableIpFields(src_ip, dst_ip, len(payload))
    prefix = encode_header_prefix(mr_id, if_num, seed, flags)
    tag = compute_auth_tag(key, ip, prefix, payload)
    header = NimsaHeader(mr_id=mr_id, if_num=if_num, seed=seed, flags=flags, auth_tag=tag)
    return NimsaPacket(ip=ip, header=header, payload=payload)


def verify_packet(key: SessionKey, pkt: NimsaPacket) -> bool:
    """Constant-time recompute-and-compare of the auth tag.

    Returns False (never raises) for any parseable-but-wrong packet,
    including a payload length that disagrees with the actual payload.
    """
    if pkt.ip.payload_length != len(pkt.payload):
        return False
    try:
        prefix = encode_header_prefix(
            pkt.header.mr_id, pkt.header.if_num, pkt.header.seed, pkt.header.flags
        )
    except HeaderError:
        return False
    expected = compute_auth_tag(key, pkt.ip, prefix, pkt.payload)
    return hmac.compare_digest(expected, pkt.header.auth_tag)
