"""Mobile-router sender and home-agent receiver state machines.

The MR keeps one key state per network adapter and re-derives it on each
address change (seed counter +1).  The HA keeps a registry of security
domains: per registered MR an anchor private point, and per adapter the
last verified (address, seed, key).  Verification is data-driven; there
are no dedicated establishment messages.  On an address change, a packet
either carries the new state implicitly (transmission mode) or the MR
emits a single unacknowledged notification packet (notification mode).
"""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional

from .pairing import PairingSuite
from .keys import (
    IdentityLabel,
    MasterSecret,
    PrivatePoint,
    SessionKey,
    SharedMaterial,
    derive_private_point,
    derive_session_key,
    shared_from_private,
)
from . import wire
from .wire import FLAG_NOTIFICATION, NimsaPacket


class EndpointError(ValueError):
    """Contract violation on an endpoint operation."""


class Verdict(Enum):
    ACCEPTED = "Accepted"
    ACCEPTED_NEW_INTERFACE = "AcceptedNewInterface"
    ACCEPTED_AFTER_HANDOVER = "AcceptedAfterHandover"
    DROP_UNKNOWN_DEVICE = "DropUnknownDevice"
    DROP_REVOKED = "DropRevoked"
    DROP_SEED_ROLLBACK = "DropSeedRollback"
    DROP_AUTH_FAIL = "DropAuthFail"
    DROP_MALFORMED = "DropMalformed"

    @property
    def accepted(self) -> bool:
        return self in (
            Verdict.ACCEPTED,
            Verdict.ACCEPTED_NEW_INTERFACE,
            Verdict.ACCEPTED_AFTER_HANDOVER,
        )


def mr_id_from_device(device_id: bytes) -> int:
    """Map an arbitrary textual/byte device id into the 8-byte wire space."""
    return int.from_bytes(hashlib.sha256(device_id).digest()[:8], "big")


@dataclass
class InterfaceState:
    """Per-adapter key state on the MR side."""

    if_num: int
    current_ip: bytes
    seed: int
    private_point: PrivatePoint
    shared_material: SharedMaterial
    session_key: SessionKey


@dataclass
class InterfaceRecord:
    """Last verified per-adapter state on the HA side."""

    known_ip: bytes
    seed: int
    shared_material: SharedMaterial
    session_key: SessionKey


@dataclass
class RegistrationRecord:
    """Security-domain entry for one registered MR."""

    mr_id: int
    ha_private_point: PrivatePoint
    per_interface: Dict[int, InterfaceRecord] = field(default_factory=dict)
    revoked: bool = False


class MrEndpoint:
    """Sender: derives per-adapter keys and authenticates outbound data."""

    def __init__(
        self,
        suite: PairingSuite,
        device_id: bytes,
        master: MasterSecret,
        ha_device_id: bytes,
        ha_ip: bytes,
        seed_initial: int = 1,
    ):
        self.suite = suite
        self.master = master
        self.mr_id = mr_id_from_device(device_id)
        self.mr_id_bytes = self.mr_id.to_bytes(8, "big")
        self.ha_ip = ha_ip
        self.ha_label = IdentityLabel(mr_id_from_device(ha_device_id).to_bytes(8, "big"), ha_ip)
        self.seed_initial = seed_initial
        self.interfaces: Dict[int, InterfaceState] = {}
        self.pending_data: deque = deque()

    def ha_anchor_point(self) -> PrivatePoint:
        """s * H(HA label): handed to the HA at registration time."""
        return derive_private_point(self.suite, self.master, self.ha_label)

    def _rekey(self, if_num: int, ip: bytes, seed: int) -> InterfaceState:
        label = IdentityLabel(self.mr_id_bytes, ip, if_num)
        priv = derive_private_point(self.suite, self.master, label)
        material = shared_from_private(self.suite, priv, self.ha_label)
        key = derive_session_key(material, seed)
        return InterfaceState(if_num, ip, seed, priv, material, key)

    def on_adapter_up(self, if_num: int, ip: bytes) -> None:
        if if_num in self.interfaces:
            raise EndpointError(f"adapter {if_num} already up")
        self.interfaces[if_num] = self._rekey(if_num, ip, self.seed_initial)

    def on_adapter_change(self, if_num: int, new_ip: bytes) -> Optional[NimsaPacket]:
        """Re-key after an address change.

        Returns None when data is pending (the next data packet carries
        the new state), else a single notification packet authenticated
        under the new key.
        """
        state = self.interfaces.get(if_num)
        if state is None:
            raise EndpointError(f"unknown adapter {if_num}")
        if new_ip == state.current_ip:
            raise EndpointError("adapter change requires a new address")
        self.interfaces[if_num] = state = self._rekey(if_num, new_ip, state.seed + 1)
        if self.pending_data:
            return None
        return wire.make_packet(
            state.session_key,
            src_ip=new_ip,
            dst_ip=self.ha_ip,
            mr_id=self.mr_id,
            if_num=if_num,
            seed=state.seed,
            payload=b"",
            flags=FLAG_NOTIFICATION,
        )

    def queue_data(self, payload: bytes) -> None:
        self.pending_data.append(payload)

    def send(self, payload: bytes, if_num: int) -> NimsaPacket:
        state = self.interfaces.get(if_num)
        if state is None:
            raise EndpointError(f"unknown adapter {if_num}")
        return wire.make_packet(
            state.session_key,
            src_ip=state.current_ip,
            dst_ip=self.ha_ip,
            mr_id=self.mr_id,
            if_num=if_num,
            seed=state.seed,
            payload=payload,
        )

    def send_pending(self, if_num: int) -> Optional[NimsaPacket]:
        if not self.pending_data:
            return None
        return self.send(self.pending_data.popleft(), if_num)


class HaEndpoint:
    """Receiver: registry of security domains plus the verdict logic."""

    def __init__(self, suite: PairingSuite, device_id: bytes, ip: bytes):
        self.suite = suite
        self.device_id = device_id
        self.ip = ip
        self.ha_id = mr_id_from_device(device_id)
        self.registry: Dict[int, RegistrationRecord] = {}

    def register_mr(self, mr_id: int, ha_private_point: PrivatePoint) -> None:
        existing = self.registry.get(mr_id)
        if existing is not None and not existing.revoked:
            raise EndpointError(f"mr_id {mr_id:#x} already registered")
        self.registry[mr_id] = RegistrationRecord(mr_id, ha_private_point)

    def revoke_mr(self, mr_id: int) -> None:
        """Mark-and-drop revocation (idempotent); keeps the audit trail."""
        rec = self.registry.get(mr_id)
        if rec is None:
            raise EndpointError(f"mr_id {mr_id:#x} not registered")
        rec.revoked = True

    def _derive(self, mr_id: int, src_ip: bytes, if_num: int, seed: int, rec: RegistrationRecord):
        label = IdentityLabel(mr_id.to_bytes(8, "big"), src_ip, if_num)
        gt = self.suite.pairing(
            self.suite.hash_to_g1(label.encode()), rec.ha_private_point.point
        )
        material = SharedMaterial(gt, self.suite.serialize_gt(gt))
        return material, derive_session_key(material, seed)

    def needs_pairing(self, pkt: NimsaPacket) -> bool:
        """Whether verifying this packet requires a fresh pairing.

        Observability hook for the simulator's crypto-cost accounting;
        does not mutate any state.
        """
        rec = self.registry.get(pkt.header.mr_id)
        if rec is None or rec.revoked:
            return False
        iface = rec.per_interface.get(pkt.header.if_num)
        if iface is None:
            return True
        return pkt.ip.src_ip != iface.known_ip

    def on_packet(self, pkt: NimsaPacket) -> Verdict:
        """Classify one inbound packet.  State changes only on success."""
        h = pkt.header
        if (
            h.version != wire.WIRE_VERSION
            or h.flags & wire._RESERVED_FLAGS
            or len(h.auth_tag) != wire.TAG_LEN
            or pkt.ip.payload_length != len(pkt.payload)
        ):
            return Verdict.DROP_MALFORMED

        rec = self.registry.get(h.mr_id)
        if rec is None:
            return Verdict.DROP_UNKNOWN_DEVICE
        if rec.revoked:
            return Verdict.DROP_REVOKED

        iface = rec.per_interface.get(h.if_num)
        if iface is None:
            # first sighting of this adapter: derive state from the packet
            if h.seed < 1:
                return Verdict.DROP_MALFORMED
            material, key = self._derive(h.mr_id, pkt.ip.src_ip, h.if_num, h.seed, rec)
            if not wire.verify_packet(key, pkt):
                return Verdict.DROP_AUTH_FAIL
            rec.per_interface[h.if_num] = InterfaceRecord(
                pkt.ip.src_ip, h.seed, material, key
            )
            return Verdict.ACCEPTED_NEW_INTERFACE

        # Replay protection precedes re-derivation: a stale seed is
        # dropped even when its source address no longer matches, so the
        # stored seed never moves backwards.
        if h.seed < iface.seed:
            return Verdict.DROP_SEED_ROLLBACK

        if pkt.ip.src_ip != iface.known_ip or h.seed > iface.seed:
            material, key = self._derive(h.mr_id, pkt.ip.src_ip, h.if_num, h.seed, rec)
            if not wire.verify_packet(key, pkt):
                return Verdict.DROP_AUTH_FAIL
            iface.known_ip = pkt.ip.src_ip
            iface.seed = h.seed
            iface.shared_material = material
            iface.session_key = key
            return Verdict.ACCEPTED_AFTER_HANDOVER

        if not wire.verify_packet(iface.session_key, pkt):
            return Verdict.DROP_AUTH_FAIL
        return Verdict.ACCEPTED
