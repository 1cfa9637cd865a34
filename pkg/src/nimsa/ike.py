"""Message-level timing model of IKEv2, MOBIKE and AH data protection.

Only the timing structure matters for the comparison benchmarks: message
sizes, the two-exchange establishment ladder, the two-exchange MOBIKE
handover, retransmission with exponential backoff, and a constant
per-message processing cost standing in for the real cryptography.
The AH data path does compute a real HMAC-SHA-256 integrity value so the
verification contract can be tested, but its latency contribution in the
simulator is the configurable per-packet constant.
"""

from __future__ import annotations

import hmac
import hashlib
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .wire import ImmutableIpFields


class IkeStateError(ValueError):
    """Operation invalid in the session's current state."""


@dataclass(frozen=True)
class IkeConfig:
    """Sizes, timers and processing constants of the baseline.

    Defaults assume certificate authentication (large AUTH payloads) and
    retransmission behavior representative of common implementations.
    All values are overridable for fairness studies.
    """

    init_req_bytes: int = 500
    init_resp_bytes: int = 500
    auth_req_bytes: int = 1100
    auth_resp_bytes: int = 1100
    update_req_bytes: int = 200
    update_resp_bytes: int = 200
    rekey_req_bytes: int = 300
    rekey_resp_bytes: int = 300
    rto_initial_ms: float = 500.0
    rto_backoff: float = 2.0
    max_retries: int = 5
    per_packet_overhead_bytes: int = 40  # 4 SPI + 4 sequence + 32 ICV
    msg_proc_ms: float = 2.0  # per IKE exchange message
    ah_packet_ms: float = 0.02  # per AH-protected data packet

    def validate(self) -> None:
        sizes = (
            self.init_req_bytes, self.init_resp_bytes,
            self.auth_req_bytes, self.auth_resp_bytes,
            self.update_req_bytes, self.update_resp_bytes,
            self.rekey_req_bytes, self.rekey_resp_bytes,
            self.per_packet_overhead_bytes,
        )
        if any(s <= 0 for s in sizes):
            raise ValueError("all message sizes must be positive")
        if self.rto_initial_ms <= 0 or self.rto_backoff < 1:
            raise ValueError("invalid retransmission timer config")
        if self.max_retries < 1:
            raise ValueError("max_retries must be >= 1")


class IkeState(Enum):
    IDLE = "Idle"
    INIT_SENT = "InitSent"
    AUTH_SENT = "AuthSent"
    ESTABLISHED = "Established"
    UPDATE_SENT = "UpdateSent"
    REKEY_SENT = "RekeySent"


@dataclass(frozen=True)
class IkeMessage:
    kind: str  # init_req, init_resp, auth_req, auth_resp, update_req, ...
    size_bytes: int

    @property
    def is_response(self) -> bool:
        return self.kind.endswith("_resp")


_RESPONSE_FOR = {
    "init_req": "init_resp",
    "auth_req": "auth_resp",
    "update_req": "update_resp",
    "rekey_req": "rekey_resp",
}

_EXPECTED_RESP = {
    IkeState.INIT_SENT: "init_resp",
    IkeState.AUTH_SENT: "auth_resp",
    IkeState.UPDATE_SENT: "update_resp",
    IkeState.REKEY_SENT: "rekey_resp",
}


def responder_reply(config: IkeConfig, msg: IkeMessage) -> Optional[IkeMessage]:
    """The peer's response to a request (the responder itself is stateless
    at this modeling granularity)."""
    kind = _RESPONSE_FOR.get(msg.kind)
    if kind is None:
        return None
    return IkeMessage(kind, getattr(config, f"{kind.replace('_resp', '')}_resp_bytes"))


class IkeSession:
    """Initiator-side state machine with retransmission timers.

    The owner drives it: every outbound ``IkeMessage`` must be put on the
    wire by the caller, and ``timer_deadline_ms`` (when not None) must be
    serviced by calling :meth:`on_timeout` at that simulated time.
    """

    def __init__(self, config: IkeConfig = IkeConfig()):
        config.validate()
        self.config = config
        self.state = IkeState.IDLE
        self.current_ip: Optional[bytes] = None
        self.retry_count = 0
        self.established_at: Optional[float] = None
        self.handover_done_at: Optional[float] = None
        self.failed = False
        self.pending_handover_ip: Optional[bytes] = None
        self._outstanding: Optional[IkeMessage] = None
        self._rto_ms: float = config.rto_initial_ms
        self.timer_deadline_ms: Optional[float] = None

    @property
    def can_send_data(self) -> bool:
        return self.state == IkeState.ESTABLISHED

    def _arm(self, msg: IkeMessage, now: float) -> IkeMessage:
        self._outstanding = msg
        self.timer_deadline_ms = now + self._rto_ms
        return msg

    def initiate(self, now: float) -> IkeMessage:
        if self.state != IkeState.IDLE:
            raise IkeStateError(f"initiate in state {self.state}")
        self.failed = False
        self.state = IkeState.INIT_SENT
        self.retry_count = 0
        self._rto_ms = self.config.rto_initial_ms
        return self._arm(IkeMessage("init_req", self.config.init_req_bytes), now)

    def handover(self, new_ip: bytes, now: float) -> Optional[IkeMessage]:
        """MOBIKE address update: UPDATE exchange then a rekey exchange.

        If the session is mid-negotiation the handover is queued and
        starts once Established.
        """
        if self.state != IkeState.ESTABLISHED:
            self.pending_handover_ip = new_ip
            return None
        self.handover_done_at = None
        self.current_ip = new_ip
        self.state = IkeState.UPDATE_SENT
        self.retry_count = 0
        self._rto_ms = self.config.rto_initial_ms
        return self._arm(IkeMessage("update_req", self.config.update_req_bytes), now)

    def on_message(self, msg: IkeMessage, now: float) -> Optional[IkeMessage]:
        """Consume an inbound message; returns the next request, if any.

        Out-of-order or duplicate messages are ignored.
        """
        expected = _EXPECTED_RESP.get(self.state)
        if expected is None or msg.kind != expected:
            return None
        self.retry_count = 0
        self._rto_ms = self.config.rto_initial_ms
        self._outstanding = None
        self.timer_deadline_ms = None
        if self.state == IkeState.INIT_SENT:
            self.state = IkeState.AUTH_SENT
            return self._arm(IkeMessage("auth_req", self.config.auth_req_bytes), now)
        if self.state == IkeState.AUTH_SENT:
            self.state = IkeState.ESTABLISHED
            self.established_at = now
            if self.pending_handover_ip is not None:
                ip, self.pending_handover_ip = self.pending_handover_ip, None
                return self.handover(ip, now)
            return None
        if self.state == IkeState.UPDATE_SENT:
            self.state = IkeState.REKEY_SENT
            return self._arm(IkeMessage("rekey_req", self.config.rekey_req_bytes), now)
        # REKEY_SENT
        self.state = IkeState.ESTABLISHED
        self.handover_done_at = now
        return None

    def on_timeout(self, now: float) -> Optional[IkeMessage]:
        """Retransmit the outstanding request with backoff; give up and
        fall back to Idle after max_retries."""
        if self._outstanding is None:
            return None
        if self.retry_count >= self.config.max_retries:
            self.failed = True
            self.state = IkeState.IDLE
            self._outstanding = None
            self.timer_deadline_ms = None
            return None
        self.retry_count += 1
        self._rto_ms *= self.config.rto_backoff
        return self._arm(self._outstanding, now)


# ----------------------------------------------------------------------
# AH-style per-packet protection

@dataclass(frozen=True)
class AhPacket:
    ip: ImmutableIpFields
    spi: int
    sequence: int
    icv: bytes
    payload: bytes


def _ah_icv(key: bytes, ip: ImmutableIpFields, spi: int, sequence: int, payload: bytes) -> bytes:
    msg = ip.encode() + spi.to_bytes(4, "big") + sequence.to_bytes(4, "big") + payload
    return hmac.new(key, msg, hashlib.sha256).digest()


def ah_protect(
    key: bytes, src_ip: bytes, dst_ip: bytes, payload: bytes, spi: int = 1, sequence: int = 0
) -> AhPacket:
    ip = ImmutableIpFields(src_ip, dst_ip, len(payload))
    return AhPacket(ip, spi, sequence, _ah_icv(key, ip, spi, sequence, payload), payload)


def ah_verify(key: bytes, pkt: AhPacket) -> bool:
    if pkt.ip.payload_length != len(pkt.payload):
        return False
    expected = _ah_icv(key, pkt.ip, pkt.spi, pkt.sequence, pkt.payload)
    return hmac.compare_digest(expected, pkt.icv)
