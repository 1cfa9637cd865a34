"""Deterministic discrete-event network simulator.

Heterogeneous lossy links with FIFO serialization, an
earliest-delivery-path-first (EDPF) multipath scheduler, CBR and probe
traffic generators, a reorder-aware receiver, and metric collection for
the three measurement modes used by the benchmarks:

* ``auth``      - cold start, time until the first packet (or the IKEv2
                  establishment) lets data flow;
* ``handover``  - scripted address change on adapter 0, time until the
                  first acceptance under the new address (or until the
                  MOBIKE update+rekey completes);
* ``datapath``  - sessions pre-established, per-probe one-way delays and
                  reorder-buffer goodput.

Simulated time is integer microseconds; event-queue ties break on
insertion order, so a (scenario, seed) pair always yields an identical
event trace.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field, asdict, replace
from typing import Callable, Dict, List, Optional, Tuple

from .pairing import setup
from .keys import gen_master
from .endpoints import HaEndpoint, MrEndpoint, Verdict
from .ike import IkeConfig, IkeSession, IkeState, responder_reply
from .wire import HEADER_LEN

US_PER_MS = 1000
US_PER_S = 1_000_000
IP_HEADER_BYTES = 20
NIMSA_OVERHEAD_BYTES = HEADER_LEN

HA_IP = bytes([192, 0, 2, 1])


class ScenarioError(ValueError):
    """Malformed scenario configuration (detected before simulation)."""


# ----------------------------------------------------------------------
# links

@dataclass(frozen=True)
class LinkProfile:
    loss_min: float
    loss_max: float
    bandwidth_bps: float
    delay_min_ms: float
    delay_max_ms: float

    def validate(self) -> None:
        if not (0 <= self.loss_min <= self.loss_max <= 1):
            raise ScenarioError("loss range must satisfy 0 <= min <= max <= 1")
        if self.bandwidth_bps <= 0:
            raise ScenarioError("bandwidth must be positive")
        if not (0 <= self.delay_min_ms <= self.delay_max_ms):
            raise ScenarioError("delay range must satisfy 0 <= min <= max")

    @property
    def delay_midpoint_ms(self) -> float:
        return (self.delay_min_ms + self.delay_max_ms) / 2


# Table of heterogeneous access links used by the data-path benchmarks.
TABLE1_LINKS = (
    LinkProfile(0.015, 0.020, 4_000_000, 40.0, 50.0),  # link A
    LinkProfile(0.020, 0.025, 4_000_000, 60.0, 70.0),  # link B
    LinkProfile(0.010, 0.015, 4_000_000, 50.0, 60.0),  # link C
)


class LinkState:
    """One direction of a link: profile plus the serialization-queue tail."""

    __slots__ = ("profile", "busy_until_us")

    def __init__(self, profile: LinkProfile):
        profile.validate()
        self.profile = profile
        self.busy_until_us = 0

    def serialization_us(self, size_bytes: int) -> int:
        return round(size_bytes * 8 * US_PER_S / self.profile.bandwidth_bps)


def link_transmit(link: LinkState, size_bytes: int, now_us: int, rng: random.Random) -> Optional[int]:
    """Queue one packet; returns its arrival time or None when lost.

    Serialization starts when the queue drains; the loss probability is
    drawn uniformly from the profile's range per packet, and the
    propagation delay uniformly from the delay range.
    """
    if size_bytes <= 0:
        raise ScenarioError("packet size must be positive")
    start = max(now_us, link.busy_until_us)
    link.busy_until_us = start + link.serialization_us(size_bytes)
    p_loss = rng.uniform(link.profile.loss_min, link.profile.loss_max)
    if rng.random() < p_loss:
        return None
    delay_us = round(rng.uniform(link.profile.delay_min_ms, link.profile.delay_max_ms) * US_PER_MS)
    return link.busy_until_us + delay_us


def edpf_pick(links: List[LinkState], size_bytes: int, now_us: int) -> int:
    """Earliest-delivery-path-first: argmin of the estimated delivery time.

    The estimate is queue drain + serialization + the delay-range
    midpoint (the scheduler cannot see the sampled delay).  Ties go to
    the lowest index.
    """
    if not links:
        raise ScenarioError("edpf_pick requires at least one link")
    best, best_est = 0, None
    for i, link in enumerate(links):
        est = (
            max(now_us, link.busy_until_us)
            + link.serialization_us(size_bytes)
            + link.profile.delay_midpoint_ms * US_PER_MS
        )
        if best_est is None or est < best_est:
            best, best_est = i, est
    return best


# ----------------------------------------------------------------------
# event loop

class EventLoop:
    """Min-heap of (time_us, insertion_seq, callback)."""

    def __init__(self):
        self._heap: list = []
        self._seq = 0
        self.now_us = 0

    def schedule(self, at_us: int, fn: Callable[[], None]) -> None:
        if at_us < self.now_us:
            raise ScenarioError("cannot schedule into the past")
        heapq.heappush(self._heap, (int(at_us), self._seq, fn))
        self._seq += 1

    def run(self, until_us: Optional[int] = None) -> None:
        while self._heap:
            t, _, fn = self._heap[0]
            if until_us is not None and t > until_us:
                break
            heapq.heappop(self._heap)
            self.now_us = t
            fn()


# ----------------------------------------------------------------------
# traffic generators

def cbr_ticks_us(
    rate_bps: float, packet_bytes: int, duration_s: float,
    spacing_ms: Optional[float] = None,
) -> List[int]:
    """Constant-bit-rate send instants; spacing = packet_bytes*8/rate
    unless an explicit spacing is given (used by zero-payload probes)."""
    if rate_bps <= 0 or packet_bytes < 0 or duration_s <= 0:
        raise ScenarioError("cbr generator parameters must be positive")
    if spacing_ms is not None:
        if spacing_ms <= 0:
            raise ScenarioError("spacing must be positive")
        spacing_us = spacing_ms * US_PER_MS
    else:
        spacing_us = max(packet_bytes, 1) * 8 * US_PER_S / rate_bps
    n = int(duration_s * US_PER_S / spacing_us)
    return [round(i * spacing_us) for i in range(n)]


def probe_ticks_us(interval_ms: float, count: int) -> List[int]:
    if interval_ms <= 0 or count <= 0:
        raise ScenarioError("probe generator parameters must be positive")
    return [round(i * interval_ms * US_PER_MS) for i in range(count)]


# ----------------------------------------------------------------------
# reorder-aware receiver

class ReorderBuffer:
    """Holds out-of-order packets up to a window, then declares gaps."""

    def __init__(self, loop: EventLoop, window_us: int, on_release: Callable[[int, object, int], None]):
        self.loop = loop
        self.window_us = window_us
        self.on_release = on_release
        self.expected = 0
        self.held: Dict[int, object] = {}

    def arrive(self, seq: int, info, now_us: int) -> None:
        if seq < self.expected:
            # gap already declared for this slot; deliver late
            self.on_release(seq, info, now_us)
            return
        if seq == self.expected:
            self.on_release(seq, info, now_us)
            self.expected += 1
            self._cascade(now_us)
            return
        self.held[seq] = info
        self.loop.schedule(now_us + self.window_us, lambda: self._expire(seq))

    def _cascade(self, now_us: int) -> None:
        while self.expected in self.held:
            self.on_release(self.expected, self.held.pop(self.expected), now_us)
            self.expected += 1

    def _expire(self, seq: int) -> None:
        if seq not in self.held or seq < self.expected:
            return
        now = self.loop.now_us
        for s in sorted(k for k in self.held if k <= seq):
            self.on_release(s, self.held.pop(s), now)
        self.expected = seq + 1
        self._cascade(now)


# ----------------------------------------------------------------------
# scenario and metrics

@dataclass(frozen=True)
class CryptoCosts:
    """Constant processing charges for the simulated cryptography.

    Pairings are charged only at interface init and handover; the
    per-packet HMAC constant is the same for the authentication header
    and the AH baseline so the comparison isolates protocol structure.
    """

    pairing_ms: float = 1.5
    hmac_ms: float = 0.02

    @property
    def pairing_us(self) -> int:
        return round(self.pairing_ms * US_PER_MS)

    @property
    def hmac_us(self) -> int:
        return round(self.hmac_ms * US_PER_MS)


@dataclass(frozen=True)
class TrafficSpec:
    type: str = "cbr"  # cbr | probe
    rate_bps: float = 1_000_000
    packet_bytes: int = 1250
    duration_s: float = 10.0
    probe_interval_ms: float = 1000.0
    probe_count: int = 60
    probe_bytes: int = 64
    spacing_ms: Optional[float] = None

    def ticks_us(self) -> List[int]:
        if self.type == "cbr":
            return cbr_ticks_us(
                self.rate_bps, self.packet_bytes, self.duration_s, self.spacing_ms
            )
        if self.type == "probe":
            return probe_ticks_us(self.probe_interval_ms, self.probe_count)
        raise ScenarioError(f"unknown traffic type {self.type!r}")

    @property
    def payload_bytes(self) -> int:
        return self.probe_bytes if self.type == "probe" else self.packet_bytes


@dataclass(frozen=True)
class Scenario:
    links: Tuple[LinkProfile, ...] = TABLE1_LINKS
    scheme: str = "nimsa"  # nimsa | ikev2 | none
    measure: str = "datapath"  # auth | handover | datapath
    handover_mode: str = "transmission"  # transmission | notification
    traffic: TrafficSpec = TrafficSpec()
    adapter_change_at_ms: float = 100.0
    loss_override_pct: Optional[float] = None
    delay_override_ms: Optional[float] = None
    crypto: CryptoCosts = CryptoCosts()
    ike: IkeConfig = IkeConfig()
    ah_overhead_bytes: Optional[int] = None  # None = ike.per_packet_overhead_bytes
    reorder_window_ms: float = 100.0
    notification_rto_ms: float = 500.0
    notification_backoff: float = 2.0
    data_retry_rto_ms: float = 500.0
    max_sim_ms: float = 120_000.0
    trials: int = 1
    seed: int = 0

    def validate(self) -> None:
        if not self.links:
            raise ScenarioError("scenario needs at least one link")
        for lp in self.links:
            lp.validate()
        if self.scheme not in ("nimsa", "ikev2", "none"):
            raise ScenarioError(f"unknown scheme {self.scheme!r}")
        if self.measure not in ("auth", "handover", "datapath"):
            raise ScenarioError(f"unknown measure {self.measure!r}")
        if self.handover_mode not in ("transmission", "notification"):
            raise ScenarioError(f"unknown handover mode {self.handover_mode!r}")
        if self.loss_override_pct is not None and not 0 <= self.loss_override_pct <= 100:
            raise ScenarioError("loss_override_pct out of range")
        if self.trials < 1:
            raise ScenarioError("trials must be >= 1")
        self.traffic.ticks_us()  # validates traffic parameters
        self.ike.validate()

    def effective_links(self) -> List[LinkProfile]:
        out = []
        for lp in self.links:
            if self.loss_override_pct is not None:
                p = self.loss_override_pct / 100
                lp = replace(lp, loss_min=p, loss_max=p)
            if self.delay_override_ms is not None:
                d = self.delay_override_ms
                lp = replace(lp, delay_min_ms=d, delay_max_ms=d)
            out.append(lp)
        return out

    @property
    def ah_overhead(self) -> int:
        if self.ah_overhead_bytes is not None:
            return self.ah_overhead_bytes
        return self.ike.per_packet_overhead_bytes

    @staticmethod
    def from_dict(d: dict) -> "Scenario":
        try:
            kwargs: dict = {}
            if "links" in d:
                kwargs["links"] = tuple(LinkProfile(**lp) for lp in d["links"])
            if "traffic" in d:
                kwargs["traffic"] = TrafficSpec(**d["traffic"])
            if "crypto_costs" in d:
                kwargs["crypto"] = CryptoCosts(**d["crypto_costs"])
            if "ike" in d:
                kwargs["ike"] = IkeConfig(**d["ike"])
            for key in (
                "scheme", "measure", "handover_mode", "adapter_change_at_ms",
                "loss_override_pct", "delay_override_ms", "ah_overhead_bytes",
                "reorder_window_ms", "notification_rto_ms", "notification_backoff",
                "data_retry_rto_ms", "max_sim_ms", "trials", "seed",
            ):
                if key in d:
                    kwargs[key] = d[key]
            sc = Scenario(**kwargs)
        except (TypeError, ValueError) as exc:
            raise ScenarioError(f"bad scenario config: {exc}") from exc
        sc.validate()
        return sc


@dataclass
class MetricsReport:
    auth_latency_ms: List[float] = field(default_factory=list)
    handover_latency_ms: List[float] = field(default_factory=list)
    owd_ms: List[float] = field(default_factory=list)
    goodput_mbps: List[Tuple[int, float]] = field(default_factory=list)
    control_msg_count: int = 0
    data_sent: int = 0
    data_delivered: int = 0
    link_lost: int = 0
    receiver_dropped: int = 0
    drop_counts: Dict[str, int] = field(default_factory=dict)

    def count_drop(self, verdict: Verdict) -> None:
        self.receiver_dropped += 1
        self.drop_counts[verdict.value] = self.drop_counts.get(verdict.value, 0) + 1

    def conservation_ok(self) -> bool:
        return self.data_sent == self.data_delivered + self.link_lost + self.receiver_dropped

    def as_dict(self) -> dict:
        return asdict(self)


# ----------------------------------------------------------------------
# simulation crypto: real endpoints on the fast curve profile, with the
# wall-clock pairing/HMAC cost replaced by the configured constants

_SIM_SUITE = None


def _sim_suite():
    global _SIM_SUITE
    if _SIM_SUITE is None:
        _SIM_SUITE = setup("test", 0)
    return _SIM_SUITE


def _mr_ip(if_num: int, epoch: int) -> bytes:
    return bytes([10, if_num, epoch, 2])


def _build_endpoints(seed_initial: int = 1) -> Tuple[MrEndpoint, HaEndpoint]:
    suite = _sim_suite()
    master = gen_master(suite, random.Random(1))
    mr = MrEndpoint(suite, b"MR1", master, b"HA1", HA_IP, seed_initial=seed_initial)
    ha = HaEndpoint(suite, b"HA1", HA_IP)
    ha.register_mr(mr.mr_id, mr.ha_anchor_point())
    return mr, ha


def run_scenario(scenario: Scenario, rng_seed: int) -> MetricsReport:
    """Execute one trial; deterministic in (scenario, rng_seed)."""
    scenario.validate()
    rng = random.Random(rng_seed)
    if scenario.scheme == "ikev2" and scenario.measure in ("auth", "handover"):
        return _run_ike_control(scenario, rng)
    if scenario.measure == "datapath" or scenario.scheme == "none":
        return _run_datapath(scenario, rng)
    return _run_nimsa_control(scenario, rng)


# ----------------------------------------------------------------------
# NIMSA auth / handover trials

def _run_nimsa_control(scenario: Scenario, rng: random.Random) -> MetricsReport:
    loop = EventLoop()
    metrics = MetricsReport()
    links = [LinkState(lp) for lp in scenario.effective_links()]
    mr, ha = _build_endpoints()
    crypto = scenario.crypto
    max_us = round(scenario.max_sim_ms * US_PER_MS)
    state = {"done": False, "t0_us": 0}

    def deliver(pkt, if_num: int, send_us: int, on_accept=None) -> None:
        size = IP_HEADER_BYTES + NIMSA_OVERHEAD_BYTES + len(pkt.payload)
        metrics.data_sent += 1
        arrival = link_transmit(links[if_num], size, send_us, rng)
        if arrival is None:
            metrics.link_lost += 1
            return

        def receive():
            cost = crypto.hmac_us + (crypto.pairing_us if ha.needs_pairing(pkt) else 0)
            verdict = ha.on_packet(pkt)
            verdict_us = loop.now_us + cost
            if verdict.accepted:
                metrics.data_delivered += 1
                if on_accept is not None:
                    on_accept(verdict_us)
            else:
                metrics.count_drop(verdict)

        loop.schedule(arrival, receive)

    if scenario.measure == "auth":
        ticks = scenario.traffic.ticks_us()
        payload = b"\x00" * scenario.traffic.payload_bytes

        def on_accept(verdict_us: int) -> None:
            if not state["done"]:
                state["done"] = True
                metrics.auth_latency_ms.append(verdict_us / US_PER_MS)

        def make_tick(t_us: int):
            def tick():
                if state["done"] or loop.now_us > max_us:
                    return
                send_us = loop.now_us + crypto.hmac_us
                if 0 not in mr.interfaces:
                    mr.on_adapter_up(0, _mr_ip(0, 0))
                    send_us += crypto.pairing_us
                deliver(mr.send(payload, 0), 0, send_us, on_accept)
            return tick

        for t in ticks:
            loop.schedule(t, make_tick(t))
        loop.run(until_us=max_us)
        return metrics

    # handover measurement
    mr.on_adapter_up(0, _mr_ip(0, 0))
    # pre-establish: one unmetered handshake packet primes the HA state
    if not ha.on_packet(mr.send(b"", 0)).accepted:
        raise ScenarioError("pre-establishment handshake failed")

    change_at = round(scenario.adapter_change_at_ms * US_PER_MS)
    new_ip = _mr_ip(0, 1)
    hstate = {"changed": False, "accepted": False}

    def on_new_addr_accept(verdict_us: int) -> None:
        if not hstate["accepted"]:
            hstate["accepted"] = True
            metrics.handover_latency_ms.append((verdict_us - change_at) / US_PER_MS)

    if scenario.handover_mode == "transmission":
        ticks = scenario.traffic.ticks_us()
        payload = b"\x00" * scenario.traffic.payload_bytes

        def make_tick(t_us: int):
            def tick():
                if hstate["accepted"] or loop.now_us > max_us:
                    return
                send_us = loop.now_us + crypto.hmac_us
                cb = None
                if not hstate["changed"] and loop.now_us >= change_at:
                    # subnet data keeps arriving; the packet present at the
                    # change instant carries the new state (transmission mode)
                    hstate["changed"] = True
                    mr.queue_data(payload)
                    if mr.on_adapter_change(0, new_ip) is not None:
                        raise ScenarioError("expected transmission-mode rekey")
                    send_us += crypto.pairing_us
                    pkt = mr.send_pending(0)
                else:
                    pkt = mr.send(payload, 0)
                if hstate["changed"]:
                    cb = on_new_addr_accept
                deliver(pkt, 0, send_us, cb)
            return tick

        for t in ticks:
            loop.schedule(t, make_tick(t))
        loop.run(until_us=max_us)
        return metrics

    # notification mode: idle link, one unacknowledged address update.
    # The protocol never retransmits it; the measurement harness repeats
    # it on an RTO schedule so the latency stays finite under loss.
    notif_state = {"pkt": None, "rto_us": round(scenario.notification_rto_ms * US_PER_MS)}

    def send_notification():
        if hstate["accepted"] or loop.now_us > max_us:
            return
        metrics.control_msg_count += 1
        deliver(notif_state["pkt"], 0, loop.now_us + crypto.hmac_us, on_new_addr_accept)
        loop.schedule(loop.now_us + notif_state["rto_us"], send_notification)
        notif_state["rto_us"] = round(notif_state["rto_us"] * scenario.notification_backoff)

    def change():
        hstate["changed"] = True
        pkt = mr.on_adapter_change(0, new_ip)
        if pkt is None or not pkt.header.flags & 0x01:
            raise ScenarioError("expected a notification packet")
        notif_state["pkt"] = pkt
        loop.schedule(loop.now_us + crypto.pairing_us, send_notification)

    loop.schedule(change_at, change)
    loop.run(until_us=max_us)
    return metrics


# ----------------------------------------------------------------------
# IKEv2 auth / MOBIKE handover trials

def _run_ike_control(scenario: Scenario, rng: random.Random) -> MetricsReport:
    loop = EventLoop()
    metrics = MetricsReport()
    profiles = scenario.effective_links()
    fwd = LinkState(profiles[0])
    rev = LinkState(profiles[0])
    session = IkeSession(scenario.ike)
    proc_us = round(scenario.ike.msg_proc_ms * US_PER_MS)
    max_us = round(scenario.max_sim_ms * US_PER_MS)
    done = {"flag": False}

    def send_initiator(msg) -> None:
        metrics.control_msg_count += 1
        arrival = link_transmit(fwd, IP_HEADER_BYTES + msg.size_bytes, loop.now_us, rng)
        arm_timer()
        if arrival is None:
            return
        loop.schedule(arrival, lambda: responder_receive(msg))

    def responder_receive(msg) -> None:
        reply = responder_reply(scenario.ike, msg)
        if reply is None:
            return
        send_us = loop.now_us + proc_us
        metrics.control_msg_count += 1
        arrival = link_transmit(rev, IP_HEADER_BYTES + reply.size_bytes, send_us, rng)
        if arrival is None:
            return
        loop.schedule(arrival, lambda: initiator_receive(reply))

    def initiator_receive(msg) -> None:
        at = loop.now_us + proc_us
        loop.schedule(at, lambda: initiator_process(msg))

    def initiator_process(msg) -> None:
        if done["flag"]:
            return
        out = session.on_message(msg, loop.now_us / US_PER_MS)
        check_done()
        if out is not None and not done["flag"]:
            send_initiator(out)

    def arm_timer() -> None:
        if session.timer_deadline_ms is None:
            return
        deadline = round(session.timer_deadline_ms * US_PER_MS)
        expected = session.timer_deadline_ms

        def fire():
            if done["flag"] or session.timer_deadline_ms != expected:
                return
            if loop.now_us > max_us:
                return
            out = session.on_timeout(loop.now_us / US_PER_MS)
            if out is not None:
                send_initiator(out)
            elif session.failed and scenario.measure == "auth":
                send_initiator(session.initiate(loop.now_us / US_PER_MS))

        loop.schedule(deadline, fire)

    def check_done() -> None:
        if scenario.measure == "auth" and session.established_at is not None:
            done["flag"] = True
            metrics.auth_latency_ms.append(session.established_at)
        if scenario.measure == "handover" and session.handover_done_at is not None:
            done["flag"] = True
            metrics.handover_latency_ms.append(
                session.handover_done_at - scenario.adapter_change_at_ms
            )

    if scenario.measure == "auth":
        send_initiator(session.initiate(0.0))
    else:
        session.state = IkeState.ESTABLISHED
        session.established_at = 0.0
        change_at = round(scenario.adapter_change_at_ms * US_PER_MS)

        def start_handover():
            out = session.handover(_mr_ip(0, 1), loop.now_us / US_PER_MS)
            if out is not None:
                send_initiator(out)

        loop.schedule(change_at, start_handover)

    loop.run(until_us=max_us)
    return metrics


# ----------------------------------------------------------------------
# data-path trials (probes and CBR goodput), all three schemes

def _run_datapath(scenario: Scenario, rng: random.Random) -> MetricsReport:
    loop = EventLoop()
    metrics = MetricsReport()
    links = [LinkState(lp) for lp in scenario.effective_links()]
    crypto = scenario.crypto
    max_us = round(scenario.max_sim_ms * US_PER_MS)
    ticks = scenario.traffic.ticks_us()
    payload = b"\x00" * scenario.traffic.payload_bytes
    is_probe = scenario.traffic.type == "probe"

    if scenario.scheme == "nimsa":
        mr, ha = _build_endpoints()
        for i in range(len(links)):
            mr.on_adapter_up(i, _mr_ip(i, 0))
            if not ha.on_packet(mr.send(b"", i)).accepted:  # pre-established
                raise ScenarioError("pre-establishment handshake failed")
        overhead = NIMSA_OVERHEAD_BYTES
        sender_cost = receiver_cost = crypto.hmac_us

        def make_pkt(if_num: int):
            return mr.send(payload, if_num)

        def accept(pkt) -> bool:
            return ha.on_packet(pkt).accepted

        def classify(pkt):
            return ha.on_packet(pkt)

    elif scenario.scheme == "ikev2":
        ah_key = b"\x0b" * 32
        from .ike import ah_protect, ah_verify

        overhead = scenario.ah_overhead
        cost_us = round(scenario.ike.ah_packet_ms * US_PER_MS)
        sender_cost = receiver_cost = cost_us
        seq_counter = {"n": 0}

        def make_pkt(if_num: int):
            seq_counter["n"] += 1
            return ah_protect(ah_key, _mr_ip(if_num, 0), HA_IP, payload, spi=if_num + 1,
                              sequence=seq_counter["n"])

        def accept(pkt) -> bool:
            return ah_verify(ah_key, pkt)

        classify = None

    else:  # no-security control
        overhead = 0
        sender_cost = receiver_cost = 0

        def make_pkt(if_num: int):
            return payload

        def accept(pkt) -> bool:
            return True

        classify = None

    size_bytes = IP_HEADER_BYTES + overhead + len(payload)
    bins: Dict[int, int] = {}

    def on_release(seq: int, payload_len: int, release_us: int) -> None:
        bins[release_us // US_PER_S] = bins.get(release_us // US_PER_S, 0) + payload_len

    reorder = ReorderBuffer(loop, round(scenario.reorder_window_ms * US_PER_MS), on_release)
    seq_state = {"next": 0}

    def make_tick(t_us: int):
        def tick():
            if loop.now_us > max_us:
                return
            seq = seq_state["next"]
            seq_state["next"] += 1
            if_num = edpf_pick(links, size_bytes, loop.now_us + sender_cost)
            pkt = make_pkt(if_num)
            metrics.data_sent += 1
            arrival = link_transmit(links[if_num], size_bytes, loop.now_us + sender_cost, rng)
            if arrival is None:
                metrics.link_lost += 1
                return

            def receive():
                verdict_us = loop.now_us + receiver_cost
                if classify is not None:
                    verdict = classify(pkt)
                    ok = verdict.accepted
                    if not ok:
                        metrics.count_drop(verdict)
                else:
                    ok = accept(pkt)
                    if not ok:
                        metrics.receiver_dropped += 1
                        metrics.drop_counts["AuthFail"] = metrics.drop_counts.get("AuthFail", 0) + 1
                if not ok:
                    return
                metrics.data_delivered += 1
                if is_probe:
                    metrics.owd_ms.append((verdict_us - t_us) / US_PER_MS)
                reorder.arrive(seq, len(payload), verdict_us)

            loop.schedule(arrival, receive)
        return tick

    for t in ticks:
        loop.schedule(t, make_tick(t))
    loop.run(until_us=max_us)

    if not is_probe and ticks:
        last_bin = max(bins) if bins else 0
        duration_bins = max(int(scenario.traffic.duration_s), last_bin + 1)
        metrics.goodput_mbps = [
            (b, bins.get(b, 0) * 8 / 1e6) for b in range(duration_bins)
        ]
    return metrics


def mean(values: List[float]) -> float:
    if not values:
        raise ScenarioError("mean of empty metric list")
    return sum(values) / len(values)
