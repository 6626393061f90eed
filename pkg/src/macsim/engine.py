"""Slot-stepped network simulator.

Advances the shared medium one MAC slot at a time.  Stations whose backoff
counter reached zero and that hold a packet transmit; zero transmitters make
an idle slot, exactly one makes a success unless a channel error fires, two
or more collide.  Every station observes the slot; stations running a
schedule-based protocol keep a window of the last schedule's slots, update
their slot choice when the window completes, and reload their counter so
that the next transmission lands on the chosen position of the next window.
Simulated time is the sum of slot durations and nothing else.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .adaptation import AlmacAdapter, AlzcAdapter, WindowSummary, txop_packets
from .phy import PhyParams, SlotKind, slot_duration
from .protocols import Dcf, ScheduleProtocol


@dataclass(frozen=True)
class SlotOutcome:
    """Resolution of one MAC slot."""

    kind: SlotKind
    transmitters: tuple[int, ...]
    packets: int
    duration_us: float

    def __post_init__(self) -> None:
        if self.kind == SlotKind.COLLISION and len(self.transmitters) < 2:
            raise ValueError("a collision involves at least two transmitters")
        if self.kind in (SlotKind.SUCCESS, SlotKind.ERROR) and len(self.transmitters) != 1:
            raise ValueError("success and error slots have exactly one transmitter")
        if self.kind == SlotKind.IDLE and self.transmitters:
            raise ValueError("idle slots have no transmitter")


@dataclass
class Trace:
    """Per-slot record of a run."""

    kinds: list[int] = field(default_factory=list)
    durations: list[float] = field(default_factory=list)
    tx_station: list[int] = field(default_factory=list)  # -1 unless success/error
    packets: list[int] = field(default_factory=list)  # delivered packets, success only
    colliders: dict[int, tuple[int, ...]] = field(default_factory=dict)
    coll_sizes: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.kinds)

    @property
    def sim_time_us(self) -> float:
        return float(sum(self.durations))

    def transmitters_of(self, slot_index: int) -> tuple[int, ...]:
        kind = self.kinds[slot_index]
        if kind in (SlotKind.SUCCESS, SlotKind.ERROR):
            return (self.tx_station[slot_index],)
        if kind == SlotKind.COLLISION:
            return self.colliders[slot_index]
        return ()


@dataclass
class EventRecord:
    """One schedule of one station: which slot it held and how it went."""

    station: int
    schedule_index: int
    chosen_slot: int
    outcome: str  # "success" or "failure"


class Station:
    """A transmitter: protocol state, traffic queue, backoff counter, window."""

    def __init__(
        self,
        sid: int,
        protocol,
        rng: np.random.Generator,
        saturated: bool = True,
        lambda_pps: float = 0.0,
        buffer_packets: int = 50,
        adapter: AlzcAdapter | AlmacAdapter | None = None,
        txop_base: int | None = None,
        start_time_us: float = 0.0,
    ):
        self.sid = sid
        self.protocol = protocol
        self.rng = rng
        self.saturated = saturated
        self.lambda_pps = lambda_pps
        self.buffer_packets = buffer_packets
        self.adapter = adapter
        self.txop_base = txop_base

        self.queue: deque[float] = deque()
        self.head_since_us: float | None = None
        self.next_arrival_us = float("inf")
        if not saturated and lambda_pps > 0.0:
            self.next_arrival_us = start_time_us + rng.exponential(1e6 / lambda_pps)

        self.delivered = 0
        self.dropped = 0
        self.lost_arrivals = 0
        self.delays_us: list[float] = []

        self.is_dcf = isinstance(protocol, Dcf)
        if self.is_dcf:
            self.counter = protocol.counter
            self.window_len = 0
            self.txop_m = 1
        else:
            self.window_len = protocol.schedule_len
            self.counter = protocol.current_slot() - 1
            self.txop_m = (
                txop_packets(self.window_len, txop_base) if txop_base else 1
            )
        self.window: list[int] = []
        self.pending_success: bool | None = None
        self.in_probe = False
        self.schedule_index = 0

    # -- queue ----------------------------------------------------------

    def has_packet(self) -> bool:
        return self.saturated or bool(self.queue)

    def queue_len(self) -> int:
        return len(self.queue)

    def packets_ready(self) -> int:
        if self.saturated:
            return self.txop_m
        return min(self.txop_m, len(self.queue))

    def deliver(self, count: int, now_us: float) -> None:
        self.delivered += count
        if self.saturated:
            return
        for i in range(count):
            self.queue.popleft()
            head_at = self.head_since_us if i == 0 else now_us
            self.delays_us.append(now_us - (head_at if head_at is not None else now_us))
        self.head_since_us = now_us if self.queue else None

    def drop_head(self, now_us: float) -> None:
        self.dropped += 1
        if self.saturated:
            return
        if self.queue:
            self.queue.popleft()
        self.head_since_us = now_us if self.queue else None

    def pull_arrivals(self, now_us: float) -> None:
        while self.next_arrival_us <= now_us:
            arrival = self.next_arrival_us
            self.next_arrival_us = arrival + self.rng.exponential(
                1e6 / self.lambda_pps
            )
            if len(self.queue) >= self.buffer_packets:
                self.lost_arrivals += 1
                continue
            self.queue.append(arrival)
            if self.head_since_us is None:
                self.head_since_us = arrival

    # -- slot bookkeeping -------------------------------------------------

    def end_of_slot(
        self,
        kind: SlotKind,
        transmitted: bool,
        own_success: bool,
        now_us: float,
        events: list[EventRecord],
    ) -> None:
        if self.is_dcf:
            if transmitted:
                counter, dropped = self.protocol.on_transmission(own_success, self.rng)
                if dropped:
                    self.drop_head(now_us)
                self.counter = counter
            elif self.counter > 0:
                self.counter -= 1
            return

        self.window.append(int(kind))
        pos = len(self.window)
        if self.counter == 0:
            if transmitted:
                self.pending_success = own_success
            else:
                self.pending_success = kind == SlotKind.IDLE
            self.counter = self.window_len - pos
        elif self.counter > 0:
            self.counter -= 1
        if pos == self.window_len:
            self._end_of_window(events)

    def _end_of_window(self, events: list[EventRecord]) -> None:
        proto: ScheduleProtocol = self.protocol
        assert self.pending_success is not None, "window ended without own outcome"
        success = self.pending_success
        window = self.window
        idle_positions = [
            i + 1 for i, k in enumerate(window) if k == int(SlotKind.IDLE)
        ]
        held_slot = (
            (proto.current_slot() - 1) % self.window_len + 1
            if self.in_probe
            else proto.current_slot()
        )
        events.append(
            EventRecord(
                self.sid,
                self.schedule_index,
                held_slot,
                "success" if success else "failure",
            )
        )

        if not self.in_probe:
            proto.on_schedule_end(success, idle_positions, self.rng)

        next_len = self.window_len
        probe = False
        if self.adapter is not None:
            summary = WindowSummary(
                idle_count=len(idle_positions),
                busy_count=self.window_len - len(idle_positions),
                saw_collision=any(
                    k in (int(SlotKind.COLLISION), int(SlotKind.ERROR))
                    for k in window
                ),
                own_success=success,
                was_probe=self.in_probe,
            )
            next_len, probe = self.adapter.plan_next(summary)
            if not probe and next_len != proto.schedule_len:
                proto.resize(next_len)

        if probe:
            effective_slot = (proto.current_slot() - 1) % next_len + 1
        else:
            effective_slot = proto.current_slot()
        self.in_probe = probe
        self.window_len = next_len
        self.txop_m = txop_packets(next_len, self.txop_base) if self.txop_base else 1
        self.window = []
        self.pending_success = None
        self.counter = effective_slot - 1
        self.schedule_index += 1


class _RollingWindow:
    """Counts slot kinds over the last ``length`` slots."""

    def __init__(self, length: int):
        self.length = length
        self._kinds: deque[int] = deque()
        self.n_success = 0
        self.n_collision = 0
        self.n_error = 0

    def push(self, kind: SlotKind) -> None:
        self._kinds.append(int(kind))
        if kind == SlotKind.SUCCESS:
            self.n_success += 1
        elif kind == SlotKind.COLLISION:
            self.n_collision += 1
        elif kind == SlotKind.ERROR:
            self.n_error += 1
        if len(self._kinds) > self.length:
            old = self._kinds.popleft()
            if old == int(SlotKind.SUCCESS):
                self.n_success -= 1
            elif old == int(SlotKind.COLLISION):
                self.n_collision -= 1
            elif old == int(SlotKind.ERROR):
                self.n_error -= 1

    def collision_free_schedule(self, n_stations: int) -> bool:
        return (
            len(self._kinds) == self.length
            and self.n_success == n_stations
            and self.n_collision == 0
            and self.n_error == 0
        )


class Simulator:
    """Steps stations through MAC slots on one shared channel."""

    def __init__(
        self,
        stations: list[Station],
        phy: PhyParams,
        error_rate: float = 0.0,
        channel_rng: np.random.Generator | None = None,
        record_trace: bool = True,
    ):
        if not 0.0 <= error_rate <= 1.0:
            raise ValueError("error rate must be in [0, 1]")
        if error_rate > 0.0 and channel_rng is None:
            raise ValueError("channel errors need a channel RNG")
        self.stations = list(stations)
        self.phy = phy
        self.error_rate = error_rate
        self.channel_rng = channel_rng
        self.record_trace = record_trace
        self.trace = Trace()
        self.events: list[EventRecord] = []
        self.clock_us = 0.0
        self.slot_index = 0

    def add_station(self, station: Station) -> None:
        """A new transmitter joins; its schedule phase starts at the next slot."""
        self.stations.append(station)

    def step(self) -> SlotOutcome:
        transmitters = [
            st for st in self.stations if st.counter == 0 and st.has_packet()
        ]
        phy = self.phy

        if not transmitters:
            kind = SlotKind.IDLE
            packets = 0
            duration = phy.sigma_us
            tx_ids: tuple[int, ...] = ()
        elif len(transmitters) == 1:
            st = transmitters[0]
            packets = st.packets_ready()
            if self.error_rate > 0.0 and self.channel_rng.random() < self.error_rate:
                kind = SlotKind.ERROR
                duration = phy.t_collision
                packets = 0
            else:
                kind = SlotKind.SUCCESS
                duration = phy.success_duration(packets)
            tx_ids = (st.sid,)
        else:
            kind = SlotKind.COLLISION
            packets = 0
            duration = phy.t_collision
            tx_ids = tuple(st.sid for st in transmitters)

        now = self.clock_us + duration
        if kind == SlotKind.SUCCESS:
            transmitters[0].deliver(packets, now)

        if self.record_trace:
            tr = self.trace
            tr.kinds.append(int(kind))
            tr.durations.append(duration)
            tr.packets.append(packets if kind == SlotKind.SUCCESS else 0)
            if kind in (SlotKind.SUCCESS, SlotKind.ERROR):
                tr.tx_station.append(tx_ids[0])
                tr.coll_sizes.append(0)
            elif kind == SlotKind.COLLISION:
                tr.tx_station.append(-1)
                tr.coll_sizes.append(len(tx_ids))
                tr.colliders[self.slot_index] = tx_ids
            else:
                tr.tx_station.append(-1)
                tr.coll_sizes.append(0)

        tx_set = set(tx_ids)
        success = kind == SlotKind.SUCCESS
        for st in self.stations:
            st.end_of_slot(kind, st.sid in tx_set, success, now, self.events)
            if not st.saturated and st.lambda_pps > 0.0:
                st.pull_arrivals(now)

        self.clock_us = now
        self.slot_index += 1
        return SlotOutcome(kind, tx_ids, packets, duration)

    def run_slots(self, n_slots: int) -> None:
        for _ in range(n_slots):
            self.step()

    def run_seconds(self, seconds: float) -> None:
        target = seconds * 1e6
        while self.clock_us < target:
            self.step()
