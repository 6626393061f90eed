"""Builds and runs simulations from validated configs.

Owns seed derivation (one stream per station, one for the channel), horizon
handling, mid-run station joins, and the packaging of results for the
metrics layer.  Given the same config and replication index the produced
trace is identical byte for byte.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass

import numpy as np

from .adaptation import AlmacAdapter, AlzcAdapter, FTable
from .config import SimConfig, derive_seed
from .engine import EventRecord, Simulator, Station, Trace, _RollingWindow
from .phy import PhyParams, SlotKind
from .protocols import init_protocol


@dataclass
class StationStats:
    sid: int
    protocol: str
    delivered: int
    dropped: int
    lost_arrivals: int
    delays_us: list[float]
    final_len: int
    final_slot: int | None


@dataclass
class RunResult:
    config: SimConfig
    rep_index: int
    run_seed: int
    trace: Trace
    events: list[EventRecord]
    stations: list[StationStats]
    sim_time_us: float
    converged_slot: int | None
    converged_time_us: float | None
    join_slot: int | None
    join_time_us: float | None
    reconverged_slot: int | None
    reconverged_time_us: float | None


def default_f_table() -> FTable:
    """Packaged convergence-horizon table for base length 16."""
    ref = importlib.resources.files("macsim.data").joinpath("ftable_b16.csv")
    with importlib.resources.as_file(ref) as path:
        return FTable.load_csv(path)


def _make_phy(cfg: SimConfig) -> PhyParams:
    return PhyParams(payload_bytes=cfg.payload_bytes)


def _make_station(
    cfg: SimConfig,
    sid: int,
    run_seed: int,
    protocol_kind: str,
    f_table: FTable | None,
    start_time_us: float = 0.0,
) -> Station:
    rng = np.random.default_rng(np.random.SeedSequence(derive_seed(run_seed, sid)))
    adapter = None
    txop_base = None
    schedule_len = cfg.c
    if cfg.adaptation != "none" and protocol_kind != "dcf":
        schedule_len = cfg.b
        txop_base = cfg.b
        max_len = cfg.b * 2**cfg.c_max_exp
        if cfg.adaptation == "alzc":
            adapter = AlzcAdapter(cfg.b, max_len=max_len)
        else:
            assert f_table is not None
            adapter = AlmacAdapter(
                cfg.b, f_table, probe_period=cfg.probe_period, max_len=max_len
            )
    protocol = init_protocol(
        protocol_kind, schedule_len, rng, beta=cfg.beta, gamma=cfg.gamma
    )
    return Station(
        sid,
        protocol,
        rng,
        saturated=cfg.traffic == "saturated",
        lambda_pps=cfg.lambda_pps,
        buffer_packets=cfg.buffer,
        adapter=adapter,
        txop_base=txop_base,
        start_time_us=start_time_us,
    )


def _horizon_slots(cfg: SimConfig) -> int | None:
    if cfg.horizon_slots is not None:
        return cfg.horizon_slots
    if cfg.horizon_schedules is not None:
        return cfg.horizon_schedules * cfg.schedule_len
    return None


def run_simulation(
    cfg: SimConfig,
    rep_index: int = 0,
    f_table: FTable | None = None,
    stop_after_converged_schedules: int | None = None,
) -> RunResult:
    """One seeded replication of the configured experiment.

    With ``join_n`` set, the first ``n`` stations run until they reach a
    collision-free schedule (or the configured join time passes) and the
    joiners then enter together at the next slot.  With
    ``stop_after_converged_schedules`` the run ends that many schedules after
    convergence instead of at the full horizon, which the fixed-length
    throughput scenarios use to skip dead air.
    """
    if cfg.adaptation == "almac" and f_table is None:
        f_table = FTable.load_csv(cfg.f_table) if cfg.f_table else default_f_table()

    run_seed = derive_seed(cfg.seed, rep_index)
    phy = _make_phy(cfg)
    channel_rng = (
        np.random.default_rng(np.random.SeedSequence(derive_seed(run_seed, "channel")))
        if cfg.error_rate > 0.0
        else None
    )

    kinds = [cfg.protocol] * cfg.n
    if cfg.coexist_k > 0:
        assert cfg.coexist_protocol is not None
        kinds = [cfg.coexist_protocol] * cfg.coexist_k + kinds[cfg.coexist_k :]

    stations = [
        _make_station(cfg, sid, run_seed, kinds[sid], f_table) for sid in range(cfg.n)
    ]
    sim = Simulator(
        stations, phy, error_rate=cfg.error_rate, channel_rng=channel_rng
    )

    horizon_slots = _horizon_slots(cfg)
    horizon_us = (
        cfg.horizon_seconds * 1e6 if cfg.horizon_seconds is not None else None
    )
    if horizon_slots is None and horizon_us is None:
        raise ValueError("config sets no horizon (slots, schedules or seconds)")

    def reached_horizon() -> bool:
        if horizon_slots is not None and sim.slot_index >= horizon_slots:
            return True
        if horizon_us is not None and sim.clock_us >= horizon_us:
            return True
        return False

    schedule_len = cfg.schedule_len
    watch = _RollingWindow(schedule_len)
    converged_slot: int | None = None
    converged_time: float | None = None
    join_slot: int | None = None
    join_time: float | None = None
    reconverged_slot: int | None = None
    reconverged_time: float | None = None

    n_active = cfg.n
    join_pending = cfg.join_n > 0
    join_at_us = None
    if join_pending and cfg.join_when != "converged":
        join_at_us = float(cfg.join_when) * 1e6

    extra_slots_left: int | None = None
    while not reached_horizon():
        outcome = sim.step()
        watch.push(outcome.kind)

        if converged_slot is None and watch.collision_free_schedule(n_active):
            converged_slot = sim.slot_index - schedule_len
            converged_time = sim.clock_us - sum(
                sim.trace.durations[converged_slot : sim.slot_index]
            )
            if stop_after_converged_schedules is not None and not join_pending:
                extra_slots_left = stop_after_converged_schedules * schedule_len

        if join_pending:
            do_join = False
            if join_at_us is not None:
                do_join = sim.clock_us >= join_at_us
            else:
                do_join = converged_slot is not None
            if do_join:
                join_pending = False
                join_slot = sim.slot_index
                join_time = sim.clock_us
                for k in range(cfg.join_n):
                    sid = cfg.n + k
                    sim.add_station(
                        _make_station(
                            cfg, sid, run_seed, cfg.protocol, f_table, sim.clock_us
                        )
                    )
                n_active += cfg.join_n
                watch = _RollingWindow(schedule_len)

        if (
            join_slot is not None
            and reconverged_slot is None
            and watch.collision_free_schedule(n_active)
        ):
            reconverged_slot = sim.slot_index - schedule_len
            reconverged_time = sim.clock_us - sum(
                sim.trace.durations[reconverged_slot : sim.slot_index]
            )
            if stop_after_converged_schedules is not None:
                extra_slots_left = stop_after_converged_schedules * schedule_len

        if extra_slots_left is not None:
            extra_slots_left -= 1
            if extra_slots_left <= 0:
                break

    station_stats = [
        StationStats(
            sid=st.sid,
            protocol=st.protocol.kind,
            delivered=st.delivered,
            dropped=st.dropped,
            lost_arrivals=st.lost_arrivals,
            delays_us=st.delays_us,
            final_len=st.window_len if not st.is_dcf else 0,
            final_slot=None if st.is_dcf else st.protocol.current_slot(),
        )
        for st in sim.stations
    ]
    return RunResult(
        config=cfg,
        rep_index=rep_index,
        run_seed=run_seed,
        trace=sim.trace,
        events=sim.events,
        stations=station_stats,
        sim_time_us=sim.clock_us,
        converged_slot=converged_slot,
        converged_time_us=converged_time,
        join_slot=join_slot,
        join_time_us=join_time,
        reconverged_slot=reconverged_slot,
        reconverged_time_us=reconverged_time,
    )
