"""Slot-selection rules: hand-checked updates, sampling contracts, edge cases."""

import numpy as np
import pytest

from macsim.protocols import (
    Dcf,
    Lbeb,
    Lmac,
    Lzc,
    Zc,
    backoff_from_slots,
    init_protocol,
    sample_slot,
    updated_probabilities,
)


def rng(seed=1):
    return np.random.default_rng(seed)


# --- backoff arithmetic ----------------------------------------------------


def test_backoff_from_slots_values():
    assert backoff_from_slots(3, 5, 8) == 10
    assert backoff_from_slots(5, 5, 8) == 8  # keeping the slot costs one schedule
    assert backoff_from_slots(16, 1, 16) == 1


def test_backoff_from_slots_range():
    r = rng(2)
    for _ in range(500):
        c = int(r.integers(1, 40))
        s0 = int(r.integers(1, c + 1))
        s1 = int(r.integers(1, c + 1))
        assert 1 <= backoff_from_slots(s0, s1, c) <= 2 * c - 1


def test_backoff_from_slots_rejects_out_of_range():
    with pytest.raises(ValueError):
        backoff_from_slots(0, 1, 8)
    with pytest.raises(ValueError):
        backoff_from_slots(1, 9, 8)


# --- learning update -------------------------------------------------------


def test_failure_update_hand_case():
    p = np.full(4, 0.25)
    out = updated_probabilities(p, 2, 0.5, success=False)
    assert out[1] == pytest.approx(1 / 8, abs=1e-12)
    for j in (0, 2, 3):
        assert out[j] == pytest.approx(7 / 24, abs=1e-12)
    assert out.sum() == pytest.approx(1.0, abs=1e-12)


def test_failure_update_hand_case_c16():
    p = np.full(16, 1 / 16)
    out = updated_probabilities(p, 5, 0.95, success=False)
    assert out[4] == pytest.approx(0.059375, abs=1e-9)
    others = np.delete(out, 4)
    assert np.allclose(others, 0.95 / 16 + 0.05 / 15, atol=1e-9)


def test_success_update_is_point_mass():
    p = np.array([0.1, 0.4, 0.3, 0.2])
    out = updated_probabilities(p, 2, 0.5, success=True)
    assert list(out) == [0.0, 1.0, 0.0, 0.0]


def test_stickiness_geometric_decay():
    # k failures on one slot from a point mass leave exactly beta**k behind
    beta = 0.95
    p = np.zeros(16)
    p[4] = 1.0
    expect = 1.0
    for _ in range(20):
        p = updated_probabilities(p, 5, beta, success=False)
        expect *= beta
        assert p[4] == pytest.approx(expect, abs=1e-12)


def test_probability_sum_preserved_over_long_random_sequences():
    r = rng(3)
    p = np.full(16, 1 / 16)
    for _ in range(10_000):
        slot = int(r.integers(1, 17))
        p = updated_probabilities(p, slot, 0.9, success=bool(r.integers(0, 2)))
        if p[slot - 1] == 1.0:  # escape the absorbing point mass sometimes
            p = updated_probabilities(p, slot, 0.9, success=False)
    assert abs(p.sum() - 1.0) <= 1e-9
    assert (p >= 0).all()


def test_failure_update_monotone():
    # the failed slot always loses mass; another slot gains exactly when it
    # held less than the uniform share 1/(C-1) of the redistribution
    r = rng(4)
    for _ in range(200):
        p = r.dirichlet(np.ones(8))
        slot = int(r.integers(1, 9))
        if p[slot - 1] <= 0:
            continue
        out = updated_probabilities(p, slot, 0.7, success=False)
        assert out[slot - 1] < p[slot - 1]
        for j in range(8):
            if j == slot - 1:
                continue
            if p[j] < 1 / 7 - 1e-12:
                assert out[j] > p[j]
            elif p[j] > 1 / 7 + 1e-12:
                assert out[j] < p[j]


def test_sample_slot_point_mass():
    p = np.zeros(16)
    p[2] = 1.0
    r = rng(6)
    assert {sample_slot(p, r) for _ in range(50)} == {3}


def _freq_check(counts, n_draws, expected_p):
    for slot, p in expected_p.items():
        sigma = np.sqrt(p * (1 - p) / n_draws)
        assert abs(counts.get(slot, 0) / n_draws - p) <= 3.5 * sigma + 1e-12


def test_sample_slot_uniform_frequencies():
    p = np.full(16, 1 / 16)
    r = rng(8)
    n = 100_000
    counts: dict[int, int] = {}
    for _ in range(n):
        s = sample_slot(p, r)
        counts[s] = counts.get(s, 0) + 1
    _freq_check(counts, n, {s: 1 / 16 for s in range(1, 17)})


def test_sample_slot_skewed_frequencies():
    p = np.array([0.9, 0.1])
    r = rng(10)
    n = 100_000
    counts: dict[int, int] = {}
    for _ in range(n):
        s = sample_slot(p, r)
        counts[s] = counts.get(s, 0) + 1
    _freq_check(counts, n, {1: 0.9, 2: 0.1})


# --- stay-or-jump rules ----------------------------------------------------


def test_lzc_success_keeps_slot():
    proto = Lzc(16, 0.5, rng(11))
    s = proto.current_slot()
    assert proto.on_schedule_end(True, [1, 2, 3], rng(12)) == s


def test_lzc_failure_distribution_exact_and_empirical():
    proto = Lzc(16, 0.5, rng(13))
    proto.slot = 2
    dist = proto.failure_distribution([4, 7])
    assert dist == {2: 0.5, 4: 0.25, 7: 0.25}
    r = rng(14)
    n = 100_000
    counts: dict[int, int] = {}
    for _ in range(n):
        proto.slot = 2
        s = proto.on_schedule_end(False, [4, 7], r)
        counts[s] = counts.get(s, 0) + 1
    _freq_check(counts, n, dist)


def test_lzc_failure_no_idle_stays():
    proto = Lzc(16, 0.5, rng(15))
    proto.slot = 9
    assert proto.on_schedule_end(False, [], rng(16)) == 9
    assert proto.failure_distribution([]) == {9: 1.0}


def test_zc_failure_uniform_over_candidates():
    proto = Zc(16, rng(17))
    proto.slot = 5
    dist = proto.failure_distribution([1, 2, 3])
    assert dist == pytest.approx({5: 0.25, 1: 0.25, 2: 0.25, 3: 0.25})
    proto2 = Zc(16, rng(18))
    proto2.slot = 4
    assert proto2.failure_distribution([]) == {4: 1.0}
    assert proto2.on_schedule_end(True, [], rng(19)) == 4


def test_zc_equals_lzc_with_matched_stay_probability():
    # distribution-level equivalence, enumerated over idle-set geometries
    for n_idle in range(1, 9):
        idle = list(range(2, 2 + n_idle))
        zc = Zc(16, rng(20))
        zc.slot = 1
        lzc = Lzc(16, 1.0 / (n_idle + 1), rng(21))
        lzc.slot = 1
        dz = zc.failure_distribution(idle)
        dl = lzc.failure_distribution(idle)
        assert set(dz) == set(dl)
        for k in dz:
            assert dz[k] == pytest.approx(dl[k], abs=1e-12)


def test_lbeb_rules():
    proto = Lbeb(16, rng(22))
    s = proto.current_slot()
    assert proto.on_schedule_end(True, [], rng(23)) == s
    r = rng(24)
    n = 100_000
    counts: dict[int, int] = {}
    for _ in range(n):
        s2 = proto.on_schedule_end(False, [], r)
        counts[s2] = counts.get(s2, 0) + 1
    _freq_check(counts, n, {s: 1 / 16 for s in range(1, 17)})


# --- DCF -------------------------------------------------------------------


def test_dcf_window_evolution():
    r = rng(25)
    dcf = Dcf(r)
    assert dcf.cw == 32
    # seven retries: doubling up to the cap, then the eighth drops and resets
    expect = [64, 128, 256, 512, 1024, 1024, 1024]
    for want in expect:
        _, dropped = dcf.on_transmission(False, r)
        assert dcf.cw == want and not dropped
    _, dropped = dcf.on_transmission(False, r)
    assert dropped and dcf.cw == 32
    dcf.on_transmission(False, r)
    assert dcf.cw == 64
    dcf.on_transmission(True, r)
    assert dcf.cw == 32


def test_dcf_retry_limit_drops():
    r = rng(26)
    dcf = Dcf(r)
    dropped = False
    for _ in range(7):
        _, dropped = dcf.on_transmission(False, r)
        assert not dropped
    _, dropped = dcf.on_transmission(False, r)
    assert dropped
    assert dcf.cw == 32 and dcf.retries == 0


def test_dcf_counter_in_window():
    r = rng(27)
    dcf = Dcf(r)
    for _ in range(200):
        counter, _ = dcf.on_transmission(bool(r.integers(0, 2)), r)
        assert 0 <= counter < dcf.cw


# --- factory ---------------------------------------------------------------


def test_init_protocol_defaults_and_validation():
    proto = init_protocol("lmac", 16, rng(28))
    assert isinstance(proto, Lmac)
    assert proto.beta == 0.95
    assert np.allclose(proto.probabilities, 1 / 16)
    dcf = init_protocol("dcf", None, rng(29))
    assert dcf.cw == 32
    with pytest.raises(ValueError):
        init_protocol("lzc", 16, rng(30))  # missing gamma
    with pytest.raises(ValueError):
        init_protocol("lzc", 16, rng(31), gamma=1.0)
    with pytest.raises(ValueError):
        init_protocol("lmac", 16, rng(32), beta=0.0)
    with pytest.raises(ValueError):
        init_protocol("nope", 16, rng(33))


def test_initial_slot_uniform():
    n = 50_000
    counts: dict[int, int] = {}
    r = rng(34)
    for _ in range(n):
        s = Lzc(16, 0.5, r).current_slot()
        counts[s] = counts.get(s, 0) + 1
    _freq_check(counts, n, {s: 1 / 16 for s in range(1, 17)})


def test_resize_remaps_slot():
    proto = Lzc(16, 0.5, rng(35))
    proto.slot = 13
    proto.resize(8)
    assert proto.schedule_len == 8
    assert proto.slot == 5  # 13 -> ((13-1) mod 8) + 1
    lmac = Lmac(16, 0.9, rng(36))
    lmac.slot = 3
    lmac.p = np.zeros(16)
    lmac.p[2] = 1.0
    lmac.resize(32)
    assert lmac.slot == 3
    assert np.allclose(lmac.probabilities, 1 / 32)
