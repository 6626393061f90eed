"""Exact absorbing-chain analysis of stay-or-jump slot reselection.

Saturated stations on a common schedule of ``C`` slots either hold a slot
they won or, after colliding, keep it with probability ``gamma`` and
otherwise jump uniformly onto one of the slots that were idle in the same
schedule.  Grouping stations by the multiset of collision-slot occupancies
yields a finite Markov chain: a start state (all stations picking uniformly),
one state per occupancy multiset, and an absorbing state for collision-free
schedules.  Because jumpers can only land on previously idle slots, the
number of colliding stations never increases, so the transition matrix is
block upper triangular and its subdominant eigenvalue is the largest
dominant eigenvalue over the diagonal blocks.

Two independent routes compute the block entries: a closed-form sum over
which collision slots keep some of their occupants (``transition_prob_formula``)
and an exact enumeration of all joint stay/jump outcomes
(``transition_prob_exact`` / ``transition_distribution``).  The chain is
assembled from both so that row-stochasticity cross-checks them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb, factorial

import numpy as np

#: Largest supported number of stations; bounds the state-space enumeration.
MAX_STATIONS = 20


@dataclass(frozen=True)
class CollisionState:
    """Multiset of collision-slot occupancies, stored sorted ascending.

    Every part is at least 2 (slots holding zero or one station are not
    collision slots).  Equality is structural, so states index dicts safely.
    """

    parts: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.parts:
            raise ValueError("a collision state has at least one collision slot")
        if any(p < 2 for p in self.parts):
            raise ValueError("collision-slot occupancies are at least 2")
        if any(a > b for a, b in zip(self.parts, self.parts[1:])):
            raise ValueError("parts must be sorted ascending")

    @property
    def colliding_stations(self) -> int:
        return sum(self.parts)

    @property
    def collision_slots(self) -> int:
        return len(self.parts)

    def idle_slots(self, schedule_len: int, n_stations: int) -> int:
        """Idle slots left in a schedule containing this collision pattern."""
        n_idle = (
            schedule_len - n_stations + self.colliding_stations - self.collision_slots
        )
        if n_idle < 0:
            raise ValueError(
                f"state {self.parts} impossible for C={schedule_len}, N={n_stations}"
            )
        return n_idle

    def __repr__(self) -> str:  # compact in test output
        return f"S{self.parts}"


def _partitions_min2(total: int, smallest: int = 2):
    """Yield ascending partitions of ``total`` into parts of size >= 2."""
    if total == 0:
        yield ()
        return
    for first in range(smallest, total + 1):
        if total - first == 1:
            continue
        for rest in _partitions_min2(total - first, first):
            yield (first,) + rest


def collision_states_for(n_colliding: int) -> list[CollisionState]:
    """All collision states with exactly ``n_colliding`` colliding stations."""
    if n_colliding < 2:
        return []
    return [CollisionState(p) for p in sorted(_partitions_min2(n_colliding))]


def enumerate_states(n_stations: int) -> list[CollisionState]:
    """All collision states reachable with ``n_stations`` stations.

    Empty for fewer than two stations.
    """
    states: list[CollisionState] = []
    for k in range(2, n_stations + 1):
        states.extend(collision_states_for(k))
    return states


def _validate_context(state: CollisionState, schedule_len: int, n_stations: int):
    if state.colliding_stations > n_stations:
        raise ValueError(
            f"state {state.parts} has more colliding stations than N={n_stations}"
        )
    if n_stations > schedule_len:
        raise ValueError("analysis requires N <= C")
    state.idle_slots(schedule_len, n_stations)


def _falling(n: int, k: int) -> int:
    """Falling factorial n! / (n - k)!."""
    out = 1
    for i in range(k):
        out *= n - i
    return out


def _multiset_perms(parts: tuple[int, ...]) -> int:
    """Permutations of the sequence that leave the multiset unchanged."""
    out = 1
    for v in set(parts):
        out *= factorial(parts.count(v))
    return out


@lru_cache(maxsize=None)
def _stay_outcomes(parts: tuple[int, ...]) -> tuple:
    """Joint distribution skeleton of how many occupants stay per collision slot.

    Returns tuples ``(kept_parts, stay_total, weight)`` where ``kept_parts``
    are the slots still holding >= 2 stations, ``stay_total`` counts every
    staying station (including ones left alone, who become successful), and
    ``weight`` is the product of binomial coefficients for choosing who stays.
    The probability factors ``gamma**stay_total`` and the jump terms are
    applied by the caller.
    """
    acc: dict[tuple[tuple[int, ...], int], int] = {((), 0): 1}
    for occupancy in parts:
        nxt: dict[tuple[tuple[int, ...], int], int] = {}
        for (kept, stay), w in acc.items():
            for stays_here in range(occupancy + 1):
                w2 = w * comb(occupancy, stays_here)
                kept2 = (
                    tuple(sorted(kept + (stays_here,))) if stays_here >= 2 else kept
                )
                key = (kept2, stay + stays_here)
                nxt[key] = nxt.get(key, 0) + w2
        acc = nxt
    return tuple((kept, stay, w) for (kept, stay), w in acc.items())


def _bounded_partitions(total: int, max_parts: int, smallest: int = 1):
    """Ascending partitions of ``total`` into at most ``max_parts`` parts."""
    if total == 0:
        yield ()
        return
    if max_parts == 0:
        return
    for first in range(smallest, total + 1):
        for rest in _bounded_partitions(total - first, max_parts - 1, first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _jump_outcomes(movers: int, n_idle: int) -> tuple:
    """Distribution of the occupancy multiset built by uniform jumps.

    ``movers`` stations each pick one of ``n_idle`` labelled slots uniformly.
    Returns tuples ``(collision_parts, probability)`` keyed by the multiset of
    resulting occupancies of size >= 2 (slots that end with a single jumper
    become successful and drop out).
    """
    if movers == 0:
        return (((), 1.0),)
    if n_idle == 0:
        raise ValueError("jumping stations need at least one idle slot")
    acc: dict[tuple[int, ...], float] = {}
    denom = float(n_idle) ** movers
    for lam in _bounded_partitions(movers, n_idle):
        station_ways = factorial(movers)
        for c in lam:
            station_ways //= factorial(c)
        slot_ways = _falling(n_idle, len(lam)) // _multiset_perms(lam)
        prob = station_ways * slot_ways / denom
        key = tuple(p for p in lam if p >= 2)
        acc[key] = acc.get(key, 0.0) + prob
    return tuple(acc.items())


@lru_cache(maxsize=None)
def _transition_coeffs(
    parts: tuple[int, ...], n_idle: int
) -> tuple[tuple[tuple[int, ...], tuple[tuple[int, float], ...]], ...]:
    """gamma-free transition coefficients out of a collision pattern.

    For each reachable next pattern (``()`` meaning absorption) returns pairs
    ``(stay_total, coefficient)`` such that the transition probability is
    ``sum(coeff * gamma**stay * (1 - gamma)**(movers) )`` with
    ``movers = colliding - stay``.  Depends only on the occupancy multiset and
    the number of idle slots, so it is shared across every (C, N) pair with
    the same geometry.
    """
    acc: dict[tuple[int, ...], dict[int, float]] = {}
    for kept, stay, w in _stay_outcomes(parts):
        movers = sum(parts) - stay
        for jump_parts, jump_prob in _jump_outcomes(movers, n_idle):
            nxt = tuple(sorted(kept + jump_parts))
            per_b = acc.setdefault(nxt, {})
            per_b[stay] = per_b.get(stay, 0.0) + w * jump_prob
    return tuple(
        (nxt, tuple(sorted(per_b.items()))) for nxt, per_b in sorted(acc.items())
    )


def transition_distribution(
    state: CollisionState, schedule_len: int, n_stations: int, gamma: float
) -> tuple[dict[CollisionState, float], float]:
    """Exact next-schedule distribution out of ``state``.

    Enumerates every joint outcome of the per-station stay/jump draws,
    grouped by sufficient statistics (how many stay in each collision slot,
    how the jumpers spread over the idle slots).  Returns a dict over next
    collision states plus the probability of absorbing into a collision-free
    schedule.
    """
    _validate_context(state, schedule_len, n_stations)
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must be in (0, 1)")
    n_idle = state.idle_slots(schedule_len, n_stations)
    n_colliding = state.colliding_stations
    dist: dict[CollisionState, float] = {}
    absorbed = 0.0
    for nxt, coeffs in _transition_coeffs(state.parts, n_idle):
        prob = 0.0
        for stay, coeff in coeffs:
            prob += coeff * gamma**stay * (1.0 - gamma) ** (n_colliding - stay)
        if nxt:
            dist[CollisionState(nxt)] = prob
        else:
            absorbed = prob
    return dist, absorbed


def transition_prob_exact(
    from_state: CollisionState,
    to_state: CollisionState,
    schedule_len: int,
    n_stations: int,
    gamma: float,
) -> float:
    """Exact transition probability via full outcome enumeration."""
    dist, _ = transition_distribution(from_state, schedule_len, n_stations, gamma)
    return dist.get(to_state, 0.0)


@lru_cache(maxsize=None)
def _formula_coeffs(
    k_parts: tuple[int, ...], l_parts: tuple[int, ...], n_idle: int
) -> tuple[tuple[int, float], ...]:
    """gamma-free coefficients of the closed-form route.

    The closed form sums over subsets of current collision slots that retain
    occupants and injective assignments of those slots onto target parts;
    grouping terms by the total retained count turns it into the polynomial
    ``sum(coeff * gamma**stay * (1 - gamma)**(movers))``.
    """
    sym = _multiset_perms(l_parts)
    acc: dict[int, float] = {}
    for r in range(len(k_parts) + 1):
        for omega in itertools.combinations(range(len(k_parts)), r):
            for image in itertools.permutations(range(len(l_parts)), r):
                if any(l_parts[t] > k_parts[j] for j, t in zip(omega, image)):
                    continue
                stay_weight = 1
                stay_count = 0
                for j, t in zip(omega, image):
                    stay_weight *= comb(k_parts[j], l_parts[t])
                    stay_count += l_parts[t]
                fresh = [l_parts[t] for t in range(len(l_parts)) if t not in image]
                movers = sum(fresh)
                if movers > 0 and n_idle == 0:
                    continue
                jump_ways = factorial(movers)
                for c in fresh:
                    jump_ways //= factorial(c)
                placement = _falling(n_idle, len(fresh))
                coeff = stay_weight * jump_ways * placement / sym
                if movers:
                    coeff /= n_idle**movers
                acc[stay_count] = acc.get(stay_count, 0.0) + coeff
    return tuple(sorted(acc.items()))


def transition_prob_formula(
    from_state: CollisionState,
    to_state: CollisionState,
    schedule_len: int,
    n_stations: int,
    gamma: float,
) -> float:
    """Closed-form transition probability inside a same-size diagonal block.

    Sums over the subsets of current collision slots that retain some of
    their occupants and over the injective assignments of retained slots to
    parts of the target state; the remaining target parts are built by
    jumpers landing on previously idle slots.  Only defined when both states
    have the same number of colliding stations.
    """
    if from_state.colliding_stations != to_state.colliding_stations:
        raise ValueError("states belong to different diagonal blocks")
    _validate_context(from_state, schedule_len, n_stations)
    _validate_context(to_state, schedule_len, n_stations)
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must be in (0, 1)")
    n_idle = from_state.idle_slots(schedule_len, n_stations)
    n_colliding = from_state.colliding_stations
    total = 0.0
    for stay, coeff in _formula_coeffs(from_state.parts, to_state.parts, n_idle):
        total += coeff * gamma**stay * (1.0 - gamma) ** (n_colliding - stay)
    return total


def initial_probs(
    schedule_len: int, n_stations: int
) -> tuple[dict[CollisionState, float], float]:
    """Distribution over collision states when stations pick slots uniformly.

    Counts the slot assignments producing each occupancy multiset: choose and
    fill the singleton slots, then place the collision groups on ordered
    distinct slots (divided by the symmetry of equal group sizes) and split
    the colliding stations among them.  Also returns the probability that the
    uniform choice is already collision-free.
    """
    if n_stations < 1:
        raise ValueError("need at least one station")
    if n_stations > schedule_len:
        raise ValueError("analysis requires N <= C")
    denom = schedule_len**n_stations
    dist: dict[CollisionState, float] = {}
    for state in enumerate_states(n_stations):
        n_col = state.colliding_stations
        n_slots = state.collision_slots
        singles = n_stations - n_col
        ways = comb(schedule_len, singles) * _falling(n_stations, singles)
        ways *= _falling(schedule_len - singles, n_slots) // _multiset_perms(
            state.parts
        )
        split = factorial(n_col)
        for part in state.parts:
            split //= factorial(part)
        dist[state] = ways * split / denom
    absorbed = _falling(schedule_len, n_stations) / denom
    total = sum(dist.values()) + absorbed
    if abs(total - 1.0) > 1e-12:
        raise AssertionError(f"initial distribution sums to {total}")
    return dist, absorbed


@dataclass
class ChainModel:
    """Assembled absorbing chain for given (C, N, gamma).

    States are ordered start state first, then collision states grouped by
    decreasing number of colliding stations, then the absorbing state, which
    makes the transient part of the matrix block upper triangular.
    """

    schedule_len: int
    n_stations: int
    gamma: float
    states: tuple[CollisionState, ...]
    pi: np.ndarray
    block_ranges: dict[int, tuple[int, int]]

    @property
    def transient_size(self) -> int:
        return 1 + len(self.states)

    def block(self, n_colliding: int) -> np.ndarray:
        lo, hi = self.block_ranges[n_colliding]
        return self.pi[lo:hi, lo:hi]


def build_chain(schedule_len: int, n_stations: int, gamma: float) -> ChainModel:
    """Assemble the full transition matrix.

    Diagonal blocks come from the closed-form route, everything else from the
    exact enumerator; rows failing to sum to one within 1e-12 raise, which
    cross-validates the two routes on every build.
    """
    if n_stations > MAX_STATIONS:
        raise ValueError(f"state space too large beyond N={MAX_STATIONS}")
    if n_stations < 1:
        raise ValueError("need at least one station")
    if n_stations > schedule_len:
        raise ValueError("analysis requires N <= C")
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must be in (0, 1)")

    groups: list[list[CollisionState]] = []
    for k in range(n_stations, 1, -1):
        states_k = collision_states_for(k)
        if states_k:
            groups.append(states_k)
    states: tuple[CollisionState, ...] = tuple(s for g in groups for s in g)
    index = {s: i + 1 for i, s in enumerate(states)}  # row 0 is the start state
    size = len(states) + 2
    absorb = size - 1
    pi = np.zeros((size, size))

    start_dist, start_absorbed = initial_probs(schedule_len, n_stations)
    for state, prob in start_dist.items():
        pi[0, index[state]] = prob
    pi[0, absorb] = start_absorbed

    block_ranges: dict[int, tuple[int, int]] = {}
    offset = 1
    for g in groups:
        block_ranges[g[0].colliding_stations] = (offset, offset + len(g))
        offset += len(g)

    for state in states:
        row = index[state]
        dist, absorbed = transition_distribution(
            state, schedule_len, n_stations, gamma
        )
        for nxt, prob in dist.items():
            if nxt.colliding_stations != state.colliding_stations:
                pi[row, index[nxt]] = prob
        pi[row, absorb] = absorbed
        for other in collision_states_for(state.colliding_stations):
            pi[row, index[other]] = transition_prob_formula(
                state, other, schedule_len, n_stations, gamma
            )

    pi[absorb, absorb] = 1.0

    sums = pi.sum(axis=1)
    worst = float(np.max(np.abs(sums - 1.0)))
    if worst > 1e-12:
        raise AssertionError(f"transition rows deviate from 1 by {worst:.3e}")
    return ChainModel(
        schedule_len=schedule_len,
        n_stations=n_stations,
        gamma=gamma,
        states=states,
        pi=pi,
        block_ranges=block_ranges,
    )


def _dominant_eigenvalue(block: np.ndarray, tol: float = 1e-12, cap: int = 10**6):
    """Largest eigenvalue of a nonnegative matrix by power iteration.

    A strictly positive start vector has nonzero overlap with the dominant
    eigenvector of a nonnegative matrix; a dense solve is the fallback for
    the (unobserved) pathological cases.
    """
    n = block.shape[0]
    if n == 1:
        return float(block[0, 0])
    v = np.full(n, 1.0 / n)
    lam = 0.0
    for _ in range(cap):
        w = block @ v
        s = float(w.sum())
        if s == 0.0:
            return 0.0
        v = w / s
        lam = s
        if float(np.max(np.abs(block @ v - lam * v))) <= tol * max(1.0, lam):
            return lam
    return float(np.max(np.abs(np.linalg.eigvals(block))))


def second_eigenvalue(chain: ChainModel) -> tuple[float, int]:
    """Subdominant eigenvalue of the chain and the block size attaining it.

    The block-triangular structure factors the characteristic polynomial, so
    the subdominant eigenvalue is the maximum of the diagonal blocks'
    dominant eigenvalues.
    """
    best = 0.0
    best_k = 0
    for k, (lo, hi) in chain.block_ranges.items():
        lam = _dominant_eigenvalue(chain.pi[lo:hi, lo:hi])
        if lam > best:
            best, best_k = lam, k
    return best, best_k


def lambda_star_closed(schedule_len: int, n_stations: int, gamma: float) -> float:
    """Closed form of the subdominant eigenvalue, exact when the two-station
    block dominates (observed throughout the tested grid)."""
    if n_stations > schedule_len:
        raise ValueError("analysis requires N <= C")
    return gamma**2 + (1.0 - gamma) ** 2 / (schedule_len - n_stations + 1)


def gamma_opt(schedule_len: int, n_stations: int) -> float:
    """Stay probability minimising the closed-form subdominant eigenvalue."""
    if n_stations > schedule_len:
        raise ValueError("analysis requires N <= C")
    return 1.0 / (schedule_len - n_stations + 2)


def mean_convergence(chain: ChainModel) -> float:
    """Expected schedules played through the first collision-free one.

    Standard absorbing-chain count of expected transient visits starting
    from the uniform start state; the very first schedule counts as one.  A
    single station collides with nobody, so no schedules are spent converging.
    """
    if chain.n_stations == 1:
        return 0.0
    t = chain.transient_size
    q = chain.pi[:t, :t]
    visits = np.linalg.solve(np.eye(t) - q, np.ones(t))
    return float(visits[0])


def lmac_bound(beta: float, schedule_len: int, n_stations: int):
    """Two-schedule convergence probability bound for the learning protocol.

    Returns ``K`` such that from any state the chance of reaching a
    collision-free schedule within two schedules is at least ``K``, plus the
    implied geometric tail ``n -> (1 - K)**n`` bounding the probability that
    convergence takes at least ``2 n`` schedules.  Very loose, but positive.
    """
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must be in (0, 1)")
    if schedule_len < 2:
        raise ValueError("need at least 2 slots")
    if not 1 <= n_stations <= schedule_len:
        raise ValueError("need 1 <= N <= C")
    c1 = schedule_len - 1
    k = ((1.0 - beta) / c1) ** n_stations * (beta * (1.0 - beta) / c1) ** n_stations
    if k <= 0.0:
        raise AssertionError("bound must be positive")

    def tail(n: int) -> float:
        return (1.0 - k) ** n

    return k, tail
