"""The CHSH coordination game: correlation boxes, score formulas,
no-signaling checks, strategy evaluation, and seeded Monte Carlo rounds.

A round is won when the players' output bits satisfy ``q xor r == x and y``
for the uniformly drawn input bits ``(x, y)``; a win scores +1 and a loss -1.
Correlation boxes are 4-index tables ``P[q, r, x, y]`` normalized per input
pair.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Iterator, Union

import numpy as np

from .linalg import tensor
from .tsirelson import QuantumSetup

BOX_SUM_TOL = 1e-10
NO_SIGNALING_TOL = 1e-9
_ENTRY_SLACK = 1e-12

_UINT64_MASK = (1 << 64) - 1

#: Rounds per Monte Carlo chunk.  Chunk ``c`` draws from a substream keyed by
#: ``(seed, c)``, so output is identical however chunks are scheduled.
CHUNK_ROUNDS = 1 << 16


def _build_sign() -> np.ndarray:
    s = np.empty((2, 2, 2, 2))
    for q, r, x, y in product((0, 1), repeat=4):
        s[q, r, x, y] = 1.0 if (q ^ r) == (x & y) else -1.0
    return s


#: sign[q, r, x, y]: +1 on winning outcomes, -1 on losing ones.
_SIGN = _build_sign()

#: (-1)**(x*y) over the four input pairs.
_INPUT_SIGN = np.array([[1.0, 1.0], [1.0, -1.0]])

UNIFORM_INPUTS = np.full((2, 2), 0.25)


def as_correlation_box(box, name: str = "box") -> np.ndarray:
    """Validate a correlation box ``P[q, r, x, y]`` and return a cleaned copy."""
    a = np.asarray(box, dtype=float)
    if a.shape != (2, 2, 2, 2):
        raise ValueError(f"{name} must have shape (2, 2, 2, 2), got {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError(f"{name} contains non-finite entries")
    if a.min() < -_ENTRY_SLACK:
        raise ValueError(f"{name} has negative entries")
    sums = a.sum(axis=(0, 1))
    dev = float(np.max(np.abs(sums - 1.0)))
    if dev > BOX_SUM_TOL:
        raise ValueError(
            f"{name} must be normalized per input pair within {BOX_SUM_TOL:g} (deviation {dev:.3e})"
        )
    return np.clip(a, 0.0, None)


def as_input_distribution(inputs, name: str = "inputs") -> np.ndarray:
    """Validate a joint input distribution ``P[x, y]``."""
    a = np.asarray(inputs, dtype=float)
    if a.shape != (2, 2):
        raise ValueError(f"{name} must have shape (2, 2), got {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError(f"{name} contains non-finite entries")
    if a.min() < -_ENTRY_SLACK:
        raise ValueError(f"{name} has negative entries")
    total = float(a.sum())
    if abs(total - 1.0) > BOX_SUM_TOL:
        raise ValueError(f"{name} must sum to 1, got {total!r}")
    return np.clip(a, 0.0, None)


def ns_box(e: float) -> np.ndarray:
    """The one-parameter no-signaling box family.

    ``P(q, r | x, y) = (1 + sign * e) / 4`` with the win/loss sign; the
    parameter equals the expected score under uniform inputs.  ``e = 0`` is
    two fair coins, ``e = 1`` the box that wins every round.
    """
    e = float(e)
    if not -1.0 <= e <= 1.0:
        raise ValueError(f"e must lie in [-1, 1], got {e!r}")
    return (1.0 + _SIGN * e) / 4.0


def expected_score(box, inputs=None) -> float:
    """Expected score of a box: the win/loss-signed sum weighted by the inputs."""
    b = as_correlation_box(box)
    w = UNIFORM_INPUTS if inputs is None else as_input_distribution(inputs)
    return float(np.einsum("qrxy,xy->", _SIGN * b, w))


def score_from_loss_terms(box) -> float:
    """Uniform-input score computed from the losing probabilities alone.

    Uses normalization to eliminate one outcome: only ``P(0,1|x,y)`` and
    ``P(1,0|x,y)`` enter.  Must agree with :func:`expected_score` under
    uniform inputs.
    """
    b = as_correlation_box(box)
    loss = b[0, 1] + b[1, 0]
    return float(0.5 * (1.0 - np.sum(_INPUT_SIGN * loss)))


def score_from_correlators(box) -> float:
    """Uniform-input score as a quarter of the signed correlator sum."""
    b = as_correlation_box(box)
    corr = b[0, 0] - b[0, 1] - b[1, 0] + b[1, 1]
    return float(0.25 * np.sum(_INPUT_SIGN * corr))


def win_probability(score: float) -> float:
    """Win probability equivalent to an expected score: ``(score + 1) / 2``."""
    s = float(score)
    if not -1.0 - 1e-12 <= s <= 1.0 + 1e-12:
        raise ValueError(f"score must lie in [-1, 1], got {s!r}")
    return min(max((s + 1.0) / 2.0, 0.0), 1.0)


@dataclass(frozen=True)
class SignalingWitness:
    """Worst marginal dependence on the remote input found in a box."""

    side: str  # "alice" or "bob"
    outcome: int
    own_setting: int
    remote_setting_a: int
    remote_setting_b: int
    delta: float


def signaling_witness(box, tol: float = NO_SIGNALING_TOL) -> SignalingWitness | None:
    """The worst no-signaling violation in a box, or None if it passes.

    Alice's marginal must not move with Bob's setting and vice versa; the
    witness records the outcome, own setting, and the two remote settings
    whose marginals differ the most.
    """
    b = as_correlation_box(box)
    worst: SignalingWitness | None = None
    marg_a = b.sum(axis=1)  # [q, x, y]
    marg_b = b.sum(axis=0)  # [r, x, y]
    for out, own in product((0, 1), repeat=2):
        delta_a = abs(marg_a[out, own, 0] - marg_a[out, own, 1])
        if delta_a > tol and (worst is None or delta_a > worst.delta):
            worst = SignalingWitness("alice", out, own, 0, 1, float(delta_a))
        delta_b = abs(marg_b[out, 0, own] - marg_b[out, 1, own])
        if delta_b > tol and (worst is None or delta_b > worst.delta):
            worst = SignalingWitness("bob", out, own, 0, 1, float(delta_b))
    return worst


def is_no_signaling(box, tol: float = NO_SIGNALING_TOL) -> bool:
    """True iff each side's marginals depend only on that side's own setting."""
    return signaling_witness(box, tol) is None


# --------------------------------------------------------------------------
# Strategies
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Deterministic:
    """Fixed response pair: ``q_of_x[x]`` is Alice's bit, ``r_of_y[y]`` Bob's."""

    q_of_x: tuple[int, int]
    r_of_y: tuple[int, int]

    def __post_init__(self) -> None:
        for name, value in (("q_of_x", self.q_of_x), ("r_of_y", self.r_of_y)):
            bits = tuple(int(b) for b in value)
            if len(bits) != 2 or any(b not in (0, 1) for b in bits):
                raise ValueError(f"{name} must be two bits, got {value!r}")
            object.__setattr__(self, name, bits)


@dataclass(frozen=True)
class SharedRandomness:
    """Convex mixture of deterministic strategies steered by shared randomness."""

    mixture: tuple[tuple[float, Deterministic], ...]

    def __post_init__(self) -> None:
        terms = []
        for weight, strat in self.mixture:
            w = float(weight)
            if w < -_ENTRY_SLACK:
                raise ValueError(f"mixture weights must be nonnegative, got {w!r}")
            if not isinstance(strat, Deterministic):
                raise ValueError("mixture components must be Deterministic strategies")
            terms.append((max(w, 0.0), strat))
        total = sum(w for w, _ in terms)
        if abs(total - 1.0) > BOX_SUM_TOL:
            raise ValueError(f"mixture weights must sum to 1, got {total!r}")
        object.__setattr__(self, "mixture", tuple(terms))


@dataclass(frozen=True)
class NSBox:
    """No-signaling box strategy with score parameter ``e``."""

    e: float

    def __post_init__(self) -> None:
        e = float(self.e)
        if not -1.0 <= e <= 1.0:
            raise ValueError(f"e must lie in [-1, 1], got {e!r}")
        object.__setattr__(self, "e", e)


@dataclass(frozen=True)
class ExplicitBox:
    """A raw correlation-box table used directly as a strategy.

    Handy for auditing hand-written tables; the table must be a valid box but
    is not required to be no-signaling.
    """

    table: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "table", as_correlation_box(self.table, "table"))


Strategy = Union[Deterministic, SharedRandomness, NSBox, ExplicitBox, QuantumSetup]


def _deterministic_box(strategy: Deterministic) -> np.ndarray:
    box = np.zeros((2, 2, 2, 2))
    for x, y in product((0, 1), repeat=2):
        box[strategy.q_of_x[x], strategy.r_of_y[y], x, y] = 1.0
    return box


def _quantum_box(setup: QuantumSetup) -> np.ndarray:
    da, db = setup.dim_a, setup.dim_b
    a_sel = [np.array([k for k, b in enumerate(setup.alice_outcome) if b == bit]) for bit in (0, 1)]
    b_sel = [np.array([k for k, b in enumerate(setup.bob_outcome) if b == bit]) for bit in (0, 1)]
    box = np.zeros((2, 2, 2, 2))
    for x, a in enumerate((setup.a0, setup.a1)):
        for y, b in enumerate((setup.b0, setup.b1)):
            amplitudes = tensor(a, b) @ setup.state
            weight = (np.abs(amplitudes) ** 2).reshape(da, db)
            for q in (0, 1):
                for r in (0, 1):
                    if a_sel[q].size and b_sel[r].size:
                        box[q, r, x, y] = float(weight[np.ix_(a_sel[q], b_sel[r])].sum())
    return box


def box_of_strategy(strategy: Strategy) -> np.ndarray:
    """Exact correlation box of any strategy arm.

    Deterministic strategies give delta tables, mixtures their weighted
    average, the no-signaling family its closed form, and quantum setups the
    coarse-grained squared amplitudes of the locally evolved shared state.
    """
    if isinstance(strategy, Deterministic):
        return _deterministic_box(strategy)
    if isinstance(strategy, SharedRandomness):
        box = np.zeros((2, 2, 2, 2))
        for weight, det in strategy.mixture:
            box += weight * _deterministic_box(det)
        return as_correlation_box(box)
    if isinstance(strategy, NSBox):
        return ns_box(strategy.e)
    if isinstance(strategy, ExplicitBox):
        return strategy.table.copy()
    if isinstance(strategy, QuantumSetup):
        return as_correlation_box(_quantum_box(strategy))
    raise TypeError(f"not a strategy: {strategy!r}")


def enumerate_deterministic() -> tuple[float, list[Deterministic]]:
    """Exhaust all 16 deterministic strategies under uniform inputs.

    Returns the best score and every maximizer, in lexicographic order of
    ``(q_of_x, r_of_y)``.
    """
    best = -math.inf
    argmax: list[Deterministic] = []
    for q0, q1, r0, r1 in product((0, 1), repeat=4):
        q_of_x = (q0, q1)
        r_of_y = (r0, r1)
        total = 0
        for x in (0, 1):
            for y in (0, 1):
                total += 1 if (q_of_x[x] ^ r_of_y[y]) == x * y else -1
        score = total / 4.0
        if score > best:
            best = score
            argmax = [Deterministic(q_of_x, r_of_y)]
        elif score == best:
            argmax.append(Deterministic(q_of_x, r_of_y))
    return best, argmax


# --------------------------------------------------------------------------
# Monte Carlo rounds
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RoundRecord:
    """One played round; the win flag is pinned to the game rule."""

    round_index: int
    x: int
    y: int
    q: int
    r: int
    win: bool

    def __post_init__(self) -> None:
        if self.win != ((self.q ^ self.r) == self.x * self.y):
            raise ValueError("win flag inconsistent with q xor r == x*y")


@dataclass
class SimulationResult:
    """Column arrays for a seeded batch of rounds, plus summary statistics."""

    n: int
    seed: int
    x: np.ndarray
    y: np.ndarray
    q: np.ndarray
    r: np.ndarray
    win: np.ndarray

    @property
    def empirical_win_rate(self) -> float:
        return float(self.win.mean())

    @property
    def empirical_score(self) -> float:
        return 2.0 * self.empirical_win_rate - 1.0

    def record(self, i: int) -> RoundRecord:
        return RoundRecord(
            i, int(self.x[i]), int(self.y[i]), int(self.q[i]), int(self.r[i]), bool(self.win[i])
        )

    def records(self) -> Iterator[RoundRecord]:
        for i in range(self.n):
            yield self.record(i)

    def __len__(self) -> int:
        return self.n

    def __iter__(self) -> Iterator[RoundRecord]:
        return self.records()


def _outcome_cumulatives(box: np.ndarray) -> np.ndarray:
    """Per-input-pair cumulative outcome table; rows indexed by 2x+y, columns by 2q+r."""
    pmf = np.empty((4, 4))
    for x, y in product((0, 1), repeat=2):
        for q, r in product((0, 1), repeat=2):
            pmf[2 * x + y, 2 * q + r] = box[q, r, x, y]
    cum = np.cumsum(pmf, axis=1)
    cum[:, -1] = 1.0  # guard against round-off at the top of the CDF
    return cum


def _simulate_chunk(cum: np.ndarray, seed: int, chunk_index: int, count: int):
    rng = np.random.Generator(
        np.random.Philox(key=np.array([seed & _UINT64_MASK, chunk_index], dtype=np.uint64))
    )
    u = rng.random((2, count))
    setting = np.minimum((u[0] * 4.0).astype(np.int8), 3)
    outcome = (cum[setting] < u[1][:, None]).sum(axis=1).astype(np.int8)
    return setting >> 1, setting & 1, outcome >> 1, outcome & 1


def simulate_rounds(strategy: Strategy, n: int, seed: int, workers: int = 1) -> SimulationResult:
    """Play ``n`` seeded rounds of a strategy.

    Each round draws the input pair uniformly and the outcome pair by
    inverse-CDF sampling from the strategy's box conditioned on the inputs.
    Rounds are produced in fixed-size chunks whose substreams depend only on
    ``(seed, chunk_index)``; running chunks on more threads never changes the
    output.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    seed = int(seed)
    if not 0 <= seed <= _UINT64_MASK:
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    cum = _outcome_cumulatives(box_of_strategy(strategy))
    counts = [(i, min(CHUNK_ROUNDS, n - start)) for i, start in enumerate(range(0, n, CHUNK_ROUNDS))]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda ic: _simulate_chunk(cum, seed, ic[0], ic[1]), counts))
    else:
        parts = [_simulate_chunk(cum, seed, i, c) for i, c in counts]
    x = np.concatenate([p[0] for p in parts])
    y = np.concatenate([p[1] for p in parts])
    q = np.concatenate([p[2] for p in parts])
    r = np.concatenate([p[3] for p in parts])
    win = (q ^ r) == (x & y)
    return SimulationResult(n=n, seed=seed, x=x, y=y, q=q, r=r, win=win)
