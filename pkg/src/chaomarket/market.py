"""Agent-based market with chaotic pair selection.

A population of N agents starts with equal money m0.  At each transaction
the coupled logistic bimap is advanced once and its coordinates are mapped
onto agent indices: the x coordinate picks the payer i and the y coordinate
picks the receiver j.  The pair then exchanges a random fraction of its
average money,

    dm = nu * (m_i + m_j) / 2,      nu uniform on [0, 1),

with i paying j, unless i cannot cover dm, in which case nothing moves.
Total money is conserved exactly (up to float accumulation) and nobody can
go below zero.

Because the selection sequence is a pure function of the bimap, agents
living outside the attractor's projection are never picked at all ("passive"
agents, ending with exactly m0), and with asymmetric map parameters a small
set of agents is only ever picked on the receiving side ("never-losers",
which act as sinks of wealth).

The hot loop is compiled with numba; `select_agents` and `trade` expose the
same elementary steps as pure functions, and the compiled path is held
bit-compatible with composing those (same expressions, same order, same
random stream).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numba
import numpy as np
from numba import types
from numba.typed import Dict as NumbaDict

from .dynamics import BimapParams, BimapState, DomainEscapeError
from .rng import _S11, _S27, _S30, _S31, _TO_UNIT, _U_GAMMA, _U_MIX_A, _U_MIX_B

# Above this population size a dense pair matrix (N^2 counters) is no longer
# reasonable to keep by default; tracking falls back to a sparse map when
# requested explicitly and is skipped otherwise.
DENSE_PAIR_LIMIT = 2000

# Relative slack allowed on total money at the end of a run; anything worse
# indicates a broken exchange rule rather than float accumulation.
CONSERVATION_RTOL = 1e-9


@dataclass(frozen=True)
class MarketConfig:
    """Complete, reproducible description of one simulation run.

    total_transactions defaults to 2*N^2 (enough for the money distribution
    to take its long-run shape at the population sizes studied here), and
    history_sample_stride defaults to total_transactions/1000 so traced
    agents cost ~1000 samples regardless of run length.
    """

    n_agents: int = 500
    initial_money: float = 1000.0
    total_transactions: int | None = None
    bimap_params: BimapParams = BimapParams(1.032, 1.032)
    bimap_initial: BimapState = BimapState(0.5, 0.3)
    burn_in: int = 1000
    rng_seed: int = 42
    history_sample_stride: int | None = None
    history_agents: tuple[int, ...] = ()
    track_pair_matrix: bool | None = None

    def __post_init__(self):
        object.__setattr__(self, "n_agents", int(self.n_agents))
        object.__setattr__(self, "initial_money", float(self.initial_money))
        object.__setattr__(self, "burn_in", int(self.burn_in))
        object.__setattr__(self, "rng_seed", int(self.rng_seed))
        if self.total_transactions is not None:
            object.__setattr__(self, "total_transactions",
                               int(self.total_transactions))
        if self.history_sample_stride is not None:
            object.__setattr__(self, "history_sample_stride",
                               int(self.history_sample_stride))
        object.__setattr__(self, "history_agents",
                           tuple(int(a) for a in self.history_agents))

        if self.n_agents < 2:
            raise ValueError(f"n_agents must be >= 2: got {self.n_agents}")
        if not np.isfinite(self.initial_money) or self.initial_money <= 0:
            raise ValueError(
                f"initial_money must be positive: got {self.initial_money}")
        if self.total_transactions is not None and self.total_transactions < 1:
            raise ValueError("total_transactions must be >= 1: "
                             f"got {self.total_transactions}")
        if self.burn_in < 0:
            raise ValueError(f"burn_in must be >= 0: got {self.burn_in}")
        if not 0 <= self.rng_seed < 1 << 64:
            raise ValueError(
                f"rng_seed must be in [0, 2**64): got {self.rng_seed}")
        if (self.history_sample_stride is not None
                and self.history_sample_stride < 1):
            raise ValueError("history_sample_stride must be >= 1: "
                             f"got {self.history_sample_stride}")
        seen = set()
        for a in self.history_agents:
            if not 0 <= a < self.n_agents:
                raise ValueError(
                    f"history agent {a} outside [0, {self.n_agents})")
            if a in seen:
                raise ValueError(f"history agent {a} listed twice")
            seen.add(a)
        if self.track_pair_matrix not in (None, True, False):
            raise ValueError("track_pair_matrix must be true, false, or "
                             "left unset for the size-based default")

    @property
    def transactions(self) -> int:
        """Resolved transaction count (default 2*N^2)."""
        if self.total_transactions is not None:
            return self.total_transactions
        return 2 * self.n_agents * self.n_agents

    @property
    def stride(self) -> int:
        """Resolved history sampling stride."""
        if self.history_sample_stride is not None:
            return self.history_sample_stride
        return max(1, self.transactions // 1000)

    @property
    def pair_matrix_mode(self) -> str:
        """Resolved pair-matrix storage: 'dense', 'sparse', or 'off'."""
        if self.track_pair_matrix is False:
            return "off"
        if self.track_pair_matrix is True:
            return "dense" if self.n_agents <= DENSE_PAIR_LIMIT else "sparse"
        return "dense" if self.n_agents <= DENSE_PAIR_LIMIT else "off"


@dataclass
class Ledger:
    """Per-agent money vector."""

    money: np.ndarray

    def __post_init__(self):
        money = np.asarray(self.money, dtype=np.float64)
        if money.ndim != 1:
            raise ValueError(f"money must be one-dimensional: got {money.ndim}")
        if money.shape[0] < 1:
            raise ValueError("ledger must hold at least one agent")
        if not np.all(np.isfinite(money)) or np.any(money < 0):
            raise ValueError("money entries must be finite and non-negative")
        self.money = money

    @classmethod
    def equal_start(cls, n_agents: int, initial_money: float) -> "Ledger":
        return cls(np.full(n_agents, float(initial_money), dtype=np.float64))

    @property
    def total(self) -> float:
        return float(self.money.sum())

    def copy(self) -> "Ledger":
        return Ledger(self.money.copy())

    def __len__(self) -> int:
        return self.money.shape[0]


def select_agents(state: BimapState, n_agents: int) -> tuple[int, int]:
    """Map a bimap state onto a (payer, receiver) index pair.

    i = floor(x*N) and j = floor(y*N), clamped to N-1 so the measure-zero
    boundary x == 1.0 stays in range.
    """
    if n_agents < 1:
        raise ValueError(f"n_agents must be >= 1: got {n_agents}")
    i = min(int(state.x * n_agents), n_agents - 1)
    j = min(int(state.y * n_agents), n_agents - 1)
    return i, j


def trade(ledger: Ledger, i: int, j: int, nu: float) -> tuple[Ledger, bool]:
    """Transfer nu*(m_i+m_j)/2 from i to j; skip if i cannot cover it.

    Pure: returns a new ledger and an `executed` flag.  The blocked branch
    returns the money vector unchanged.  i == j is rejected here; the
    simulation loop treats such a selection as a non-event rather than a
    trade.
    """
    n = len(ledger)
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"agent pair ({i}, {j}) outside [0, {n})")
    if i == j:
        raise ValueError(f"self-pair ({i}, {j}) is not a trade")
    if not 0.0 <= nu <= 1.0:
        raise ValueError(f"nu must lie in [0, 1]: got {nu!r}")
    money = ledger.money
    dm = nu * (money[i] + money[j]) / 2.0
    if money[i] >= dm:
        new = money.copy()
        new[i] -= dm
        new[j] += dm
        return Ledger(new), True
    return Ledger(money.copy()), False


@dataclass
class InteractionStats:
    """Selection bookkeeping accumulated over a run.

    win_count[a]  — times a was drawn as receiver j (self-pairs excluded);
    loss_count[a] — times a was drawn as payer i (blocked draws included);
    blocked_count[a] — payer draws of a that the funds check skipped;
    self_pairs    — selections with i == j (no draw, no transfer);
    pair_matrix   — counts of (receiver j, payer i) selections: a dense
                    (N, N) array indexed [j, i], a sparse {(j, i): count}
                    map, or None when tracking is off;
    histories     — traced agents' sampled balances, agent -> array of
                    (transaction index, money) rows.
    """

    win_count: np.ndarray
    loss_count: np.ndarray
    blocked_count: np.ndarray
    self_pairs: int
    pair_matrix: np.ndarray | dict[tuple[int, int], int] | None
    histories: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def selections(self) -> int:
        """Total selection events, trades and self-pairs alike."""
        return int(self.loss_count.sum()) + self.self_pairs


def classify_agents(stats: InteractionStats) -> tuple[frozenset[int],
                                                      frozenset[int]]:
    """Split agents into (passive, never_losers).

    Passive agents were never drawn into any pair with a partner; they end
    with exactly their initial money.  Never-losers were drawn at least once
    as receiver and never as payer.
    """
    win = stats.win_count
    loss = stats.loss_count
    passive = np.flatnonzero((win == 0) & (loss == 0))
    never_losers = np.flatnonzero((loss == 0) & (win > 0))
    return frozenset(int(a) for a in passive), \
        frozenset(int(a) for a in never_losers)


@dataclass
class SimulationOutput:
    """Everything a finished run produced."""

    final_ledger: Ledger
    stats: InteractionStats
    config: MarketConfig
    passive_agents: frozenset[int]
    transactions: int


@numba.njit(cache=True)
def _simulate(n, m0, total_tx, lambda_a, lambda_b, x0, y0, burn_in, state,
              pair_mode, pair_dense, pair_sparse, traced, stride, hist_money,
              hist_t):
    """Compiled transaction loop; see module docstring for the model.

    Returns (money, win, loss, blocked, self_pairs, escape, ex, ey) where
    escape is 0 on success, -k if burn-in iteration k left the unit square,
    or +t if the iterate ahead of transaction t did, with (ex, ey) the
    offending coordinates.
    """
    money = np.full(n, m0, dtype=np.float64)
    win = np.zeros(n, dtype=np.int64)
    loss = np.zeros(n, dtype=np.int64)
    blocked = np.zeros(n, dtype=np.int64)
    self_pairs = 0

    x = x0
    y = y0
    for k in range(burn_in):
        nx = lambda_a * (3.0 * y + 1.0) * x * (1.0 - x)
        ny = lambda_b * (3.0 * x + 1.0) * y * (1.0 - y)
        if not (0.0 <= nx <= 1.0 and 0.0 <= ny <= 1.0):
            return money, win, loss, blocked, self_pairs, -(k + 1), nx, ny
        x = nx
        y = ny

    n_traced = traced.shape[0]
    snap = 0
    if n_traced > 0:
        hist_t[0] = 0
        for a in range(n_traced):
            hist_money[a, 0] = money[traced[a]]
        snap = 1

    for t in range(1, total_tx + 1):
        nx = lambda_a * (3.0 * y + 1.0) * x * (1.0 - x)
        ny = lambda_b * (3.0 * x + 1.0) * y * (1.0 - y)
        if not (0.0 <= nx <= 1.0 and 0.0 <= ny <= 1.0):
            return money, win, loss, blocked, self_pairs, t, nx, ny
        x = nx
        y = ny
        i = min(int(x * n), n - 1)
        j = min(int(y * n), n - 1)
        if i == j:
            self_pairs += 1
        else:
            state = state + _U_GAMMA
            z = state
            z = (z ^ (z >> _S30)) * _U_MIX_A
            z = (z ^ (z >> _S27)) * _U_MIX_B
            z = z ^ (z >> _S31)
            nu = (z >> _S11) * _TO_UNIT
            dm = nu * (money[i] + money[j]) / 2.0
            loss[i] += 1
            win[j] += 1
            if pair_mode == 1:
                pair_dense[j, i] += 1
            elif pair_mode == 2:
                key = j * n + i
                if key in pair_sparse:
                    pair_sparse[key] += 1
                else:
                    pair_sparse[key] = 1
            if money[i] >= dm:
                money[i] -= dm
                money[j] += dm
            else:
                blocked[i] += 1
        if n_traced > 0 and t % stride == 0:
            hist_t[snap] = t
            for a in range(n_traced):
                hist_money[a, snap] = money[traced[a]]
            snap += 1

    return money, win, loss, blocked, self_pairs, 0, x, y


def run_simulation(config: MarketConfig) -> SimulationOutput:
    """Execute one full run described by `config`.

    Deterministic: identical configs give bit-identical outputs.  Raises
    DomainEscapeError if the selection map leaves the unit square, and
    RuntimeError if total money drifts beyond the conservation tolerance
    (which would mean the exchange rule itself is broken).
    """
    n = config.n_agents
    total_tx = config.transactions
    stride = config.stride
    mode_name = config.pair_matrix_mode
    pair_mode = {"off": 0, "dense": 1, "sparse": 2}[mode_name]

    pair_dense = np.zeros((n, n) if pair_mode == 1 else (0, 0), dtype=np.int64)
    pair_sparse = NumbaDict.empty(key_type=types.int64, value_type=types.int64)

    traced = np.asarray(config.history_agents, dtype=np.int64)
    n_snapshots = 1 + total_tx // stride if traced.shape[0] else 0
    hist_money = np.zeros((traced.shape[0], n_snapshots), dtype=np.float64)
    hist_t = np.zeros(n_snapshots, dtype=np.int64)

    money, win, loss, blocked, self_pairs, escape, ex, ey = _simulate(
        n, config.initial_money, total_tx,
        config.bimap_params.lambda_a, config.bimap_params.lambda_b,
        config.bimap_initial.x, config.bimap_initial.y,
        config.burn_in, np.uint64(config.rng_seed),
        pair_mode, pair_dense, pair_sparse, traced, stride,
        hist_money, hist_t)

    if escape < 0:
        raise DomainEscapeError(ex, ey, step=-escape, phase="burn-in")
    if escape > 0:
        raise DomainEscapeError(ex, ey, step=escape, phase="transaction")

    expected = n * config.initial_money
    if abs(money.sum() - expected) > CONSERVATION_RTOL * expected:
        raise RuntimeError(
            f"conservation violated: total {money.sum()!r} vs {expected!r}")

    pair_matrix: np.ndarray | dict[tuple[int, int], int] | None
    if pair_mode == 1:
        pair_matrix = pair_dense
    elif pair_mode == 2:
        pair_matrix = {(key // n, key % n): int(count)
                       for key, count in pair_sparse.items()}
    else:
        pair_matrix = None

    histories = {
        int(agent): np.column_stack((hist_t.astype(np.float64),
                                     hist_money[k]))
        for k, agent in enumerate(traced)
    }

    stats = InteractionStats(win_count=win, loss_count=loss,
                             blocked_count=blocked, self_pairs=int(self_pairs),
                             pair_matrix=pair_matrix, histories=histories)
    passive, _ = classify_agents(stats)
    return SimulationOutput(final_ledger=Ledger(money), stats=stats,
                            config=config, passive_agents=passive,
                            transactions=total_tx)
