"""Independent reference implementations used to cross-check the package.

Everything here is deliberately written the slow, obvious way — direct
formula transcriptions, O(N^2) loops, per-step object construction through
the public API — so that agreement with the optimized production paths is
meaningful evidence rather than the same code tested against itself.
"""

from __future__ import annotations

import numpy as np

from chaomarket import Ledger, MarketConfig, bimap_step, select_agents, trade
from chaomarket.rng import UniformStream


def direct_bimap_eval(x: float, y: float, lambda_a: float, lambda_b: float
                      ) -> tuple[float, float]:
    """Direct transcription of the update rule, associated differently."""
    nx = (lambda_a * x) * (1.0 - x) * (3.0 * y + 1.0)
    ny = (lambda_b * y) * (1.0 - y) * (3.0 * x + 1.0)
    return nx, ny


def iterate_states(initial, params, count: int):
    """Repeatedly apply the public single-step op, collecting states."""
    states = []
    state = initial
    for _ in range(count):
        state = bimap_step(state, params)
        states.append(state)
    return states


class ReferenceRun:
    """Result bundle of the pure-Python reference simulation."""

    def __init__(self, money, win, loss, blocked, self_pairs, snapshots):
        self.money = money
        self.win = win
        self.loss = loss
        self.blocked = blocked
        self.self_pairs = self_pairs
        self.snapshots = snapshots  # agent -> list of (t, money)


def reference_simulation(config: MarketConfig) -> ReferenceRun:
    """Re-run a config through the public ops, one object at a time.

    Mirrors the compiled loop exactly: burn-in first, one map step per
    transaction, i from x and j from y, one uniform draw per non-self pair
    (none for self-pairs), payer checked against the transfer.  Histories
    are recorded at t=0 and every stride-th transaction, like production.
    """
    n = config.n_agents
    state = config.bimap_initial
    for _ in range(config.burn_in):
        state = bimap_step(state, config.bimap_params)

    ledger = Ledger.equal_start(n, config.initial_money)
    rng = UniformStream(config.rng_seed)
    win = np.zeros(n, dtype=np.int64)
    loss = np.zeros(n, dtype=np.int64)
    blocked = np.zeros(n, dtype=np.int64)
    self_pairs = 0

    stride = config.stride
    snapshots: dict[int, list[tuple[int, float]]] = {
        a: [(0, float(ledger.money[a]))] for a in config.history_agents}

    for t in range(1, config.transactions + 1):
        state = bimap_step(state, config.bimap_params)
        i, j = select_agents(state, n)
        if i == j:
            self_pairs += 1
        else:
            nu = rng.next_float()
            loss[i] += 1
            win[j] += 1
            ledger, executed = trade(ledger, i, j, nu)
            if not executed:
                blocked[i] += 1
        if snapshots and t % stride == 0:
            for a in snapshots:
                snapshots[a].append((t, float(ledger.money[a])))

    return ReferenceRun(ledger.money, win, loss, blocked, self_pairs,
                        snapshots)


def gini_pairwise(money: np.ndarray) -> float:
    """O(N^2) mean-absolute-difference definition of the Gini coefficient."""
    money = np.asarray(money, dtype=np.float64)
    n = money.shape[0]
    total = 0.0
    for a in range(n):
        for b in range(n):
            total += abs(money[a] - money[b])
    return total / (2.0 * n * money.sum())


def exact_exponential_ccdf(rate: float, thresholds) -> tuple[np.ndarray,
                                                             np.ndarray]:
    """Noise-free CCDF points of P(M >= m) = exp(-rate*m)."""
    m = np.asarray(thresholds, dtype=np.float64)
    return m, np.exp(-rate * m)


def exact_power_ccdf(alpha: float, thresholds) -> tuple[np.ndarray,
                                                        np.ndarray]:
    """Noise-free CCDF points of P(M >= m) = m**(-alpha)."""
    m = np.asarray(thresholds, dtype=np.float64)
    return m, m ** (-alpha)
