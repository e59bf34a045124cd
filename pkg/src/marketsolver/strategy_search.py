"""Technical strategy representation, evaluation, and search.

A technical strategy is a fixed lookup table from the last t direction
bits to a position in {-1, 0, +1}. Evaluating one strategy on a series is
a single linear pass; searching all long-or-out tables is exhaustive in
2^(2^t). `optimal_strategy` finds the best long-or-out table in one pass
plus one sweep over the 2^t context buckets, and is validated against the
exhaustive search in the tests.

Profit convention: the position selected after observing the context
ending at period i is held during period i+1 and earns that period's raw
return. Profits are additive in return units; no compounding.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from math import isfinite
from typing import Iterator, Optional

from .errors import CapacityError, InvalidWindowError
from .series import PriceSeries

# Exhaustive-search guards. 2^(2^5) tables and 3^13 sequences are beyond
# desk scale; anything above these limits raises CapacityError.
MAX_BRUTE_LOOKBACK = 4
MAX_SEQUENCE_LENGTH = 12

LONG = 1
OUT = 0
SHORT = -1


@dataclass(frozen=True)
class TechnicalStrategy:
    """Position table over all 2^lookback direction contexts.

    table[code] is the position taken after observing the context with
    that code. A long_or_out strategy never goes short: every entry is
    0 or +1.
    """

    lookback: int
    table: tuple[int, ...]
    long_or_out: bool = False

    def __post_init__(self):
        if self.lookback < 1:
            raise ValueError("lookback must be a positive integer")
        if len(self.table) != (1 << self.lookback):
            raise ValueError(
                f"table length {len(self.table)} != 2^{self.lookback}"
            )
        allowed = (OUT, LONG) if self.long_or_out else (SHORT, OUT, LONG)
        if any(p not in allowed for p in self.table):
            raise ValueError(f"positions must be in {allowed}")

    def bitmask(self) -> int:
        """Pack a long-or-out table into an integer, context code = bit index."""
        if not self.long_or_out:
            raise ValueError("bitmask is defined for long-or-out tables only")
        mask = 0
        for code, pos in enumerate(self.table):
            if pos == LONG:
                mask |= 1 << code
        return mask

    def to_json(self) -> str:
        return json.dumps(
            {
                "lookback": self.lookback,
                "table": list(self.table),
                "long_or_out": self.long_or_out,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "TechnicalStrategy":
        obj = json.loads(text)
        return cls(
            lookback=int(obj["lookback"]),
            table=tuple(int(p) for p in obj["table"]),
            long_or_out=bool(obj["long_or_out"]),
        )


@dataclass(frozen=True)
class PositionSequence:
    """An arbitrary per-period position path, one entry per period."""

    positions: tuple[int, ...]

    def __post_init__(self):
        if any(p not in (SHORT, OUT, LONG) for p in self.positions):
            raise ValueError("positions must be in {-1, 0, +1}")

    def __len__(self) -> int:
        return len(self.positions)


@dataclass
class ContextBuckets:
    """Subsequent returns gathered per context code.

    buckets[code] lists, in order of occurrence, the return of the period
    immediately after each occurrence of that context. The final context
    of a series has no subsequent return, so the bucketed total is n - t.
    """

    lookback: int
    buckets: dict[int, list[float]] = field(default_factory=dict)

    def total(self, code: int) -> float:
        return sum(self.buckets.get(code, ()))

    def count(self) -> int:
        return sum(len(v) for v in self.buckets.values())


@dataclass(frozen=True)
class CriticalValue:
    """Profit threshold separating significant strategies from noise.

    The equilibrium model backing a significance test collapses into this
    single number; callers pick it, this module only compares against it.
    """

    K: float

    def __post_init__(self):
        if not isfinite(self.K):
            raise ValueError("critical value must be finite")


@dataclass
class WorkCounter:
    """Instrumented work units for the scaling benchmarks and tests."""

    periods_scanned: int = 0
    strategies_evaluated: int = 0


def evaluate(
    strategy: TechnicalStrategy,
    series: PriceSeries,
    counter: Optional[WorkCounter] = None,
) -> float:
    """Profit of one strategy on one series, in a single linear pass.

    Scans each of the n periods exactly once: the period both closes the
    rolling context and pays the previously selected position.
    """
    t = strategy.lookback
    n = len(series)
    if t > n:
        raise InvalidWindowError(f"lookback {t} exceeds series length {n}")
    table = strategy.table
    mask = (1 << t) - 1
    code = 0
    profit = 0.0
    scanned = 0
    for i, r in enumerate(series.returns):
        scanned += 1
        if i >= t:
            profit += table[code] * r
        code = ((code << 1) | (1 if r > 0 else 0)) & mask
    if counter is not None:
        counter.periods_scanned += scanned
        counter.strategies_evaluated += 1
    return profit


def best_position_sequence(series: PriceSeries) -> tuple[PositionSequence, float]:
    """The unconstrained optimum: long every up period, short every down one.

    Not a bona fide strategy (it is a hindsight position path, not a
    function of prior data); its profit sum(|r|) is the ceiling any
    strategy's profit can be compared against.
    """
    positions = tuple(
        LONG if r > 0 else (SHORT if r < 0 else OUT) for r in series.returns
    )
    profit = sum(abs(r) for r in series.returns)
    return PositionSequence(positions=positions), profit


def enumerate_long_or_out(t: int) -> Iterator[TechnicalStrategy]:
    """Yield all 2^(2^t) long-or-out tables in ascending bitmask order."""
    if t < 1:
        raise InvalidWindowError(f"lookback must be >= 1, got {t}")
    if t > MAX_BRUTE_LOOKBACK:
        raise CapacityError(
            f"lookback {t} exceeds enumeration guard {MAX_BRUTE_LOOKBACK}"
        )
    n_contexts = 1 << t
    for mask in range(1 << n_contexts):
        table = tuple((mask >> code) & 1 for code in range(n_contexts))
        yield TechnicalStrategy(lookback=t, table=table, long_or_out=True)


def enumerate_position_sequences(n: int) -> Iterator[PositionSequence]:
    """Yield all 3^n position paths of length n."""
    if n < 1:
        raise ValueError(f"length must be >= 1, got {n}")
    if n > MAX_SEQUENCE_LENGTH:
        raise CapacityError(
            f"length {n} exceeds enumeration guard {MAX_SEQUENCE_LENGTH}"
        )
    for combo in itertools.product((SHORT, OUT, LONG), repeat=n):
        yield PositionSequence(positions=combo)


def _context_stream(series: PriceSeries, t: int) -> list[tuple[int, float]]:
    """(context code, next return) pairs for every tradable period."""
    mask = (1 << t) - 1
    code = 0
    pairs = []
    for i, r in enumerate(series.returns):
        if i >= t:
            pairs.append((code, r))
        code = ((code << 1) | (1 if r > 0 else 0)) & mask
    return pairs


def brute_force_best(
    series: PriceSeries,
    t: int,
    counter: Optional[WorkCounter] = None,
) -> tuple[TechnicalStrategy, float]:
    """Exhaustively evaluate every long-or-out table and keep the best.

    Ties break to the lowest table bitmask; since enumeration is in
    ascending bitmask order, only strict improvements replace the
    incumbent. Cost is 2^(2^t) full-series evaluations.
    """
    n = len(series)
    if t > n:
        raise InvalidWindowError(f"lookback {t} exceeds series length {n}")
    pairs = _context_stream(series, t)
    best_strategy = None
    best_profit = None
    evaluated = 0
    for strategy in enumerate_long_or_out(t):
        table = strategy.table
        profit = 0.0
        for code, r in pairs:
            profit += table[code] * r
        evaluated += 1
        if best_profit is None or profit > best_profit:
            best_profit = profit
            best_strategy = strategy
    if counter is not None:
        counter.strategies_evaluated += evaluated
    return best_strategy, best_profit


def bucket_contexts(series: PriceSeries, t: int) -> ContextBuckets:
    """Gather each context's subsequent returns.

    Only contexts followed by at least one more period are bucketed, so
    the bucketed return count is exactly n - t.
    """
    n = len(series)
    if t < 1:
        raise InvalidWindowError(f"lookback must be >= 1, got {t}")
    if t >= n:
        raise InvalidWindowError(
            f"lookback {t} leaves no subsequent period in a series of length {n}"
        )
    buckets: dict[int, list[float]] = {}
    for code, r in _context_stream(series, t):
        buckets.setdefault(code, []).append(r)
    return ContextBuckets(lookback=t, buckets=buckets)


def optimal_strategy(
    series: PriceSeries,
    t: int,
    counter: Optional[WorkCounter] = None,
) -> tuple[TechnicalStrategy, float]:
    """Best long-or-out table, in time proportional to n + 2^t.

    Go long exactly the contexts whose subsequent returns sum positive; a
    bucket sum of zero stays out (indifference with no transaction costs).
    The profit is the sum of the positive bucket sums, which dominates
    every long-or-out table's profit on this series.
    """
    n = len(series)
    if t < 1:
        raise InvalidWindowError(f"lookback must be >= 1, got {t}")
    if t >= n:
        raise InvalidWindowError(
            f"lookback {t} leaves no subsequent period in a series of length {n}"
        )
    sums: dict[int, float] = {}
    mask = (1 << t) - 1
    code = 0
    scanned = 0
    for i, r in enumerate(series.returns):
        scanned += 1
        if i >= t:
            sums[code] = sums.get(code, 0.0) + r
        code = ((code << 1) | (1 if r > 0 else 0)) & mask
    table = [OUT] * (1 << t)
    profit = 0.0
    for c, s in sums.items():
        if s > 0:
            table[c] = LONG
            profit += s
    if counter is not None:
        counter.periods_scanned += scanned
    strategy = TechnicalStrategy(lookback=t, table=tuple(table), long_or_out=True)
    return strategy, profit


def decide_q3(series: PriceSeries, t: int, critical: CriticalValue) -> bool:
    """Does any long-or-out strategy beat the critical profit, strictly?"""
    _, profit = optimal_strategy(series, t)
    return profit > critical.K
