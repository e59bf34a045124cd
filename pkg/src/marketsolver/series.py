"""Price series and panel data model.

Every other module consumes the types defined here: single-asset return
series with price levels, UP/DOWN direction bits, fixed-width direction
contexts read as base-two integers (oldest observation = most significant
bit), and (asset, month) return panels loaded from CSV.

Convention: a zero return counts as DOWN. The binary UP/DOWN model has no
flat case, so the sign function must be total; zero maps to bit 0.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass, field
from typing import IO, Iterable, Union

from .errors import DuplicateRowError, InvalidWindowError, PanelParseError

DEFAULT_START_PRICE = 100.0


@dataclass(frozen=True)
class PriceSeries:
    """Per-period returns plus the price level after each period.

    Returns drive direction bits and strategy profits; prices are the
    capital outlay used by budget-constrained selection. The two vectors
    have equal length and prices must stay strictly positive. No
    arithmetic relation between them is enforced.
    """

    returns: tuple[float, ...]
    prices: tuple[float, ...]

    def __post_init__(self):
        if len(self.prices) != len(self.returns):
            raise ValueError(
                f"prices length {len(self.prices)} != returns length {len(self.returns)}"
            )
        if any(p <= 0 for p in self.prices):
            raise ValueError("price levels must be strictly positive")

    def __len__(self) -> int:
        return len(self.returns)

    @classmethod
    def from_returns(
        cls, returns: Iterable[float], start: float = DEFAULT_START_PRICE
    ) -> "PriceSeries":
        """Build a series with price levels compounded from `start`.

        Levels are cumulative products start * prod(1 + r). Used when an
        input carries returns only (e.g. a CSV without a price column);
        returns must exceed -1 so levels stay positive.
        """
        rets = tuple(float(r) for r in returns)
        prices = []
        level = float(start)
        for r in rets:
            level *= 1.0 + r
            if level <= 0:
                raise ValueError(
                    "cannot compound price levels: a return <= -1 wipes the level out"
                )
            prices.append(level)
        return cls(returns=rets, prices=tuple(prices))

    @classmethod
    def with_shifted_levels(
        cls, returns: Iterable[float], base: float = DEFAULT_START_PRICE
    ) -> "PriceSeries":
        """Build a series with additive price levels, shifted to stay positive.

        Levels are base + cumsum(returns); if the running sum would drive a
        level to zero or below, the base is raised just enough to keep the
        minimum level at 1. Used by the synthetic generators, whose unit
        returns are additive moves rather than fractional rates.
        """
        rets = tuple(float(r) for r in returns)
        cum = []
        acc = 0.0
        for r in rets:
            acc += r
            cum.append(acc)
        lo = min(cum, default=0.0)
        start = base if base + lo > 0 else 1.0 - lo
        return cls(returns=rets, prices=tuple(start + c for c in cum))


@dataclass(frozen=True)
class DirectionVector:
    """One UP(1)/DOWN(0) bit per period."""

    bits: tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("direction bits must be 0 or 1")

    def __len__(self) -> int:
        return len(self.bits)


@dataclass(frozen=True)
class Context:
    """A t-period direction pattern packed into an integer.

    The oldest observation is the most significant bit, so the pattern
    reads left to right like the written bit string.
    """

    lookback: int
    code: int

    def __post_init__(self):
        if self.lookback < 1:
            raise ValueError("lookback must be a positive integer")
        if not 0 <= self.code < (1 << self.lookback):
            raise ValueError(
                f"code {self.code} out of range for lookback {self.lookback}"
            )

    def bits(self) -> tuple[int, ...]:
        """Unpack to bits, oldest first."""
        return tuple(
            (self.code >> (self.lookback - 1 - i)) & 1 for i in range(self.lookback)
        )


@dataclass
class PanelData:
    """Partial (asset, month) -> return map over sorted month labels.

    Missing cells are allowed. Month labels are ISO date strings compared
    lexicographically. `prices` holds the optional price column for rows
    that carried one; it may cover any subset of the return keys.
    """

    assets: list[str]
    months: list[str]
    returns: dict[tuple[str, str], float]
    prices: dict[tuple[str, str], float] = field(default_factory=dict)

    def __post_init__(self):
        month_set = set(self.months)
        asset_set = set(self.assets)
        for asset, month in self.returns:
            if asset not in asset_set:
                raise ValueError(f"unknown asset {asset!r} in returns map")
            if month not in month_set:
                raise ValueError(f"unknown month {month!r} in returns map")
        if any(a >= b for a, b in zip(self.months, self.months[1:])):
            raise ValueError("months must be strictly increasing")

    def n_entries(self) -> int:
        return len(self.returns)

    def series_for(
        self,
        asset: str,
        start: float = DEFAULT_START_PRICE,
        synthesis: str = "compound",
    ) -> PriceSeries:
        """Extract one asset's contiguous series.

        The asset must have a return for every month from its first to its
        last observation. Price levels come from the price column when
        every one of those rows carried a price; otherwise they are
        synthesized: "compound" multiplies (1 + r) from `start` (the
        default; requires returns above -1), "shifted" treats returns as
        additive moves on a base kept positive.
        """
        if synthesis not in ("compound", "shifted"):
            raise ValueError(f"unknown synthesis mode {synthesis!r}")
        obs = [m for m in self.months if (asset, m) in self.returns]
        if not obs:
            raise KeyError(f"asset {asset!r} has no observations")
        lo, hi = self.months.index(obs[0]), self.months.index(obs[-1])
        span = self.months[lo : hi + 1]
        missing = [m for m in span if (asset, m) not in self.returns]
        if missing:
            raise ValueError(
                f"asset {asset!r} has holes at {missing}; cannot form a series"
            )
        rets = [self.returns[(asset, m)] for m in span]
        if all((asset, m) in self.prices for m in span):
            return PriceSeries(
                returns=tuple(rets),
                prices=tuple(self.prices[(asset, m)] for m in span),
            )
        if synthesis == "shifted":
            return PriceSeries.with_shifted_levels(rets, base=start)
        return PriceSeries.from_returns(rets, start=start)


def load_panel_csv(stream: Union[str, IO[str], Iterable[str]]) -> PanelData:
    """Parse a `date,asset,return[,price]` CSV into a PanelData.

    Rejects duplicate (asset, date) rows and reports malformed rows with
    their 1-based line number. A header-only input yields an empty panel.
    """
    if isinstance(stream, str):
        lines = stream.splitlines()
    else:
        lines = stream
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise PanelParseError(1, "missing header row") from None
    header = [h.strip().lower() for h in header]
    if header[:3] != ["date", "asset", "return"]:
        raise PanelParseError(1, f"expected header date,asset,return[,price], got {header}")
    has_price_col = len(header) >= 4 and header[3] == "price"

    returns: dict[tuple[str, str], float] = {}
    prices: dict[tuple[str, str], float] = {}
    assets: set[str] = set()
    months: set[str] = set()
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) < 3:
            raise PanelParseError(line_no, f"expected at least 3 fields, got {len(row)}")
        date, asset = row[0].strip(), row[1].strip()
        if not date or not asset:
            raise PanelParseError(line_no, "empty date or asset field")
        try:
            ret = float(row[2])
        except ValueError:
            raise PanelParseError(
                line_no, f"non-numeric return {row[2]!r}"
            ) from None
        key = (asset, date)
        if key in returns:
            raise DuplicateRowError(
                f"duplicate row for asset {asset!r} at {date!r} (line {line_no})"
            )
        returns[key] = ret
        if has_price_col and len(row) >= 4 and row[3].strip():
            try:
                prices[key] = float(row[3])
            except ValueError:
                raise PanelParseError(
                    line_no, f"non-numeric price {row[3]!r}"
                ) from None
        assets.add(asset)
        months.add(date)
    return PanelData(
        assets=sorted(assets),
        months=sorted(months),
        returns=returns,
        prices=prices,
    )


def directions(series: PriceSeries) -> DirectionVector:
    """Map returns to direction bits: 1 iff strictly positive, else 0."""
    return DirectionVector(bits=tuple(1 if r > 0 else 0 for r in series.returns))


def sliding_contexts(series: PriceSeries, t: int) -> list[tuple[int, Context]]:
    """All t-wide direction windows, as (end_index, Context) pairs.

    The window ending at index i covers periods i-t+1..i, oldest bit most
    significant. A series of length n yields exactly n - t + 1 windows.
    """
    n = len(series)
    if t < 1:
        raise InvalidWindowError(f"lookback must be >= 1, got {t}")
    if t > n:
        raise InvalidWindowError(f"lookback {t} exceeds series length {n}")
    bits = directions(series).bits
    mask = (1 << t) - 1
    out = []
    code = 0
    for i, b in enumerate(bits):
        code = ((code << 1) | b) & mask
        if i >= t - 1:
            out.append((i, Context(lookback=t, code=code)))
    return out


def gen_random_walk(n: int, p_up: float, seed: int) -> PriceSeries:
    """n i.i.d. unit moves: +1 with probability p_up, else -1."""
    if not 0.0 <= p_up <= 1.0:
        raise ValueError(f"p_up must lie in [0, 1], got {p_up}")
    rng = random.Random(seed)
    rets = [1.0 if rng.random() < p_up else -1.0 for _ in range(n)]
    return PriceSeries.with_shifted_levels(rets)


def gen_planted(n: int, pattern: Context, edge: float, seed: int) -> PriceSeries:
    """Random walk with a conditional drift planted after one pattern.

    Whenever the trailing `pattern.lookback` directions equal the pattern,
    the next move is +1 with probability 0.5 + edge; everywhere else the
    walk is fair.
    """
    if not 0.0 <= edge <= 0.5:
        raise ValueError(f"edge must lie in [0, 0.5], got {edge}")
    t = pattern.lookback
    if t > n:
        raise InvalidWindowError(f"pattern lookback {t} exceeds series length {n}")
    rng = random.Random(seed)
    mask = (1 << t) - 1
    rets: list[float] = []
    code = 0
    for i in range(n):
        p = 0.5 + edge if (i >= t and code == pattern.code) else 0.5
        r = 1.0 if rng.random() < p else -1.0
        rets.append(r)
        code = ((code << 1) | (1 if r > 0 else 0)) & mask
    return PriceSeries.with_shifted_levels(rets)
