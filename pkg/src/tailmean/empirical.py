"""Order statistics, empirical quantiles and tail/bulk partial sums.

Every estimator in the package consumes a ``SortedSample`` (ascending,
strictly positive observations) through the helpers here, so indexing
conventions live in exactly one place: order statistics are 1-based,
``X_(1) <= ... <= X_(n)``, and "top k" means the k largest values.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class SortedSample:
    """Positive observations held in ascending order."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("sample must be a nonempty 1-d sequence")
        if not np.all(arr > 0.0):
            raise DataError("all observations must be strictly positive")
        if np.any(np.diff(arr) < 0.0):
            raise ValueError("values must be sorted ascending")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return int(self.values.size)

    @classmethod
    def from_values(cls, values) -> "SortedSample":
        """Build from unordered data; sorts a copy."""
        arr = np.sort(np.asarray(values, dtype=float))
        return cls(arr)

    @classmethod
    def from_csv(cls, source) -> "SortedSample":
        """Ingest a one-column CSV of positive decimals (see read_value_column)."""
        return cls.from_values(read_value_column(source, require_positive=True))


@dataclass(frozen=True)
class TailView:
    """The top-k excesses of a sample over its tail threshold.

    ``log_spacings[i-1] = log(X_(n-i+1) / X_(n-k))`` for i = 1..k and ``s1``
    is their mean, the reciprocal of the Hill estimate.
    """

    k: int
    threshold: float
    log_spacings: np.ndarray = field(repr=False)
    s1: float

    def __post_init__(self):
        spac = np.asarray(self.log_spacings, dtype=float)
        spac.flags.writeable = False
        object.__setattr__(self, "log_spacings", spac)


def read_value_column(source, require_positive: bool = False) -> np.ndarray:
    """Parse a single-column CSV: one decimal per line, optional ``value`` header.

    ``source`` may be a path or a readable file object.  Malformed lines
    abort with a DataError naming the 1-based line number; with
    ``require_positive`` nonpositive entries are data errors too.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    lines = text.split("\n")
    while lines and lines[-1].strip() == "":
        lines.pop()
    if not lines:
        raise DataError("no data: input is empty")
    start = 0
    if lines[0].strip().lower() == "value":
        start = 1
    out = []
    for lineno in range(start, len(lines)):
        token = lines[lineno].strip()
        try:
            x = float(token)
        except ValueError:
            raise DataError(f"line {lineno + 1}: not a number: {token!r}") from None
        if not math.isfinite(x):
            raise DataError(f"line {lineno + 1}: non-finite value {token!r}")
        if require_positive and x <= 0.0:
            raise DataError(f"line {lineno + 1}: value must be positive, got {token}")
        out.append(x)
    if not out:
        raise DataError("no data: header only")
    return np.asarray(out, dtype=float)


def read_value_text(text: str, require_positive: bool = False) -> np.ndarray:
    """Same as read_value_column but from an in-memory string."""
    return read_value_column(io.StringIO(text), require_positive=require_positive)


def order_stat(sample: SortedSample, i: int) -> float:
    """The i-th smallest observation X_(i), 1 <= i <= n."""
    if not 1 <= i <= sample.n:
        raise IndexError(f"order statistic index {i} outside 1..{sample.n}")
    return float(sample.values[i - 1])


def empirical_quantile(sample: SortedSample, p: float) -> float:
    """Sample quantile Q_n(p) = X_(ceil(n p)) for p in (0, 1].

    Implements inf{x : F_n(x) >= p}; the index is fixed up against exact
    i/n comparisons so grid probabilities never land on the wrong side of
    a jump through floating error in ``n * p``.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError(f"probability must lie in (0, 1], got {p}")
    n = sample.n
    i = math.ceil(n * p)
    i = min(max(i, 1), n)
    while i > 1 and (i - 1) / n >= p:
        i -= 1
    while i < n and i / n < p:
        i += 1
    return float(sample.values[i - 1])


def tail_view(sample: SortedSample, k: int) -> TailView:
    """Log spacings of the k largest observations over the threshold X_(n-k)."""
    n = sample.n
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")
    threshold = float(sample.values[n - k - 1])
    if threshold <= 0.0:
        raise ValueError("tail threshold must be strictly positive")
    # descending top-k block: X_(n), ..., X_(n-k+1)
    top = sample.values[n - k:][::-1]
    log_spacings = np.log(top / threshold)
    return TailView(k=k, threshold=threshold, log_spacings=log_spacings,
                    s1=float(log_spacings.mean()))


def lower_tail_mean(sample: SortedSample, k: int) -> float:
    """Sum of the n-k smallest observations divided by n (the bulk term)."""
    n = sample.n
    if not 0 <= k < n:
        raise IndexError(f"need 0 <= k < n, got k={k}, n={n}")
    return float(sample.values[: n - k].sum() / n)
