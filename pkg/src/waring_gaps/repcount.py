"""Exact sieves for counts of representations as sums of like powers.

The central object is the table of r(n) = number of ordered s-tuples of
nonnegative integers whose ell-th powers sum to n, for all n up to a limit.
Tables are built by iterated offset convolution with the single-power
indicator, stored as exact 64-bit counters whose ceiling is checked up
front, and scanned for zero runs.  All fractional-power comparisons
(greedy remainder bound, exceptional-window threshold) are carried out on
arbitrary-precision integers; no float ever decides anything.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .exact import fraction_str

SUPPORTED_EXPONENTS = (3, 4)

_MAGIC = b"WRT1"
_INT64_MAX = 2**63 - 1


class CounterWidthError(ValueError):
    """Requested counter width cannot hold the worst-case count."""


class TableFormatError(ValueError):
    """Serialized table is malformed or inconsistent."""


def loose_count_bound(ell: int, n: int) -> int:
    """Upper bound 2^ell * (n + 1) valid for every representation count."""
    return (1 << ell) * (n + 1)


@dataclass(frozen=True)
class WaringParams:
    """Exponent ell in {3, 4} and number of summands 1 <= s <= ell."""

    ell: int
    s: int

    def __post_init__(self) -> None:
        if self.ell not in SUPPORTED_EXPONENTS:
            raise ValueError(f"ell must be one of {SUPPORTED_EXPONENTS}, got {self.ell}")
        if not 1 <= self.s <= self.ell:
            raise ValueError(f"s must satisfy 1 <= s <= {self.ell}, got {self.s}")


@dataclass(frozen=True, eq=False)
class RepTable:
    """Exact counts r(n) for 0 <= n <= limit, immutable after construction."""

    params: WaringParams
    limit: int
    counts: np.ndarray

    def __post_init__(self) -> None:
        if self.limit < 0:
            raise ValueError("limit must be nonnegative")
        if self.counts.shape != (self.limit + 1,):
            raise TableFormatError(
                f"counts length {self.counts.shape} does not match limit {self.limit}"
            )
        ceiling = loose_count_bound(self.params.ell, self.limit)
        width_max = int(np.iinfo(self.counts.dtype).max)
        if ceiling > width_max:
            raise CounterWidthError(
                f"counter dtype {self.counts.dtype} cannot hold worst-case count {ceiling}"
            )
        if int(self.counts[0]) != 1:
            raise TableFormatError("count at 0 must be 1 (the all-zero tuple)")
        if int(self.counts.min()) < 0:
            raise TableFormatError("counts must be nonnegative")
        bound = (1 << self.params.ell) * (np.arange(self.limit + 1, dtype=np.int64) + 1)
        if bool((self.counts > bound).any()):
            bad = int(np.flatnonzero(self.counts > bound)[0])
            raise TableFormatError(
                f"count at {bad} exceeds the loose bound 2^ell*(n+1)"
            )
        self.counts.setflags(write=False)

    def count(self, n: int) -> int:
        """Exact count at n, as a Python integer."""
        if not 0 <= n <= self.limit:
            raise IndexError(f"index {n} outside table range [0, {self.limit}]")
        return int(self.counts[n])


def floor_root(ell: int, b: int) -> int:
    """Largest x with x^ell <= b, by Newton iteration on exact integers."""
    if ell < 1:
        raise ValueError("ell must be positive")
    if b < 0:
        raise ValueError("b must be nonnegative")
    if ell == 1 or b in (0, 1):
        return b
    x = 1 << ((b.bit_length() + ell - 1) // ell)
    while True:
        y = ((ell - 1) * x + b // x ** (ell - 1)) // ell
        if y >= x:
            break
        x = y
    while x**ell > b:
        x -= 1
    while (x + 1) ** ell <= b:
        x += 1
    assert x**ell <= b < (x + 1) ** ell
    return x


def greedy_decompose(ell: int, b: int) -> tuple[tuple[int, ...], int]:
    """Peel off the largest ell-th power ell times; return (parts, sum).

    The returned n = sum(part^ell) satisfies n <= b, and for ell = 3 the
    remainder obeys (b - n)^27 < 25^27 * b^8 for every b >= 1, checked
    here in exact integers.
    """
    if ell not in SUPPORTED_EXPONENTS:
        raise ValueError(f"ell must be one of {SUPPORTED_EXPONENTS}, got {ell}")
    if b < 0:
        raise ValueError("b must be nonnegative")
    rem = b
    parts = []
    for _ in range(ell):
        x = floor_root(ell, rem)
        parts.append(x)
        rem -= x**ell
    n = b - rem
    if ell == 3 and b >= 1:
        assert (b - n) ** 27 < 25**27 * b**8, f"greedy remainder bound failed at b={b}"
    return tuple(parts), n


def sieve_rep(params: WaringParams, limit: int) -> RepTable:
    """Sieve all counts up to limit by iterated single-power convolution.

    Work is a sequence of exact vector adds, one per power offset per
    fold; the result is independent of any partitioning of those adds.
    """
    if limit < 0:
        raise ValueError("limit must be nonnegative")
    ceiling = loose_count_bound(params.ell, limit)
    if ceiling > _INT64_MAX:
        raise CounterWidthError(
            f"64-bit counters cannot hold worst-case count {ceiling} at limit {limit}"
        )
    powers = _powers_up_to(params.ell, limit)
    base = np.zeros(limit + 1, dtype=np.int64)
    base[powers] = 1
    cur = base
    for _ in range(params.s - 1):
        nxt = np.zeros(limit + 1, dtype=np.int64)
        for p in powers:
            if p == 0:
                nxt += cur
            else:
                nxt[p:] += cur[: limit + 1 - p]
        cur = nxt
    return RepTable(params=params, limit=limit, counts=cur)


def _powers_up_to(ell: int, limit: int) -> list[int]:
    out = []
    x = 0
    while x**ell <= limit:
        out.append(x**ell)
        x += 1
    return out


@dataclass(frozen=True)
class GapRun:
    """Maximal run of zero counts; truncated means it touches the table end."""

    start: int
    length: int
    truncated: bool = False


def find_gap_runs(table: RepTable, min_len: int) -> list[GapRun]:
    """All maximal zero runs of length >= min_len, in increasing start order."""
    if min_len < 1:
        raise ValueError("min_len must be positive")
    mask = table.counts == 0
    padded = np.concatenate(([False], mask, [False]))
    delta = np.diff(padded.astype(np.int8))
    starts = np.flatnonzero(delta == 1)
    ends = np.flatnonzero(delta == -1)
    runs = []
    for s, e in zip(starts.tolist(), ends.tolist()):
        length = e - s
        if length >= min_len:
            runs.append(GapRun(start=s, length=length, truncated=(e == table.limit + 1)))
    return runs


@dataclass(frozen=True)
class ExceptionalScan:
    """Integers a <= limit whose whole lookback window has zero counts."""

    limit: int
    exponent: Fraction
    members: tuple[int, ...]
    density: Fraction

    def to_json_dict(self) -> dict:
        return {
            "limit": self.limit,
            "exponent": fraction_str(self.exponent),
            "cardinality": len(self.members),
            "density": fraction_str(self.density),
            "members": list(self.members),
        }


def _bounded_pow(x: int, n: int, prec: int = 96) -> tuple[int, int, int]:
    """Certified two-sided bound on x^n: returns (lo, hi, e) with
    lo * 2^e <= x^n <= hi * 2^e and mantissas kept near prec bits.

    Square-and-multiply with floor/ceiling renormalization, so both
    bounds stay exact integers whatever the exponent size.
    """
    lo = hi = x
    e = 0
    for bit in bin(n)[3:]:
        lo *= lo
        hi *= hi
        e *= 2
        if bit == "1":
            lo *= x
            hi *= x
        shift = hi.bit_length() - prec
        if shift > 0:
            lo >>= shift
            hi = (hi + (1 << shift) - 1) >> shift
            e += shift
    return lo, hi, e


def _pow_greater(a: int, p: int, d: int, q: int) -> bool:
    """Decide a^p > d^q exactly, for positive exponents.

    Bit-length bounds (2^(L-1) <= x < 2^L for L = x.bit_length()) settle
    everything away from the crossover; certified bounded powering
    settles all but near-equal values; only those fall back to forming
    the full powers.
    """
    if a <= 1 or d <= 1:
        # with positive exponents x^n is 0, 1, or at least 2 as x is
        return min(a, 2) > min(d, 2)
    la, ld = a.bit_length(), d.bit_length()
    if p * (la - 1) >= q * ld:
        return True
    if p * la <= q * (ld - 1):
        return False
    a_lo, a_hi, a_e = _bounded_pow(a, p)
    d_lo, d_hi, d_e = _bounded_pow(d, q)
    if a_e >= d_e:
        a_lo, a_hi = a_lo << (a_e - d_e), a_hi << (a_e - d_e)
    else:
        d_lo, d_hi = d_lo << (d_e - a_e), d_hi << (d_e - a_e)
    if a_lo > d_hi:
        return True
    if a_hi < d_lo:
        return False
    return a**p > d**q


def scan_exceptional_set(
    ell: int, limit: int, epsilon: Fraction, table: RepTable
) -> ExceptionalScan:
    """Find all a in [1, limit] with zero counts on the window (a - a^e, a].

    The exponent is e = 4059/16384 + epsilon.  An integer n lies in the
    window exactly when (a - n)^q < a^p for e = p/q, decided by exact
    powering; the window length is therefore a step function of a whose
    breakpoints are located once by binary search.
    """
    if ell != 4:
        raise ValueError("the exceptional-window scan is defined for ell = 4")
    if limit < 1:
        raise ValueError("limit must be positive")
    epsilon = Fraction(epsilon)
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    exponent = Fraction(4059, 16384) + epsilon
    if exponent >= 1:
        raise ValueError(f"window exponent {exponent} must be below 1")
    if table.params != WaringParams(4, 4):
        raise ValueError("table must hold counts for four fourth powers")
    if table.limit < limit:
        raise ValueError(f"table covers [0, {table.limit}] but limit is {limit}")

    p, q = exponent.numerator, exponent.denominator
    # a_min(d) = least a with a^p > d^q; window width at a is the number of
    # breakpoints passed.  Widths are nondecreasing in a.
    breakpoints = []
    d = 1
    while True:
        lo, hi = 1, limit + 1
        while lo < hi:
            mid = (lo + hi) // 2
            if _pow_greater(mid, p, d, q):
                hi = mid
            else:
                lo = mid + 1
        if lo > limit:
            break
        breakpoints.append(lo)
        d += 1

    a_arr = np.arange(1, limit + 1, dtype=np.int64)
    widths = np.searchsorted(np.asarray(breakpoints, dtype=np.int64), a_arr, side="right")
    nz = table.counts[: limit + 1] != 0
    last_nonzero = np.maximum.accumulate(
        np.where(nz, np.arange(limit + 1, dtype=np.int64), np.int64(-1))
    )
    member_mask = last_nonzero[1:] < a_arr - widths
    members = tuple(int(a) for a in a_arr[member_mask])
    return ExceptionalScan(
        limit=limit,
        exponent=exponent,
        members=members,
        density=Fraction(len(members), limit),
    )


def write_table_csv(table: RepTable, path: str | Path) -> None:
    """Write the table as CSV with header n,count."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "count"])
        for n, c in enumerate(table.counts.tolist()):
            writer.writerow([n, c])


def read_table_csv(path: str | Path, params: WaringParams) -> RepTable:
    """Read a CSV table; the parameters are not stored in the CSV form."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["n", "count"]:
            raise TableFormatError(f"expected header n,count, got {header}")
        values = []
        for row in reader:
            if len(row) != 2:
                raise TableFormatError(f"malformed row {row}")
            n, c = int(row[0]), int(row[1])
            if n != len(values):
                raise TableFormatError(f"rows out of order at n={n}")
            values.append(c)
    if not values:
        raise TableFormatError("empty table")
    counts = np.asarray(values, dtype=np.int64)
    return RepTable(params=params, limit=len(values) - 1, counts=counts)


def _binary_width(ell: int, limit: int) -> int:
    ceiling = loose_count_bound(ell, limit)
    for width in (1, 2, 4, 8):
        if ceiling <= (1 << (8 * width)) - 1:
            return width
    raise CounterWidthError(f"no supported width holds worst-case count {ceiling}")


def write_table_binary(table: RepTable, path: str | Path) -> None:
    """Write the compact binary form.

    Layout: magic WRT1, then ell, s, limit and the count byte width as
    unsigned 64-bit little-endian, then limit+1 counts as fixed-width
    little-endian unsigned integers.
    """
    width = _binary_width(table.params.ell, table.limit)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<QQQQ", table.params.ell, table.params.s, table.limit, width))
        fh.write(table.counts.astype(f"<u{width}").tobytes())


def read_table_binary(path: str | Path) -> RepTable:
    """Read the compact binary form back into an exact table."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise TableFormatError(f"bad magic {magic!r}")
        header = fh.read(32)
        if len(header) != 32:
            raise TableFormatError("truncated header")
        ell, s, limit, width = struct.unpack("<QQQQ", header)
        if width not in (1, 2, 4, 8):
            raise TableFormatError(f"unsupported count width {width}")
        payload = fh.read()
    expected = (limit + 1) * width
    if len(payload) != expected:
        raise TableFormatError(
            f"payload is {len(payload)} bytes, expected {expected}"
        )
    counts = np.frombuffer(payload, dtype=f"<u{width}").astype(np.int64)
    return RepTable(params=WaringParams(int(ell), int(s)), limit=int(limit), counts=counts)
