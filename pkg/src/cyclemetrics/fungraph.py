"""Finite mappings ``f: [n] -> [n]`` and the cycle statistics of their functional graphs.

Nodes are 1-indexed at every public boundary (constructors, ``image``, file
I/O).  Internally the image is also kept 0-indexed for the compiled kernels.
"""

from __future__ import annotations

import io
import math
import os
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import IO, Iterable, Iterator, Mapping

import numpy as np

from . import _kernels

__all__ = [
    "MappingTable",
    "IndegreeProfile",
    "FactoredInteger",
    "CycleStructure",
    "MappingFormatError",
    "indegree_profile",
    "cycle_structure",
    "cycle_structure_0",
    "cyclic_count",
    "log_value",
    "factor_lengths",
    "read_mapping",
    "read_mappings",
    "write_mapping",
    "write_mappings",
]


class MappingFormatError(ValueError):
    """Raised for malformed mapping text, with 1-based line/column context."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


@dataclass(frozen=True, eq=False)
class MappingTable:
    """A mapping on ``[n]`` stored as its image table, ``image[i-1] = f(i)``."""

    n: int
    image: np.ndarray = field(repr=False)

    def __post_init__(self):
        img = np.asarray(self.image, dtype=np.int64)
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if img.shape != (self.n,):
            raise ValueError(f"image must have length n={self.n}, got shape {img.shape}")
        if img.size and (img.min() < 1 or img.max() > self.n):
            bad = int(np.flatnonzero((img < 1) | (img > self.n))[0])
            raise ValueError(f"image[{bad + 1}] = {int(img[bad])} out of range [1, {self.n}]")
        img = img.copy()
        img.flags.writeable = False
        object.__setattr__(self, "image", img)
        zero = img - 1
        zero.flags.writeable = False
        object.__setattr__(self, "_zero", zero)

    @classmethod
    def from_zero_based(cls, f0: Iterable[int]) -> "MappingTable":
        f0 = np.asarray(f0, dtype=np.int64)
        return cls(int(f0.shape[0]), f0 + 1)

    @property
    def zero_based(self) -> np.ndarray:
        return self._zero

    def __call__(self, x: int) -> int:
        return int(self.image[x - 1])

    def __eq__(self, other):
        if not isinstance(other, MappingTable):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.image, other.image))

    def __hash__(self):
        return hash((self.n, self.image.tobytes()))

    def __repr__(self):
        head = " ".join(map(str, self.image[:8].tolist()))
        tail = " ..." if self.n > 8 else ""
        return f"MappingTable(n={self.n}, image=[{head}{tail}])"


@dataclass(frozen=True)
class IndegreeProfile:
    counts: Mapping[int, int]
    coalescence: Fraction

    @property
    def n(self) -> int:
        return sum(self.counts.values())


def indegree_profile(f: MappingTable) -> IndegreeProfile:
    """Tally ``|f^-1(y)|`` over all ``y`` and return the exact indegree variance."""
    indeg = np.bincount(f.zero_based, minlength=f.n)
    values, freq = np.unique(indeg, return_counts=True)
    counts = {int(j): int(c) for j, c in zip(values, freq)}
    second = sum(j * j * c for j, c in counts.items())
    return IndegreeProfile(counts, Fraction(second, f.n) - 1)


# --- factored integers -----------------------------------------------------


@dataclass(frozen=True)
class FactoredInteger:
    """A positive integer held as ``{prime: exponent}``; the empty map is 1."""

    factors: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        clean = {int(p): int(e) for p, e in sorted(self.factors.items()) if e}
        for p, e in clean.items():
            if e < 0 or p < 2:
                raise ValueError(f"invalid factor {p}^{e}")
        object.__setattr__(self, "factors", clean)

    def log(self) -> float:
        return math.fsum(e * math.log(p) for p, e in self.factors.items())

    @property
    def value(self) -> int:
        out = 1
        for p, e in self.factors.items():
            out *= p**e
        return out

    def divides(self, other: "FactoredInteger") -> bool:
        return all(other.factors.get(p, 0) >= e for p, e in self.factors.items())

    def __int__(self):
        return self.value

    def __hash__(self):
        return hash(tuple(self.factors.items()))

    def __str__(self):
        if not self.factors:
            return "1"
        return "*".join(f"{p}^{e}" if e > 1 else str(p) for p, e in self.factors.items())


def log_value(x: FactoredInteger) -> float:
    """Natural logarithm ``sum(e * ln p)``; 0 for the empty factorization."""
    return x.log()


@lru_cache(maxsize=8)
def _spf_table(limit: int) -> np.ndarray:
    """Smallest-prime-factor sieve on ``[0, limit]``."""
    spf = np.arange(limit + 1, dtype=np.int64)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == p:
            np.minimum(spf[p * p :: p], p, out=spf[p * p :: p])
    return spf


def _sieve_for(limit: int) -> np.ndarray:
    # round up so one table serves a whole batch of nearby sizes
    size = 1 << max(6, int(limit - 1).bit_length())
    return _spf_table(size)


def _factor(m: int, spf: np.ndarray) -> dict[int, int]:
    out: dict[int, int] = {}
    while m > 1:
        p = int(spf[m])
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        out[p] = e
    return out


def factor_lengths(lengths: Iterable[int]) -> tuple[FactoredInteger, FactoredInteger]:
    """Return ``(lcm, product)`` of positive integers, both factored."""
    tally = Counter(int(x) for x in lengths)
    if not tally:
        return FactoredInteger(), FactoredInteger()
    spf = _sieve_for(max(tally))
    lcm: dict[int, int] = {}
    prod: dict[int, int] = {}
    for length, mult in tally.items():
        for p, e in _factor(length, spf).items():
            if e > lcm.get(p, 0):
                lcm[p] = e
            prod[p] = prod.get(p, 0) + e * mult
    return FactoredInteger(lcm), FactoredInteger(prod)


# --- cycle structure -------------------------------------------------------


@dataclass(frozen=True)
class CycleStructure:
    cyclic_count: int
    cycle_lengths: tuple[int, ...]
    cycle_count: int
    order_T: FactoredInteger
    product_B: FactoredInteger

    @property
    def log_T(self) -> float:
        return self.order_T.log()

    @property
    def log_B(self) -> float:
        return self.product_B.log()

    # short aliases matching the usual notation
    Z = property(lambda self: self.cyclic_count)
    C = property(lambda self: self.cycle_count)


def cycle_structure_0(f0: np.ndarray) -> CycleStructure:
    """Cycle structure of a 0-indexed image array (no validation)."""
    f0 = np.ascontiguousarray(f0)
    if f0.dtype not in (np.int32, np.int64):
        f0 = f0.astype(np.int64)
    alive = _kernels.cyclic_mask(f0)
    lengths = _kernels.cycle_lengths(f0, alive)
    lengths = tuple(sorted(lengths.tolist(), reverse=True))
    order, product = factor_lengths(lengths)
    return CycleStructure(int(alive.sum()), lengths, len(lengths), order, product)


def cycle_structure(f: MappingTable) -> CycleStructure:
    """Cyclic nodes, cycle lengths, and the factored order T and product B of ``f``."""
    return cycle_structure_0(f.zero_based)


def cyclic_count(f: MappingTable) -> int:
    """Number of cyclic nodes, counted by closed walks; independent of the peeling kernel."""
    return int(_kernels.walk_cyclic_count(f.zero_based))


# --- text format -----------------------------------------------------------
#
#   n k
#   f(1) f(2) ... f(n)
#
# k = 0 means unrestricted; k >= 2 demands every indegree be 0 or k.


def _parse_int(tok: str, line: int, col: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise MappingFormatError(f"expected integer {what}, got {tok!r}", line, col) from None


def _token_columns(text: str) -> list[tuple[int, str]]:
    out = []
    col = 0
    for tok in text.split():
        col = text.index(tok, col)
        out.append((col + 1, tok))
        col += len(tok)
    return out


def _parse_record(header: str, body: str, first_line: int) -> tuple[MappingTable, int]:
    toks = _token_columns(header)
    if len(toks) != 2:
        raise MappingFormatError(f"header must be 'n k', got {header.strip()!r}", first_line)
    n = _parse_int(toks[0][1], first_line, toks[0][0], "n")
    k = _parse_int(toks[1][1], first_line, toks[1][0], "k")
    if n < 1:
        raise MappingFormatError(f"n must be >= 1, got {n}", first_line, toks[0][0])
    if k < 0 or k == 1:
        raise MappingFormatError(f"k must be 0 or >= 2, got {k}", first_line, toks[1][0])
    line = first_line + 1
    entries = _token_columns(body)
    if len(entries) != n:
        raise MappingFormatError(f"expected {n} entries, found {len(entries)}", line)
    image = np.empty(n, dtype=np.int64)
    for i, (col, tok) in enumerate(entries):
        v = _parse_int(tok, line, col, f"entry {i + 1}")
        if not 1 <= v <= n:
            raise MappingFormatError(f"entry {v} out of range [1,{n}]", line, col)
        image[i] = v
    if k >= 2:
        indeg = np.bincount(image - 1, minlength=n)
        # an overfull node is the likelier typo, so it is reported first
        bad = np.flatnonzero(indeg > k)
        if not bad.size:
            bad = np.flatnonzero((indeg != 0) & (indeg != k))
        if bad.size:
            y = int(bad[0]) + 1
            raise MappingFormatError(
                f"node {y} has indegree {int(indeg[y - 1])} not in {{0,{k}}}", line
            )
    return MappingTable(n, image), k


def _open_text(source) -> tuple[IO[str], bool]:
    if isinstance(source, (str, os.PathLike)):
        return open(source, "r", encoding="utf-8"), True
    return source, False


def read_mappings(source) -> Iterator[MappingTable]:
    """Parse one or more records separated by ``--`` lines from a path or text stream."""
    fh, owned = _open_text(source)
    try:
        lines = fh.read().splitlines()
    finally:
        if owned:
            fh.close()
    record: list[tuple[int, str]] = []

    def flush():
        content = [(no, s) for no, s in record if s.strip()]
        if not content:
            return None
        if len(content) != 2:
            raise MappingFormatError(
                f"record needs a header line and an image line, got {len(content)} lines",
                content[0][0],
            )
        (hno, header), (_, body) = content
        return _parse_record(header, body, hno)[0]

    for no, text in enumerate(lines, start=1):
        if text.strip() == "--":
            table = flush()
            if table is not None:
                yield table
            record = []
        else:
            record.append((no, text))
    table = flush()
    if table is not None:
        yield table


def read_mapping(source) -> MappingTable:
    """Parse a single mapping; a plain string is treated as a path unless it contains a newline."""
    if isinstance(source, str) and "\n" in source:
        source = io.StringIO(source)
    tables = list(read_mappings(source))
    if len(tables) != 1:
        raise MappingFormatError(f"expected exactly one mapping, found {len(tables)}")
    return tables[0]


def write_mapping(f: MappingTable, stream: IO[str], k: int = 0) -> None:
    stream.write(f"{f.n} {k}\n")
    stream.write(" ".join(map(str, f.image.tolist())))
    stream.write("\n")


def write_mappings(tables: Iterable[MappingTable], stream: IO[str], k: int = 0) -> None:
    for i, f in enumerate(tables):
        if i:
            stream.write("--\n")
        write_mapping(f, stream, k)
