"""Monte Carlo and deterministic studies of cycle statistics.

The studies: a Table-1 style comparison of sampled means of T and B against
their predictors, a lognormality check, a concentration check for Z, and a
first-hit estimator.  Sample ``i`` of a study always draws from the random
stream keyed by ``(seed, study key, i)``.  Results therefore do not depend on
how work is split across threads.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np
from scipy.special import logsumexp, ndtr

from . import __version__
from .cyclestats import (
    exact_expected_B,
    exact_expected_T,
    lognormal_params,
    mode_and_concentration,
    predictor_logEB,
    predictor_logET,
)
from .ffpoly import power_table, primes_congruent
from .fungraph import cycle_structure_0
from .sampler import sample_0k_core, sample_0k_cyclic_count, sample_0k_zero_based

__all__ = [
    "ClassSpec",
    "parse_class",
    "ExperimentRecord",
    "ResourceGuardError",
    "run_table1",
    "summarize_table1",
    "write_csv",
    "read_csv",
    "records_to_json",
    "CSV_HEADER",
    "LognormalReport",
    "ks_distance",
    "log_mean_exp",
    "run_lognormality",
    "FirstHitConfig",
    "FirstHitResult",
    "estimate_first_hit",
    "first_hit_trials",
    "ConcentrationReport",
    "sample_concentration",
]

CSV_HEADER = ("class", "p", "n", "lambda", "samples", "mean_log_T", "mean_log_B", "R_T", "R_B", "seed")
DEFAULT_WORK_LIMIT = 10**10


class ResourceGuardError(RuntimeError):
    """Planned work exceeds the configured limit."""


def _stream(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(x) for x in key))
    return np.random.Generator(np.random.PCG64(ss))


def _label_key(label: str) -> int:
    return zlib.crc32(label.encode("utf-8"))


def _pool_map(fn: Callable, items: Sequence, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def log_mean_exp(logs: Iterable[float]) -> float:
    """``log(mean(exp(x)))`` with max-shifted accumulation."""
    arr = np.asarray(list(logs) if not isinstance(logs, np.ndarray) else logs, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("empty sample")
    return float(logsumexp(arr) - math.log(arr.size))


# --- function classes ------------------------------------------------------


@dataclass(frozen=True)
class ClassSpec:
    label: str
    kind: str  # "unrestricted" | "0k" | "poly"
    k: int = 1  # for "0k": restricted indegree; for "poly": the exponent d
    modulus: int = 2
    residue: int = 1

    def lam(self, p: int) -> int:
        if self.kind == "unrestricted":
            return 1
        if self.kind == "0k":
            return self.k - 1
        return math.gcd(p - 1, self.k) - 1

    def nodes(self, p: int) -> int:
        return p if self.kind == "poly" else p - 1


_POLY_RE = re.compile(r"^x\^(\d+)\s*\+\s*a(?:\s*[:(,]?\s*(?:p\s*[=≡]\s*)?(\d+)\s*mod\s*(\d+)\)?)?$")
_ZEROK_RE = re.compile(r"^\{\s*0\s*,\s*(\d+)\s*\}(?:-mappings?)?$")


def parse_class(label: str) -> ClassSpec:
    """Parse ``unrestricted``, ``{0,k}`` / ``{0,k}-mapping``, ``x^d+a`` or ``x^d+a:R mod M``."""
    text = label.strip()
    if text.lower() in ("unrestricted", "unrestricted mappings", "all"):
        return ClassSpec("unrestricted", "unrestricted", 1, 2, 1)
    m = _ZEROK_RE.match(text)
    if m:
        k = int(m.group(1))
        if not 2 <= k <= 64:
            raise ValueError(f"{{0,k}} class needs 2 <= k <= 64, got {k}")
        return ClassSpec(f"{{0,{k}}}-mapping", "0k", k, k, 1)
    m = _POLY_RE.match(text.replace(" ", "")) or _POLY_RE.match(text)
    if m:
        d = int(m.group(1))
        if d < 2:
            raise ValueError(f"polynomial degree must be >= 2, got {d}")
        if m.group(2) is not None:
            residue, modulus = int(m.group(2)), int(m.group(3))
            name = f"x^{d}+a:{residue}mod{modulus}"
        else:
            residue, modulus = 1, d
            name = f"x^{d}+a"
        return ClassSpec(name, "poly", d, modulus, residue)
    raise ValueError(f"unrecognised function class {label!r}")


# --- Table 1 ---------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentRecord:
    class_label: str
    p: int
    n: int
    lam: Fraction
    samples: int
    mean_log_T: float
    mean_log_B: float
    R_T: float
    R_B: float
    seed: int

    @classmethod
    def build(cls, label, p, n, lam, samples, mean_log_T, mean_log_B, seed) -> "ExperimentRecord":
        lam = Fraction(lam)
        return cls(
            label,
            p,
            n,
            lam,
            samples,
            mean_log_T,
            mean_log_B,
            mean_log_T / predictor_logET(n, lam),
            mean_log_B / predictor_logEB(n, lam),
            seed,
        )

    def row(self) -> list[str]:
        return [
            self.class_label,
            str(self.p),
            str(self.n),
            str(self.lam),
            str(self.samples),
            repr(self.mean_log_T),
            repr(self.mean_log_B),
            repr(self.R_T),
            repr(self.R_B),
            str(self.seed),
        ]


def _mapping_logs(spec: ClassSpec, p: int, samples: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    n = p - 1
    key = _label_key(spec.label)
    lt = np.empty(samples)
    lb = np.empty(samples)
    for i in range(samples):
        rng = _stream(seed, key, p, i)
        if spec.kind == "unrestricted":
            f0 = rng.integers(0, n, size=n, dtype=np.int64)
        else:
            f0 = sample_0k_zero_based(n // spec.k, spec.k, rng)
        cs = cycle_structure_0(f0)
        lt[i] = cs.log_T
        lb[i] = cs.log_B
    return lt, lb


def _poly_logs(spec: ClassSpec, p: int) -> tuple[np.ndarray, np.ndarray]:
    powers = power_table(p, spec.k)
    lt = np.empty(p)
    lb = np.empty(p)
    for a in range(p):
        cs = cycle_structure_0((powers + a) % p)
        lt[a] = cs.log_T
        lb[a] = cs.log_B
    return lt, lb


def _primes_for(spec: ClassSpec, start: int, count: int) -> list[int]:
    if spec.kind == "0k":
        return primes_congruent(start, spec.k, count, 1)
    return primes_congruent(start, spec.modulus, count, spec.residue)


def run_table1(
    classes: Iterable[str | ClassSpec],
    prime_start: int = 1000,
    num_primes: int = 10,
    samples_per_prime: int | None = 500,
    seed: int = 0,
    threads: int = 1,
    work_limit: int = DEFAULT_WORK_LIMIT,
) -> list[ExperimentRecord]:
    """One record per (class, prime) comparing ``log mean T`` and ``log mean B`` to their predictors.

    Mapping classes draw ``samples_per_prime`` functions on ``n = p - 1``
    nodes (``None`` means ``p`` samples).  Polynomial classes run over all
    ``p`` shifts ``a``, with no randomness involved.
    """
    if prime_start < 3:
        raise ValueError(f"prime_start must be >= 3, got {prime_start}")
    specs = [c if isinstance(c, ClassSpec) else parse_class(c) for c in classes]
    tasks = []
    work = 0
    for spec in specs:
        for p in _primes_for(spec, prime_start, num_primes):
            if spec.kind == "poly":
                if spec.lam(p) < 1:
                    raise ValueError(f"{spec.label} at p={p} is a permutation (gcd(p-1, d) = 1)")
                count = p
            else:
                count = p if samples_per_prime is None else samples_per_prime
            if count < 1:
                raise ValueError("samples_per_prime must be >= 1")
            work += count * p
            tasks.append((spec, p, count))
    if work > work_limit:
        raise ResourceGuardError(f"planned work {work} node-visits exceeds limit {work_limit} (raise work_limit)")

    def run(task):
        spec, p, count = task
        if spec.kind == "poly":
            lt, lb = _poly_logs(spec, p)
        else:
            lt, lb = _mapping_logs(spec, p, count, seed)
        return ExperimentRecord.build(
            spec.label, p, spec.nodes(p), spec.lam(p), count, log_mean_exp(lt), log_mean_exp(lb), seed
        )

    return _pool_map(run, tasks, threads)


def summarize_table1(records: Iterable[ExperimentRecord]) -> dict[str, dict]:
    """Per class: mean of the per-prime ratios ``R_T`` and ``R_B``."""
    groups: dict[str, list[ExperimentRecord]] = {}
    for rec in records:
        groups.setdefault(rec.class_label, []).append(rec)
    out = {}
    for label, recs in groups.items():
        lams = sorted({r.lam for r in recs})
        out[label] = {
            "lambda": lams[0] if len(lams) == 1 else lams,
            "primes": len(recs),
            "R_T": math.fsum(r.R_T for r in recs) / len(recs),
            "R_B": math.fsum(r.R_B for r in recs) / len(recs),
        }
    return out


def write_csv(records: Iterable[ExperimentRecord], stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for rec in records:
        w.writerow(rec.row())


def read_csv(stream) -> list[ExperimentRecord]:
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    rows = list(csv.reader(stream))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"CSV header must be {','.join(CSV_HEADER)}")
    out = []
    for row in rows[1:]:
        label, p, n, lam, samples, mlt, mlb, rt, rb, seed = row
        out.append(
            ExperimentRecord(
                label, int(p), int(n), Fraction(lam), int(samples),
                float(mlt), float(mlb), float(rt), float(rb), int(seed),
            )
        )
    return out


def _jsonable(rec: ExperimentRecord) -> dict:
    d = asdict(rec)
    d["class"] = d.pop("class_label")
    d["lambda"] = str(d.pop("lam"))
    return d


def records_to_json(records: Sequence[ExperimentRecord], metadata: dict | None = None) -> str:
    """JSON document with the CSV columns per record plus run metadata."""
    meta = {"tool": "cyclemetrics", "version": __version__}
    meta.update(metadata or {})
    doc = {"metadata": meta, "records": [_jsonable(r) for r in records]}
    return json.dumps(doc, indent=2, sort_keys=False)


# --- lognormality ----------------------------------------------------------


def ks_distance(x: Iterable[float]) -> float:
    """Two-sided Kolmogorov-Smirnov distance between the sample's ECDF and the standard normal CDF."""
    xs = np.sort(np.asarray(x, dtype=np.float64))
    m = xs.size
    if m == 0:
        raise ValueError("empty sample")
    cdf = ndtr(xs)
    i = np.arange(1, m + 1)
    upper = np.max(i / m - cdf)
    lower = np.max(cdf - (i - 1) / m)
    return float(max(upper, lower))


@dataclass(frozen=True)
class LognormalReport:
    n: int
    k: int
    samples: int
    ks_T: float
    ks_B: float
    mean_chi: float
    mu_n: float
    sigma_n: float


def _cycle_logs(n: int, k: int, samples: int, seed: int, key: int, threads: int):
    r = n // k

    def one(i):
        cs = cycle_structure_0(sample_0k_core(r, k, _stream(seed, key, i)))
        return cs.log_T, cs.log_B

    pairs = _pool_map(one, range(samples), threads)
    arr = np.array(pairs, dtype=np.float64).reshape(samples, 2)
    return arr[:, 0], arr[:, 1]


def run_lognormality(n: int, k: int, samples: int = 2000, seed: int = 0, threads: int = 1) -> LognormalReport:
    """KS distances of ``(log T - mu_n)/sigma_n`` and ``(log B - mu_n)/sigma_n`` from N(0,1)."""
    if k < 2 or n % k:
        raise ValueError(f"n={n} must be a multiple of k={k} >= 2")
    if samples < 100:
        raise ValueError(f"need at least 100 samples, got {samples}")
    params = lognormal_params(n, k - 1)
    lt, lb = _cycle_logs(n, k, samples, seed, 0x4C4E, threads)
    chi = (lb - lt) / params.sigma_n
    return LognormalReport(
        n,
        k,
        samples,
        ks_distance((lt - params.mu_n) / params.sigma_n),
        ks_distance((lb - params.mu_n) / params.sigma_n),
        float(chi.mean()),
        params.mu_n,
        params.sigma_n,
    )


# --- first hit -------------------------------------------------------------


@dataclass(frozen=True)
class FirstHitConfig:
    """Draw until ``log T >= threshold_log`` (or ``log B`` with ``statistic="B"``).

    When ``threshold_log`` is omitted it is ``a * log E[T]`` (or ``E[B]``)
    with the exact expectation.  This needs ``r <= 45``.  The exponent ``a``
    defaults to ``log^(-1/4) n``.
    """

    n: int
    k: int
    a: float | None = None
    threshold_log: float | None = None
    max_draws: int = 10**6
    seed: int = 0
    statistic: str = "T"

    def __post_init__(self):
        if self.max_draws < 1:
            raise ValueError("max_draws must be >= 1")
        if self.k < 2 or self.n % self.k:
            raise ValueError(f"n={self.n} must be a multiple of k={self.k} >= 2")
        if self.statistic not in ("T", "B"):
            raise ValueError(f"statistic must be 'T' or 'B', got {self.statistic!r}")
        if self.threshold_log is not None and self.threshold_log < 0:
            raise ValueError("threshold_log must be >= 0")

    def resolved_threshold(self) -> float:
        if self.threshold_log is not None:
            return self.threshold_log
        a = self.a if self.a is not None else math.log(self.n) ** -0.25
        expect = exact_expected_T if self.statistic == "T" else exact_expected_B
        value = expect(self.n, self.k)
        return a * (math.log(value.numerator) - math.log(value.denominator))


class FirstHitResult(NamedTuple):
    hit: bool
    draws: int


def estimate_first_hit(cfg: FirstHitConfig, stream_index: int = 0) -> FirstHitResult:
    threshold = cfg.resolved_threshold()
    # absorbs rounding in sum(e * log p) when the threshold is itself a log of an integer
    slack = 1e-12 * max(1.0, abs(threshold))
    rng = _stream(cfg.seed, 0x4648, stream_index)
    r = cfg.n // cfg.k
    for t in range(1, cfg.max_draws + 1):
        cs = cycle_structure_0(sample_0k_core(r, cfg.k, rng))
        value = cs.log_T if cfg.statistic == "T" else cs.log_B
        if value >= threshold - slack:
            return FirstHitResult(True, t)
    return FirstHitResult(False, cfg.max_draws)


def first_hit_trials(cfg: FirstHitConfig, trials: int, threads: int = 1) -> list[FirstHitResult]:
    """Independent repetitions of :func:`estimate_first_hit`, one stream per trial."""
    return _pool_map(lambda i: estimate_first_hit(cfg, i), range(trials), threads)


# --- concentration ---------------------------------------------------------


@dataclass(frozen=True)
class ConcentrationReport:
    n: int
    k: int
    samples: int
    xi1: float
    xi2: float
    m_sharp: float
    epsilon_n: float
    inside: int
    fraction: float
    degenerate: bool


def sample_concentration(n: int, k: int, samples: int, seed: int = 0, threads: int = 1) -> ConcentrationReport:
    """Fraction of sampled {0,k}-mappings whose cyclic-node count lies in ``[xi1, xi2]``.

    When the window exponent ``epsilon_n >= 1`` the window is meaningless;
    nothing is sampled and the fraction is reported as 1.0.
    """
    bounds = mode_and_concentration(n, k)
    if bounds.degenerate:
        return ConcentrationReport(
            n, k, 0, bounds.xi1, bounds.xi2, bounds.m_sharp, bounds.epsilon_n, 0, 1.0, True
        )
    r = n // k
    zs = np.array(
        _pool_map(lambda i: sample_0k_cyclic_count(r, k, _stream(seed, 0x434F, i)), range(samples), threads)
    )
    inside = int(np.count_nonzero((zs >= bounds.xi1) & (zs <= bounds.xi2)))
    return ConcentrationReport(
        n, k, samples, bounds.xi1, bounds.xi2, bounds.m_sharp, bounds.epsilon_n, inside, inside / samples, False
    )
