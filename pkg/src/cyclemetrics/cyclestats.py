"""Laws of the cyclic-node count Z and expectations of the order T and product B.

Covers the exact and asymptotic distribution of Z over uniform
{0,k}-mappings, its mode and concentration window, the permutation moments
``M_m = E[T]`` and ``mu_m = E[B]`` over ``S_m``, the exact expectations of T
and B over {0,k}-mappings, and the asymptotic predictors built from the
integral constant ``I``.  All logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

import numpy as np
from scipy import integrate
from scipy.special import gammaln

__all__ = [
    "ZDistribution",
    "ConcentrationBounds",
    "PredictorSet",
    "LognormalParams",
    "GuardError",
    "PARTITION_LIMIT",
    "exact_prob_Z",
    "loggamma_prob_Z",
    "approx_prob_Z",
    "z_distribution",
    "mode_and_concentration",
    "exact_M",
    "exact_mu",
    "log_mu",
    "mu_partition_sum",
    "exact_expected_T",
    "exact_expected_B",
    "constants",
    "predictor_logET",
    "predictor_logEB",
    "lognormal_params",
]

PARTITION_LIMIT = 45


class GuardError(ValueError):
    """Input exceeds a size guard of an exact computation."""


def _split(n: int, k: int) -> int:
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if n < k or n % k:
        raise ValueError(f"n={n} is not a positive multiple of k={k}")
    return n // k


# --- distribution of Z -----------------------------------------------------


def exact_prob_Z(n: int, k: int, m: int) -> Fraction:
    """``P(Z = m) = lam * k^(m-1) * C(r-1, m-1) / C(n-1, m)`` as an exact rational."""
    r = _split(n, k)
    if m < 1 or m > r:
        return Fraction(0)
    lam = k - 1
    return Fraction(lam * k ** (m - 1) * math.comb(r - 1, m - 1), math.comb(n - 1, m))


_STIRLING = (1.0 / 12, -1.0 / 360, 1.0 / 1260, -1.0 / 1680, 1.0 / 1188)


def _stirling_tail(x: np.ndarray) -> np.ndarray:
    inv = 1.0 / x
    inv2 = inv * inv
    acc = np.zeros_like(x)
    for c in reversed(_STIRLING):
        acc = acc * inv2 + c
    return acc * inv


def _lgamma_diff(a, b) -> np.ndarray:
    """``lnGamma(a) - lnGamma(b)`` without the cancellation of subtracting two huge values."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    a, b = np.broadcast_arrays(a, b)
    out = np.empty(a.shape)
    big = np.minimum(a, b) >= 10.0
    ab, bb = a[big], b[big]
    d = ab - bb
    # (a - 1/2) ln a - (b - 1/2) ln b - (a - b), rearranged around ln(a/b) = log1p(d/b)
    out[big] = (ab - 0.5) * np.log1p(d / bb) + d * np.log(bb) - d + _stirling_tail(ab) - _stirling_tail(bb)
    small = ~big
    out[small] = gammaln(a[small]) - gammaln(b[small])
    return out


def _log_pmf(n: int, k: int, m: np.ndarray) -> np.ndarray:
    r = n // k
    lam = k - 1
    m = np.asarray(m, dtype=np.float64)
    return (
        math.log(lam)
        + np.log(m)
        + (m - 1) * math.log(k)
        + _lgamma_diff(r, r - m + 1)
        + _lgamma_diff(n - m, n)
    )


def loggamma_prob_Z(n: int, k: int, m: int) -> float:
    """Gamma-function form of ``P(Z = m)``, evaluated in log space; 0 outside ``1..r``."""
    r = _split(n, k)
    if m < 1 or m > r:
        return 0.0
    return float(np.exp(_log_pmf(n, k, np.array([m]))[0]))


def approx_prob_Z(n: int, k: int, m: int) -> float:
    """Main asymptotic term ``(lam m / n) exp(-lam m^2 / 2n)``."""
    r = _split(n, k)
    if m < 1 or m > r:
        return 0.0
    lam = k - 1
    return lam * m / n * math.exp(-lam * m * m / (2.0 * n))


@dataclass(frozen=True)
class ZDistribution:
    """Probabilities of ``Z = 1, 2, ...``; ``probabilities[m-1] = P(Z = m)``.

    Floating-point methods stop where ``P(Z = m)`` underflows to 0
    (``m`` about ``40 sqrt(n/lam)``); entries past the stored ones are 0.
    """

    n: int
    k: int
    method: str
    probabilities: tuple | np.ndarray

    @property
    def r(self) -> int:
        return self.n // self.k

    @property
    def lam(self) -> int:
        return self.k - 1

    def pmf(self, m: int):
        if 1 <= m <= len(self.probabilities):
            return self.probabilities[m - 1]
        return Fraction(0) if self.method == "exact-rational" else 0.0

    def total(self):
        if self.method == "exact-rational":
            return sum(self.probabilities, Fraction(0))
        return math.fsum(self.probabilities)

    def mode(self) -> int:
        if self.method == "exact-rational":
            best = max(range(len(self.probabilities)), key=lambda i: self.probabilities[i])
        else:
            best = int(np.argmax(self.probabilities))
        return best + 1

    def mass_between(self, lo: float, hi: float):
        """``P(lo <= Z <= hi)`` for real bounds."""
        a = max(1, math.ceil(lo))
        b = min(len(self.probabilities), math.floor(hi))
        if a > b:
            return Fraction(0) if self.method == "exact-rational" else 0.0
        chunk = self.probabilities[a - 1 : b]
        if self.method == "exact-rational":
            return sum(chunk, Fraction(0))
        return math.fsum(chunk)


def z_distribution(n: int, k: int, method: str = "exact-loggamma") -> ZDistribution:
    """The whole law of Z by one of ``exact-rational``, ``exact-loggamma``, ``asymptotic``."""
    r = _split(n, k)
    lam = k - 1
    upto = min(r, int(40.0 * math.sqrt(n / lam)) + 16)
    if method == "exact-rational":
        probs = tuple(exact_prob_Z(n, k, m) for m in range(1, r + 1))
    elif method == "exact-loggamma":
        probs = np.exp(_log_pmf(n, k, np.arange(1, upto + 1)))
    elif method == "asymptotic":
        m = np.arange(1, upto + 1, dtype=np.float64)
        probs = lam * m / n * np.exp(-lam * m * m / (2.0 * n))
    else:
        raise ValueError(f"unknown method {method!r}")
    if isinstance(probs, np.ndarray):
        probs.flags.writeable = False
    return ZDistribution(n, k, method, probs)


@dataclass(frozen=True)
class ConcentrationBounds:
    m_sharp: float
    epsilon_n: float
    xi1: float
    xi2: float

    @property
    def degenerate(self) -> bool:
        """True when the window exponent is at least 1 and the bounds lose meaning."""
        return self.epsilon_n >= 1.0


def mode_and_concentration(n: int, k: int) -> ConcentrationBounds:
    """Mode ``m#`` (root of ``lam m (m+1) = n``) and the window ``[m#^(1-eps), m#^(1+eps)]``."""
    _split(n, k)
    lam = k - 1
    ratio = n / lam
    m_sharp = -0.5 + 0.5 * math.sqrt(1.0 + 4.0 * ratio)
    eps = math.log(math.sqrt(ratio)) ** -0.75
    return ConcentrationBounds(m_sharp, eps, m_sharp ** (1.0 - eps), m_sharp ** (1.0 + eps))


# --- permutation moments ---------------------------------------------------


def _partitions(m: int, largest: int | None = None) -> Iterator[list[tuple[int, int]]]:
    """Partitions of ``m`` as lists of ``(part, multiplicity)`` with parts decreasing."""
    if largest is None:
        largest = m
    if m == 0:
        yield []
        return
    for part in range(min(m, largest), 0, -1):
        for c in range(m // part, 0, -1):
            for rest in _partitions(m - c * part, part - 1):
                yield [(part, c)] + rest


def _cycle_type_sums(m: int) -> tuple[int, int]:
    """``(sum of lcm * count, sum of product * count)`` over cycle types of ``S_m``."""
    fact = math.factorial(m)
    lcm_total = 0
    prod_total = 0
    for parts in _partitions(m):
        denom = 1
        lcm = 1
        prod = 1
        for j, c in parts:
            denom *= j**c * math.factorial(c)
            lcm = math.lcm(lcm, j)
            prod *= j**c
        count = fact // denom
        lcm_total += lcm * count
        prod_total += prod * count
    return lcm_total, prod_total


def _guard_partition(m: int, limit: int) -> None:
    if not 1 <= m <= limit:
        raise GuardError(f"m={m} outside the partition-sum range 1..{limit}")


@lru_cache(maxsize=None)
def exact_M(m: int, limit: int = PARTITION_LIMIT) -> Fraction:
    """Expected order (lcm of cycle lengths) of a uniform permutation of ``m`` points."""
    _guard_partition(m, limit)
    return Fraction(_cycle_type_sums(m)[0], math.factorial(m))


@lru_cache(maxsize=None)
def mu_partition_sum(m: int, limit: int = PARTITION_LIMIT) -> Fraction:
    """Expected product of cycle lengths over ``S_m`` from cycle-type counts."""
    _guard_partition(m, limit)
    return Fraction(_cycle_type_sums(m)[1], math.factorial(m))


@lru_cache(maxsize=4)
def _mu_rational_table(upto: int) -> tuple[Fraction, ...]:
    f = [Fraction(1)]
    for m in range(upto):
        s = sum((j + 1) * f[m - j] for j in range(m + 1))
        f.append(Fraction(s, m + 1))
    return tuple(f)


def _mu_float_table(upto: int) -> np.ndarray:
    # coefficients of exp(x/(1-x)); grows like exp(2 sqrt(m)), still below 1e308 at m = 1e5
    f = np.empty(upto + 1)
    f[0] = 1.0
    w = np.arange(1, upto + 2, dtype=np.float64)
    for m in range(upto):
        f[m + 1] = np.dot(w[: m + 1], f[m::-1]) / (m + 1)
    return f


_mu_cache: dict[str, np.ndarray] = {}


def exact_mu(m: int, exact: bool = False, limit: int = PARTITION_LIMIT):
    """``mu_m = [x^m] exp(x/(1-x))`` via ``(m+1) f_{m+1} = sum_j (j+1) f_{m-j}``.

    With ``exact=True`` the recurrence runs over rationals (``m <= limit``);
    otherwise in floating point, valid up to ``m = 10**5``.
    """
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    if exact:
        if m > limit:
            raise GuardError(f"exact mu_m limited to m <= {limit}")
        return _mu_rational_table(max(PARTITION_LIMIT, m))[m]
    if m > 100_000:
        raise GuardError("floating-point mu_m limited to m <= 100000")
    table = _mu_cache.get("f")
    if table is None or table.shape[0] <= m:
        table = _mu_float_table(max(m, 1024))
        _mu_cache["f"] = table
    return float(table[m])


def log_mu(m: int) -> float:
    return math.log(exact_mu(m))


def _expected(n: int, k: int, moment, limit: int) -> Fraction:
    r = _split(n, k)
    if r > limit:
        raise GuardError(f"r={r} exceeds the exact-expectation limit {limit}")
    return sum((exact_prob_Z(n, k, m) * moment(m) for m in range(1, r + 1)), Fraction(0))


def exact_expected_T(n: int, k: int, limit: int = PARTITION_LIMIT) -> Fraction:
    """``E[T] = sum_m P(Z=m) M_m`` over uniform {0,k}-mappings, exactly.

    ``limit`` caps ``r = n/k``; the partition sums behind ``M_m`` grow like p(r).
    """
    return _expected(n, k, lambda m: exact_M(m, limit), limit)


def exact_expected_B(n: int, k: int, limit: int = PARTITION_LIMIT) -> Fraction:
    """``E[B] = sum_m P(Z=m) mu_m`` over uniform {0,k}-mappings, exactly."""
    return _expected(n, k, lambda m: exact_mu(m, exact=True, limit=limit), limit)


# --- constants and predictors ----------------------------------------------


@dataclass(frozen=True)
class PredictorSet:
    I: float
    beta0: float
    k0: float
    quadrature_error_bound: float


def _integrand(t: float) -> float:
    # log log(e / (1 - e^-t)) = log(1 - log(1 - e^-t))
    return math.log1p(-math.log(-math.expm1(-t)))


def _integrand_near_zero(u: float) -> float:
    # t = e^-u maps (0, 1] to [0, inf); dt = -e^-u du
    t = math.exp(-u)
    if t == 0.0:
        return 0.0
    return _integrand(t) * t


@lru_cache(maxsize=1)
def constants() -> PredictorSet:
    """``I = int_0^inf log log(e/(1-e^-t)) dt`` with ``beta0 = sqrt(8I)``, ``k0 = 1.5 (3I)^(2/3)``.

    Quadrature scheme: ``[0, 1]`` is mapped by ``t = e^-u`` onto ``[0, inf)``,
    which turns the ``log log(1/t)`` singularity into a smooth integrand
    decaying like ``log(1+u) e^-u``; ``[1, 40]`` is integrated directly.  On
    ``t > 40`` the integrand is below ``e^-t``, bounding the dropped tail by
    ``e^-40``.  The reported error bound adds the two adaptive-quadrature
    estimates and that tail.
    """
    head, err_head = integrate.quad(_integrand_near_zero, 0.0, np.inf, epsabs=1e-13, epsrel=1e-13, limit=200)
    body, err_body = integrate.quad(_integrand, 1.0, 40.0, epsabs=1e-13, epsrel=1e-13, limit=200)
    tail_bound = math.exp(-40.0)
    I = head + body
    beta0 = math.sqrt(8.0 * I)
    k0 = 1.5 * (3.0 * I) ** (2.0 / 3.0)
    return PredictorSet(I, beta0, k0, err_head + err_body + tail_bound)


def predictor_logET(n: float, lam: float) -> float:
    """Main term ``k0 (n/lam)^(1/3) / log^(2/3)(n/lam)`` of ``log E[T]``."""
    x = n / lam
    if x <= 1:
        raise ValueError(f"n/lam must exceed 1, got {x}")
    return constants().k0 * x ** (1.0 / 3.0) / math.log(x) ** (2.0 / 3.0)


def predictor_logEB(n: float, lam: float) -> float:
    """Main term ``1.5 (n/lam)^(1/3)`` of ``log E[B]``."""
    x = n / lam
    if x <= 0:
        raise ValueError(f"n/lam must be positive, got {x}")
    return 1.5 * x ** (1.0 / 3.0)


@dataclass(frozen=True)
class LognormalParams:
    mu_n: float
    sigma_n: float
    variant: str


def lognormal_params(n: float, lam: float = 1, variant: str = "restricted") -> LognormalParams:
    """Centering ``0.5 log^2 sqrt(n/lam)`` and scale ``log^(3/2) sqrt(n/lam) / sqrt 3``.

    ``variant="unrestricted"`` ignores ``lam`` and uses 1.
    """
    if variant == "unrestricted":
        lam = 1
    elif variant != "restricted":
        raise ValueError(f"unknown variant {variant!r}")
    x = n / lam
    if x <= 1:
        raise ValueError(f"n/lam must exceed 1, got {x}")
    h = math.log(math.sqrt(x))
    return LognormalParams(0.5 * h * h, h**1.5 / math.sqrt(3.0), variant)
