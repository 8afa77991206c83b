"""Coefficient weights and Dirichlet-polynomial norms.

The binomial weights c_beta(n) = binom(n + beta - 1, n) are the Taylor
coefficients of (1 - x)^(-beta).  With beta = 2/p they control the sharpened
coefficient inequality

    sum |a_n|^2 / c_{2/p}(n)  <=  ||f||_{H^p}^2,   0 < p <= 2,

which is an equality for every normalized reproducing kernel.  Their
multiplicative extension d_beta(n), the coefficients of zeta(s)^beta, plays
the same role for Dirichlet polynomials: the mean of |f(it)|^p over long
vertical segments dominates sum |a_n|^2 / d_{2/p}(n).

That vertical-line mean is computed two ways: by direct averaging over a
growing segment (slowly convergent) and by rewriting the polynomial in one
torus variable per prime, where the limit is an exact torus mean because
(2^{-it}, 3^{-it}, ...) equidistributes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError

# --- binomial weights --------------------------------------------------------


def c_beta_values(beta: float, n: int) -> np.ndarray:
    """c_beta(0..n) via the product recursion c(k) = c(k-1) * (k + beta - 1) / k."""
    if beta <= 0:
        raise DomainError(f"beta must be positive, got {beta}")
    if n < 0:
        raise DomainError("n must be non-negative")
    out = np.empty(n + 1)
    out[0] = 1.0
    for k in range(1, n + 1):
        out[k] = out[k - 1] * (k + beta - 1.0) / k
    return out


def c_beta(beta: float, n: int) -> float:
    return float(c_beta_values(beta, n)[n])


@dataclass(frozen=True)
class CoeffWeightTable:
    beta: float
    values: tuple

    @classmethod
    def build(cls, beta: float, n: int) -> "CoeffWeightTable":
        return cls(beta, tuple(c_beta_values(beta, n)))


# --- multiplicative divisor weights ------------------------------------------


def smallest_prime_factors(n: int) -> np.ndarray:
    """spf[k] = smallest prime factor of k, for k in 0..n (0 and 1 map to 0)."""
    spf = np.zeros(n + 1, dtype=np.int64)
    for i in range(2, n + 1):
        if spf[i] == 0:
            spf[i : n + 1 : i][spf[i : n + 1 : i] == 0] = i
    return spf


@dataclass(frozen=True)
class DivisorWeightTable:
    """d_beta(1..N); multiplicative with d_beta(q^k) = c_beta(k) at prime powers."""

    beta: float
    values: tuple

    def __getitem__(self, n: int) -> float:
        return self.values[n - 1]


def factorize(n: int, spf: np.ndarray) -> list:
    """Prime factorization [(q, k), ...] using a smallest-prime-factor table."""
    out = []
    while n > 1:
        q = int(spf[n])
        k = 0
        while n % q == 0:
            n //= q
            k += 1
        out.append((q, k))
    return out


def d_beta_table(beta: float, n: int) -> DivisorWeightTable:
    if n < 1:
        raise DomainError("table length must be at least 1")
    spf = smallest_prime_factors(n)
    cmax = c_beta_values(beta, int(np.log2(max(n, 2))) + 1)
    values = np.ones(n + 1)
    for m in range(2, n + 1):
        q = int(spf[m])
        k = 0
        rest = m
        while rest % q == 0:
            rest //= q
            k += 1
        values[m] = values[rest] * cmax[k]
    return DivisorWeightTable(beta, tuple(values[1:]))


# --- the coefficient inequality ----------------------------------------------


def coeff_functional(a, p: float) -> float:
    """sum |a_n|^2 / c_{2/p}(n) over the supplied coefficients."""
    a = np.asarray(a, dtype=complex)
    if not 0 < p <= 2:
        raise DomainError(f"the coefficient inequality needs 0 < p <= 2, got {p}")
    weights = c_beta_values(2.0 / p, len(a) - 1)
    return float(np.sum(np.abs(a) ** 2 / weights))


def coeff_inequality_margin(f, p: float, cfg=None, tail_tol: float = 1e-10) -> float:
    """||f||_{H^p}^2 minus the coefficient functional; non-negative up to tolerance.

    The truncation length grows until the estimated tail of the functional is
    below ``tail_tol``; a geometric fit of the trailing coefficients provides
    the tail bound for non-polynomial functions.
    """
    from .functions import Kernel, Polynomial, Scaled, taylor_coeffs
    from .quadrature import DEFAULT_CONFIG, hardy_norm

    cfg = cfg or DEFAULT_CONFIG
    beta = 2.0 / p

    base = f
    scale = 1.0
    while isinstance(base, Scaled):
        scale *= abs(base.c)
        base = base.base

    if isinstance(base, Polynomial):
        coeffs = scale * np.abs(taylor_coeffs(base, base.degree))
    elif isinstance(base, Kernel):
        # terms decay like |w|^(2n) (polynomially corrected); cut when the
        # geometric tail bound clears tail_tol
        q = abs(base.w) ** 2
        n = 16
        while True:
            coeffs = scale * np.abs(taylor_coeffs(base, n))
            term = coeffs[-1] ** 2 / c_beta(beta, n)
            if q < 1 and term * q / (1 - q) < tail_tol:
                break
            n *= 2
            if n > 1 << 14:
                raise ConvergenceError("coefficient tail is not summable to tolerance")
    else:
        n = 32
        while True:
            coeffs = scale * np.abs(taylor_coeffs(f if scale == 1.0 else base, n))
            window = coeffs[-9:]
            if window[0] < 1e-300:
                break
            ratio = (window[-1] / window[0]) ** (1.0 / 8.0)
            if ratio >= 0.999:
                n *= 2
                if n > 1 << 12:
                    raise ConvergenceError("coefficient tail is not summable to tolerance")
                continue
            term = coeffs[-1] ** 2 / c_beta(beta, n)
            if term * ratio**2 / (1 - ratio**2) < tail_tol:
                break
            n *= 2
            if n > 1 << 12:
                raise ConvergenceError("coefficient tail is not summable to tolerance")
        coeffs = scale * np.abs(taylor_coeffs(f if scale == 1.0 else base, n))

    value = hardy_norm(f, p, cfg)
    return value**2 - coeff_functional(coeffs, p)


# --- Dirichlet polynomials ----------------------------------------------------

MAX_BOHR_PRIMES = 6


@dataclass(frozen=True)
class DirichletPolynomial:
    """sum a_n / n^s with coefficients a_1..a_N stored densely."""

    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) == 0:
            raise DomainError("need at least a_1")
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in self.coeffs))

    @property
    def length(self) -> int:
        return len(self.coeffs)

    def line_values(self, t: np.ndarray) -> np.ndarray:
        """Values at s = it along the critical line Re s = 0."""
        t = np.asarray(t, dtype=float)
        acc = np.zeros(t.shape, dtype=complex)
        for n, a in enumerate(self.coeffs, start=1):
            if a != 0:
                acc += a * np.exp(-1j * t * np.log(n))
        return acc


def bohr_lift(f: DirichletPolynomial):
    """Rewrite f as a polynomial in one torus variable per prime.

    Returns (primes, exponent matrix, coefficients) where row m of the matrix
    gives the prime exponents of the m-th surviving term.
    """
    n_max = f.length
    spf = smallest_prime_factors(n_max)
    support = [n for n in range(1, n_max + 1) if f.coeffs[n - 1] != 0]
    primes = sorted({q for n in support for q, _ in factorize(n, spf)})
    if len(primes) > MAX_BOHR_PRIMES:
        raise DomainError(
            f"Bohr lift limited to {MAX_BOHR_PRIMES} distinct primes, "
            f"got {len(primes)}"
        )
    index = {q: j for j, q in enumerate(primes)}
    exponents = np.zeros((len(support), len(primes)), dtype=np.int64)
    coefficients = np.empty(len(support), dtype=complex)
    for m, n in enumerate(support):
        coefficients[m] = f.coeffs[n - 1]
        for q, k in factorize(n, spf):
            exponents[m, index[q]] = k
    return primes, exponents, coefficients


_EINSUM_LETTERS = "abcdef"


def _torus_mean(exponents: np.ndarray, coefficients: np.ndarray, p: float, nodes) -> float:
    """Mean of |sum c_m prod_j z_j^{E_mj}|^p over the product of circles.

    ``nodes`` lists the trapezoid node count per dimension.  The grid is
    evaluated in chunks along the first axis to bound memory; the reduction
    order is fixed, so results are reproducible.
    """
    k = exponents.shape[1]
    if k == 0:
        return float(np.abs(coefficients.sum()) ** p)
    phases = [
        np.exp(2j * np.pi * np.outer(exponents[:, j], np.arange(nodes[j])) / nodes[j])
        for j in range(k)
    ]
    if k == 1:
        values = coefficients @ phases[0]
        return float(np.mean(np.abs(values) ** p))
    spec = "m," + ",".join("m" + _EINSUM_LETTERS[j] for j in range(1, k))
    spec += "->" + _EINSUM_LETTERS[1:k]
    total = 0.0
    count = 0
    for i in range(nodes[0]):
        block = np.einsum(spec, coefficients * phases[0][:, i], *phases[1:])
        total += float(np.sum(np.abs(block) ** p))
        count += block.size
    return total / count


DEFAULT_T_SCHEDULE = (1e2, 1e3, 1e4)


def dirichlet_hp_norm(
    f: DirichletPolynomial,
    p: float,
    method: str = "bohr",
    t_schedule=DEFAULT_T_SCHEDULE,
    nodes_per_dim=None,
    rel_tol: float = 0.02,
) -> float:
    """The limiting vertical-line p-mean of f, raised to 1/p.

    method 'bohr' computes the exact limit object, the torus mean of the
    lifted polynomial; method 'line' averages |f(it)|^p over [-T, T] for each
    T in the schedule and returns the last value, raising ConvergenceError
    (with the trend attached) if the schedule has not settled to ``rel_tol``.
    """
    if p <= 0:
        raise DomainError(f"p must be positive, got {p}")
    if method == "bohr":
        primes, exponents, coefficients = bohr_lift(f)
        if nodes_per_dim is None:
            nodes_per_dim = _default_torus_nodes(exponents)
        mean = _torus_mean(exponents, coefficients, p, nodes_per_dim)
        return mean ** (1.0 / p)
    if method == "line":
        history = []
        for T in t_schedule:
            history.append(_line_mean(f, p, T))
        if len(history) >= 2:
            prev, last = history[-2], history[-1]
            if abs(last - prev) > rel_tol * max(abs(last), 1e-300):
                raise ConvergenceError(
                    f"line average not settled: trend {history}", history
                )
        return history[-1] ** (1.0 / p)
    raise DomainError(f"unknown method {method!r}")


def _default_torus_nodes(exponents: np.ndarray) -> list:
    k = exponents.shape[1]
    nodes = []
    for j in range(k):
        emax = int(exponents[:, j].max())
        base = 8 * (emax + 1) if k >= 4 else 32 * (emax + 1)
        nodes.append(int(min(256 if k <= 2 else 64, max(16, base))))
    return nodes


def _line_mean(f: DirichletPolynomial, p: float, T: float, dt: float = 0.02) -> float:
    n = int(np.ceil(2 * T / dt))
    n += n % 2
    edges = np.linspace(-T, T, n + 1)
    total = 0.0
    for start in range(0, n + 1, 1 << 17):
        block = edges[start : start + (1 << 17)]
        vals = np.abs(f.line_values(block)) ** p
        weights = np.ones(len(block))
        if start == 0:
            weights[0] = 0.5
        if start + len(block) >= n + 1:
            weights[-1] = 0.5
        total += float(np.dot(vals, weights))
    return total / n


def dirichlet_inequality_margin(
    f: DirichletPolynomial, p: float, method: str = "bohr", **kwargs
) -> float:
    """norm^2 minus sum |a_n|^2 / d_{2/p}(n); non-negative up to tolerance for p < 2."""
    if not 0 < p <= 2:
        raise DomainError(f"the Dirichlet inequality needs 0 < p <= 2, got {p}")
    table = d_beta_table(2.0 / p, f.length)
    functional = sum(
        abs(a) ** 2 / table[n] for n, a in enumerate(f.coeffs, start=1) if a != 0
    )
    value = dirichlet_hp_norm(f, p, method=method, **kwargs)
    return value**2 - float(functional)
