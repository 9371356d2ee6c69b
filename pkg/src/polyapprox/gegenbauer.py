"""Fourier-Gegenbauer analysis of zonal polyharmonic kernels.

The polynomials ``P_j`` here are orthonormal on (-1, 1) for the weight
``w(t) = (1 - t**2)**(lam - 1/2)``, and ``a_j(psi) = int psi P_j w dt``.
Closed forms are provided for the two families

    F_beta(t) = (2 - 2t)**beta,    G_beta(t) = 1/2 (2 - 2t)**beta log(2 - 2t),

together with a quadrature route for arbitrary zonal functions.  A zonal
kernel is fundamental on the sphere iff no coefficient vanishes; in even
dimension the rescaled kernel loses this property at finitely many radii.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
import math
import warnings

import numpy as np
from scipy.special import digamma, gammaln, rgamma, roots_jacobi, roots_legendre

from .kernels import KernelSpec, eval_psi_scaled

DEFAULT_ZERO_THRESHOLD = 1e-10


class AccuracyWarning(UserWarning):
    """Quadrature did not settle within the node-count cap."""


@dataclass(frozen=True)
class GegenbauerIndex:
    lam: float
    j: int

    def __post_init__(self):
        if not self.lam > -0.5:
            raise ValueError(f"need lam > -1/2, got {self.lam}")
        if int(self.j) != self.j or self.j < 0:
            raise ValueError(f"degree must be a nonnegative integer, got {self.j}")


def weight_mass(lam: float) -> float:
    """``int_{-1}^{1} (1 - t**2)**(lam - 1/2) dt``."""
    return math.exp(0.5 * math.log(math.pi) + gammaln(lam + 0.5) - gammaln(lam + 1.0))


def _recurrence_b(j, lam):
    if j == 1:
        return math.sqrt(1.0 / (2.0 * lam + 2.0))
    return math.sqrt(j * (j + 2 * lam - 1) / (4.0 * (j + lam) * (j + lam - 1)))


def orthonormal_gegenbauer(jmax: int, lam: float, t):
    """Values of ``P_0, ..., P_jmax`` at ``t``; result has shape ``(jmax + 1,) + t.shape``.

    Uses the symmetric three-term recurrence of the orthonormal family, which
    covers ``lam = 0`` (normalized Chebyshev) without special cases.
    """
    GegenbauerIndex(lam, jmax)
    t = np.asarray(t, dtype=float)
    out = np.empty((jmax + 1,) + t.shape)
    out[0] = 1.0 / math.sqrt(weight_mass(lam))
    if jmax >= 1:
        out[1] = t * out[0] / _recurrence_b(1, lam)
    for j in range(1, jmax):
        out[j + 1] = (t * out[j] - _recurrence_b(j, lam) * out[j - 1]) / _recurrence_b(j + 1, lam)
    return out


def gegenbauer_poly(idx: GegenbauerIndex, t):
    """Orthonormal Gegenbauer polynomial ``P_j^(lam)(t)``."""
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1):
        raise ValueError("t must lie in [-1, 1]")
    return orthonormal_gegenbauer(idx.j, idx.lam, t)[idx.j]


def c_const(j: int, lam: float) -> float:
    """Rodrigues constant: ``P_j = c (1-t^2)^(1/2-lam) d^j/dt^j (1-t^2)^(j+lam-1/2)``."""
    GegenbauerIndex(lam, j)
    if j == 0 and lam <= 0:
        # P_0 is the constant 1/sqrt(mass); equals 1/sqrt(pi) at lam = 0
        return 1.0 / math.sqrt(weight_mass(lam))
    logc = ((j + lam) * math.log(2.0) - 0.5 * math.log(2 * math.pi)
            + 0.5 * math.log(j + lam) + gammaln(j + lam) + 0.5 * gammaln(j + 2 * lam)
            - gammaln(2 * j + 2 * lam) - 0.5 * gammaln(j + 1))
    return (-1) ** j * math.exp(logc)


def _F_prefactor(j, lam):
    # c_{j,lam} 2^(j + 2 lam) Gamma(j + lam + 1/2); the 2^(2 lam) comes from the
    # Jacobian of t -> (t + 1) / 2 acting on both weight factors
    return c_const(j, lam) * math.exp((j + 2 * lam) * math.log(2.0) + gammaln(j + lam + 0.5))


def _F_beta_part(beta, j, lam):
    # 2^(2 beta) Gamma(beta+1) Gamma(beta+lam+1/2) / Gamma(beta+j+2lam+1), without 1/Gamma(beta-j+1)
    return math.exp(2 * beta * math.log(2.0) + gammaln(beta + 1) + gammaln(beta + lam + 0.5)
                    - gammaln(beta + j + 2 * lam + 1))


def coeff_F(beta: float, j: int, lam: float) -> float:
    """Closed-form ``a_j(F_beta)``; exactly zero for integer ``beta`` and ``j >= beta + 1``."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    GegenbauerIndex(lam, j)
    return _F_prefactor(j, lam) * _F_beta_part(beta, j, lam) * float(rgamma(beta - j + 1))


def _is_pole(x):
    return x <= 0 and float(x).is_integer()


def tau(beta: float, j: int, lam: float) -> float:
    """``log 4 + Psi(beta+1) + Psi(beta+lam+1/2) - Psi(beta-j+1) - Psi(beta+j+2lam+1)``."""
    args = (beta + 1, beta + lam + 0.5, beta - j + 1, beta + j + 2 * lam + 1)
    if min(args) <= 0:
        raise ValueError(f"digamma arguments must be positive, got {args}")
    return _tau_unchecked(beta, j, lam)


def _tau_unchecked(beta, j, lam):
    return float(math.log(4.0) + digamma(beta + 1) + digamma(beta + lam + 0.5)
                 - digamma(beta - j + 1) - digamma(beta + j + 2 * lam + 1))


def _as_half_integer(x) -> Fraction:
    q = Fraction(x).limit_denominator(1 << 20)
    if q.denominator not in (1, 2) or abs(float(q) - float(x)) > 1e-12:
        raise ValueError(f"{x} is not an integer or half-integer")
    return q


def _digamma_split(x: Fraction):
    """``Psi(x) = rational - gamma - 2 log2 * [x half-integer]`` for positive x in Z/2."""
    if x <= 0:
        raise ValueError(f"digamma argument must be positive, got {x}")
    if x.denominator == 1:
        return sum((Fraction(1, m) for m in range(1, int(x))), Fraction(0)), 0
    n = int(x - Fraction(1, 2))
    return sum((Fraction(2, 2 * m - 1) for m in range(1, n + 1)), Fraction(0)), 1


def tau_exact(beta, j: int, lam) -> Fraction:
    """``tau`` as an exact rational via harmonic-number formulas.

    Applies when every digamma argument is a positive integer or half-integer
    and the Euler-gamma and ``log 2`` contributions cancel (integer ``beta``
    and ``lam``, ``j <= beta``).  Raises ``ValueError`` otherwise.
    """
    b, lm = _as_half_integer(beta), _as_half_integer(lam)
    half = Fraction(1, 2)
    plus = (b + 1, b + lm + half)
    minus = (b - j + 1, b + j + 2 * lm + 1)
    total, log2_count = Fraction(0), 2  # log 4 = 2 log 2
    for x in plus:
        q, h = _digamma_split(x)
        total += q
        log2_count -= 2 * h
    for x in minus:
        q, h = _digamma_split(x)
        total -= q
        log2_count += 2 * h
    if log2_count != 0:
        raise ValueError(f"tau({beta}, {j}, {lam}) is not rational")
    return total


def coeff_G(beta: float, j: int, lam: float) -> float:
    """Closed-form ``a_j(G_beta) = 1/2 a_j(F_beta) tau(beta, j, lam)``.

    At the poles of ``Psi(beta - j + 1)`` (integer ``beta``, ``j >= beta + 1``)
    the product is replaced by its limit: ``d/dx [1/Gamma(x)]`` at ``x = -n``
    equals ``(-1)**n n!``.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    GegenbauerIndex(lam, j)
    x = beta - j + 1
    if _is_pole(x):
        n = int(-x)
        return 0.5 * _F_prefactor(j, lam) * _F_beta_part(beta, j, lam) * (-1) ** n * math.factorial(n)
    return 0.5 * coeff_F(beta, j, lam) * _tau_unchecked(beta, j, lam)


def coeff_G_method(beta: float, j: int) -> str:
    """Which closed-form branch :func:`coeff_G` uses."""
    return "closed_form_limit" if _is_pole(beta - j + 1) else "closed_form"


# --- quadrature ---------------------------------------------------------------

GRADED_PANELS = 48


@lru_cache(maxsize=64)
def _nodes(n: int, lam: float, j: int = 0):
    """Composite rule on [-1, 1] for ``int g(t) w(t) dt`` with ``g`` singular at t = 1.

    [-1, 0]: Gauss-Jacobi carrying ``(1+t)^(lam-1/2)``.
    [0, 1 - 2^-P]: geometric panels toward 1, Gauss-Legendre on each.
    [1 - 2^-P, 1]: Gauss-Jacobi carrying ``(1-t)^(lam-1/2)``.
    Returns nodes and weights that already include ``w``.  The two
    Gauss-Jacobi pieces see analytic integrands, so their size is capped
    (scipy's Jacobi nodes lose accuracy for large counts).
    """
    a = lam - 0.5
    n_jac = min(n, 64 + 2 * j)
    u, wu = roots_jacobi(n_jac, 0.0, a)
    t_left = (u - 1) / 2
    w_left = wu * 2.0 ** (-(a + 1)) * (1 - t_left) ** a

    m = max(4, n // 8)
    g, wg = roots_legendre(m)
    ts, ws = [], []
    for p in range(GRADED_PANELS):
        # distance to t = 1 runs over [2^-(p+1), 2^-p]; kept exact for the weight
        half = 2.0 ** -(p + 2)
        s = 2.0 ** -(p + 1) + half * (1 - g)
        ts.append(1 - s)
        ws.append(wg * half * (s * (2 - s)) ** a)
    eta = 2.0**-GRADED_PANELS
    v, wv = roots_jacobi(n_jac, a, 0.0)
    s_end = eta * (1 - v) / 2
    t_end = 1 - s_end
    w_end = wv * (eta / 2) ** (a + 1) * (2 - s_end) ** a

    t = np.concatenate([t_left] + ts + [t_end])
    w = np.concatenate([w_left] + ws + [w_end])
    return t, w


def _quad_once(psi, j, lam, n):
    t, w = _nodes(n, lam, j)
    p = orthonormal_gegenbauer(j, lam, t)[j]
    vals = np.asarray(psi(t), dtype=float) * p
    return float(np.dot(w, vals)), float(np.dot(w, np.abs(vals)))


def coeff_numeric(psi, j: int, lam: float, n_quad: int = 200, *, tol: float = 1e-10,
                  max_nodes: int = 3200, full_output: bool = False):
    """Fourier-Gegenbauer coefficient ``int psi P_j w dt`` by quadrature.

    The node count doubles from ``n_quad`` until two successive values agree
    to ``tol`` relative to ``int |psi P_j| w``, or ``max_nodes`` is reached, in
    which case an :class:`AccuracyWarning` is issued.  ``psi`` may have a
    logarithmic or algebraic singularity at ``t = 1``.

    With ``full_output`` returns ``(value, info)`` where ``info`` holds the
    final node count, the last change and a ``converged`` flag.
    """
    GegenbauerIndex(lam, j)
    n = int(n_quad)
    prev, scale = _quad_once(psi, j, lam, n)
    while True:
        cur, scale = _quad_once(psi, j, lam, 2 * n)
        change = abs(cur - prev)
        n *= 2
        converged = change <= tol * max(scale, np.finfo(float).tiny)
        if converged or 2 * n > max_nodes:
            break
        prev = cur
    if not converged:
        warnings.warn(f"quadrature for j={j}, lam={lam} changed by {change:.3g} at n={n}",
                      AccuracyWarning, stacklevel=2)
    if full_output:
        return cur, {"n_quad": n, "change": change, "scale": scale, "converged": converged}
    return cur


# --- reports ------------------------------------------------------------------

@dataclass
class CoeffEntry:
    j: int
    value: float
    method: str
    zero_flag: bool = False
    numeric: float | None = None


@dataclass
class CoeffReport:
    """Fourier-Gegenbauer coefficients of a (rescaled) zonal kernel up to ``J_max``."""

    spec: KernelSpec
    lam: float
    entries: list = field(default_factory=list)
    threshold: float = DEFAULT_ZERO_THRESHOLD

    @property
    def values(self) -> np.ndarray:
        return np.array([e.value for e in self.entries])

    @property
    def zero_indices(self) -> list:
        return [e.j for e in self.entries if e.zero_flag]

    @property
    def fundamental(self) -> bool:
        """No coefficient up to ``J_max`` is flagged as zero."""
        return not self.zero_indices

    def rows(self):
        for e in self.entries:
            yield {"j": e.j, "value": e.value, "method": e.method,
                   "zero_flag": int(e.zero_flag), "numeric": e.numeric}


def zonal_closed_form(spec: KernelSpec, j: int) -> tuple[float, str]:
    """Closed-form ``a_j`` of the rescaled zonal kernel and the branch used."""
    beta, lam = spec.beta, spec.lam
    if not spec.even:
        return coeff_F(beta, j, lam), "closed_form"
    value = coeff_G(beta, j, lam)
    if spec.rho != 1.0:
        value += math.log(spec.rho) * coeff_F(beta, j, lam)
    return value, coeff_G_method(beta, j)


def fundamentality_report(spec: KernelSpec, J_max: int = 10, *, method: str = "closed_form",
                          threshold: float = DEFAULT_ZERO_THRESHOLD,
                          n_quad: int = 200) -> CoeffReport:
    """Coefficients ``a_0 .. a_{J_max}`` of ``psi~_{d,k}`` with zero flags.

    ``method`` is ``"closed_form"``, ``"quadrature"`` or ``"both"``; with
    ``"both"`` the quadrature value is stored alongside and the closed form is
    used for flagging.  A coefficient is flagged when
    ``|a_j| < threshold * max_j' |a_j'|``.
    """
    if method not in ("closed_form", "quadrature", "both"):
        raise ValueError(f"unknown method {method!r}")
    lam = spec.lam
    entries = []
    for j in range(J_max + 1):
        numeric = None
        if method != "closed_form":
            numeric = coeff_numeric(lambda t: eval_psi_scaled(spec, t), j, lam, n_quad)
        if method == "quadrature":
            value, how = numeric, "quadrature"
            numeric = None
        else:
            value, how = zonal_closed_form(spec, j)
        entries.append(CoeffEntry(j, value, how, numeric=numeric))
    scale = max(abs(e.value) for e in entries)
    for e in entries:
        e.zero_flag = abs(e.value) < threshold * scale
    return CoeffReport(spec=spec, lam=lam, entries=entries, threshold=threshold)


def degenerate_taus(d: int, k: int) -> list:
    """Exact ``tau(k - d/2, j, (d-2)/2)`` for ``0 <= j <= k - d/2``; empty for odd ``d``."""
    spec = KernelSpec(d, k)
    if not spec.even:
        return []
    beta, lam = spec.k - spec.d // 2, (spec.d - 2) // 2
    return [tau_exact(beta, j, lam) for j in range(beta + 1)]


def degenerate_radii(d: int, k: int) -> list:
    """Radii ``rho_j = exp(-tau_j / 2)`` where coefficient ``j`` of ``psi~`` vanishes."""
    return [math.exp(-float(t) / 2) for t in degenerate_taus(d, k)]
