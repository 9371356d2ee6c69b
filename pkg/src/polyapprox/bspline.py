"""Polyharmonic B-splines obtained by applying the discrete k-fold Laplacian.

``eval_raw`` gives ``sum_z c_z phi(|x - z|)`` without normalization.  The
normalizing constant ``kappa`` is calibrated numerically so that integer
translates sum to one; ``eval_B`` divides by it.  Calibrations are cached in
memory and in a JSON file (``$POLYAPPROX_CACHE`` or
``~/.cache/polyapprox/calibration.json``).
"""
from __future__ import annotations

from dataclasses import dataclass, asdict
from fractions import Fraction
from functools import lru_cache
import json
import logging
import math
import os
from pathlib import Path
import tempfile
import threading

import numpy as np
from filelock import FileLock
from scipy.special import gammaln

from .kernels import KernelSpec
from .stencil import build_stencil

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-6
DEFAULT_START_RADIUS = 4.0
DEFAULT_MAX_RADIUS = 128.0


class CalibrationError(RuntimeError):
    """The lattice sums did not reach the requested tolerance."""


@dataclass(frozen=True)
class BsplineCalibration:
    """Normalization and lattice-sum bounds for one ``(d, k)``.

    ``kappa`` is the value of ``sum_z eval_raw(x - z)``; ``M_hat`` and
    ``Mp_hat`` estimate ``sup_x sum_z |B(x-z)|`` and
    ``sup_x sum_z |x-z| |B(x-z)|``.  ``tail_bound`` is the relative
    truncation error estimate for ``kappa`` at ``trunc_radius``.
    """

    d: int
    k: int
    kappa: float
    M_hat: float
    Mp_hat: float
    trunc_radius: float
    tail_bound: float
    tol: float
    kappa_exact: float = float("nan")

    def __post_init__(self):
        if self.kappa == 0:
            raise CalibrationError("partition constant vanished")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "BsplineCalibration":
        fields = cls.__dataclass_fields__
        return cls(**{key: val for key, val in data.items() if key in fields})


def _phi_array(d, k, r):
    p = 2 * k - d
    if d % 2:
        return r**p
    safe = np.where(r > 0, r, 1)
    return np.where(r > 0, safe**p * np.log(safe), 0)


def _auto_dtype(d, k, x):
    # long double when rounding in the stencil cancellation exceeds ~1e-14 absolute
    if x.size == 0:
        return float
    rmax = float(np.sqrt(np.max(np.sum(x * x, axis=-1)))) + k
    big = abs(float(_phi_array(d, k, np.array(rmax))))
    err = build_stencil(d, k).abs_sum() * max(big, 1.0) * np.finfo(float).eps
    return float if err < 1e-14 else np.longdouble


def eval_raw(d: int, k: int, x, dtype=None):
    """``sum_z c_z phi_{d,k}(|x - z|)`` over the stencil of ``Lbar**k``.

    ``x`` has shape ``(..., d)``; in 1D a bare array of abscissae is accepted.
    With ``dtype=None`` the sum is carried out in long double whenever the
    cancellation between stencil terms would cost more than about 1e-14
    absolute, and the result is returned as float64.
    """
    KernelSpec(d, k)
    x = np.asarray(x, dtype=float if dtype is None else dtype)
    if d == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.shape[-1] != d:
        raise ValueError(f"points must have trailing dimension {d}")
    work = _auto_dtype(d, k, x) if dtype is None else dtype
    x = x.astype(work, copy=False)
    out = np.zeros(x.shape[:-1], dtype=work)
    # +z and -z are added as a pair first, which makes the result exactly even
    for z, c in _paired_stencil(d, k):
        zz = np.asarray(z, dtype=work)
        term = _phi_array(d, k, np.sqrt(np.sum((x - zz) ** 2, axis=-1)))
        if any(z):
            term = term + _phi_array(d, k, np.sqrt(np.sum((x + zz) ** 2, axis=-1)))
        out += c * term
    return out.astype(float) if dtype is None else out


@lru_cache(maxsize=None)
def _paired_stencil(d, k):
    """One representative ``z`` of each pair ``{z, -z}``, with its coefficient."""
    return tuple((z, float(c)) for z, c in sorted(build_stencil(d, k).coeffs.items())
                 if tuple(-v for v in z) >= z)


def kappa_closed_form(d: int, k: int) -> float:
    """Partition constant from the distributional identity ``Lap**k phi = c delta``.

    ``Lbar`` approximates ``-Lap`` so the lattice sum of ``eval_raw`` equals
    ``(-1)**k c``.  The constant ``c`` is found by applying the Laplacian
    ``k - 1`` times to ``r**a`` / ``r**a log r`` terms and then using the
    fundamental solution of the Laplacian.
    """
    KernelSpec(d, k)
    # terms: (exponent, has_log) -> rational coefficient
    terms = {(2 * k - d, d % 2 == 0): Fraction(1)}
    for _ in range(k - 1):
        nxt: dict = {}
        for (a, lg), c in terms.items():
            f = Fraction(a * (a + d - 2))
            if f:
                nxt[(a - 2, lg)] = nxt.get((a - 2, lg), 0) + c * f
            if lg and 2 * a + d - 2:
                nxt[(a - 2, False)] = nxt.get((a - 2, False), 0) + c * (2 * a + d - 2)
        # polynomial terms r**(2m), m >= 0, vanish under later Laplacians or carry no mass
        terms = {key: c for key, c in nxt.items() if c != 0}
    if d == 1:
        lead, mass = terms.get((1, False), 0), 2.0
    elif d == 2:
        lead, mass = terms.get((0, True), 0), 2 * math.pi
    else:
        surface = 2 * math.pi ** (d / 2) / math.gamma(d / 2)
        lead, mass = terms.get((2 - d, False), 0), -(d - 2) * surface
    return (-1) ** k * float(lead) * mass


def reference_constant(d: int, k: int) -> float:
    """The closed-form constant ``C_{d,k}`` with the undefined ``m`` read as ``k``.

    Only used as a cross-check: ``1 / C_{d,k}`` agrees with ``kappa`` up to sign.
    """
    KernelSpec(d, k)
    m = k
    prod = 1.0
    for i in range(m):
        if 2 * i == 2 * m - d:
            continue
        prod *= 2 * k - 2 * i - d
    return math.exp(gammaln(d / 2)) / (2**k * math.pi ** (d / 2) * math.factorial(k - 1) * prod)


# --- lattice sums -----------------------------------------------------------

def _ball_lattice(d, radius):
    n = int(math.ceil(radius)) + 1
    g = np.arange(-n, n + 1)
    pts = np.stack(np.meshgrid(*([g] * d), indexing="ij"), axis=-1).reshape(-1, d)
    return pts[np.sum(pts * pts, axis=1) <= (radius + math.sqrt(d)) ** 2]


def window(s):
    """C-infinity radial window: 1 on ``s <= 1/2``, 0 on ``s >= 1``."""
    t = np.clip((np.asarray(s, dtype=float) - 0.5) / 0.5, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return b / (a + b)


def _sum_dtype(d, k, radius, npts, target):
    # float64 unless rounding in the stencil cancellation could reach the target
    st = build_stencil(d, k)
    big = abs(float(_phi_array(d, k, np.array(radius + k, dtype=float))))
    err = st.abs_sum() * max(big, 1.0) * np.finfo(float).eps * math.sqrt(npts)
    return float if err < 0.01 * target else np.longdouble


def lattice_sums(d, k, x, radius, target=1e-9):
    """Windowed lattice sums of raw B, ``|raw B|`` and ``|x-z| |raw B|`` around each ``x``.

    Terms are weighted by ``window(|x - z| / radius)``.  Returns shape ``(len(x), 3)``.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    Z = _ball_lattice(d, radius)
    dtype = _sum_dtype(d, k, radius, len(Z), target)
    out = np.empty((len(x), 3))
    for i, xi in enumerate(x):
        y = xi - Z
        r = np.sqrt(np.sum(y * y, axis=1))
        keep = r < radius
        y, r = y[keep], r[keep]
        v = eval_raw(d, k, y, dtype=dtype)
        w = window(r / radius)
        av = np.abs(v) * w
        out[i] = (float(np.sum(v * w)), float(np.sum(av)), float(np.sum(r * av)))
    return out


def richardson(s_coarse, s_fine, order=2.0):
    """Extrapolate sums at radii ``R`` and ``2R`` assuming an ``R**-order`` tail."""
    f = 2.0**order
    return s_fine + (s_fine - s_coarse) / (f - 1)


def partition_sum(d, k, x, calibration: BsplineCalibration | None = None, radius=None):
    """``sum_z B(x - z)`` at each row of ``x``, windowed at the calibration radius."""
    cal = calibration or calibrate(d, k)
    radius = cal.trunc_radius if radius is None else radius
    sums = lattice_sums(d, k, x, radius, target=cal.tol * abs(cal.kappa))
    return sums[:, 0] / cal.kappa


def _calibrate(d, k, tol, start, max_radius):
    x0 = np.full((1, d), 0.5)
    R = start
    prev = lattice_sums(d, k, x0, R)[0, 0]
    while True:
        if 2 * R > max_radius:
            raise CalibrationError(
                f"kappa for d={d}, k={k} not within tol={tol:g} by radius {max_radius:g}"
            )
        cur = lattice_sums(d, k, x0, 2 * R, target=tol * abs(prev))[0, 0]
        tail = abs(cur - prev) / abs(cur)
        R, prev = 2 * R, cur
        if tail <= tol:
            break
    kappa, radius = float(cur), R

    # B is even in each coordinate and symmetric under permutations, so the
    # cell [0, 1/2]^d covers every fractional offset.
    npts = 9 if d == 1 else (5 if d == 2 else 3)
    g = np.linspace(0.0, 0.5, npts)
    xs = np.stack(np.meshgrid(*([g] * d), indexing="ij"), axis=-1).reshape(-1, d)
    r_small = 8.0
    a = lattice_sums(d, k, xs, r_small)
    b = lattice_sums(d, k, xs, 2 * r_small)
    abs_ext = richardson(a[:, 1], b[:, 1], order=2.0)
    M_hat = np.max(abs_ext + np.abs(abs_ext - b[:, 1])) / abs(kappa)
    mom_ext = richardson(a[:, 2], b[:, 2], order=1.0)
    Mp_hat = np.max(mom_ext + np.abs(mom_ext - b[:, 2])) / abs(kappa)
    return BsplineCalibration(
        d=d, k=k, kappa=kappa, M_hat=float(max(M_hat, 1.0)), Mp_hat=float(Mp_hat),
        trunc_radius=float(radius), tail_bound=float(tail), tol=tol,
        kappa_exact=kappa_closed_form(d, k),
    )


def cache_path() -> Path:
    env = os.environ.get("POLYAPPROX_CACHE")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "polyapprox" / "calibration.json"


def _read_cache(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, ValueError):
        return {}


def _write_cache_entry(path, key, entry):
    path.parent.mkdir(parents=True, exist_ok=True)
    with FileLock(str(path) + ".lock"):
        data = _read_cache(path)
        data[key] = entry
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            json.dump(data, fh, indent=1, sort_keys=True)
        os.replace(tmp, path)


_memory: dict = {}
_locks: dict = {}
_locks_guard = threading.Lock()


def _key_lock(key):
    with _locks_guard:
        return _locks.setdefault(key, threading.Lock())


def calibrate(d: int, k: int, tol: float = DEFAULT_TOL, *, use_cache: bool = True,
              start_radius: float = DEFAULT_START_RADIUS,
              max_radius: float = DEFAULT_MAX_RADIUS) -> BsplineCalibration:
    """Calibrate ``kappa``, ``M_hat`` and ``Mp_hat`` for ``B_{d,k}``.

    ``kappa`` is the lattice sum of :func:`eval_raw` at ``x0 = (1/2, ..., 1/2)``
    with a smooth radial window whose radius is doubled from ``start_radius``
    until two successive sums agree to relative ``tol``.  The window removes
    the boundary noise of sharp truncation, so no extrapolation is needed.  Cached results
    computed with a tolerance at least as tight are reused.

    Raises
    ------
    CalibrationError
        If ``max_radius`` is reached first.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    key = f"{d},{k}"
    with _key_lock(key):
        hit = _memory.get(key)
        if use_cache and hit is not None and hit.tol <= tol:
            return hit
        path = cache_path()
        if use_cache:
            entry = _read_cache(path).get(key)
            if entry is not None and entry.get("tol", math.inf) <= tol:
                cal = BsplineCalibration.from_dict(entry)
                _memory[key] = cal
                return cal
        cal = _calibrate(d, k, tol, start_radius, max_radius)
        rel = abs(abs(cal.kappa) - abs(1.0 / reference_constant(d, k))) / abs(cal.kappa)
        if rel > 100 * tol:
            logger.warning("kappa=%g differs from 1/C_{d,k}=%g for d=%d, k=%d",
                           cal.kappa, 1.0 / reference_constant(d, k), d, k)
        elif math.copysign(1, cal.kappa) != math.copysign(1, reference_constant(d, k)):
            logger.info("kappa and 1/C_{d,k} differ in sign for d=%d, k=%d", d, k)
        if use_cache:
            _memory[key] = cal
            try:
                _write_cache_entry(path, key, cal.to_dict())
            except OSError as exc:
                logger.warning("could not write calibration cache %s: %s", path, exc)
        return cal


def clear_memory_cache():
    _memory.clear()


def eval_B(d: int, k: int, x, calibration: BsplineCalibration | None = None):
    """Normalized B-spline ``eval_raw / kappa``; calibrates on demand."""
    cal = calibration or calibrate(d, k)
    return eval_raw(d, k, x) / cal.kappa


def eval_B_h(d: int, k: int, h: float, x, calibration: BsplineCalibration | None = None):
    """Dilated B-spline ``h**-d B(x / h)``."""
    if not h > 0:
        raise ValueError("h must be positive")
    return h ** (-d) * eval_B(d, k, np.asarray(x, dtype=float) / h, calibration)


def eval_B_h_stencil(d: int, k: int, h: float, x, calibration: BsplineCalibration | None = None):
    """Dilated B-spline from the stencil at step ``h``: ``h**-2k sum_z c_z phi(|x - h z|) / kappa``.

    Agrees with :func:`eval_B_h` because the stencil annihilates the
    ``log h`` polynomial term in even dimension.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    cal = calibration or calibrate(d, k)
    x = np.asarray(x, dtype=np.longdouble)
    if d == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    out = np.zeros(x.shape[:-1], dtype=np.longdouble)
    hh = np.longdouble(h)
    for z, c in build_stencil(d, k).coeffs.items():
        diff = x - hh * np.asarray(z, dtype=np.longdouble)
        r = np.sqrt(np.sum(diff * diff, axis=-1))
        out += c * _phi_array(d, k, r)
    return (out / hh ** (2 * k) / np.longdouble(cal.kappa)).astype(float)
