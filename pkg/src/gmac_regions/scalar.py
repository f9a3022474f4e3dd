"""Scalar primitives shared by every region evaluator.

All logarithms are base 2, so rates come out in bits per channel use.
"""

from __future__ import annotations

import math

import numpy as np

TWO_PI_E = 2.0 * math.pi * math.e


class DomainError(ValueError):
    """Raised when a scalar primitive receives an argument outside its domain."""


def _finite(x: float, name: str) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite, got {x!r}")
    return x


def capacity_fn(snr: float) -> float:
    """Gaussian capacity ``0.5 * log2(1 + snr)`` for a nonnegative finite SNR."""
    snr = _finite(snr, "snr")
    if snr < 0:
        raise DomainError(f"snr must be >= 0, got {snr!r}")
    return 0.5 * math.log2(1.0 + snr)


def db_to_linear(x_db: float) -> float:
    """Power-dB to linear: ``10**(x_db/10)``."""
    x_db = _finite(x_db, "value_db")
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0:
        raise DomainError(f"linear value must be > 0, got {x!r}")
    return 10.0 * math.log10(x)


def gaussian_entropy(variance: float) -> float:
    """Differential entropy in bits of a scalar Gaussian with the given variance."""
    variance = _finite(variance, "variance")
    if variance <= 0:
        raise DomainError(f"variance must be > 0, got {variance!r}")
    return 0.5 * math.log2(TWO_PI_E * variance)


def safe_log2(p):
    """Elementwise log2 with ``log2(0) = 0``; pair with ``p * safe_log2(p)``."""
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    mask = p > 0
    np.log2(p, out=out, where=mask)
    return out


# Array versions used by the vectorised evaluators. Unlike capacity_fn they
# accept signed arguments (> -1) and +inf, and apply the 0/0 -> 0 convention
# through ratio().

def cap(x):
    """``0.5*log2(1+x)`` on arrays; +inf maps to +inf and -1 to -inf."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return 0.5 * np.log2(1.0 + x)


def ratio(num, den):
    """``num/den`` with ``0/0 = 0`` and ``x/0 = +inf`` for ``x > 0``."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = num / den
    out = np.where(num == 0, 0.0, out)
    return np.where((den == 0) & (num > 0), np.inf, out)
