"""Jointly Gaussian variables defined as linear maps of independent sources."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .scalar import TWO_PI_E


class DegenerateConditioningError(ValueError):
    def __init__(self, variable: str):
        super().__init__(f"conditioning covariance is singular: {variable} is degenerate "
                         "(zero variance or a linear function of the other conditioning variables)")
        self.variable = variable


@dataclass(frozen=True)
class LinearGaussianModel:
    """``variable = sum_j coeff[j] * source_j`` with independent zero-mean sources."""

    sources: tuple[str, ...]
    variances: np.ndarray
    variables: Mapping[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def build(cls, source_variances: Mapping[str, float],
              variables: Mapping[str, Mapping[str, float]]) -> "LinearGaussianModel":
        names = tuple(source_variances)
        var = np.array([float(source_variances[s]) for s in names])
        if np.any(var < 0):
            raise ValueError("source variances must be nonnegative")
        rows = {}
        for name, coeffs in variables.items():
            row = np.zeros(len(names))
            for src, c in coeffs.items():
                row[names.index(src)] += float(c)
            rows[name] = row
        return cls(names, var, rows)

    def _matrix(self, names: Iterable[str]) -> np.ndarray:
        names = list(names)
        if not names:
            return np.zeros((0, len(self.sources)))
        return np.array([self.variables[n] for n in names])

    def covariance(self, names: Iterable[str]) -> np.ndarray:
        A = self._matrix(names)
        return (A * self.variances) @ A.T

    def known(self, names: Iterable[str]) -> list[str]:
        """Names present in the model; absent ones (empty states) are constants."""
        return [n for n in names if n in self.variables]

    def conditional_covariance(self, target: Iterable[str], given: Iterable[str]) -> np.ndarray:
        target = self.known(target)
        given = self.known(given)
        S = self.covariance(target + given)
        k = len(target)
        Saa, Sab, Sbb = S[:k, :k], S[:k, k:], S[k:, k:]
        if not given:
            return Saa
        return Saa - Sab @ np.linalg.pinv(Sbb, rcond=1e-13, hermitian=True) @ Sab.T

    def conditional_entropy(self, target: str, given: Iterable[str]) -> float:
        v = float(self.conditional_covariance([target], given)[0, 0])
        return 0.5 * float(np.log2(TWO_PI_E * v))

    def mutual_information(self, left: Iterable[str], right: Iterable[str],
                           given: Iterable[str] = ()) -> float:
        left, right, given = self.known(left), self.known(right), self.known(given)
        if not left or not right:
            return 0.0

        def logdet(names):
            C = self.conditional_covariance(names, given)
            sign, val = np.linalg.slogdet(C)
            return val / np.log(2.0) if sign > 0 else -np.inf

        return 0.5 * (logdet(left) + logdet(right) - logdet(left + right))

    def sample(self, names: Iterable[str], n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw ``n`` joint samples; returns an array of shape ``(len(names), n)``."""
        A = self._matrix(names)
        z = rng.standard_normal((len(self.sources), n)) * np.sqrt(self.variances)[:, None]
        return A @ z


def sample_conditional_entropy(samples: np.ndarray, names: list[str]) -> float:
    """Entropy of the first row given the rest, from the sample covariance.

    The conditional variance is the Schur complement of the conditioning
    block; a pivot-free Cholesky is used so a degenerate conditioning
    variable can be reported by name.
    """
    S = np.cov(samples)
    S = np.atleast_2d(S)
    Sbb = S[1:, 1:]
    scale = max(float(np.max(np.abs(np.diag(S)))), 1e-300)
    m = len(names) - 1
    L = np.zeros_like(Sbb)
    for j in range(m):
        d = Sbb[j, j] - L[j, :j] @ L[j, :j]
        if d <= 1e-10 * scale:
            raise DegenerateConditioningError(names[j + 1])
        L[j, j] = np.sqrt(d)
        for i in range(j + 1, m):
            L[i, j] = (Sbb[i, j] - L[i, :j] @ L[j, :j]) / L[j, j]
    if m:
        w = np.linalg.solve(L, S[1:, 0])
        var = S[0, 0] - w @ w
    else:
        var = S[0, 0]
    return 0.5 * float(np.log2(TWO_PI_E * var))
