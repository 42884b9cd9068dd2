"""Trigonometric-moment positivity on the circle and the tangent criterion.

A measure on the circle is positive iff the Hermitian Toeplitz matrix of its
Fourier coefficients is positive semidefinite for every truncation order.  For
a deforming family of positive measures, the coefficient derivatives must keep
the quadratic form nonnegative on directions where the base form vanishes,
i.e. on the kernel of the base Toeplitz matrix.

Verdicts here are truncated at a finite max frequency N: a violation at some N
is conclusive, while satisfaction is evidence only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from .distributions import RadonMeasureSpec, StructuredDistribution
from .errors import DomainError

TWO_PI = 2.0 * np.pi
HERMITIAN_TOL = 1e-12
KERNEL_TOL = 1e-10
PSD_TOL = 1e-10
DENSITY_GRID = 4096


@dataclass(frozen=True, eq=False)
class FourierData:
    """Coefficients a_n for |n| <= N, stored in order n = -N..N."""

    N: int
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=complex)
        if coeffs.shape != (2 * self.N + 1,):
            raise ValueError("need 2N+1 coefficients in order n = -N..N")
        object.__setattr__(self, "coefficients", coeffs)

    def a(self, n: int) -> complex:
        if abs(n) > self.N:
            raise DomainError(f"frequency {n} beyond truncation {self.N}")
        return complex(self.coefficients[n + self.N])

    def hermitian_defect(self) -> float:
        defect = 0.0
        for n in range(self.N + 1):
            defect = max(defect, abs(self.a(-n) - np.conj(self.a(n))))
        return defect

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.coefficients))))
        return self.hermitian_defect() <= tol * scale

    def toeplitz(self) -> np.ndarray:
        """(N+1) x (N+1) matrix T[m, n] = a_{m-n}."""
        col = [self.a(m) for m in range(self.N + 1)]
        row = [self.a(-n) for n in range(self.N + 1)]
        return linalg.toeplitz(col, row)


def fourier_coefficients(obj, N: int) -> FourierData:
    """Coefficients a_n = <obj, e^{-i n theta}> of a measure or distribution
    living on [0, 2 pi).

    Atoms contribute in closed form, c d^k delta_t -> c (i n)^k e^{-i n t};
    densities are integrated by a periodic Riemann sum.
    """
    if N < 0:
        raise DomainError("N must be >= 0")
    n_values = np.arange(-N, N + 1)
    coeffs = np.zeros(2 * N + 1, dtype=complex)
    if isinstance(obj, RadonMeasureSpec):
        atoms = tuple((p, 0, m) for p, m in obj.point_masses)
        density = obj.density
    elif isinstance(obj, StructuredDistribution):
        atoms = obj.atoms
        density = obj.density
    else:
        raise TypeError("expected a RadonMeasureSpec or StructuredDistribution")
    for p, k, c in atoms:
        coeffs += c * (1j * n_values) ** k * np.exp(-1j * n_values * p)
    if density is not None:
        theta = np.linspace(0.0, TWO_PI, DENSITY_GRID, endpoint=False)
        rho = density(theta)
        coeffs += (np.exp(-1j * np.outer(n_values, theta)) @ rho) * (TWO_PI / DENSITY_GRID)
    return FourierData(N, coeffs)


def toeplitz_psd(data: FourierData) -> Tuple[bool, float]:
    """PSD verdict and minimum eigenvalue of the coefficient Toeplitz matrix."""
    if not data.is_hermitian():
        raise DomainError("coefficients are not Hermitian-symmetric")
    T = data.toeplitz()
    eigs = np.linalg.eigvalsh(T)
    norm = float(np.max(np.abs(eigs))) if eigs.size else 0.0
    min_eig = float(eigs[0])
    return min_eig >= -PSD_TOL * max(norm, 1e-300), min_eig


@dataclass(frozen=True)
class TangentVerdict:
    satisfied: bool
    kernel_dim: int
    min_eig: float  # of the projected form; +inf when the kernel is trivial
    projected_norm: float
    max_frequency: int


def tangent_condition(a0: FourierData, a1: FourierData, N: Optional[int] = None) -> TangentVerdict:
    """Check that the derivative coefficients a1 keep the moment form
    nonnegative on the kernel of the base form a0 (truncated at N).

    a0 must be PSD; its quadratic form then vanishes exactly on its kernel,
    where the a1 form is projected and tested for positive semidefiniteness.
    """
    if N is None:
        N = min(a0.N, a1.N)
    if N > a0.N or N > a1.N:
        raise DomainError("requested N beyond the truncation of the data")
    base = FourierData(N, a0.coefficients[a0.N - N : a0.N + N + 1])
    deriv = FourierData(N, a1.coefficients[a1.N - N : a1.N + N + 1])
    ok, _ = toeplitz_psd(base)
    if not ok:
        raise DomainError("base coefficients are not PSD; tangent test undefined")
    if not deriv.is_hermitian():
        raise DomainError("derivative coefficients are not Hermitian-symmetric")
    T0 = base.toeplitz()
    T1 = deriv.toeplitz()
    eigs, vecs = np.linalg.eigh(T0)
    norm0 = float(np.max(np.abs(eigs))) if eigs.size else 0.0
    kernel = vecs[:, np.abs(eigs) <= KERNEL_TOL * max(norm0, 1e-300)]
    if kernel.shape[1] == 0:
        return TangentVerdict(True, 0, np.inf, 0.0, N)
    M = kernel.conj().T @ T1 @ kernel
    M = 0.5 * (M + M.conj().T)
    proj_eigs = np.linalg.eigvalsh(M)
    norm1 = float(np.max(np.abs(np.linalg.eigvalsh(T1)))) if T1.size else 0.0
    min_eig = float(proj_eigs[0])
    satisfied = min_eig >= -PSD_TOL * max(norm1, 1e-300)
    return TangentVerdict(
        satisfied, kernel.shape[1], min_eig, float(np.max(np.abs(proj_eigs))), N
    )
