"""Cubic-gate decomposition machinery and operator-identity verifiers.

The target unitary is e^{iγx̂³}.  Its N-step approximant factorizes as

    U_N(γ) = (1 + i(γ/N)x̂³)^N,
    1 + i(γ/N)x̂³ = Π_l (1 + γ_l x̂),   γ_l = e^{iπ(4l+1)/6} (γ/N)^{1/3},

because the three γ_l sum to zero pairwise-products-to-zero and multiply to
i γ/N.  Everything here is a polynomial or exponential of the *truncated* x̂
matrix, so the factorization identities hold to machine precision at any
cutoff; only comparisons against e^{iγx̂³} carry truncation caveats and are
evaluated on restricted blocks.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import DimensionError
from .hilbert import FockOperator, interior_block, quadrature_p, quadrature_x


@dataclass(frozen=True)
class CubicDecomposition:
    """Strength γ, step count N, and the three linear factor coefficients."""

    gamma: float
    n: int
    gamma_l: tuple[complex, complex, complex]


def gamma_factors(gamma: float, n: int) -> CubicDecomposition:
    """Factor coefficients γ_l = e^{iπ(4l+1)/6}(γ/N)^{1/3} for l = 0, 1, 2."""
    gamma = float(gamma)
    n = int(n)
    if gamma <= 0.0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if n < 1:
        raise ValueError(f"N must be a positive integer, got {n}")
    mag = (gamma / n) ** (1.0 / 3.0)
    gl = tuple(mag * cmath.exp(1j * math.pi * (4 * l + 1) / 6.0) for l in range(3))
    return CubicDecomposition(gamma, n, gl)


def factor_operator(gamma_l: complex, cutoff: int) -> FockOperator:
    """Non-unitary linear factor I + γ_l x̂."""
    x = quadrature_x(cutoff).matrix
    return FockOperator(np.eye(int(cutoff), dtype=complex) + gamma_l * x, (int(cutoff),))


def u_n_operator(gamma: float, n: int, cutoff: int) -> FockOperator:
    """(I + i(γ/N)x̂³)^N as a matrix power of the truncated x̂."""
    n = int(n)
    if n < 1:
        raise ValueError("N must be >= 1")
    x = quadrature_x(cutoff).matrix
    x3 = np.linalg.matrix_power(x, 3)
    step = np.eye(int(cutoff), dtype=complex) + 1j * (float(gamma) / n) * x3
    return FockOperator(np.linalg.matrix_power(step, n), (int(cutoff),))


def ideal_cubic_gate(gamma: float, cutoff: int) -> FockOperator:
    """e^{iγx̂³} on the truncated space."""
    x = quadrature_x(cutoff).matrix
    x3 = np.linalg.matrix_power(x, 3)
    return FockOperator(expm(1j * float(gamma) * x3), (int(cutoff),), unitary_hint=True)


# Default low-Fock window for approximant-vs-ideal comparisons.  The O(1/N)
# convergence claim applies to bounded position support; above roughly
# γ·(2n)^{3/2} ≈ 2 the per-eigenvalue error saturates and the comparison stops
# being informative, so at γ = 0.03 the window is the lowest ~10 levels.
CONVERGENCE_WINDOW = 10


def u_n_convergence_norms(gamma: float, n_list, cutoff: int,
                          window: int = CONVERGENCE_WINDOW) -> list[float]:
    """Max-norms of U_N(γ) − e^{iγx̂³} on the lowest ``window`` Fock levels."""
    window = int(window)
    if not 1 <= window <= int(cutoff):
        raise DimensionError(f"window {window} outside [1, {cutoff}]")
    ideal = ideal_cubic_gate(gamma, cutoff).matrix
    out = []
    for n in n_list:
        diff = u_n_operator(gamma, n, cutoff).matrix - ideal
        out.append(float(np.abs(diff[:window, :window]).max()))
    return out


def commutator_approx_residual(a: FockOperator, b: FockOperator, t: float,
                               margin: int = 5) -> float:
    """Interior max-norm of e^{iAt}e^{iBt}e^{−iAt}e^{−iBt} − e^{−[A,B]t²}.

    Both inputs must be Hermitian (hint set).  The caller checks the O(t³)
    scaling; for pairs whose commutator is central the group identity is exact
    and the residual is pure truncation noise.
    """
    if not (a.hermitian_hint and b.hermitian_hint):
        raise ValueError("commutator_approx_residual expects Hermitian operators")
    if a.cutoffs != b.cutoffs:
        raise DimensionError("operator cutoffs differ")
    t = float(t)
    am, bm = a.matrix, b.matrix
    lhs = expm(1j * am * t) @ expm(1j * bm * t) @ expm(-1j * am * t) @ expm(-1j * bm * t)
    rhs = expm(-(am @ bm - bm @ am) * t * t)
    return float(np.abs(interior_block(lhs - rhs, a.cutoffs, margin)).max())


@dataclass(frozen=True)
class IdentityReport:
    """Best-fit proportionality between a target operator and a nested-commutator
    construction, with the interior residual after removing the fitted part."""

    name: str
    cutoff: int
    margin: int
    fitted_constant: float
    residual: float
    lhs_matrix: np.ndarray
    rhs_matrix: np.ndarray


def _fit_report(name, lhs, rhs, cutoff, margin) -> IdentityReport:
    lb = interior_block(lhs, (cutoff,), margin)
    rb = interior_block(rhs, (cutoff,), margin)
    c = float((np.vdot(lb, rb) / np.vdot(lb, lb)).real)
    residual = float(np.abs(rb - c * lb).max())
    return IdentityReport(name, int(cutoff), int(margin), c, residual, lhs, rhs)


def monomial_identity_report(m: int, cutoff: int, margin: int | None = None) -> IdentityReport:
    """Fit c in c·x̂^m ≈ (−2/(3(m−1)))·[x̂^{m−1}, [x̂³, p̂²]].

    The constant is reported, not asserted: under this package's [x̂,p̂] = i
    convention the construction evaluates to 4·x̂^m.
    """
    m = int(m)
    if m < 4:
        raise ValueError("monomial identity requires m >= 4")
    if margin is None:
        margin = max(5, m + 2)
    x = quadrature_x(cutoff).matrix
    p = quadrature_p(cutoff).matrix
    mp = np.linalg.matrix_power
    inner = mp(x, 3) @ mp(p, 2) - mp(p, 2) @ mp(x, 3)
    xm1 = mp(x, m - 1)
    rhs = (-2.0 / (3.0 * (m - 1))) * (xm1 @ inner - inner @ xm1)
    return _fit_report(f"monomial_m{m}", mp(x, m), rhs, cutoff, margin)


def polynomial_identity_report(m: int, n: int, cutoff: int,
                               margin: int | None = None) -> IdentityReport:
    """Fit c in c·(x̂^m p̂^n + p̂^n x̂^m) ≈ the commutator construction

        (−4i/((n+1)(m+1)))[x̂^{m+1}, p̂^{n+1}]
            − (1/(n+1)) Σ_{k=1}^{n−1} [p̂^{n−k}, [x̂^m, p̂^k]].

    Evaluates to 2·LHS under this convention for the small (m, n) exercised
    here; for n ≥ 2 with m ≥ 2 the construction additionally carries a scalar
    (identity) remainder which inflates the reported residual.
    """
    m, n = int(m), int(n)
    if m < 1 or n < 1:
        raise ValueError("polynomial identity requires m, n >= 1")
    if margin is None:
        margin = max(5, m + n + 3)
    x = quadrature_x(cutoff).matrix
    p = quadrature_p(cutoff).matrix
    mp = np.linalg.matrix_power

    def comm(u, v):
        return u @ v - v @ u

    lhs = mp(x, m) @ mp(p, n) + mp(p, n) @ mp(x, m)
    rhs = (-4j / ((n + 1) * (m + 1))) * comm(mp(x, m + 1), mp(p, n + 1))
    for k in range(1, n):
        rhs = rhs - (1.0 / (n + 1)) * comm(mp(p, n - k), comm(mp(x, m), mp(p, k)))
    return _fit_report(f"polynomial_m{m}_n{n}", lhs, rhs, cutoff, margin)
