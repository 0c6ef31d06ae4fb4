"""Comparison gate implementations: photon-counting (analytic) and resource-state routes.

The photon-counting scheme is kept analytic: its output is a WKB phase
function exp[i x³/(6√(2E)) − i(√(2E)−α)x] with E = n + 1/2, valid for large
displacement α, and only the phase coefficients are checkable at desk scale.

The resource-state scheme is simulated in full: the resource
(1 + iγx̂³)S(r)|0⟩ = S(r)[|0⟩ + iγ′(3/(2√2))|1⟩ + iγ′(√3/2)|3⟩], γ′ = γr^{3/2},
is coupled through exp(i x̂ p̂_R), the resource position is measured by
homodyne (spectral decomposition of the truncated x̂, outcome binned to an
eigenvalue), and the feed-forward unitary
U_FF = exp[−iγq³ − 3iγ(x̂+q)x̂q] repairs the nonzero-q branch.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import DegenerateOutcomeError, DimensionError
from .gaussian import squeeze_gate
from .hilbert import FockOperator, FockState, apply, quadrature_x, tensor, vacuum


# ---------------------------------------------------------------------------
# photon-counting (EPR + number measurement) scheme, analytic


@dataclass
class GkpStateSpec:
    """Detected photon number n, momentum-shift amplitude α, and an optional
    x-grid on which to evaluate the resulting phase function."""

    n: int
    alpha: float
    domain: tuple = ()

    def __post_init__(self):
        if int(self.n) < 0:
            raise ValueError("photon number must be >= 0")
        if self.alpha < 10.0:
            warnings.warn(
                f"alpha = {self.alpha:g} is outside the α ≫ 1 validity regime",
                stacklevel=2,
            )

    @property
    def energy(self) -> float:
        return int(self.n) + 0.5


@dataclass(frozen=True)
class GkpPhaseRecord:
    cubic_coeff: float
    linear_coeff: float
    energy: float
    domain: tuple
    phase: tuple


def gkp_cubic_state(spec: GkpStateSpec) -> GkpPhaseRecord:
    """Phase coefficients of the heralded state: x³/(6√(2E)) − (√(2E)−α)x."""
    e = spec.energy
    cubic = 1.0 / (6.0 * math.sqrt(2.0 * e))
    linear = -(math.sqrt(2.0 * e) - spec.alpha)
    xs = tuple(float(x) for x in spec.domain)
    phase = tuple(cubic * x**3 + linear * x for x in xs)
    return GkpPhaseRecord(cubic, linear, e, xs, phase)


@dataclass(frozen=True)
class LikelihoodRange:
    lo: float
    hi: float
    inside: bool


def gkp_mode_likelihood(n: int, alpha: float, sigma_x: float, sigma_p: float) -> LikelihoodRange:
    """Whether n + 1/2 falls in the likely window ½(α ± σ_x⁻¹)² + ½σ_p⁻²."""
    if not (0.0 < sigma_x < 1.0 and 0.0 < sigma_p < 1.0):
        raise ValueError("sigma_x and sigma_p must lie in (0, 1)")
    base = 0.5 / sigma_p**2
    lo = 0.5 * (alpha - 1.0 / sigma_x) ** 2 + base
    hi = 0.5 * (alpha + 1.0 / sigma_x) ** 2 + base
    e = int(n) + 0.5
    return LikelihoodRange(lo, hi, lo <= e <= hi)


# ---------------------------------------------------------------------------
# resource-state scheme


def marek_gamma_prime(r_width: float, gamma: float) -> float:
    """Effective cubic coefficient in the squeezed frame: γ·r^{3/2}.

    S(r)†x̂S(r) = √r·x̂ under the width parameterization used here.
    """
    return float(gamma) * float(r_width) ** 1.5


def marek_resource_state(r_width: float, gamma: float, cutoff: int,
                         max_loss: float = 1e-8) -> FockState:
    """Normalized (I + iγx̂³)·S(r)|0⟩."""
    if gamma < 0.0:
        raise ValueError("gamma must be >= 0")
    sq = squeeze_gate(r_width, cutoff, max_loss=max_loss)
    base = apply(sq, vacuum((int(cutoff),)))
    x = quadrature_x(cutoff).matrix
    op = np.eye(int(cutoff), dtype=complex) + 1j * float(gamma) * np.linalg.matrix_power(x, 3)
    amp = op @ base.amplitudes
    return FockState(amp / np.linalg.norm(amp), (int(cutoff),))


def marek_frame_coefficients(state: FockState, r_width: float,
                             max_loss: float = 1e-8) -> np.ndarray:
    """Amplitudes of S(r)†|state⟩ (the squeezed frame of the resource)."""
    if state.n_modes != 1:
        raise DimensionError("expected a single-mode state")
    sq = squeeze_gate(r_width, state.cutoffs[0], max_loss=max_loss)
    return sq.matrix.conj().T @ state.amplitudes


def _feed_forward(q: float, gamma: float, cutoff: int) -> FockOperator:
    """U_FF = exp[−iγq³ − 3iγ(x̂+q)x̂q] as a function of the truncated x̂."""
    x = quadrature_x(cutoff).matrix
    x2 = x @ x
    gen = -1j * gamma * (q**3 * np.eye(int(cutoff)) + 3.0 * q * (x2 + q * x))
    return FockOperator(expm(gen), (int(cutoff),), unitary_hint=True)


def _apply_qnd_prime(state: FockState) -> FockState:
    """Fast exp(i x̂_S p̂_R) on a two-mode state.

    In the x̂_S eigenbasis the gate is a resource momentum boost per
    eigenvalue, e^{iλp̂_R} = D(−λ/√2); equal to qnd_prime_gate to machine
    precision but without the full two-mode exponential.
    """
    from .gaussian import DisplacementFactory

    sys_c, res_c = state.cutoffs
    w, v = np.linalg.eigh(quadrature_x(sys_c).matrix)
    gates = DisplacementFactory(res_c).gates_batch(-w / np.sqrt(2.0))
    psi_x = v.conj().T @ state.amplitudes.reshape(sys_c, res_c)
    out = np.einsum("jab,jb->ja", gates, psi_x)
    return FockState((v @ out).reshape(-1), state.cutoffs, normalized=False)


def marek_gate(
    input_state: FockState,
    r_width: float,
    gamma: float,
    rng: np.random.Generator,
    cutoffs,
    force_q: float | None = None,
    max_loss: float = 1e-8,
) -> tuple[FockState, float, bool]:
    """One shot of the resource-state cubic gate with homodyne feed-forward.

    Returns (output system state, homodyne outcome q, whether a feed-forward
    correction was applied).  ``force_q`` conditions on the spectral outcome
    nearest that value instead of sampling (useful for the q = 0 branch).
    """
    sys_c, res_c = (int(c) for c in cutoffs)
    if input_state.cutoffs != (sys_c,):
        raise DimensionError("input must be a single-mode state on the system cutoff")
    resource = marek_resource_state(r_width, gamma, res_c, max_loss=max_loss)
    two = tensor(input_state if input_state.normalized else input_state.normalize(), resource)
    two = _apply_qnd_prime(two).normalize()

    xr = quadrature_x(res_c).matrix
    evals, evecs = np.linalg.eigh(xr)
    amp = two.amplitudes.reshape(sys_c, res_c) @ evecs  # columns: homodyne bins
    probs = np.einsum("ij,ij->j", amp.conj(), amp).real
    probs = np.maximum(probs, 0.0)
    probs /= probs.sum()

    if force_q is None:
        idx = int(rng.choice(len(evals), p=probs))
    else:
        idx = int(np.argmin(np.abs(evals - float(force_q))))
        if probs[idx] < 1e-18:  # amplitude below 1e-9: numerically empty branch
            raise DegenerateOutcomeError(f"homodyne bin at q={evals[idx]:.4f} has zero probability")
    q = float(evals[idx])
    if abs(q) < 1e-12:  # eigensolver noise around the symmetric zero mode
        q = 0.0
    collapsed = amp[:, idx]
    collapsed = collapsed / np.linalg.norm(collapsed)
    sys_state = FockState(collapsed, (sys_c,))

    applied = q != 0.0
    if applied:
        sys_state = apply(_feed_forward(q, gamma, sys_c), sys_state).normalize()
    return sys_state, q, applied


# ---------------------------------------------------------------------------
# running-time models


@dataclass(frozen=True)
class RuntimeModels:
    """Expected-attempt curves at subtraction success probability p."""

    p: float
    ours_per_factor: float   # 1/p
    ours_total: float        # 3N/p
    marek_prep: float        # 1/p^3 (three simultaneous subtractions)
    gkp: None = None         # photon-counting route: no subtraction loop


def runtime_models(p: float, n: int = 1) -> RuntimeModels:
    p = float(p)
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    return RuntimeModels(p, 1.0 / p, 3.0 * int(n) / p, p**-3)


def marek_restart_mean(p: float) -> float:
    """Exact mean attempts to see three consecutive successes, restart on failure:
    (1 + p + p²)/p³."""
    p = float(p)
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    return (1.0 + p + p * p) / p**3


def marek_restart_mc(p: float, runs: int, rng: np.random.Generator,
                     max_rounds: int = 10_000_000) -> float:
    """Monte Carlo mean attempt count for the restart chain (vectorized rounds)."""
    p = float(p)
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    runs = int(runs)
    attempts = np.zeros(runs, dtype=np.int64)
    streak = np.zeros(runs, dtype=np.int8)
    active = np.arange(runs)
    rounds = 0
    while active.size and rounds < max_rounds:
        hit = rng.random(active.size) < p
        attempts[active] += 1
        streak[active] = np.where(hit, streak[active] + 1, 0)
        active = active[streak[active] < 3]
        rounds += 1
    if active.size:
        raise RuntimeError("restart-chain sampling did not terminate")
    return float(attempts.mean())
