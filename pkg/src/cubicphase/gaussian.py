"""Gaussian gate constructors: displacement, squeezing, beamsplitter, QND couplings.

All gates are exact matrix exponentials of the truncated generator
(scipy's scaling-and-squaring), so unitarity holds on the interior block and
degrades only at the truncation boundary.

Conventions fixed here:

* beamsplitter: coherent inputs map as |ζ⟩|0⟩ → |√T ζ⟩ ⊗ |−√(1−T) ζ⟩; the
  remaining phase freedom is resolved as the standard real orthogonal mixing.
* squeeze_gate(r): parameterized by the position-space Gaussian width r, i.e.
  the squeezed vacuum has ⟨x̂²⟩ = r/2 (r = 1 is the identity on |0⟩).  The
  usual log-squeeze parameter is s = −½ ln r.
* qnd_gate(β) = exp[(β â†_R − β* â_R) x̂_S]: displaces the resource mode by
  β·x conditioned on the system position.  Acting on |x⟩|A⟩ with real A it
  produces |x⟩|A + βx⟩ times a system phase e^{i x A Im β}; the compensating
  momentum shift is exp(−i A Im(β) x̂_S), available as momentum_shift_gate.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import expm

from .errors import CutoffError, DimensionError
from .hilbert import (
    FockOperator,
    annihilation,
    coherent_truncation_loss,
    quadrature_p,
    quadrature_x,
    tensor,
    identity,
)


def displacement_gate(alpha: complex, cutoff: int, max_loss: float = 1e-8) -> FockOperator:
    """D(α) = exp(α â† − α* â).  Requires the cutoff to hold |α| (coherent tail rule)."""
    loss = coherent_truncation_loss(alpha, cutoff)
    if loss >= max_loss:
        raise CutoffError(
            f"displacement |α|={abs(alpha):.3g} loses {loss:.2e} at cutoff {cutoff}"
        )
    a = annihilation(cutoff).matrix
    gen = alpha * a.conj().T - np.conj(alpha) * a
    return FockOperator(expm(gen), (int(cutoff),), unitary_hint=True)


def momentum_shift_gate(c: float, cutoff: int) -> FockOperator:
    """exp(i c x̂): displaces p̂ by c.  Used to compensate QND coupling phases."""
    x = quadrature_x(cutoff).matrix
    return FockOperator(expm(1j * float(c) * x), (int(cutoff),), unitary_hint=True)


def qnd_compensation_kick(beta: complex, base_amplitude: float) -> float:
    """Momentum shift c such that momentum_shift_gate(c) cancels the x-dependent
    phase picked up by qnd_gate(β) on a resource of real base amplitude A."""
    return -float(base_amplitude) * float(np.imag(beta))


def beamsplitter_gate(transmittance: float, cutoffs) -> FockOperator:
    """Two-mode beamsplitter with |ζ⟩|0⟩ → |√T ζ⟩|−√(1−T) ζ⟩ on coherent inputs.

    ``cutoffs`` are the (transmitted, reflected) mode dimensions; T ∈ (0, 1].
    """
    T = float(transmittance)
    if not 0.0 < T <= 1.0:
        raise ValueError(f"transmittance {T} outside (0, 1]")
    cutoffs = tuple(int(c) for c in cutoffs)
    if len(cutoffs) != 2:
        raise DimensionError("beamsplitter_gate acts on exactly two modes")
    d1, d2 = cutoffs
    if T == 1.0:
        return identity(cutoffs)
    theta = math.acos(math.sqrt(T))
    a1 = tensor(annihilation(d1), identity((d2,))).matrix
    a2 = tensor(identity((d1,)), annihilation(d2)).matrix
    gen = theta * (a1.conj().T @ a2 - a2.conj().T @ a1)
    return FockOperator(expm(gen), cutoffs, unitary_hint=True)


def _two_mode_order(cutoffs, system_mode, resource_mode):
    cutoffs = tuple(int(c) for c in cutoffs)
    if len(cutoffs) != 2:
        raise DimensionError("QND gates act on exactly two modes")
    if {system_mode, resource_mode} != {0, 1}:
        raise DimensionError("system_mode/resource_mode must be a permutation of (0, 1)")
    return cutoffs


def qnd_gate(beta: complex, cutoffs, system_mode: int = 0, resource_mode: int = 1) -> FockOperator:
    """exp[(β â†_R − β* â_R) x̂_S]: QND coupling of system position to the resource.

    Commutes with x̂_S, so the system position distribution is untouched.
    """
    cutoffs = _two_mode_order(cutoffs, system_mode, resource_mode)
    xs = quadrature_x(cutoffs[system_mode])
    a = annihilation(cutoffs[resource_mode]).matrix
    disp = beta * a.conj().T - np.conj(beta) * a
    disp_op = FockOperator(disp, (cutoffs[resource_mode],))
    if system_mode == 0:
        gen = tensor(xs, disp_op)
    else:
        gen = tensor(disp_op, xs)
    return FockOperator(expm(gen.matrix), cutoffs, unitary_hint=True)


def qnd_prime_gate(cutoffs, system_mode: int = 0, resource_mode: int = 1,
                   strength: float = 1.0) -> FockOperator:
    """exp(i s x̂_S p̂_R): shifts the resource position by −s·x_S.

    On wavefunctions, Ψ(x, x_R) → Ψ(x, x_R + s·x), which is the coupling that
    writes the system position onto the resource homodyne record.
    """
    cutoffs = _two_mode_order(cutoffs, system_mode, resource_mode)
    xs = quadrature_x(cutoffs[system_mode])
    pr = quadrature_p(cutoffs[resource_mode])
    if system_mode == 0:
        gen = tensor(xs, pr)
    else:
        gen = tensor(pr, xs)
    return FockOperator(expm(1j * float(strength) * gen.matrix), cutoffs, unitary_hint=True)


def squeezed_vacuum_truncation_loss(r_width: float, cutoff: int) -> float:
    """Tail mass of the r-width squeezed vacuum above the cutoff."""
    s = -0.5 * math.log(float(r_width))
    t = math.tanh(abs(s))
    if t == 0.0:
        return 0.0
    # |c_{2k}|^2 = (2k)! / (2^k k!)^2 * t^{2k} / cosh|s|
    kmax = int(cutoff) // 2
    term = 1.0 / math.cosh(abs(s))
    kept = 0.0
    k = 0
    while True:
        if 2 * k >= cutoff:
            break
        kept += term
        k += 1
        term *= t * t * (2 * k - 1) / (2 * k)
        if k > 10 * kmax + 100:
            break
    return float(max(0.0, 1.0 - kept))


def squeeze_gate(r_width: float, cutoff: int, max_loss: float = 1e-8) -> FockOperator:
    """Single-mode squeezer whose vacuum image has ⟨x̂²⟩ = r_width/2.

    Internally S = exp[s(â² − â†²)/2] with s = −½ ln r_width.
    """
    r = float(r_width)
    if r <= 0.0:
        raise ValueError(f"squeeze width {r} must be positive")
    loss = squeezed_vacuum_truncation_loss(r, cutoff)
    if loss >= max_loss:
        raise CutoffError(
            f"squeezed vacuum (r={r:g}) loses {loss:.2e} probability at cutoff {cutoff}"
        )
    s = -0.5 * math.log(r)
    a = annihilation(cutoff).matrix
    gen = 0.5 * s * (a @ a - a.conj().T @ a.conj().T)
    return FockOperator(expm(gen), (int(cutoff),), unitary_hint=True)


class DisplacementFactory:
    """Cached spectral construction of displacement gates on one mode.

    D(z) = R(θ) V e^{|z|Λ} V† R(θ)† with â†−â = VΛV† precomputed and R(θ) the
    diagonal number-phase rotation, θ = arg z.  Equal to displacement_gate to
    machine precision, but ~two matmuls per call; used inside tight protocol
    loops where β varies per sampled attempt count.
    """

    def __init__(self, cutoff: int):
        self.cutoff = int(cutoff)
        a = annihilation(cutoff).matrix
        herm = 1j * (a.conj().T - a)  # i(â†−â), Hermitian; â†−â = −i·herm
        w, v = np.linalg.eigh(herm)
        self._w = w          # real
        self._v = v
        self._n = np.arange(self.cutoff)

    def gate(self, z: complex) -> np.ndarray:
        mag, theta = abs(z), np.angle(z) if z != 0 else 0.0
        if mag == 0.0:
            return np.eye(self.cutoff, dtype=complex)
        # exp(mag*(a† - a)) = V e^{-i*mag*w} V†
        core = (self._v * np.exp(-1j * mag * self._w)) @ self._v.conj().T
        if theta == 0.0:
            return core
        phase = np.exp(1j * theta * self._n)
        return (core * phase[:, None]) * phase.conj()[None, :]

    def gates_batch(self, zs: np.ndarray) -> np.ndarray:
        """Stacked D(z) for an array of displacements, shape (len(zs), c, c)."""
        zs = np.asarray(zs, dtype=complex)
        mags = np.abs(zs)
        thetas = np.where(mags > 0, np.angle(zs), 0.0)
        ee = np.exp(-1j * np.outer(mags, self._w))
        cores = np.einsum("ik,jk,lk->jil", self._v, ee, self._v.conj())
        phases = np.exp(1j * np.outer(thetas, self._n))
        return cores * phases[:, :, None] * phases.conj()[:, None, :]
