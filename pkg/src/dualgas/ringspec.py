"""Bethe-ansatz spectra of the contact gas on a ring.

Rapidities k_l of an N-particle state on a ring of circumference lam solve

    lam * k_l = 2 pi I_l - 2 sum_j arctan(2 hbar^2 (k_l - k_j) / C)

with quantum numbers I_l on the Pauli grid: distinct integers for odd N,
distinct half-odd-integers for even N.  The left-hand side is the gradient
of a strictly convex action, so damped Newton from the hard-core start
k = 2 pi I / lam converges for every repulsive C > 0; C = TG_COUPLING is
exact (k = 2 pi I / lam), and C = 0 is rejected here (rapidities coalesce;
use the ideal-gas references in `work` instead).

Energy is hbar^2 sum k_l^2 (2m = 1); total momentum hbar sum k_l is pinned
to 2 pi hbar sum I_l / lam by the equations.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import gammaln

from .core import TG_COUPLING, ConfigError

__all__ = [
    "BetheSolverError",
    "BetheState",
    "SpectrumTable",
    "theta",
    "theta_prime",
    "validate_quantum_numbers",
    "ground_state_quantum_numbers",
    "solve_bethe",
    "solve_bethe_batch",
    "enumerate_states",
    "spectral_tail_bound",
]


class BetheSolverError(RuntimeError):
    """Newton iteration failed to converge (should not happen for C > 0)."""


def theta(k, coupling: float, hbar: float = 1.0):
    """Two-body phase shift arctan(2 hbar^2 k / C); odd in k.

    Hard-core limit -> 0 identically; C = 0 -> (pi/2) sign(k) (the
    distributional limit, returned for completeness only).
    """
    k = np.asarray(k, dtype=float)
    if coupling < 0:
        raise ConfigError("attractive coupling not supported")
    if math.isinf(coupling):
        return np.zeros_like(k)
    if coupling == 0.0:
        return (np.pi / 2.0) * np.sign(k)
    return np.arctan((2.0 * hbar**2 / coupling) * k)


def theta_prime(k, coupling: float, hbar: float = 1.0):
    """d theta / dk = 2 hbar^2 C / (C^2 + 4 hbar^4 k^2)."""
    k = np.asarray(k, dtype=float)
    if coupling < 0:
        raise ConfigError("attractive coupling not supported")
    if math.isinf(coupling) or coupling == 0.0:
        # zero a.e.; the C = 0 delta spike at k = 0 is never sampled here
        return np.zeros_like(k)
    return 2.0 * hbar**2 * coupling / (coupling**2 + 4.0 * hbar**4 * k**2)


def validate_quantum_numbers(quantum_numbers, n_particles: int) -> np.ndarray:
    qn = np.asarray(quantum_numbers, dtype=float)
    if qn.ndim != 1 or qn.size != n_particles:
        raise ConfigError(
            f"expected {n_particles} quantum numbers, got shape {qn.shape}"
        )
    if n_particles > 1 and not np.all(np.diff(qn) > 0):
        raise ConfigError("quantum numbers must be strictly increasing")
    # parity of the grid flips with particle number
    frac = qn - np.floor(qn)
    target = 0.5 if n_particles % 2 == 0 else 0.0
    if not np.allclose(frac, target, atol=1e-9):
        kind = "half-odd-integers" if target else "integers"
        raise ConfigError(f"quantum numbers for N={n_particles} must be {kind}")
    return qn


def ground_state_quantum_numbers(n_particles: int) -> np.ndarray:
    """Symmetric densely-packed grid -(N-1)/2 ... (N-1)/2."""
    return np.arange(n_particles, dtype=float) - (n_particles - 1) / 2.0


def _residual(K, I2pi, lam, coupling, hbar):
    # K: (S, N) rapidities; I2pi = 2*pi*I precomputed
    diff = K[:, :, None] - K[:, None, :]
    th = np.arctan((2.0 * hbar**2 / coupling) * diff)
    return lam * K + 2.0 * th.sum(axis=2) - I2pi


def _jacobian(K, lam, coupling, hbar):
    S, N = K.shape
    diff = K[:, :, None] - K[:, None, :]
    tp = 2.0 * hbar**2 * coupling / (coupling**2 + 4.0 * hbar**4 * diff**2)
    idx = np.arange(N)
    tp[:, idx, idx] = 0.0
    J = -2.0 * tp
    J[:, idx, idx] = lam + 2.0 * tp.sum(axis=2)
    return J


def solve_bethe_batch(
    quantum_numbers,
    lam: float,
    coupling: float,
    hbar: float = 1.0,
    tol: float = 1e-12,
    max_iter: int = 80,
):
    """Newton solve for a (S, N) stack of quantum-number rows.

    Returns (rapidities, residuals) with shapes (S, N) and (S,).  The
    Jacobian lam*1 + 2*(graph Laplacian of theta') is symmetric positive
    definite, so the undamped step is well posed; a per-row backtracking
    line search on the residual norm guards the far-from-solution regime.
    """
    I = np.atleast_2d(np.asarray(quantum_numbers, dtype=float))
    if lam <= 0:
        raise ConfigError(f"ring circumference must be positive, got {lam}")
    if coupling < 0:
        raise ConfigError("attractive coupling not supported")
    if coupling == 0.0:
        raise ConfigError(
            "C = 0 rapidities coalesce onto 2*pi*n/lam; use the ideal-gas "
            "references instead of the Bethe solver"
        )
    K = 2.0 * np.pi * I / lam  # hard-core warm start
    if math.isinf(coupling):
        return K, np.zeros(K.shape[0])

    I2pi = 2.0 * np.pi * I
    scale = np.maximum(1.0, np.abs(I2pi).max(axis=1))
    F = _residual(K, I2pi, lam, coupling, hbar)
    fnorm = np.abs(F).max(axis=1)
    for _ in range(max_iter):
        active = fnorm > tol * scale
        if not active.any():
            break
        Ka = K[active]
        Ia = I2pi[active]
        J = _jacobian(Ka, lam, coupling, hbar)
        dk = np.linalg.solve(J, -F[active][..., None])[..., 0]
        base = fnorm[active]
        t = np.ones(Ka.shape[0])
        for _halving in range(60):
            trial = Ka + t[:, None] * dk
            Ft = _residual(trial, Ia, lam, coupling, hbar)
            fnt = np.abs(Ft).max(axis=1)
            ok = fnt < base
            if ok.all():
                break
            t[~ok] *= 0.5
        else:
            raise BetheSolverError("line search stalled (residual not decreasing)")
        K[active] = trial
        F[active] = Ft
        fnorm[active] = fnt
    else:
        bad = np.nonzero(fnorm > tol * scale)[0]
        raise BetheSolverError(
            f"Newton did not converge for {bad.size} state(s), first index {bad[0]}"
        )
    return K, fnorm / scale


def solve_bethe(
    quantum_numbers,
    lam: float,
    coupling: float,
    hbar: float = 1.0,
    tol: float = 1e-12,
    max_iter: int = 80,
) -> "BetheState":
    qn = validate_quantum_numbers(quantum_numbers, len(np.atleast_1d(quantum_numbers)))
    K, res = solve_bethe_batch(qn[None, :], lam, coupling, hbar, tol, max_iter)
    return BetheState(
        quantum_numbers=qn,
        rapidities=K[0],
        lam=lam,
        coupling=coupling,
        hbar=hbar,
        residual=float(res[0]),
    )


@dataclass
class BetheState:
    quantum_numbers: np.ndarray
    rapidities: np.ndarray
    lam: float
    coupling: float
    hbar: float
    residual: float

    @property
    def n_particles(self) -> int:
        return self.rapidities.size

    @property
    def energy(self) -> float:
        return float(self.hbar**2 * np.sum(self.rapidities**2))

    @property
    def total_momentum(self) -> float:
        return float(self.hbar * np.sum(self.rapidities))


def spectral_tail_bound(
    lam: float,
    n_particles: int,
    i_max: float,
    beta: float,
    hbar: float = 1.0,
    max_terms: int = 100_000,
) -> float:
    """Upper bound on sum exp(-beta E) over all states with max|I_l| > i_max.

    The phase shifts obey |theta| < pi/2, so a state whose largest quantum
    number has magnitude v carries a rapidity with
    |k| >= max(0, (2 pi v - pi N) / lam), hence E >= hbar^2 k^2.  States
    with that extremum number at most 2 * C(2v+1, N-1) (choose the sign of
    the extremal I and the remaining grid points).  C > 0 only tightens the
    bound, so it is coupling-independent.
    """
    if beta <= 0:
        raise ConfigError("tail bound needs beta > 0")
    n = n_particles
    step0 = 0.5 if n % 2 == 0 else 0.0
    # first grid value strictly above i_max
    v = math.floor(i_max - step0) + 1 + step0
    if v <= i_max:
        v += 1.0
    total = 0.0
    prev = None
    for _ in range(max_terms):
        kmin = max(0.0, (2.0 * np.pi * v - np.pi * n) / lam)
        L = 2.0 * v + 1.0
        logc = gammaln(L + 1.0) - gammaln(n) - gammaln(L - n + 2.0)
        logterm = math.log(2.0) + logc - beta * (hbar * kmin) ** 2
        term = math.exp(min(logterm, 700.0))
        total += term
        if prev is not None and term < prev and term < 1e-30 * max(total, 1.0):
            # Gaussian decay has set in; close with a geometric remainder
            r = term / prev
            total += term * r / (1.0 - r)
            break
        prev = term
        v += 1.0
    return total


@dataclass
class SpectrumTable:
    """Enumerated ring spectrum, sorted by energy."""

    states: list
    lam: float
    coupling: float
    hbar: float
    n_particles: int
    i_max: float

    @property
    def energies(self) -> np.ndarray:
        return np.array([s.energy for s in self.states])

    def __len__(self) -> int:
        return len(self.states)

    def partition_function(self, beta: float) -> float:
        return float(np.exp(-beta * self.energies).sum())

    def tail_bound(self, beta: float) -> float:
        return spectral_tail_bound(
            self.lam, self.n_particles, self.i_max, beta, self.hbar
        )

    def relative_tail(self, beta: float) -> float:
        """tail_bound / Z: enumeration truncation error on any thermal average."""
        return self.tail_bound(beta) / self.partition_function(beta)


def enumerate_states(
    lam: float,
    coupling: float,
    n_particles: int,
    i_max: float,
    hbar: float = 1.0,
    tol: float = 1e-12,
    max_states: int = 2_000_000,
) -> SpectrumTable:
    """Solve every state with all |I_l| <= i_max; sorted by (energy, I).

    For even N, i_max is compared against the half-odd-integer grid, so
    e.g. i_max = 9.5 admits 20 grid values and C(20, 2) = 190 pair states.
    """
    n = n_particles
    if n < 1:
        raise ConfigError("need at least one particle")
    if n % 2 == 0:
        vals = np.arange(0.5, i_max + 1e-9, 1.0)
        lattice = np.concatenate([-vals[::-1], vals])
    else:
        vmax = math.floor(i_max + 1e-9)
        lattice = np.arange(-vmax, vmax + 1, dtype=float)
    if lattice.size < n:
        raise ConfigError(
            f"i_max={i_max} admits only {lattice.size} grid values for N={n}"
        )
    n_combo = math.comb(lattice.size, n)
    if n_combo > max_states:
        raise ConfigError(
            f"{n_combo} states exceed max_states={max_states}; lower i_max"
        )
    I = np.array(list(itertools.combinations(lattice, n)), dtype=float)
    if math.isinf(coupling):
        K = 2.0 * np.pi * I / lam
        res = np.zeros(I.shape[0])
    else:
        K, res = solve_bethe_batch(I, lam, coupling, hbar, tol=tol)
    energies = hbar**2 * np.sum(K**2, axis=1)
    order = np.lexsort(tuple(I[:, j] for j in range(n - 1, -1, -1)) + (energies,))
    states = [
        BetheState(
            quantum_numbers=I[s],
            rapidities=K[s],
            lam=lam,
            coupling=coupling,
            hbar=hbar,
            residual=float(res[s]),
        )
        for s in order
    ]
    return SpectrumTable(
        states=states,
        lam=lam,
        coupling=coupling,
        hbar=hbar,
        n_particles=n,
        i_max=i_max,
    )
