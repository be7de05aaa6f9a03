"""Input-state constructors for the probe ensemble and the ancilla qubit.

The probe is always handled in spectral form: a list of weights and mutually
orthonormal eigenvectors (:class:`SpectralProbe`).  The ancilla is a 2x2
density matrix carrying its preparation angles and an accumulated dephasing
rate (:class:`AncillaState`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spin import (
    ContractViolation,
    EnsembleDim,
    PhaseGenerator,
    SPIN_SPECTRUM_TOL,
    KET_E,
    KET_G,
    assert_hermitian,
    eigenbasis,
)

__all__ = [
    "EPS_SPECTRUM",
    "AncillaState",
    "SpectralProbe",
    "ThermalSpec",
    "ancilla_state",
    "dephase_ancilla",
    "polarized_probe",
    "ghz_probe",
    "thermal_probe",
    "spectral_decompose",
]

# Probe eigenvalues at or below this weight are dropped and the rest
# renormalized; keeps the p_i + p_j denominators of the Fisher sums away
# from zero.
EPS_SPECTRUM = 1e-12


@dataclass(frozen=True)
class AncillaState:
    """Ancilla qubit state: preparation angles, dephasing rate, density matrix.

    ``theta0`` sets the population imbalance, ``phi0`` the relative phase of
    the |e>/|g> superposition; ``x`` in [0, 1] is the accumulated dephasing
    rate (0 means pure).
    """

    theta0: float
    phi0: float
    x: float
    rho: np.ndarray

    def __post_init__(self) -> None:
        rho = np.array(self.rho, dtype=complex)
        if rho.shape != (2, 2):
            raise ContractViolation("ancilla density matrix must be 2x2")
        if abs(np.trace(rho).real - 1.0) > 1e-12 or abs(np.trace(rho).imag) > 1e-12:
            raise ContractViolation("ancilla density matrix must have unit trace")
        assert_hermitian(rho, name="ancilla density matrix")
        if np.linalg.eigvalsh(rho).min() < -1e-12:
            raise ContractViolation("ancilla density matrix must be positive semidefinite")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def is_pure(self) -> bool:
        return self.x == 0.0

    @property
    def ket(self) -> np.ndarray:
        """State vector cos(theta0/2)|e> + e^{-i phi0} sin(theta0/2)|g>; pure states only."""
        if not self.is_pure:
            raise ContractViolation("dephased ancilla has no state vector")
        return np.cos(self.theta0 / 2.0) * KET_E + np.exp(-1j * self.phi0) * np.sin(
            self.theta0 / 2.0
        ) * KET_G


def ancilla_state(theta0: float, phi0: float = 0.0) -> AncillaState:
    """Pure ancilla state from the population-imbalance and phase angles."""
    if not (np.isfinite(theta0) and np.isfinite(phi0)):
        raise ContractViolation("ancilla angles must be finite")
    ket = np.cos(theta0 / 2.0) * KET_E + np.exp(-1j * phi0) * np.sin(theta0 / 2.0) * KET_G
    return AncillaState(theta0=float(theta0), phi0=float(phi0), x=0.0, rho=np.outer(ket, ket.conj()))


def dephase_ancilla(state: AncillaState, x: float) -> AncillaState:
    """Apply the qubit dephasing channel with rate x.

    Kraus pair sqrt(1 - x/2) * I and sqrt(x/2) * sigma_z: populations are
    untouched and coherences shrink by (1 - x).  Rates compose, so the
    returned state records 1 - (1 - x_old)(1 - x).
    """
    if not 0.0 <= x <= 1.0:
        raise ContractViolation(f"dephasing rate must lie in [0, 1], got {x!r}")
    # For this Kraus pair the sum is identically an off-diagonal scaling,
    # (1 - x/2) rho + (x/2) sigma_z rho sigma_z; applying the scaling directly
    # keeps populations, trace, and hermiticity exact.
    rho = np.array(state.rho, dtype=complex)
    rho[0, 1] *= 1.0 - x
    rho[1, 0] *= 1.0 - x
    combined = 1.0 - (1.0 - state.x) * (1.0 - x)
    return AncillaState(theta0=state.theta0, phi0=state.phi0, x=float(combined), rho=rho)


@dataclass(frozen=True)
class ThermalSpec:
    """Inverse temperature and partition function of a thermal probe.

    Energies are the spin-generator eigenvalues m = -j..+j, so
    Z = sum_m exp(-m beta).  ``log_z`` is always finite; ``z`` itself can
    overflow once beta * j grows past ~700 and is provided for the moderate
    regime.
    """

    dim: EnsembleDim
    beta: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.beta) or self.beta < 0.0:
            raise ContractViolation("inverse temperature must be finite and nonnegative")

    @property
    def log_z(self) -> float:
        logw = -self.beta * self.dim.m_values()
        shift = logw.max()
        return float(shift + np.log(np.sum(np.exp(logw - shift))))

    @property
    def z(self) -> float:
        return float(np.exp(self.log_z))

    def weights(self) -> np.ndarray:
        """Boltzmann weights exp(-m beta)/Z over m ascending (sum exactly 1)."""
        logw = -self.beta * self.dim.m_values()
        w = np.exp(logw - logw.max())
        return w / w.sum()


@dataclass(frozen=True)
class SpectralProbe:
    """Probe density matrix in spectral form: weights plus orthonormal columns."""

    dim: EnsembleDim
    weights: np.ndarray
    vectors: np.ndarray

    def __post_init__(self) -> None:
        w = np.array(self.weights, dtype=float)
        v = np.array(self.vectors, dtype=complex)
        if v.ndim != 2 or v.shape != (self.dim.dim, w.size):
            raise ContractViolation("probe vectors must be columns of shape (dim, n_terms)")
        if w.size == 0 or np.any(w <= EPS_SPECTRUM):
            raise ContractViolation("probe weights must all exceed the spectral cutoff")
        if abs(w.sum() - 1.0) > 1e-10:
            raise ContractViolation("probe weights must sum to one")
        gram = v.conj().T @ v
        if np.max(np.abs(gram - np.eye(w.size))) > 1e-10:
            raise ContractViolation("probe eigenvectors must be orthonormal")
        w.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "vectors", v)

    @property
    def n_terms(self) -> int:
        return self.weights.size

    def terms(self):
        """Iterate over (weight, eigenvector) pairs."""
        for k in range(self.n_terms):
            yield self.weights[k], self.vectors[:, k]

    def density(self) -> np.ndarray:
        """Reconstruct the density matrix sum_i p_i |psi_i><psi_i|."""
        return (self.vectors * self.weights) @ self.vectors.conj().T


def _generator_matrix(generator) -> np.ndarray:
    if isinstance(generator, PhaseGenerator):
        return generator.matrix
    return np.asarray(generator, dtype=complex)


def polarized_probe(dim: EnsembleDim, generator, sign: int = +1) -> SpectralProbe:
    """Pure probe polarized along the extremal eigenvector of a generator.

    ``sign=+1`` picks the largest eigenvalue (m = +j for a spin generator),
    ``sign=-1`` the smallest.
    """
    if sign not in (+1, -1):
        raise ContractViolation("sign must be +1 or -1")
    vals, vecs = eigenbasis(_generator_matrix(generator))
    if dim.dim >= 2:
        gap = vals[-1] - vals[-2] if sign == +1 else vals[1] - vals[0]
        if gap <= 1e-8 * max(1.0, abs(vals[-1] - vals[0])):
            raise ContractViolation("extremal eigenvalue of the generator is degenerate")
    column = vecs[:, -1] if sign == +1 else vecs[:, 0]
    return SpectralProbe(dim=dim, weights=np.array([1.0]), vectors=column[:, None])


def ghz_probe(dim: EnsembleDim, generator) -> SpectralProbe:
    """Equal superposition of the two extremal eigenvectors of a generator."""
    vals, vecs = eigenbasis(_generator_matrix(generator))
    if vals[-1] - vals[-2] <= 1e-8 or vals[1] - vals[0] <= 1e-8:
        raise ContractViolation("extremal eigenvalue of the generator is degenerate")
    psi = (vecs[:, -1] + vecs[:, 0]) / np.sqrt(2.0)
    return SpectralProbe(dim=dim, weights=np.array([1.0]), vectors=psi[:, None])


def thermal_probe(dim: EnsembleDim, generator, beta: float) -> SpectralProbe:
    """Thermal probe exp(-beta G)/Z in the eigenbasis of a unit spin generator.

    ``beta >= 0`` puts the ground state at m = -j.  The generator must carry
    the integer-spaced spin spectrum {-j, ..., +j}; weights use the exact m
    values so large beta stays well conditioned, with the maximum exponent
    subtracted before normalization.  Weights below the spectral cutoff are
    dropped and the remainder renormalized.
    """
    spec = ThermalSpec(dim=dim, beta=float(beta))
    vals, vecs = eigenbasis(_generator_matrix(generator))
    if np.max(np.abs(vals - dim.m_values())) > SPIN_SPECTRUM_TOL:
        raise ContractViolation("thermal probe needs a generator with spectrum -j..+j")
    weights = spec.weights()
    keep = weights > EPS_SPECTRUM
    weights = weights[keep] / weights[keep].sum()
    return SpectralProbe(dim=dim, weights=weights, vectors=vecs[:, keep])


def spectral_decompose(rho: np.ndarray) -> SpectralProbe:
    """Spectral form of a probe density matrix.

    Validates hermiticity, positivity and unit trace, drops eigenvalues at or
    below the spectral cutoff, and renormalizes the retained weights.
    """
    a = np.asarray(rho, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ContractViolation("density matrix must be square")
    dim = EnsembleDim(a.shape[0] - 1)
    assert_hermitian(a, name="probe density matrix")
    tr = np.trace(a)
    if abs(tr.real - 1.0) > 1e-10 or abs(tr.imag) > 1e-10:
        raise ContractViolation(f"probe density matrix trace {tr:.12g} is not 1")
    vals, vecs = eigenbasis(a)
    if vals.min() < -1e-12:
        raise ContractViolation("probe density matrix is not positive semidefinite")
    keep = vals > EPS_SPECTRUM
    if not np.any(keep):
        raise ContractViolation("probe density matrix has no weight above the cutoff")
    weights = vals[keep] / vals[keep].sum()
    return SpectralProbe(dim=dim, weights=weights, vectors=vecs[:, keep])
