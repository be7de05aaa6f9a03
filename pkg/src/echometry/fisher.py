"""Quantum and classical Fisher information of the time-reversal circuit.

The encoded family is rho(theta) = U_theta (rho_P (x) rho_A) U_theta^dagger.
Because the encoding rotation commutes with its own generator G, the
effective generator

    H_eff = U(t1)^dagger G U(t1)

is independent of theta and of the second circuit leg, so the quantum Fisher
information reduces to the two-term spectral sum

    F_Q = 4 sum_i p_i <H_eff^2>_i - sum_ij 8 p_i p_j / (p_i + p_j) |<i|H_eff|j>|^2

over the support of the input state.  An independent cross-check,
:func:`qfi_sld_oracle`, computes the same quantity from the symmetric
logarithmic derivative of the output density matrix and an analytically
supplied d rho / d theta, never reusing the two-term path.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .circuit import (
    ModelParams,
    Schedule,
    circuit_unitary,
    encoder,
    encoding_generator,
    optimal_generator,
    propagator,
)
from .spin import (
    ContractViolation,
    EnsembleDim,
    PhaseGenerator,
    KET_E,
    KET_G,
    assert_hermitian,
    eigenbasis,
    joint_embed,
    PAULI_Z,
)
from .states import (
    EPS_SPECTRUM,
    AncillaState,
    SpectralProbe,
    _generator_matrix,
    ancilla_state,
    dephase_ancilla,
)

__all__ = [
    "EPS_PROB",
    "FisherResult",
    "DeviationSpec",
    "ProbabilityTable",
    "output_state",
    "output_state_derivative",
    "qfi_general",
    "qfi_simplified",
    "qfi_sld_oracle",
    "qfi_thermal",
    "qfi_deviation",
    "qfi_dephased",
    "measurement_probs",
    "cfi",
]

# Measurement rows with probability below EPS_PROB *and* derivative below
# sqrt(EPS_PROB) carry no information and are dropped from the CFI sum.
EPS_PROB = 1e-12


@dataclass(frozen=True)
class FisherResult:
    """A Fisher-information value tagged with the method that produced it."""

    value: float
    method: str

    def __post_init__(self) -> None:
        if math.isnan(self.value) or self.value < -1e-9:
            raise ContractViolation(f"Fisher information came out as {self.value!r}")
        object.__setattr__(self, "value", max(float(self.value), 0.0))


@dataclass(frozen=True)
class DeviationSpec:
    """Additive control errors on the coupling and the probe frequency."""

    delta_g: float = 0.0
    delta_omega_p: float = 0.0

    def __post_init__(self) -> None:
        if not (np.isfinite(self.delta_g) and np.isfinite(self.delta_omega_p)):
            raise ContractViolation("deviations must be finite")


@dataclass(frozen=True)
class ProbabilityTable:
    """Outcome probabilities as rows (m label, branch '+'/'-', probability).

    The label is the probe-generator eigenvalue for full-system projectors
    and ``None`` for the ancilla-only readout.
    """

    rows: tuple[tuple[float | None, str, float], ...]

    def __post_init__(self) -> None:
        probs = self.probabilities
        if np.any(probs < -1e-12) or np.any(probs > 1.0 + 1e-12):
            raise ContractViolation("probabilities must lie in [0, 1]")
        if abs(probs.sum() - 1.0) > 1e-10:
            raise ContractViolation("outcome probabilities must sum to one")

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([row[2] for row in self.rows], dtype=float)


def _input_density(probe: SpectralProbe, ancilla: AncillaState) -> np.ndarray:
    return joint_embed(probe.density(), ancilla.rho)


def output_state(
    probe: SpectralProbe, ancilla: AncillaState, params: ModelParams, sched: Schedule
) -> np.ndarray:
    """Output density matrix U_theta (rho_P (x) rho_A) U_theta^dagger."""
    u = circuit_unitary(params, probe.dim, sched)
    return u @ _input_density(probe, ancilla) @ u.conj().T


def output_state_derivative(
    probe: SpectralProbe, ancilla: AncillaState, params: ModelParams, sched: Schedule
) -> tuple[np.ndarray, np.ndarray]:
    """Output state together with its analytic theta-derivative.

    d U_theta / d theta = U(t2-leg) (-i G) R(theta) U(t1) with G the encoding
    generator; differencing of unitaries is never used.
    """
    dim = probe.dim
    u1 = propagator(params, dim, sched.t1)
    u2 = u1.conj().T if sched.mode == "exact_conjugate" else propagator(params, dim, sched.t2)
    r = encoder(params.kind, sched.theta, dim)
    g = encoding_generator(params, dim)
    u = u2 @ r @ u1
    du = u2 @ (-1j * g) @ r @ u1
    rho0 = _input_density(probe, ancilla)
    rho = u @ rho0 @ u.conj().T
    half = du @ rho0 @ u.conj().T
    return rho, half + half.conj().T


def _ancilla_sector(op: np.ndarray, ket: np.ndarray) -> np.ndarray:
    """(I (x) <ket|) op (I (x) |ket>) for a joint probe-ancilla operator."""
    d = op.shape[0] // 2
    t = op.reshape(d, 2, d, 2)
    return np.einsum("a,iajb,b->ij", ket.conj(), t, ket)


def qfi_general(
    probe: SpectralProbe, ancilla: AncillaState, params: ModelParams, sched: Schedule
) -> FisherResult:
    """Quantum Fisher information of the output family, pure ancilla.

    Evaluates the two-term spectral sum over the probe support with the
    ancilla folded in; the result is exactly independent of theta and of the
    second circuit leg.  Dephased ancillas are rejected here; use
    :func:`qfi_sld_oracle` or :func:`qfi_dephased` for those.
    """
    if not ancilla.is_pure:
        raise ContractViolation(
            "general QFI path needs a pure ancilla; use the SLD oracle or the dephased form"
        )
    dim = probe.dim
    u1 = propagator(params, dim, sched.t1)
    h_eff = u1.conj().T @ encoding_generator(params, dim) @ u1
    ket = ancilla.ket
    sector_sq = _ancilla_sector(h_eff @ h_eff, ket)
    sector = _ancilla_sector(h_eff, ket)
    v = probe.vectors
    p = probe.weights
    term1 = 4.0 * float(np.einsum("k,ik,ij,jk->", p, v.conj(), sector_sq, v).real)
    overlaps = v.conj().T @ sector @ v
    coef = 8.0 * np.outer(p, p) / (p[:, None] + p[None, :])
    term2 = float(np.sum(coef * np.abs(overlaps) ** 2))
    return FisherResult(value=term1 - term2, method="general")


def qfi_simplified(probe: SpectralProbe, generator: PhaseGenerator) -> FisherResult:
    """Mean square of the optimized phase generator: 4 sum_i p_i <G^2>_i."""
    g = _generator_matrix(generator)
    v = probe.vectors
    gv = g @ v
    value = 4.0 * float(np.sum(probe.weights * np.einsum("ik,ik->k", gv.conj(), gv).real))
    return FisherResult(value=value, method="simplified")


def qfi_sld_oracle(rho_theta: np.ndarray, drho_theta: np.ndarray) -> FisherResult:
    """Fisher information from the symmetric-logarithmic-derivative expansion.

    F_Q = 2 sum_{k,l} |<k| drho |l>|^2 / (lambda_k + lambda_l) over eigenpairs
    of rho with lambda_k + lambda_l above the spectral cutoff.  Independent of
    the two-term path: it only sees the output state and its derivative.
    """
    rho = np.asarray(rho_theta, dtype=complex)
    drho = np.asarray(drho_theta, dtype=complex)
    assert_hermitian(rho, name="output state")
    assert_hermitian(drho, tol=1e-10, name="output-state derivative")
    if abs(np.trace(rho).real - 1.0) > 1e-10:
        raise ContractViolation("output state must have unit trace")
    if abs(np.trace(drho)) > 1e-9:
        raise ContractViolation("output-state derivative must be traceless")
    vals, vecs = np.linalg.eigh(rho)
    if vals.min() < -1e-10:
        raise ContractViolation("output state is not positive semidefinite")
    md = vecs.conj().T @ drho @ vecs
    denom = vals[:, None] + vals[None, :]
    mask = denom > EPS_SPECTRUM
    value = 2.0 * float(np.sum((np.abs(md) ** 2)[mask] / denom[mask]))
    return FisherResult(value=value, method="sld_oracle")


def qfi_thermal(dim: EnsembleDim, beta: float) -> tuple[FisherResult, FisherResult]:
    """Thermal-probe information at the optimum: exact sum and large-N form.

    Exact: 4 sum_m m^2 e^{-m beta} / sum_m e^{-m beta} with the maximum
    exponent subtracted.  Large N: N^2 - 4N/(e^beta - 1)
    + 4(e^beta + 1)/(e^beta - 1)^2, which requires beta > 0.
    """
    if beta <= 0.0:
        raise ContractViolation("the large-N thermal form diverges for beta <= 0")
    m = dim.m_values()
    logw = -beta * m
    w = np.exp(logw - logw.max())
    exact = 4.0 * float(np.sum(m * m * w) / np.sum(w))
    n = dim.n_spins
    eb = math.exp(beta)
    large_n = n * n - 4.0 * n / (eb - 1.0) + 4.0 * (eb + 1.0) / (eb - 1.0) ** 2
    return (
        FisherResult(value=exact, method="thermal_exact"),
        FisherResult(value=large_n, method="thermal_large_n"),
    )


def qfi_deviation(dim: EnsembleDim, spec: DeviationSpec, t1: float) -> FisherResult:
    """Quadratic control-error law N^2 - N(N-1)(dwp^2 + dg^2) t1^2.

    Valid to second order for small deviations; a warning is issued once the
    dimensionless products |delta * t1| leave the trusted range.
    """
    n = dim.n_spins
    for name, delta in (("delta_g", spec.delta_g), ("delta_omega_p", spec.delta_omega_p)):
        if abs(delta * t1) > 0.1:
            warnings.warn(
                f"|{name} * t1| = {abs(delta * t1):.3g} exceeds 0.1; "
                "the quadratic law is a small-deviation expansion",
                stacklevel=2,
            )
    value = n * n - n * (n - 1) * (spec.delta_omega_p**2 + spec.delta_g**2) * t1 * t1
    return FisherResult(value=value, method="deviation")


def qfi_dephased(
    probe: SpectralProbe, theta0: float, x: float, generator: PhaseGenerator
) -> FisherResult:
    """Fisher information with a dephased ancilla at the optimal settings.

    Evaluates the two-term spectral sum over the joint eigenbasis of
    rho_P (x) rho_A' with the circuit generator G sigma_z, for any
    preparation angle theta0.  At theta0 = pi/2 this reduces to

        4 sum_i p_i <G^2>_i
        - sum_ij 8 x (2-x) p_i p_j / [(2-x) p_i + x p_j] |<i|G|j>|^2

    and for a polarized probe to (1-x)^2 N^2.  Only the ZZ-type generator is
    supported; whether the closed form carries over to the XZ interaction is
    not established, so that combination is rejected.
    """
    if not 0.0 <= x <= 1.0:
        raise ContractViolation(f"dephasing rate must lie in [0, 1], got {x!r}")
    if isinstance(generator, PhaseGenerator) and generator.kind == "xz":
        raise ContractViolation("dephased information is only supported for the ZZ interaction")
    rho_a = dephase_ancilla(ancilla_state(theta0), x).rho
    qvals, qvecs = np.linalg.eigh(rho_a)
    g = _generator_matrix(generator)
    v = probe.vectors
    p = probe.weights

    gv = g @ v
    mean_sq = 4.0 * float(np.sum(p * np.einsum("ik,ik->k", gv.conj(), gv).real))

    # Joint weights w_{i,alpha} = p_i q_alpha; matrix elements factorize as
    # <i|G|j> <a_alpha| sigma_z |a_beta>.
    overlaps = v.conj().T @ gv
    sz = qvecs.conj().T @ PAULI_Z @ qvecs
    w = np.outer(p, qvals).ravel()
    gmat = np.abs(np.kron(overlaps, sz)) ** 2
    keep = w > EPS_SPECTRUM
    wk = w[keep]
    denom = wk[:, None] + wk[None, :]
    coef = 8.0 * np.outer(wk, wk) / denom
    second = float(np.sum(coef * gmat[np.ix_(keep, keep)]))
    return FisherResult(value=mean_sq - second, method="dephased")


def _plus_minus_kets() -> tuple[np.ndarray, np.ndarray]:
    return (KET_E + KET_G) / np.sqrt(2.0), (KET_E - KET_G) / np.sqrt(2.0)


def _full_system_projectors(generator) -> tuple[np.ndarray, list[tuple[float, str]]]:
    """Columns |m>_gen (x) |+/-> and the (m, branch) labels, m ascending."""
    vals, vecs = eigenbasis(_generator_matrix(generator))
    plus, minus = _plus_minus_kets()
    columns = []
    labels = []
    for k in range(vals.size):
        for branch, ket in (("+", plus), ("-", minus)):
            columns.append(np.kron(vecs[:, k], ket))
            labels.append((float(vals[k]), branch))
    return np.stack(columns, axis=1), labels


def _ancilla_reduced(rho: np.ndarray) -> np.ndarray:
    d = rho.shape[0] // 2
    return np.einsum("iaib->ab", rho.reshape(d, 2, d, 2))


def measurement_probs(
    rho_theta: np.ndarray, basis: str = "full_system", generator=None
) -> ProbabilityTable:
    """Projective-measurement outcome table for the output state.

    ``basis="full_system"`` projects on |j,m>_gen (x) |+/-> over the supplied
    generator's eigenbasis; ``basis="ancilla_only"`` traces out the probe and
    projects the qubit on |+/->.
    """
    rho = np.asarray(rho_theta, dtype=complex)
    if basis == "full_system":
        if generator is None:
            raise ContractViolation("full-system readout needs a probe generator")
        columns, labels = _full_system_projectors(generator)
        probs = np.einsum("ik,ij,jk->k", columns.conj(), rho, columns).real
        rows = tuple((m, branch, float(pk)) for (m, branch), pk in zip(labels, probs))
    elif basis == "ancilla_only":
        reduced = _ancilla_reduced(rho)
        plus, minus = _plus_minus_kets()
        rows = tuple(
            (None, branch, float((ket.conj() @ reduced @ ket).real))
            for branch, ket in (("+", plus), ("-", minus))
        )
    else:
        raise ContractViolation(f"unknown measurement basis {basis!r}")
    return ProbabilityTable(rows=rows)


def _projected_diagonal(op: np.ndarray, columns: np.ndarray) -> np.ndarray:
    return np.einsum("ik,ij,jk->k", columns.conj(), op, columns).real


def cfi(
    probe: SpectralProbe,
    ancilla: AncillaState,
    params: ModelParams,
    sched: Schedule,
    generator=None,
    theta_eval: float = 0.2,
    mode: str = "analytic",
    h: float = 1e-5,
    basis: str = "full_system",
) -> FisherResult:
    """Classical Fisher information of the projective readout at theta_eval.

    The readout basis is fixed by ``generator`` (default: the optimized
    generator for ``params``) and does not follow the schedule, so arbitrary
    (t1, t2) pairs can be scanned against the same measurement.  The analytic
    path uses the exact d rho / d theta; ``mode="finite_diff"`` replaces the
    derivative with central differences of step ``h``.
    """
    if generator is None:
        generator = optimal_generator(params, probe.dim)
    if mode not in ("analytic", "finite_diff"):
        raise ContractViolation(f"unknown CFI mode {mode!r}")
    if mode == "finite_diff" and h <= 0.0:
        raise ContractViolation("finite-difference step must be positive")
    sched_eval = replace(sched, theta=theta_eval)

    if basis == "full_system":
        columns, _ = _full_system_projectors(generator)
    elif basis == "ancilla_only":
        # Ancilla-only readout: rank-(N+1) projectors I (x) |+/-><+/-|.
        plus, minus = _plus_minus_kets()
        columns = None
    else:
        raise ContractViolation(f"unknown measurement basis {basis!r}")

    def probs_of(rho: np.ndarray) -> np.ndarray:
        if columns is not None:
            return _projected_diagonal(rho, columns)
        reduced = _ancilla_reduced(rho)
        return np.array(
            [(plus.conj() @ reduced @ plus).real, (minus.conj() @ reduced @ minus).real]
        )

    if mode == "analytic":
        rho, drho = output_state_derivative(probe, ancilla, params, sched_eval)
        p = probs_of(rho)
        dp = probs_of(drho)
    else:
        p = probs_of(output_state(probe, ancilla, params, sched_eval))
        p_hi = probs_of(output_state(probe, ancilla, params, replace(sched, theta=theta_eval + h)))
        p_lo = probs_of(output_state(probe, ancilla, params, replace(sched, theta=theta_eval - h)))
        dp = (p_hi - p_lo) / (2.0 * h)

    p = np.clip(p, 0.0, None)
    keep = ~((p < EPS_PROB) & (np.abs(dp) < math.sqrt(EPS_PROB)))
    value = float(np.sum(dp[keep] ** 2 / p[keep]))
    method = "cfi_analytic" if mode == "analytic" else "cfi_finite_diff"
    return FisherResult(value=value, method=method)
