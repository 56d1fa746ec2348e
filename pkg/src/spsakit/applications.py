"""The three benchmark problems packaged as shot-noisy objective oracles.

Every problem is natively parameterized by a flat complex vector; real-field
optimizers see the same problem through an interleaved (Re, Im) adapter, so
both fields optimize exactly the same landscape.  ``shots=math.inf`` makes
any oracle exact.
"""

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np

from .estimators import COMPLEX, REAL, complex_from_interleaved, interleave_complex
from .quantum import (
    PauliTermSum,
    apply_single_qubit_gate,
    expectation_with_shots,
    fidelity_with_shots,
    haar_random_state,
    heisenberg_hamiltonian,
    pauli_expectation,
    w_gate,
)

__all__ = [
    "VqeProblem",
    "GrapeProblem",
    "SgqtProblem",
    "Oracles",
    "entangling_layer",
    "vqe_state",
    "vqe_objective",
    "vqe_fidelity",
    "vqe_energy_exact",
    "grape_final_state",
    "grape_objective",
    "grape_infidelity_exact",
    "sgqt_objective",
    "sgqt_infidelity_exact",
    "make_oracles",
    "initial_point",
    "materialize",
    "param_count",
    "exact_minimum",
]


@dataclass(frozen=True)
class VqeProblem:
    """Ground-energy search for the Heisenberg model with a layered ansatz.

    ``entangler`` selects the entangling layer between single-qubit gate
    layers: ``ccz_ring`` (default) tiles the qubit ring with three-qubit
    doubly-controlled-Z gates, ``cz_ring`` with two-qubit controlled-Z gates.
    """

    n_qubits: int = 10
    layers: int = 1
    j: float = 1.0
    h: float = 0.3
    periodic: bool = True
    shots: float = 2e4
    entangler: str = "ccz_ring"


@dataclass(frozen=True, eq=False)
class GrapeProblem:
    """Piecewise-constant control of Heisenberg couplings toward a target state.

    ``psi0=None`` means the benchmark harness draws a Haar-random initial
    state per run; ``target=None`` means the all-zeros state.
    """

    n_qubits: int = 5
    slices: int = 25
    total_time: float | None = None
    periodic: bool = False
    shots: float = 2**13
    psi0: np.ndarray | None = None
    target: np.ndarray | None = None

    @property
    def dt(self) -> float:
        total = self.slices if self.total_time is None else self.total_time
        return total / self.slices


@dataclass(frozen=True, eq=False)
class SgqtProblem:
    """Pure-state estimation by direct minimization of measured infidelity."""

    n_qubits: int = 6
    shots: float = 2e4
    unknown: np.ndarray | None = None


# ---------------------------------------------------------------------------
# VQE


ENTANGLERS = ("ccz_ring", "cz_ring")


@lru_cache(maxsize=64)
def entangling_layer(n: int, kind: str = "ccz_ring"):
    """Diagonal of the entangling layer (both kinds are computational-basis
    diagonal), entries ±1 of length 2**n.

    ``cz_ring`` places controlled-Z gates on qubit pairs (q, q+1 mod n);
    ``ccz_ring`` places doubly-controlled-Z gates on consecutive triples
    (q, q+1, q+2 mod n).  Duplicate gate supports from the ring closure are
    applied once, so a two-qubit layer is a single CZ for either kind.  Every
    gate is an involution and all commute, hence the layer squares to the
    identity.
    """
    if n < 2:
        raise ValueError("entangling layer needs at least 2 qubits")
    if kind not in ENTANGLERS:
        raise ValueError(f"unknown entangler {kind!r}")
    if kind == "ccz_ring" and n > 2:
        groups = {tuple(sorted({q % n, (q + 1) % n, (q + 2) % n})) for q in range(n)}
    else:
        groups = {tuple(sorted({q % n, (q + 1) % n})) for q in range(n)}
    idx = np.arange(2**n)
    parity = np.zeros(2**n, dtype=np.int64)
    for qubits in groups:
        mask = np.ones(2**n, dtype=np.int64)
        for q in qubits:
            mask &= (idx >> (n - q - 1)) & 1
        parity += mask
    return np.where(parity % 2, -1.0, 1.0).astype(np.complex128)


@lru_cache(maxsize=64)
def _vqe_hamiltonian(n, j, h, periodic):
    return heisenberg_hamiltonian(n, j, h, periodic)


def vqe_state(prob: VqeProblem, z):
    """Build the ansatz state: alternating single-qubit W layers and entanglers.

    Layer l of the parameter vector occupies ``z[l*n:(l+1)*n]``.
    """
    n, d = prob.n_qubits, prob.layers
    z = np.asarray(z, dtype=np.complex128)
    if z.size != n * (d + 1):
        raise ValueError(f"expected {n * (d + 1)} complex parameters, got {z.size}")
    psi = np.zeros(2**n, dtype=np.complex128)
    psi[0] = 1.0
    ent = entangling_layer(n, prob.entangler) if d >= 1 else None
    for layer in range(d + 1):
        if layer:
            psi = ent * psi
        for q in range(n):
            psi = apply_single_qubit_gate(w_gate(z[layer * n + q]), q, psi)
    return psi


def vqe_objective(prob: VqeProblem, params, rng=None):
    """Shot-sampled energy of the ansatz state."""
    psi = vqe_state(prob, params)
    ham = _vqe_hamiltonian(prob.n_qubits, prob.j, prob.h, prob.periodic)
    return expectation_with_shots(psi, ham, prob.shots, rng)


def vqe_energy_exact(prob: VqeProblem, params):
    """Noiseless energy of the ansatz state."""
    psi = vqe_state(prob, params)
    ham = _vqe_hamiltonian(prob.n_qubits, prob.j, prob.h, prob.periodic)
    return sum(c * pauli_expectation(psi, label) for c, label in ham.terms)


def vqe_fidelity(prob: VqeProblem, params_a, params_b, rng=None):
    """Shot-sampled fidelity between two ansatz states."""
    psi_a = vqe_state(prob, params_a)
    psi_b = vqe_state(prob, params_b)
    return fidelity_with_shots(psi_a, psi_b, prob.shots, rng)


# ---------------------------------------------------------------------------
# GRAPE


@lru_cache(maxsize=16)
def _bond_operators(n, periodic):
    """Stack of the three coupling operators Σ_{<a,b>} σᵏ_a σᵏ_b (real symmetric)."""
    ham = heisenberg_hamiltonian(n, 1.0, 0.0, periodic)
    ops = []
    for pauli in "XYZ":
        dense = PauliTermSum(
            n_qubits=n,
            terms=tuple((c, lab) for c, lab in ham.terms if pauli in lab),
        ).to_dense()
        ops.append(dense.real)
    return np.stack(ops)


_TAYLOR_INV = tuple(1.0 / math.factorial(j) for j in range(13))


def _expm_stack(a):
    """exp(A_m) for a stack of small square matrices, batched over the leading axis.

    Degree-12 Taylor in Paterson-Stockmeyer form with scaling and squaring;
    much faster than per-slice scipy.expm for the sizes used here and
    accurate to ~1e-13 for the norms reached after scaling.
    """
    norm = float(np.abs(a).sum(axis=-1).max(initial=0.0))
    if not math.isfinite(norm):
        return np.full_like(a, np.nan)
    squarings = max(0, math.ceil(math.log2(norm))) if norm > 1.0 else 0
    squarings = min(squarings, 60)
    b = a / (2.0**squarings)
    inv = _TAYLOR_INV
    eye = np.broadcast_to(np.eye(a.shape[-1], dtype=a.dtype), a.shape)
    b2 = b @ b
    b3 = b2 @ b
    p0 = eye + b * inv[1] + b2 * inv[2]
    p1 = eye * inv[3] + b * inv[4] + b2 * inv[5]
    p2 = eye * inv[6] + b * inv[7] + b2 * inv[8]
    p3 = eye * inv[9] + b * inv[10] + b2 * inv[11] + b3 * inv[12]
    out = p0 + b3 @ (p1 + b3 @ (p2 + b3 @ p3))
    for _ in range(squarings):
        out = out @ out
    return out


def grape_final_state(prob: GrapeProblem, controls):
    """Evolve psi0 through the M piecewise-constant slices.

    Slice m uses the three complex couplings ``controls[3m:3m+3]`` as written
    in the control Hamiltonian, so the generator is complex symmetric rather
    than hermitian: imaginary control parts drive non-unitary amplitude
    shaping.  The state is renormalized after every slice, which leaves the
    final direction (and hence any fidelity) unchanged.
    """
    controls = np.asarray(controls, dtype=np.complex128)
    if controls.size != 3 * prob.slices:
        raise ValueError(f"expected {3 * prob.slices} complex controls, got {controls.size}")
    if prob.psi0 is None:
        raise ValueError("GrapeProblem.psi0 is unset; materialize the problem first")
    bonds = _bond_operators(prob.n_qubits, prob.periodic)
    coeffs = controls.reshape(prob.slices, 3)
    # exp(-i dt H_m) with H_m = -(1/2) sum_k J_k B_k
    generators = np.einsum("mk,kij->mij", (0.5j * prob.dt) * coeffs, bonds)
    propagators = _expm_stack(generators)
    psi = np.asarray(prob.psi0, dtype=np.complex128)
    for m in range(prob.slices):
        psi = propagators[m] @ psi
        norm = np.linalg.norm(psi)
        if not np.isfinite(norm) or norm == 0.0:
            return np.full_like(psi, np.nan)
        psi = psi / norm
    return psi


def _grape_target(prob: GrapeProblem):
    if prob.target is not None:
        return np.asarray(prob.target, dtype=np.complex128)
    target = np.zeros(2**prob.n_qubits, dtype=np.complex128)
    target[0] = 1.0
    return target


def grape_objective(prob: GrapeProblem, controls, rng=None):
    """Shot-sampled infidelity 1 − |⟨target|ψ̃_f⟩|²."""
    psi = grape_final_state(prob, controls)
    if not np.all(np.isfinite(psi.view(np.float64))):
        return float("nan")
    return 1.0 - fidelity_with_shots(_grape_target(prob), psi, prob.shots, rng)


def grape_infidelity_exact(prob: GrapeProblem, controls):
    """Noiseless infidelity of the evolved state."""
    psi = grape_final_state(prob, controls)
    if not np.all(np.isfinite(psi.view(np.float64))):
        return float("nan")
    return 1.0 - fidelity_with_shots(_grape_target(prob), psi, math.inf)


def _grape_fidelity(prob: GrapeProblem, controls_a, controls_b, rng=None):
    """Shot-sampled fidelity between the final states of two control vectors."""
    psi_a = grape_final_state(prob, controls_a)
    psi_b = grape_final_state(prob, controls_b)
    if not np.all(np.isfinite(psi_a.view(np.float64))) or not np.all(
        np.isfinite(psi_b.view(np.float64))
    ):
        return float("nan")
    return fidelity_with_shots(psi_a, psi_b, prob.shots, rng)


# ---------------------------------------------------------------------------
# SGQT


def _normalized_guess(amplitudes):
    amps = np.asarray(amplitudes, dtype=np.complex128)
    norm = np.linalg.norm(amps)
    if norm == 0.0:
        raise ValueError("guess amplitudes must not be the zero vector")
    return amps / norm


def sgqt_objective(prob: SgqtProblem, amplitudes, rng=None):
    """Shot-sampled infidelity between the unknown state and the guess."""
    if prob.unknown is None:
        raise ValueError("SgqtProblem.unknown is unset; materialize the problem first")
    if np.asarray(amplitudes).size != 2**prob.n_qubits:
        raise ValueError(f"expected {2**prob.n_qubits} amplitudes")
    guess = _normalized_guess(amplitudes)
    return 1.0 - fidelity_with_shots(prob.unknown, guess, prob.shots, rng)


def sgqt_infidelity_exact(prob: SgqtProblem, amplitudes):
    """Noiseless infidelity of the guess."""
    guess = _normalized_guess(amplitudes)
    return 1.0 - fidelity_with_shots(prob.unknown, guess, math.inf)


def _sgqt_fidelity(prob: SgqtProblem, amps_a, amps_b, rng=None):
    return fidelity_with_shots(
        _normalized_guess(amps_a), _normalized_guess(amps_b), prob.shots, rng
    )


# ---------------------------------------------------------------------------
# Uniform problem interface used by the benchmark harness


class Oracles(NamedTuple):
    objective: Callable
    fidelity: Callable
    monitor: Callable


def param_count(problem) -> int:
    """Number of complex parameters of the problem."""
    if isinstance(problem, VqeProblem):
        return problem.n_qubits * (problem.layers + 1)
    if isinstance(problem, GrapeProblem):
        return 3 * problem.slices
    if isinstance(problem, SgqtProblem):
        return 2**problem.n_qubits
    raise TypeError(f"unknown problem type {type(problem).__name__}")


def materialize(problem, rng):
    """Resolve any per-run Haar-random states left unset on the problem."""
    if isinstance(problem, GrapeProblem) and problem.psi0 is None:
        return replace(problem, psi0=haar_random_state(problem.n_qubits, rng))
    if isinstance(problem, SgqtProblem) and problem.unknown is None:
        return replace(problem, unknown=haar_random_state(problem.n_qubits, rng))
    return problem


def initial_point(problem, rng):
    """Draw the complex initial parameter vector for one run."""
    if isinstance(problem, VqeProblem):
        p = param_count(problem)
        return (rng.standard_normal(p) + 1j * rng.standard_normal(p)) / math.sqrt(2.0)
    if isinstance(problem, GrapeProblem):
        return np.zeros(param_count(problem), dtype=np.complex128)
    if isinstance(problem, SgqtProblem):
        return haar_random_state(problem.n_qubits, rng)
    raise TypeError(f"unknown problem type {type(problem).__name__}")


def exact_minimum(problem):
    """Known lower bound of the objective: exact ground energy, or 0 for infidelities."""
    if isinstance(problem, VqeProblem):
        from .quantum import exact_ground_energy

        return exact_ground_energy(
            _vqe_hamiltonian(problem.n_qubits, problem.j, problem.h, problem.periodic)
        )
    return 0.0


def parameter_projection(problem, field: str = COMPLEX):
    """Constraint-restoring reparameterization for the problem, or None.

    SGQT parameters are state amplitudes: the objective is invariant under
    their scale, but the iterate must stay a preparable (unit-norm) state for
    the perturbation magnitudes to keep their meaning.  The other problems
    have unconstrained parameters.
    """
    if isinstance(problem, SgqtProblem):
        def unit_norm(z):
            return z / np.linalg.norm(z)

        return unit_norm
    return None


def make_oracles(problem, rng, field: str = COMPLEX) -> Oracles:
    """Build (objective, fidelity, monitor) callables over the chosen field.

    The objective and fidelity share the given rng for shot sampling; the
    monitor is noiseless and rng-free.  Real-field oracles interpret
    parameters as interleaved (Re, Im) pairs of the complex parameters.
    """
    if isinstance(problem, VqeProblem):
        obj = lambda z: vqe_objective(problem, z, rng)
        fid = lambda za, zb: vqe_fidelity(problem, za, zb, rng)
        mon = lambda z: vqe_energy_exact(problem, z)
    elif isinstance(problem, GrapeProblem):
        obj = lambda z: grape_objective(problem, z, rng)
        fid = lambda za, zb: _grape_fidelity(problem, za, zb, rng)
        mon = lambda z: grape_infidelity_exact(problem, z)
    elif isinstance(problem, SgqtProblem):
        obj = lambda z: sgqt_objective(problem, z, rng)
        fid = lambda za, zb: _sgqt_fidelity(problem, za, zb, rng)
        mon = lambda z: sgqt_infidelity_exact(problem, z)
    else:
        raise TypeError(f"unknown problem type {type(problem).__name__}")

    if field == REAL:
        c_obj, c_fid, c_mon = obj, fid, mon
        obj = lambda theta: c_obj(complex_from_interleaved(theta))
        fid = lambda ta, tb: c_fid(
            complex_from_interleaved(ta), complex_from_interleaved(tb)
        )
        mon = lambda theta: c_mon(complex_from_interleaved(theta))
    elif field != COMPLEX:
        raise ValueError(f"unknown field {field!r}")
    return Oracles(objective=obj, fidelity=fid, monitor=mon)
