"""Dense statevector simulator: gates, Pauli-sum Hamiltonians, time evolution,
Haar sampling, and shot-noise measurement of expectations and fidelities.

States are plain complex ndarrays of length 2**n_qubits, normalized to unit
norm, with qubit 0 the most significant bit of the basis index.  Shot counts
accept ``math.inf`` as a sentinel for exact (noiseless) evaluation.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "PauliTermSum",
    "haar_random_state",
    "w_gate",
    "apply_single_qubit_gate",
    "heisenberg_hamiltonian",
    "exact_ground_energy",
    "pauli_expectation",
    "expectation_with_shots",
    "fidelity_with_shots",
    "evolve_piecewise",
]

_PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}

MAX_DENSE_QUBITS = 12


def _num_qubits(psi):
    n = int(round(math.log2(psi.size)))
    if 2**n != psi.size:
        raise ValueError(f"state length {psi.size} is not a power of two")
    return n


@dataclass(frozen=True)
class PauliTermSum:
    """Hermitian operator Σ_i h_i σ_i given as real-weighted Pauli strings."""

    n_qubits: int
    terms: tuple

    def __post_init__(self):
        for coeff, label in self.terms:
            if len(label) != self.n_qubits:
                raise ValueError(f"Pauli string {label!r} does not match {self.n_qubits} qubits")
            if any(c not in "IXYZ" for c in label):
                raise ValueError(f"invalid Pauli string {label!r}")
            if np.iscomplexobj(coeff):
                raise ValueError("coefficients must be real for a hermitian operator")

    def to_dense(self):
        dim = 2**self.n_qubits
        out = np.zeros((dim, dim), dtype=np.complex128)
        for coeff, label in self.terms:
            term = np.array([[coeff]], dtype=np.complex128)
            for c in label:
                term = np.kron(term, _PAULI[c])
            out += term
        return out


def haar_random_state(n: int, rng: np.random.Generator):
    """Haar-uniform pure state from normalized i.i.d. complex Gaussians."""
    if n < 1:
        raise ValueError("need at least one qubit")
    v = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return v / np.linalg.norm(v)


def w_gate(z: complex):
    """Single-qubit gate exp(−i(z σ₊ + z* σ₋)) with σ± = σˣ ± iσʸ.

    The generator is the hermitian matrix [[0, 2z], [2z*, 0]], so the
    exponential has the closed form below with rotation angle 2|z|.
    """
    r = abs(z)
    if r == 0:
        return np.eye(2, dtype=np.complex128)
    phi = 2.0 * r
    c = math.cos(phi)
    s = math.sin(phi)
    u = z / r
    return np.array([[c, -1j * s * u], [-1j * s * np.conj(u), c]], dtype=np.complex128)


def apply_single_qubit_gate(gate, qubit: int, psi):
    """Apply a 2×2 gate to one qubit of a dense state."""
    n = _num_qubits(psi)
    if not 0 <= qubit < n:
        raise ValueError(f"qubit {qubit} out of range for {n} qubits")
    right = 2 ** (n - qubit - 1)
    t = psi.reshape(-1, 2, right)
    out = np.einsum("ab,ibj->iaj", gate, t)
    return out.reshape(psi.shape)


def heisenberg_hamiltonian(n: int, j: float, h: float, periodic: bool = False):
    """Nearest-neighbor XX+YY+ZZ couplings with strength j plus a σᶻ field h.

    ``periodic`` adds the closing (n−1, 0) bond of the ring; it requires
    n ≥ 3 because a two-site ring would duplicate the single existing bond.
    Terms with exactly zero coefficient are omitted.
    """
    if n < 1:
        raise ValueError("need at least one qubit")
    if periodic and n < 3:
        raise ValueError("periodic boundary requires n >= 3 (bond duplication otherwise)")
    bonds = [(m, m + 1) for m in range(n - 1)]
    if periodic:
        bonds.append((n - 1, 0))
    terms = []
    if j != 0:
        for m, mm in bonds:
            for pauli in "XYZ":
                label = "".join(pauli if q in (m, mm) else "I" for q in range(n))
                terms.append((float(j), label))
    if h != 0:
        for m in range(n):
            label = "".join("Z" if q == m else "I" for q in range(n))
            terms.append((float(h), label))
    return PauliTermSum(n_qubits=n, terms=tuple(terms))


def exact_ground_energy(hamiltonian: PauliTermSum):
    """Minimum eigenvalue of the dense matrix; limited to small qubit counts."""
    if hamiltonian.n_qubits > MAX_DENSE_QUBITS:
        raise ValueError(f"dense diagonalization limited to {MAX_DENSE_QUBITS} qubits")
    dense = hamiltonian.to_dense()
    if np.abs(dense.imag).max(initial=0.0) < 1e-14:
        return float(np.linalg.eigvalsh(dense.real)[0])
    return float(np.linalg.eigvalsh(dense)[0])


@lru_cache(maxsize=256)
def _pauli_action(label: str):
    """Precompute P|b⟩ = phase[b] · |perm[b]⟩ for a Pauli string on basis states."""
    n = len(label)
    dim = 2**n
    idx = np.arange(dim)
    perm = np.zeros(dim, dtype=np.int64)
    phase = np.ones(dim, dtype=np.complex128)
    flip = 0
    for q, c in enumerate(label):
        bit = 1 << (n - q - 1)
        if c in "XY":
            flip ^= bit
        if c == "Y":
            # Y|0> = i|1>, Y|1> = -i|0>
            phase = phase * np.where(idx & bit, -1j, 1j)
        elif c == "Z":
            phase = phase * np.where(idx & bit, -1.0, 1.0)
    perm = idx ^ flip
    return perm, phase


def pauli_expectation(psi, label: str):
    """Exact ⟨ψ|P|ψ⟩ for one Pauli string (always real)."""
    perm, phase = _pauli_action(label)
    # <psi|P|psi> = sum_b psi*[perm[b]] phase[b] psi[b]
    return float(np.real(np.sum(np.conj(psi[perm]) * phase * psi)))


def _is_exact(shots):
    return shots is None or (isinstance(shots, float) and math.isinf(shots))


def expectation_with_shots(psi, hamiltonian: PauliTermSum, shots, rng=None):
    """Energy estimate measuring each Pauli term independently.

    Every term receives the full ``shots`` budget: the exact two-outcome
    distribution over its ±1 eigenvalues is sampled binomially and the
    weighted sample means are added.  ``math.inf`` shots returns the exact
    expectation.
    """
    if _is_exact(shots):
        return sum(c * pauli_expectation(psi, label) for c, label in hamiltonian.terms)
    shots = int(shots)
    if shots < 1:
        raise ValueError("shots must be >= 1")
    total = 0.0
    for coeff, label in hamiltonian.terms:
        mean = pauli_expectation(psi, label)
        p_plus = min(1.0, max(0.0, (1.0 + mean) / 2.0))
        successes = rng.binomial(shots, p_plus)
        total += coeff * (2.0 * successes / shots - 1.0)
    return total


def fidelity_with_shots(psi, phi, shots, rng=None):
    """Estimate |⟨ψ|φ⟩|² from a binomial sample of the given ensemble size."""
    if psi.shape != phi.shape:
        raise ValueError("states must have the same number of qubits")
    p = abs(np.vdot(psi, phi)) ** 2
    p = min(1.0, max(0.0, float(p)))
    if _is_exact(shots):
        return p
    shots = int(shots)
    if shots < 1:
        raise ValueError("shots must be >= 1")
    return rng.binomial(shots, p) / shots


def evolve_piecewise(psi0, slices):
    """Apply exp(−i Δt_m H_m) for each (H_m, Δt_m) in sequence, index 0 first.

    Generators must be hermitian; each exponential is computed from a
    spectral decomposition, adequate for the dense sizes supported here.
    """
    psi = np.asarray(psi0, dtype=np.complex128)
    n = _num_qubits(psi)
    if n > MAX_DENSE_QUBITS:
        raise ValueError(f"dense evolution limited to {MAX_DENSE_QUBITS} qubits")
    for generator, dt in slices:
        g = np.asarray(generator)
        if g.shape != (psi.size, psi.size):
            raise ValueError("generator dimension does not match the state")
        scale = max(1.0, float(np.abs(g).max(initial=0.0)))
        if np.abs(g - g.conj().T).max(initial=0.0) > 1e-10 * scale:
            raise ValueError("evolve_piecewise requires hermitian generators")
        w, u = np.linalg.eigh(g)
        psi = u @ (np.exp(-1j * dt * w) * (u.conj().T @ psi))
    return psi
