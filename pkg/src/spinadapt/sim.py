"""Statevector simulation and the observable suite.

Amplitude indexing: qubit 0 is the most significant bit, so reshaping to
[2]*n puts qubit q on axis q.  All gate kernels preserve the norm to float
round-off; exact propagation goes through an eigendecomposition below 4096
dimensions and a Krylov exponential-times-vector product above.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import cos, sin

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import oracle
from .basis import CsfBasis, SpinPath, enumerate_paths, singlet_pair_path, \
    triplet_reference_path
from .circuits import Circuit, csf_trotter_step, sz_trotter_step
from .encode import PauliSum, QubitLayout, build_layout
from .errors import InvalidQuantumNumbersError
from .sga import SparseOperator, apply_elementary_permutation

DENSE_EVOLVE_MAX_DIM = 4096


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray
    basis: str = "sz"                       # "sz" | "csf"
    layout: QubitLayout | None = field(default=None, repr=False)

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy(),
                           self.basis, self.layout)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def zero_state(n_qubits: int, basis: str = "sz",
               layout: QubitLayout | None = None) -> StateVector:
    amps = np.zeros(1 << n_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(n_qubits, amps, basis, layout)


def basis_state(n_qubits: int, bits: int, basis: str = "sz",
                layout=None) -> StateVector:
    amps = np.zeros(1 << n_qubits, dtype=complex)
    amps[bits] = 1.0
    return StateVector(n_qubits, amps, basis, layout)


def singlet_pair_state_sz(n_sites: int) -> StateVector:
    """Product of nearest-neighbor singlets in the computational basis."""
    pair = np.zeros(4, dtype=complex)
    pair[0b01] = 1 / np.sqrt(2)
    pair[0b10] = -1 / np.sqrt(2)
    amps = np.array([1.0], dtype=complex)
    for _ in range(n_sites // 2):
        amps = np.kron(amps, pair)
    return StateVector(n_sites, amps, "sz")


def csf_path_state(layout: QubitLayout, path: SpinPath) -> StateVector:
    return basis_state(layout.n_qubits, layout.encode_path(path), "csf", layout)


# --- gate kernels ---

def _apply_single(amps: np.ndarray, n: int, q: int, mat: np.ndarray) -> np.ndarray:
    a = amps.reshape((1 << q, 2, -1))
    top = mat[0, 0] * a[:, 0, :] + mat[0, 1] * a[:, 1, :]
    bot = mat[1, 0] * a[:, 0, :] + mat[1, 1] * a[:, 1, :]
    a = np.stack([top, bot], axis=1)
    return a.reshape(-1)


def _apply_diag(amps: np.ndarray, n: int, q: int, d0: complex, d1: complex):
    a = amps.reshape((1 << q, 2, -1))
    a[:, 0, :] *= d0
    a[:, 1, :] *= d1
    return amps


def _apply_cx(amps: np.ndarray, n: int, c: int, t: int) -> np.ndarray:
    qs = sorted((c, t))
    a = amps.reshape((1 << qs[0], 2, 1 << (qs[1] - qs[0] - 1), 2, -1))
    if c < t:
        tmp = a[:, 1, :, 0, :].copy()
        a[:, 1, :, 0, :] = a[:, 1, :, 1, :]
        a[:, 1, :, 1, :] = tmp
    else:
        tmp = a[:, 0, :, 1, :].copy()
        a[:, 0, :, 1, :] = a[:, 1, :, 1, :]
        a[:, 1, :, 1, :] = tmp
    return amps


def apply_gate(state: StateVector, gate) -> None:
    """In-place gate application."""
    amps, n = state.amplitudes, state.n_qubits
    kind = gate.kind
    if kind == "PHASE":
        amps *= np.exp(1j * gate.angle)
        return
    if kind == "RZ":
        h = gate.angle / 2
        _apply_diag(amps, n, gate.target, np.exp(-1j * h), np.exp(1j * h))
        return
    if kind == "CX":
        _apply_cx(amps, n, gate.control, gate.target)
        return
    if kind == "X":
        mat = np.array([[0, 1], [1, 0]], dtype=complex)
    elif kind == "RX":
        h = gate.angle / 2
        mat = np.array([[cos(h), -1j * sin(h)], [-1j * sin(h), cos(h)]])
    elif kind == "RY":
        h = gate.angle / 2
        mat = np.array([[cos(h), -sin(h)], [sin(h), cos(h)]], dtype=complex)
    else:
        raise ValueError(f"unknown gate kind {kind!r}")
    state.amplitudes = _apply_single(amps, n, gate.target, mat)


def simulate(circuit: Circuit, initial: StateVector | None = None) -> StateVector:
    """Apply the circuit to a copy of the initial state (default |0...0>)."""
    state = zero_state(circuit.n_qubits) if initial is None else initial.copy()
    if initial is not None and initial.n_qubits != circuit.n_qubits:
        raise InvalidQuantumNumbersError("state/circuit qubit count mismatch")
    for gate in circuit.gates:
        apply_gate(state, gate)
    return state


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense unitary, column by column; test-scale only."""
    dim = 1 << circuit.n_qubits
    if dim > 4096:
        raise InvalidQuantumNumbersError("unitary build capped at 12 qubits")
    cols = []
    for k in range(dim):
        cols.append(simulate(circuit, basis_state(circuit.n_qubits, k)).amplitudes)
    return np.column_stack(cols)


# --- exact propagation ---

def _as_matrix(hamiltonian):
    if isinstance(hamiltonian, SparseOperator):
        return hamiltonian.matrix
    if isinstance(hamiltonian, PauliSum):
        return hamiltonian.to_sparse()
    return hamiltonian


def exact_evolve(hamiltonian, amplitudes: np.ndarray, duration: float) -> np.ndarray:
    """exp(-i T H) applied to a vector."""
    mat = _as_matrix(hamiltonian)
    dim = amplitudes.size
    if duration == 0.0:
        return amplitudes.copy()
    if dim <= DENSE_EVOLVE_MAX_DIM:
        dense = mat.toarray() if sp.issparse(mat) else np.asarray(mat)
        w, v = np.linalg.eigh(dense)
        return (v * np.exp(-1j * duration * w)) @ (v.conj().T @ amplitudes)
    op = sp.csr_matrix(mat) * (-1j * duration)
    return spla.expm_multiply(op, amplitudes.astype(complex))


# --- observables ---

def bond_energies_sz(state: StateVector, coupling: float = 1.0) -> np.ndarray:
    """<(XX+YY+ZZ)/4>_{p,p+1} * J for every bond, via the swap identity."""
    n = state.n_qubits
    amps = state.amplitudes
    out = np.zeros(n - 1)
    for p in range(1, n):
        swapped = oracle.apply_permutation(amps, n, p, p + 1)
        val = np.vdot(amps, swapped).real / 2 - 0.25
        out[p - 1] = coupling * val
    return out


def total_energy_sz(state: StateVector, coupling: float = 1.0) -> float:
    return float(bond_energies_sz(state, coupling).sum())


def s2_expectation_sz(state: StateVector) -> float:
    return float(np.vdot(state.amplitudes,
                         oracle.apply_total_s2(state.amplitudes,
                                               state.n_qubits)).real)


def sz_expectation_sz(state: StateVector) -> float:
    return float(np.vdot(state.amplitudes,
                         oracle.apply_total_sz(state.amplitudes,
                                               state.n_qubits)).real)


def decode_to_path_vector(state: StateVector, basis: CsfBasis,
                          layout: QubitLayout) -> np.ndarray:
    """Gather amplitudes of physical bit-strings into basis ordering."""
    bits = layout.physical_bitstrings(basis)
    return state.amplitudes[bits]


def physical_weight(state: StateVector, basis: CsfBasis,
                    layout: QubitLayout) -> float:
    vec = decode_to_path_vector(state, basis, layout)
    return float(np.vdot(vec, vec).real)


def _bond_operators_csf(basis: CsfBasis) -> list[sp.csr_matrix]:
    """Truncated transposition matrices for every bond, built once."""
    mats = []
    dim = len(basis)
    for p in range(1, basis.n_sites):
        rows, cols, vals = [], [], []
        for c, path in enumerate(basis):
            for q, v in apply_elementary_permutation(
                    path, p, trunc_x2=basis.trunc_x2):
                rows.append(basis.index[q.heights])
                cols.append(c)
                vals.append(v)
        mats.append(sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim)))
    return mats


def bond_energies_csf(path_vector: np.ndarray, bond_ops,
                      coupling: float = 1.0) -> np.ndarray:
    """(J/2)(<pi_{p,p+1}> - 1/2) per bond on a spin-path coefficient vector."""
    out = np.zeros(len(bond_ops))
    nrm = np.vdot(path_vector, path_vector).real
    for k, op in enumerate(bond_ops):
        val = np.vdot(path_vector, op @ path_vector).real / nrm
        out[k] = (coupling / 2) * (val - 0.5)
    return out


def fidelity(a, b) -> float:
    """|<a|b>| for two states over a common register or coefficient space."""
    va = a.amplitudes if isinstance(a, StateVector) else np.asarray(a)
    vb = b.amplitudes if isinstance(b, StateVector) else np.asarray(b)
    if va.shape != vb.shape:
        raise InvalidQuantumNumbersError("fidelity needs matching state shapes")
    return float(abs(np.vdot(va, vb)))


# --- Trotter evolution drivers ---

@dataclass
class EvolutionRecord:
    times: np.ndarray
    total_energy: np.ndarray
    bond_energies: np.ndarray            # shape (len(times), n_bonds)
    aux: dict[str, np.ndarray] = field(default_factory=dict)

    def to_csv(self) -> str:
        cols = ["t", "total_energy"]
        extras = sorted(self.aux)
        cols += extras
        cols += [f"bond_{p + 1}" for p in range(self.bond_energies.shape[1])]
        lines = [",".join(cols)]
        for k, t in enumerate(self.times):
            row = [f"{t:.17g}", f"{self.total_energy[k]:.17g}"]
            row += [f"{self.aux[name][k]:.17g}" for name in extras]
            row += [f"{v:.17g}" for v in self.bond_energies[k]]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"


def trotter_evolve_sz(n_sites: int, duration: float, n_layers: int,
                      order: int = 1, coupling: float = 1.0,
                      initial: StateVector | None = None,
                      track_symmetry: bool = False):
    """Layered evolution in the computational basis, observables per layer."""
    state = singlet_pair_state_sz(n_sites) if initial is None else initial.copy()
    dt = duration / n_layers if n_layers else 0.0
    step = sz_trotter_step(n_sites, dt, order, coupling)
    times = [0.0]
    bonds = [bond_energies_sz(state, coupling)]
    aux: dict[str, list] = {}
    if track_symmetry:
        aux["s_squared"] = [s2_expectation_sz(state)]
        aux["total_sz"] = [sz_expectation_sz(state)]
    for k in range(n_layers):
        state = simulate(step, state)
        times.append((k + 1) * dt)
        bonds.append(bond_energies_sz(state, coupling))
        if track_symmetry:
            aux["s_squared"].append(s2_expectation_sz(state))
            aux["total_sz"].append(sz_expectation_sz(state))
    bonds = np.array(bonds)
    record = EvolutionRecord(np.array(times), bonds.sum(axis=1), bonds,
                             {k: np.array(v) for k, v in aux.items()})
    return record, state


def sz_reference_state(path: SpinPath) -> StateVector:
    """Computational-basis vector of a spin path.

    The two schedule start states are products (singlet pairs, optionally with
    a stretched pair at the end), built directly at any size; anything else
    falls back to the expansion oracle and inherits its size guard.
    """
    n = path.n_sites
    if path == singlet_pair_path(n):
        return singlet_pair_state_sz(n)
    if n >= 2 and path == triplet_reference_path(n):
        base = singlet_pair_state_sz(n - 2).amplitudes if n > 2 \
            else np.array([1.0], dtype=complex)
        up_pair = np.zeros(4, complex)
        up_pair[0b00] = 1.0
        return StateVector(n, np.kron(base, up_pair), "sz")
    dense = oracle.expand_csf(path)
    return StateVector(n, dense.amplitudes.copy(), "sz")


def trotter_comparison_csf(n_sites: int, total_spin_x2: int, trunc_x2: int,
                           duration: float, n_layers: int, order: int = 1,
                           coupling: float = 1.0,
                           initial_path: SpinPath | None = None):
    """Encoded-register evolution scored against two references.

    avg_abs_bond_error: bond energies vs the same-shaped Trotter run in the
    computational basis; fidelity: overlap with the exact evolution under the
    truncated Hamiltonian, both per recorded time.
    """
    if initial_path is None:
        initial_path = singlet_pair_path(n_sites) if total_spin_x2 == 0 \
            else triplet_reference_path(n_sites)
    record, state, basis, layout = trotter_evolve_csf(
        n_sites, total_spin_x2, trunc_x2, duration, n_layers, order,
        coupling, initial_path)
    ref_record, _ = trotter_evolve_sz(n_sites, duration, n_layers, order,
                                      coupling, sz_reference_state(initial_path))
    from .sga import build_hamiltonian
    ham = build_hamiltonian(basis, "band", coupling)
    exact = np.zeros(len(basis), dtype=complex)
    exact[basis.position(initial_path)] = 1.0
    dt = duration / n_layers if n_layers else 0.0
    fids = [1.0]
    psi = exact
    # re-run layer by layer only for the overlap series
    step = csf_trotter_step(n_sites, total_spin_x2, trunc_x2, dt, order,
                            coupling=coupling, layout=layout)
    walker = csf_path_state(layout, initial_path)
    for _ in range(n_layers):
        psi = exact_evolve(ham, psi, dt)
        walker = simulate(step, walker)
        fids.append(fidelity(psi, decode_to_path_vector(walker, basis, layout)))
    err = np.abs(record.bond_energies - ref_record.bond_energies).mean(axis=1)
    aux = {"avg_abs_bond_error": err, "fidelity": np.array(fids)}
    return EvolutionRecord(record.times, record.total_energy,
                           record.bond_energies, aux), state


def trotter_evolve_csf(n_sites: int, total_spin_x2: int, trunc_x2: int,
                       duration: float, n_layers: int, order: int = 1,
                       coupling: float = 1.0,
                       initial_path: SpinPath | None = None):
    """Layered evolution on the encoded register, observables per layer.

    Bond energies use the truncated transposition operators on the decoded
    spin-path amplitudes; the recorded physical weight stays at 1 because the
    encoded terms never map the physical sector out of itself.
    """
    if initial_path is None:
        initial_path = singlet_pair_path(n_sites) if total_spin_x2 == 0 \
            else triplet_reference_path(n_sites)
    basis = enumerate_paths(n_sites, total_spin_x2, trunc_x2)
    layout = build_layout(n_sites, total_spin_x2, trunc_x2)
    bond_ops = _bond_operators_csf(basis)
    dt = duration / n_layers if n_layers else 0.0
    step = csf_trotter_step(n_sites, total_spin_x2, trunc_x2, dt, order,
                            coupling=coupling, layout=layout)
    state = csf_path_state(layout, initial_path)
    times, bonds, weights = [0.0], [], []

    def measure():
        vec = decode_to_path_vector(state, basis, layout)
        weights.append(float(np.vdot(vec, vec).real))
        bonds.append(bond_energies_csf(vec, bond_ops, coupling))

    measure()
    for k in range(n_layers):
        state = simulate(step, state)
        times.append((k + 1) * dt)
        measure()
    bonds = np.array(bonds)
    record = EvolutionRecord(np.array(times), bonds.sum(axis=1), bonds,
                             {"physical_weight": np.array(weights)})
    return record, state, basis, layout
