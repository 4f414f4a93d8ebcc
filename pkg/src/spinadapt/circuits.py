"""Gate-level Trotter layers.

Two families: the reference step in the computational basis (three-CX
splitting of each two-site exchange block) and the spin-adapted steps built
from the encoded band terms (pass-through pieces become CX-RZ-CX pairs,
tilted-field pieces become RY-conjugated controlled-Z rotations compiled as a
CX ladder walking the control parities).

Conventions: gates apply in list order; RZ(t) = exp(-i t Z/2) and likewise RX,
RY; PHASE(t) multiplies the whole state by exp(i t) (its target slot is kept
only for the uniform text format); CX stores (control, target).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import isfinite, pi

from .encode import BandTerm, QubitLayout, band_terms, build_layout
from .errors import UnsupportedConfigurationError
from .sga import band_coefficients

GATE_KINDS = ("RX", "RY", "RZ", "X", "CX", "PHASE")


@dataclass(frozen=True)
class Gate:
    kind: str
    target: int
    control: int | None = None
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.control is not None and self.control == self.target:
            raise ValueError("control and target must differ")
        if self.angle is not None and not isfinite(self.angle):
            raise ValueError("gate angle must be finite")


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...]
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for g in self.gates:
            if g.kind == "PHASE":
                continue  # global action, target slot is formal
            qs = (g.target,) if g.control is None else (g.target, g.control)
            if any(q < 0 or q >= self.n_qubits for q in qs):
                raise ValueError(f"gate {g} outside {self.n_qubits}-qubit register")

    def __len__(self):
        return len(self.gates)


def _rz(q, a):
    return Gate("RZ", q, angle=float(a))


def _ry(q, a):
    return Gate("RY", q, angle=float(a))


def _cx(c, t):
    return Gate("CX", t, control=c)


def _phase(a):
    return Gate("PHASE", 0, angle=float(a))


def heisenberg_bond_block(q0: int, q1: int, theta: float) -> list[Gate]:
    """exp(-i theta (XX+YY+ZZ)) on two qubits with three CX gates.

    Angle bookkeeping was fixed against the dense exponential; the leading
    PHASE keeps the unitary exactly equal, not just equal up to phase.
    """
    return [
        _phase(-pi / 4),
        _rz(q0, -pi / 2),
        _cx(q1, q0),
        _rz(q0, 2 * theta + 3 * pi / 2),
        _ry(q1, 2 * theta + 3 * pi / 2),
        _cx(q0, q1),
        _ry(q1, pi / 2 - 2 * theta),
        _cx(q1, q0),
        _rz(q1, pi / 2),
    ]


def sz_trotter_step(n_sites: int, dt: float, order: int = 1,
                    coupling: float = 1.0) -> Circuit:
    """One Trotter step for the chain in the computational basis.

    Bonds split into the layer containing (1,2) and the layer containing
    (2,3); order 2 symmetrizes by halving the first layer around the second.
    Bond angle theta = J*dt/4 because each bond operator is J(XX+YY+ZZ)/4.
    """
    if order not in (1, 2):
        raise UnsupportedConfigurationError("Trotter order must be 1 or 2")
    gates: list[Gate] = []

    def layer(parity: int, step_dt: float) -> None:
        for p in range(1 + parity, n_sites, 2):
            gates.extend(heisenberg_bond_block(p - 1, p, coupling * step_dt / 4))

    if order == 1:
        layer(0, dt)
        layer(1, dt)
    else:
        layer(0, dt / 2)
        layer(1, dt)
        layer(0, dt / 2)
    return Circuit(n_sites, tuple(gates),
                   {"basis": "sz", "dt": dt, "order": order})


def _gray_subsets(n_units: int):
    """Binary-reflected Gray walk over unit subsets: (toggle_index, subset)."""
    state = 0
    seq = []
    for k in range(1, 1 << n_units):
        g = k ^ (k >> 1)
        toggle = (g ^ state).bit_length() - 1
        state = g
        seq.append((toggle, state))
    return seq


def _emit_diag_exp(term: BandTerm, phi: float, gates: list[Gate]) -> None:
    """Append exp(-i phi * coeff * product-of-diagonal-units)."""
    parities = {frozenset(): term.coeff}
    for unit in term.units:
        new = {}
        for par, w in parities.items():
            if unit.projector:
                new[par] = new.get(par, 0.0) + w / 2
                pz = par.symmetric_difference(unit.qubits)
                new[pz] = new.get(pz, 0.0) + w * unit.sign / 2
            else:
                pz = par.symmetric_difference(unit.qubits)
                new[pz] = new.get(pz, 0.0) + w * unit.sign
        parities = new
    for par in sorted(parities, key=sorted):
        w = parities[par]
        if abs(w) < 1e-15:
            continue
        if not par:
            gates.append(_phase(-phi * w))
        elif len(par) == 1:
            (q,) = par
            gates.append(_rz(q, 2 * phi * w))
        else:
            qs = sorted(par)
            for q in qs[:-1]:
                gates.append(_cx(q, qs[-1]))
            gates.append(_rz(qs[-1], 2 * phi * w))
            for q in reversed(qs[:-1]):
                gates.append(_cx(q, qs[-1]))


def _emit_mix_exp(term: BandTerm, phi: float, gates: list[Gate]) -> None:
    """Append exp(-i phi * coeff * controls x (a Z + b X)) via RY conjugation.

    The controlled-Z core walks the control-unit subsets in Gray order,
    rotating the center after every toggle, so k control units cost
    sum(|unit|) * 2 CX gates regardless of how the weights fall.
    """
    t = term.mix_qubit
    theta = band_coefficients(term.s_x2).theta
    units = term.units
    k = len(units)
    base = term.coeff / (1 << k)
    gates.append(_ry(t, -theta))
    gates.append(_rz(t, 2 * phi * base))
    for toggle, state in _gray_subsets(k):
        for q in units[toggle].qubits:
            gates.append(_cx(q, t))
        sign = 1.0
        for j in range(k):
            if (state >> j) & 1:
                sign *= units[j].sign
        gates.append(_rz(t, 2 * phi * base * sign))
    # unwind whatever units remain toggled after the walk
    if k:
        state = ((1 << k) - 1) ^ (((1 << k) - 1) >> 1)
        for j in range(k):
            if (state >> j) & 1:
                for q in units[j].qubits:
                    gates.append(_cx(q, t))
    gates.append(_ry(t, theta))


def _emit_band_term(term: BandTerm, phi: float, gates: list[Gate]) -> None:
    if term.mix_qubit is None:
        _emit_diag_exp(term, phi, gates)
    else:
        assert all(u.projector for u in term.units)
        _emit_mix_exp(term, phi, gates)


def csf_trotter_step(n_sites: int, total_spin_x2: int, trunc_x2: int,
                     dt: float, order: int = 1,
                     band_weights: dict[int, float] | None = None,
                     coupling: float = 1.0, boundary: bool = True,
                     layout: QubitLayout | None = None) -> Circuit:
    """One Trotter step of the band-truncated Hamiltonian on the qubit register.

    band_weights maps the doubled band label to a multiplier on that band's
    effective time step (adiabatic ramps); absent bands default to 1.  The
    identity shift -(N-1)J/4 is carried as an explicit PHASE so the circuit
    unitary equals the exponential of the encoded Hamiltonian, phase included.
    boundary=False emits the pre-projection register with every chain position
    dynamical.
    """
    if order not in (1, 2):
        raise UnsupportedConfigurationError("Trotter order must be 1 or 2")
    if trunc_x2 == 1 and boundary:
        # scalar subspace: a single global phase
        energy = (coupling / 2) * (-n_sites / 2 - (n_sites - 1) / 2)
        return Circuit(0, (_phase(-dt * energy),),
                       {"basis": "csf", "trunc_x2": 1, "dt": dt,
                        "order": order, "scalar_energy": energy})
    if layout is None:
        layout = build_layout(n_sites, total_spin_x2, trunc_x2, boundary)
    weights = dict(band_weights or {})
    terms_by_parity: dict[int, list[BandTerm]] = {0: [], 1: []}
    for s_x2 in range(0, trunc_x2):
        for term in band_terms(layout, s_x2):
            terms_by_parity[(term.perm - 1) % 2].append(term)
    def term_key(t: BandTerm):
        units = tuple((u.qubits, u.sign, u.projector) for u in t.units)
        return (t.s_x2, t.perm, t.mix_qubit is None, units)

    for par in (0, 1):
        terms_by_parity[par].sort(key=term_key)
    gates: list[Gate] = []
    gates.append(_phase(dt * coupling * (n_sites - 1) / 4))

    def emit_layer(parity: int, step_dt: float) -> None:
        for term in terms_by_parity[parity]:
            lam = weights.get(term.s_x2, 1.0)
            _emit_band_term(term, (coupling / 2) * step_dt * lam, gates)

    if order == 1:
        emit_layer(0, dt)
        emit_layer(1, dt)
    else:
        emit_layer(0, dt / 2)
        emit_layer(1, dt)
        emit_layer(0, dt / 2)
    meta = {"basis": "csf", "n_sites": n_sites, "total_spin_x2": total_spin_x2,
            "trunc_x2": trunc_x2, "dt": dt, "order": order,
            "band_weights": dict(weights), "layout": layout}
    return Circuit(layout.n_qubits, tuple(gates), meta)


def export_gatelist(circuit: Circuit) -> str:
    """Line-based dump: 'qubits <n>' then one gate per line."""
    lines = [f"qubits {circuit.n_qubits}"]
    for g in circuit.gates:
        if g.kind == "CX":
            lines.append(f"CX {g.control} {g.target}")
        elif g.kind == "X":
            lines.append(f"X {g.target}")
        else:
            lines.append(f"{g.kind} {g.target} {g.angle:.17g}")
    return "\n".join(lines) + "\n"


def parse_gatelist(text: str) -> Circuit:
    lines = text.strip().splitlines()
    n = int(lines[0].split()[1])
    gates = []
    for line in lines[1:]:
        parts = line.split()
        kind = parts[0]
        if kind == "CX":
            gates.append(_cx(int(parts[1]), int(parts[2])))
        elif kind == "X":
            gates.append(Gate("X", int(parts[1])))
        else:
            gates.append(Gate(kind, int(parts[1]), angle=float(parts[2])))
    return Circuit(n, tuple(gates))


def export_qasm(circuit: Circuit) -> str:
    """OpenQASM-3 subset mirroring the gate list (gphase for PHASE)."""
    lines = ["OPENQASM 3.0;", 'include "stdgates.inc";',
             f"qubit[{max(circuit.n_qubits, 1)}] q;"]
    for g in circuit.gates:
        if g.kind == "CX":
            lines.append(f"cx q[{g.control}], q[{g.target}];")
        elif g.kind == "X":
            lines.append(f"x q[{g.target}];")
        elif g.kind == "PHASE":
            lines.append(f"gphase({g.angle:.17g});")
        else:
            lines.append(f"{g.kind.lower()}({g.angle:.17g}) q[{g.target}];")
    return "\n".join(lines) + "\n"
