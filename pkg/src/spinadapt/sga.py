"""Permutation representations and band Hamiltonians on spin-path bases.

The chain Hamiltonian is a sum of nearest-neighbor transpositions (Dirac
identity), and a transposition acts on a spin path through local rules on the
height triple (h[p-1], h[p], h[p+1]):

    monotone triple          -> unchanged
    ends equal at s, peak    -> -a_s * peak + b_s * valley
    ends equal at s, valley  -> +a_s * valley + b_s * peak

with a_s = 1/(2s+1), b_s = sqrt(1-a_s^2).  Grouping terms by band: the mixing
block belongs to band s = the shared end height, the monotone pass-through to
band s = the center height.  Summed over bands this reproduces the full rules;
band by band it matches the tensor-product operators used for the qubit
encodings (ZZ pass-through between next-nearest neighbors plus a projected
tilted field), which is the grouping the truncated Hamiltonians are built on.

All site/permutation indices here are 1-based; heights are twice-integers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import acos, sqrt

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .basis import CsfBasis, SpinPath
from .errors import InvalidQuantumNumbersError

PRUNE_TOL = 1e-14

BAND_MODE = "band"      # drop the boundary band entirely (sparse, not variational)
HEIGHT_MODE = "height"  # keep its surviving diagonal: exact projected Hamiltonian


@dataclass(frozen=True)
class BandCoefficients:
    """Mixing coefficients of one intermediate-spin band."""

    s_x2: int
    a_exact: Fraction

    @property
    def a(self) -> float:
        return float(self.a_exact)

    @property
    def b(self) -> float:
        return sqrt(1.0 - self.a * self.a)

    @property
    def theta(self) -> float:
        return acos(self.a)


def band_coefficients(s_x2: int) -> BandCoefficients:
    if s_x2 < 0:
        raise InvalidQuantumNumbersError("band label must be non-negative")
    return BandCoefficients(s_x2, Fraction(1, s_x2 + 1))


def apply_elementary_permutation(path: SpinPath, p: int,
                                 band_x2: int | None = None,
                                 trunc_x2: int | None = None):
    """Action of the transposition (p, p+1) on one path.

    Returns [(SpinPath, coefficient), ...].  band_x2 selects a single band's
    contribution (mixing keyed by the end height, pass-through by the center
    height); None applies the full rules.  trunc_x2 drops flip results whose
    new height exceeds the truncation.
    """
    n = path.n_sites
    if not 1 <= p <= n - 1:
        raise IndexError(f"permutation index {p} outside 1..{n - 1}")
    h = path.heights
    hm, hc, hp_ = h[p - 1], h[p], h[p + 1]

    if hm != hp_:  # monotone: pass-through, band = center height
        if band_x2 is not None and band_x2 != hc:
            return []
        return [(path, 1.0)]

    s_x2 = hm
    if band_x2 is not None and band_x2 != s_x2:
        return []
    coeff = band_coefficients(s_x2)
    a, b = coeff.a, coeff.b
    out = []
    if hc == s_x2 + 1:  # peak
        out.append((path, -a))
        flip = s_x2 - 1
    else:               # valley
        out.append((path, a))
        flip = s_x2 + 1
    if b > 0 and flip >= 0 and (trunc_x2 is None or flip <= trunc_x2):
        flipped = list(h)
        flipped[p] = flip
        out.append((SpinPath(tuple(flipped), n), b))
    return out


def step_permutation_apply(steps, p: int, band_x2: int | None = None):
    """Same transposition expressed on step variables, with the cumulative-sum
    projector made explicit.  Cross-check route only: exponential bookkeeping
    of heights is hidden in the cumsum, so this is never used to build
    operators.

    Returns [(steps_tuple, coefficient), ...].
    """
    from .basis import step_to_height

    path = step_to_height(tuple(steps))
    su, sv = steps[p - 1], steps[p]
    s_after = path.heights[p + 1]  # cumulative sum through index p+1
    if band_x2 is not None and band_x2 != (s_after if su != sv else path.heights[p]):
        # projector band: ends height if the pair mixes, center height otherwise
        return []
    if su == sv:
        return [(tuple(steps), 1.0)]
    coeff = band_coefficients(s_after)
    a, b = coeff.a, coeff.b
    swapped = list(steps)
    swapped[p - 1], swapped[p] = sv, su
    if su == 1:   # (u, d): local peak
        out = [(tuple(steps), -a)]
        if b > 0 and path.heights[p - 1] - 1 >= 0:
            out.append((tuple(swapped), b))
    else:         # (d, u): local valley
        out = [(tuple(steps), a)]
        if b > 0:
            out.append((tuple(swapped), b))
    return out


@dataclass(frozen=True)
class SparseOperator:
    """Real symmetric sparse operator over a CsfBasis."""

    basis: CsfBasis
    matrix: sp.csr_matrix

    @property
    def dim(self) -> int:
        return len(self.basis)

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        diff = self.matrix - self.matrix.T
        return diff.nnz == 0 or abs(diff).max() <= tol

    def export_coo(self) -> str:
        """Coordinate text dump: 'dim <n>' header then 'row col value' lines."""
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        lines = [f"dim {self.dim}"]
        for k in order:
            lines.append(f"{coo.row[k]} {coo.col[k]} {coo.data[k]:.17g}")
        return "\n".join(lines) + "\n"


def _operator_from_columns(basis: CsfBasis, columns) -> SparseOperator:
    rows, cols, vals = [], [], []
    for c, column in enumerate(columns):
        for heights, v in column.items():
            if abs(v) > PRUNE_TOL:
                rows.append(basis.index[heights])
                cols.append(c)
                vals.append(v)
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(len(basis), len(basis)))
    return SparseOperator(basis, mat)


def _apply_rules_to_dict(state: dict, p: int, n: int) -> dict:
    """Full elementary-permutation rules on a {heights: coeff} combination.

    No truncation: used inside group-composition products where intermediates
    may legitimately leave the truncated window.
    """
    out: dict = {}
    for heights, v in state.items():
        hm, hc, hp_ = heights[p - 1], heights[p], heights[p + 1]
        if hm != hp_:
            out[heights] = out.get(heights, 0.0) + v
            continue
        coeff = band_coefficients(hm)
        a, b = coeff.a, coeff.b
        if hc == hm + 1:
            out[heights] = out.get(heights, 0.0) - a * v
            flip = hm - 1
        else:
            out[heights] = out.get(heights, 0.0) + a * v
            flip = hm + 1
        if b > 0 and flip >= 0:
            f = list(heights)
            f[p] = flip
            key = tuple(f)
            out[key] = out.get(key, 0.0) + b * v
    return {k: v for k, v in out.items() if abs(v) > PRUNE_TOL}


def permutation_matrix(basis: CsfBasis, i: int, j: int) -> SparseOperator:
    """Matrix of pi_{i,j} on the basis.

    Adjacent transpositions come straight from the rules; the general case is
    built by conjugating pi_{j-1,j} with the chain of elementary ones, applied
    column by column so no intermediate matrix product is formed.  Rows are
    projected back onto the (possibly truncated) basis only at the end.
    """
    if not 1 <= i < j <= basis.n_sites:
        raise IndexError(f"need 1 <= i < j <= N, got ({i}, {j})")
    n = basis.n_sites
    columns = []
    for path in basis:
        state = {path.heights: 1.0}
        if j == i + 1:
            state = _apply_rules_to_dict(state, i, n)
        else:
            # conjugation telescopes to the palindrome
            # pi_{i,i+1} ... pi_{j-2,j-1} pi_{j-1,j} pi_{j-2,j-1} ... pi_{i,i+1}
            for p in range(i, j - 1):
                state = _apply_rules_to_dict(state, p, n)
            state = _apply_rules_to_dict(state, j - 1, n)
            for p in range(j - 2, i - 1, -1):
                state = _apply_rules_to_dict(state, p, n)
        columns.append({h: v for h, v in state.items() if h in basis.index})
    return _operator_from_columns(basis, columns)


def band_hamiltonian(basis: CsfBasis, s_x2: int) -> SparseOperator:
    """Band operator: all transpositions' band-s_x2 pieces, truncated."""
    n = basis.n_sites
    columns = []
    for path in basis:
        col: dict = {}
        for p in range(1, n):
            for q, v in apply_elementary_permutation(path, p, band_x2=s_x2,
                                                     trunc_x2=basis.trunc_x2):
                col[q.heights] = col.get(q.heights, 0.0) + v
        columns.append(col)
    return _operator_from_columns(basis, columns)


def _boundary_band_diagonal(basis: CsfBasis) -> np.ndarray:
    """Surviving diagonal of the band at the truncation edge.

    Valleys (s, s-1/2, s) with s at the truncation level keep their +a_s
    diagonal weight after the partner peak is projected out; together with the
    lower bands this reproduces the exact projection of the full Hamiltonian
    onto the truncated basis.
    """
    s_x2 = basis.trunc_x2
    a = band_coefficients(s_x2).a
    diag = np.zeros(len(basis))
    for k, path in enumerate(basis):
        h = path.heights
        hits = sum(1 for p in range(1, basis.n_sites)
                   if h[p - 1] == h[p + 1] == s_x2 and h[p] == s_x2 - 1)
        diag[k] = a * hits
    return diag


def build_hamiltonian(basis: CsfBasis, mode: str = HEIGHT_MODE,
                      coupling: float = 1.0) -> SparseOperator:
    """Chain Hamiltonian on the truncated basis, H = (J/2)(sum_s H_s - (N-1)/2).

    mode="band" sums bands strictly below the truncation level (drops the
    boundary band, sparser but not variational); mode="height" adds the
    boundary band's surviving diagonal and equals the exact projection of the
    full Hamiltonian.
    """
    if mode not in (BAND_MODE, HEIGHT_MODE):
        raise ValueError(f"mode must be '{BAND_MODE}' or '{HEIGHT_MODE}'")
    n = basis.n_sites
    dim = len(basis)
    total = sp.csr_matrix((dim, dim))
    for s_x2 in range(0, basis.trunc_x2):
        total = total + band_hamiltonian(basis, s_x2).matrix
    if mode == HEIGHT_MODE:
        total = total + sp.diags(_boundary_band_diagonal(basis))
    total = total - (n - 1) / 2 * sp.identity(dim, format="csr")
    mat = (coupling / 2) * total
    mat.data[np.abs(mat.data) < PRUNE_TOL] = 0.0
    mat.eliminate_zeros()
    return SparseOperator(basis, mat.tocsr())


def apply_hamiltonian(basis: CsfBasis, mode: str, vector: np.ndarray,
                      coupling: float = 1.0) -> np.ndarray:
    """Matrix-free product with build_hamiltonian(basis, mode)'s matrix."""
    if mode not in (BAND_MODE, HEIGHT_MODE):
        raise ValueError(f"mode must be '{BAND_MODE}' or '{HEIGHT_MODE}'")
    n = basis.n_sites
    trunc = basis.trunc_x2
    out = np.zeros_like(vector, dtype=np.result_type(vector, float))
    boundary = band_coefficients(trunc).a if mode == HEIGHT_MODE else 0.0
    for k, path in enumerate(basis):
        v = vector[k]
        if v == 0:
            continue
        h = path.heights
        for p in range(1, n):
            hm, hc, hp_ = h[p - 1], h[p], h[p + 1]
            if hm != hp_:
                if hc < trunc:
                    out[k] += v
                continue
            s_x2 = hm
            if s_x2 < trunc:
                coeff = band_coefficients(s_x2)
                a, b = coeff.a, coeff.b
                if hc == s_x2 + 1:
                    out[k] -= a * v
                    flip = s_x2 - 1
                else:
                    out[k] += a * v
                    flip = s_x2 + 1
                if b > 0 and 0 <= flip <= trunc:
                    f = list(h)
                    f[p] = flip
                    out[basis.index[tuple(f)]] += b * v
            elif s_x2 == trunc and hc == s_x2 - 1 and mode == HEIGHT_MODE:
                out[k] += boundary * v
    out -= (n - 1) / 2 * vector
    return (coupling / 2) * out


def ground_state(op: SparseOperator, n_values: int = 1):
    """Lowest eigenvalues/vector via Lanczos, dense fallback for small blocks.

    Deterministic: the Lanczos start vector is fixed.
    """
    dim = op.dim
    if dim <= max(2 * n_values + 2, 64):
        w, v = np.linalg.eigh(op.toarray())
        return w[:n_values], v[:, 0]
    v0 = np.full(dim, 1.0 / sqrt(dim))
    w, v = spla.eigsh(op.matrix, k=n_values, which="SA", v0=v0)
    order = np.argsort(w)
    return w[order], v[:, order[0]]


def ground_energy_matrix_free(basis: CsfBasis, mode: str,
                              coupling: float = 1.0, n_values: int = 1):
    """Lanczos on the rule-application operator, no matrix materialized."""
    dim = len(basis)
    if dim == 1:
        e = apply_hamiltonian(basis, mode, np.ones(1), coupling)[0]
        return np.array([e] * n_values)[:n_values]
    if dim <= max(2 * n_values + 2, 64):
        mat = np.column_stack([
            apply_hamiltonian(basis, mode, col, coupling)
            for col in np.eye(dim)])
        return np.linalg.eigvalsh(mat)[:n_values]
    linop = spla.LinearOperator(
        (dim, dim), matvec=lambda x: apply_hamiltonian(basis, mode, x, coupling))
    v0 = np.full(dim, 1.0 / sqrt(dim))
    w = spla.eigsh(linop, k=n_values, which="SA", v0=v0,
                   return_eigenvectors=False)
    return np.sort(w)
