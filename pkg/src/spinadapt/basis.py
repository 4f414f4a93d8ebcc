"""Spin-path bases for a chain of N spin-1/2 sites.

A total-spin eigenstate of the successively-coupled chain is labelled by the
sequence of intermediate total spins S_0=0, S_1, ..., S_N = S.  We store twice
these values as integers ("heights"), so a path is a lattice walk that starts
at 0, moves by +-1 per site, never goes negative, and ends at 2S.  Truncating
the maximum height yields a nested family of subspaces; the untruncated count
for fixed (N, S) is (2S+1)/(N+1) * C(N+1, N/2-S).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Iterator, Sequence

from .errors import InvalidQuantumNumbersError, UnphysicalPathError

STEP_UP = 1
STEP_DOWN = -1


@dataclass(frozen=True)
class SpinPath:
    """One spin eigenstate as a height sequence (twice the intermediate spins)."""

    heights: tuple[int, ...]
    n_sites: int

    def __post_init__(self):
        if len(self.heights) != self.n_sites + 1:
            raise UnphysicalPathError(
                f"need {self.n_sites + 1} heights, got {len(self.heights)}")
        if self.heights[0] != 0:
            raise UnphysicalPathError("path must start at height 0")
        for i in range(self.n_sites):
            if abs(self.heights[i + 1] - self.heights[i]) != 1:
                raise UnphysicalPathError(f"height step at site {i + 1} is not +-1")
            if self.heights[i + 1] < 0:
                raise UnphysicalPathError(f"negative height at index {i + 1}")

    @property
    def total_spin_x2(self) -> int:
        return self.heights[-1]

    @property
    def max_height(self) -> int:
        return max(self.heights)

    def steps(self) -> tuple[int, ...]:
        """Per-site coupling direction, +1 (up) or -1 (down)."""
        return tuple(self.heights[i + 1] - self.heights[i] for i in range(self.n_sites))

    def __str__(self):
        return "/".join(str(h) for h in self.heights)


def is_valid_heights(heights: Sequence[int], trunc_x2: int | None = None) -> bool:
    """Check the path invariants without raising."""
    if len(heights) < 2 or heights[0] != 0:
        return False
    for a, b in zip(heights, heights[1:]):
        if abs(b - a) != 1 or b < 0:
            return False
    if trunc_x2 is not None and max(heights) > trunc_x2:
        return False
    return True


def _check_quantum_numbers(n_sites: int, total_spin_x2: int) -> None:
    if n_sites < 1:
        raise InvalidQuantumNumbersError(f"need at least one site, got {n_sites}")
    if total_spin_x2 < 0 or total_spin_x2 > n_sites:
        raise InvalidQuantumNumbersError(
            f"2S={total_spin_x2} outside [0, N={n_sites}]")
    if (n_sites - total_spin_x2) % 2 != 0:
        raise InvalidQuantumNumbersError(
            f"N={n_sites} and 2S={total_spin_x2} must have equal parity")


def cardinality(n_sites: int, total_spin_x2: int) -> int:
    """Number of spin paths from 0 to 2S in N unit steps, exactly."""
    _check_quantum_numbers(n_sites, total_spin_x2)
    num = (total_spin_x2 + 1) * comb(n_sites + 1, (n_sites - total_spin_x2) // 2)
    q, r = divmod(num, n_sites + 1)
    assert r == 0, "ballot-number formula must divide exactly"
    return q


def singlet_pair_path(n_sites: int) -> SpinPath:
    """Product of nearest-neighbor singlet pairs: heights alternate 0,1,...,0."""
    if n_sites % 2 != 0:
        raise InvalidQuantumNumbersError("singlet-pair product needs even N")
    return SpinPath(tuple(i % 2 for i in range(n_sites + 1)), n_sites)


def triplet_reference_path(n_sites: int) -> SpinPath:
    """Alternating 0,1 path that closes at height 2: the easy S=1 start state."""
    if n_sites % 2 != 0:
        raise InvalidQuantumNumbersError("triplet reference needs even N")
    heights = [i % 2 for i in range(n_sites)] + [2]
    return SpinPath(tuple(heights), n_sites)


def step_to_height(steps: Sequence[int], n_sites: int | None = None) -> SpinPath:
    """Cumulative-sum bijection from +-1 steps to a height path."""
    n = len(steps) if n_sites is None else n_sites
    if n != len(steps):
        raise UnphysicalPathError("step count must equal n_sites")
    heights = [0]
    for k, s in enumerate(steps):
        if s not in (STEP_UP, STEP_DOWN):
            raise UnphysicalPathError(f"step {k + 1} must be +1 or -1, got {s!r}")
        h = heights[-1] + s
        if h < 0:
            raise UnphysicalPathError(
                f"steps yield a negative intermediate spin after site {k + 1}")
        heights.append(h)
    return SpinPath(tuple(heights), n)


def height_to_step(path: SpinPath) -> tuple[int, ...]:
    return path.steps()


@dataclass(frozen=True)
class CsfBasis:
    """Ordered, truncated set of spin paths for fixed (N, 2S), with index lookup.

    M is pinned to S throughout: matrix elements of spin-free operators do not
    depend on it, and fixing it keeps cross-checks against the explicit
    computational-basis expansion unambiguous.
    """

    n_sites: int
    total_spin_x2: int
    trunc_x2: int
    paths: tuple[SpinPath, ...]
    index: dict[tuple[int, ...], int] = field(repr=False, compare=False)

    @property
    def magnetization_x2(self) -> int:
        return self.total_spin_x2

    def __len__(self) -> int:
        return len(self.paths)

    def __iter__(self) -> Iterator[SpinPath]:
        return iter(self.paths)

    def position(self, path: SpinPath) -> int:
        try:
            return self.index[path.heights]
        except KeyError:
            raise KeyError(f"path {path} not in basis") from None

    def __contains__(self, path: SpinPath) -> bool:
        return path.heights in self.index

    def csv_lines(self) -> list[str]:
        lines = ["index,heights"]
        lines += [f"{k},{p}" for k, p in enumerate(self.paths)]
        return lines

    def to_csv(self) -> str:
        return "\n".join(self.csv_lines()) + "\n"


def untruncated_level(n_sites: int) -> int:
    """Sentinel truncation safely above any reachable height."""
    return n_sites


def enumerate_paths(n_sites: int, total_spin_x2: int,
                    trunc_x2: int | None = None) -> CsfBasis:
    """All spin paths for (N, 2S) with max height <= trunc_x2, in lexicographic order.

    trunc_x2=None enumerates the full (untruncated) basis.  The search descends
    lower heights first and prunes with a reachability table, so the output
    order is lexicographic on the height tuples by construction.
    """
    _check_quantum_numbers(n_sites, total_spin_x2)
    if trunc_x2 is None:
        trunc_x2 = untruncated_level(n_sites)
    if trunc_x2 < 0:
        raise InvalidQuantumNumbersError("truncation must be non-negative")

    # reachable[i][h]: a path standing at height h after i sites can still close at 2S
    reachable = [[False] * (trunc_x2 + 2) for _ in range(n_sites + 1)]
    if total_spin_x2 <= trunc_x2:
        reachable[n_sites][total_spin_x2] = True
    for i in range(n_sites - 1, -1, -1):
        for h in range(0, trunc_x2 + 1):
            ok = False
            if h + 1 <= trunc_x2 and reachable[i + 1][h + 1]:
                ok = True
            if h - 1 >= 0 and reachable[i + 1][h - 1]:
                ok = True
            reachable[i][h] = ok

    paths: list[SpinPath] = []
    prefix = [0]

    def descend(i: int, h: int) -> None:
        if i == n_sites:
            paths.append(SpinPath(tuple(prefix), n_sites))
            return
        for step in (STEP_DOWN, STEP_UP):
            h2 = h + step
            if 0 <= h2 <= trunc_x2 and reachable[i + 1][h2]:
                prefix.append(h2)
                descend(i + 1, h2)
                prefix.pop()

    if reachable[0][0]:
        descend(0, 0)
    index = {p.heights: k for k, p in enumerate(paths)}
    return CsfBasis(n_sites, total_spin_x2, trunc_x2, tuple(paths), index)


def allowed_heights(n_sites: int, total_spin_x2: int, trunc_x2: int,
                    position: int) -> tuple[int, ...]:
    """Heights that some basis path can take at the given chain position."""
    lo = max(position % 2, total_spin_x2 - (n_sites - position))
    hi = min(position, trunc_x2, total_spin_x2 + (n_sites - position))
    return tuple(h for h in range(max(lo, 0), hi + 1, 2))


def parse_paths_csv(text: str, n_sites: int) -> list[SpinPath]:
    """Inverse of CsfBasis.to_csv, used by the CLI round-trip tests."""
    out = []
    for line in text.strip().splitlines()[1:]:
        _, heights = line.split(",", 1)
        out.append(SpinPath(tuple(int(h) for h in heights.split("/")), n_sites))
    return out
