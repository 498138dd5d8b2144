"""Truncated Fock-space operator algebra.

Everything downstream works with dense complex matrices on a truncated
bosonic Fock space, optionally tensored with two-level internal (atomic)
factors.  The basis ordering is fixed once and used by every matrix
literal in the repository:

    internal factors first (slowest index), then mode 1, then mode 2.

Each internal factor is two-dimensional with ``|g> = 0`` and ``|e> = 1``.
A full-space basis index therefore decomposes as

    index = ((atom_1 * 2 + atom_2) * n_max + n_1) * n_max + n_2

for a two-atom, two-mode space, with the obvious reductions when factors
are absent.  Mode occupation runs over ``0 .. n_max - 1``.

Operators are value semantic: the wrapped matrix is frozen after
construction and every algebraic operation returns a new object, so
instances can be shared freely across parallel workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh

from .errors import NotAntiHermitianError, SpaceMismatchError

HERMITICITY_TOL = 1e-10
UNITARITY_TOL = 1e-10


@dataclass(frozen=True)
class FockSpace:
    """Truncated Fock space, optionally dressed with two-level atoms.

    Parameters
    ----------
    n_max:
        Truncation dimension per mode; retained states are ``|0..n_max-1>``.
    modes:
        Number of bosonic modes (1 or 2).
    internal_levels:
        2 attaches one two-level atom per mode, 1 attaches none.
    """

    n_max: int
    modes: int = 1
    internal_levels: int = 2

    def __post_init__(self):
        if self.n_max < 2:
            raise ValueError(f"n_max must be >= 2, got {self.n_max}")
        if self.modes not in (1, 2):
            raise ValueError(f"modes must be 1 or 2, got {self.modes}")
        if self.internal_levels not in (1, 2):
            raise ValueError(
                f"internal_levels must be 1 or 2, got {self.internal_levels}"
            )

    @property
    def atoms(self) -> int:
        """Number of attached two-level atoms (one per mode when dressed)."""
        return self.modes if self.internal_levels == 2 else 0

    @property
    def internal_dim(self) -> int:
        return 2 ** self.atoms

    @property
    def mode_dim(self) -> int:
        return self.n_max ** self.modes

    @property
    def dim(self) -> int:
        return self.internal_dim * self.mode_dim

    def index(self, internal: tuple[int, ...] = (), occ: tuple[int, ...] = ()) -> int:
        """Basis index of ``|internal; occ>`` in the documented ordering."""
        if len(internal) != self.atoms:
            raise ValueError(f"expected {self.atoms} internal labels, got {internal}")
        if len(occ) != self.modes:
            raise ValueError(f"expected {self.modes} occupations, got {occ}")
        idx = 0
        for s in internal:
            if s not in (0, 1):
                raise ValueError("internal labels are 0 (g) or 1 (e)")
            idx = idx * 2 + s
        for n in occ:
            if not 0 <= n < self.n_max:
                raise ValueError(f"occupation {n} outside 0..{self.n_max - 1}")
            idx = idx * self.n_max + n
        return idx

    def ket(self, internal: tuple[int, ...] = (), occ: tuple[int, ...] = ()) -> np.ndarray:
        """Unit basis vector for ``|internal; occ>``."""
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(internal, occ)] = 1.0
        return v


@dataclass(frozen=True)
class FockOperator:
    """Dense operator on a :class:`FockSpace`.

    The matrix is frozen at construction; algebra returns new operators.
    """

    space: FockSpace
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.space.dim, self.space.dim):
            raise SpaceMismatchError(
                f"matrix shape {m.shape} does not match space dim {self.space.dim}"
            )
        m = np.ascontiguousarray(m)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def dag(self) -> "FockOperator":
        return FockOperator(self.space, self.matrix.conj().T)

    def apply(self, state: np.ndarray) -> np.ndarray:
        return self.matrix @ state

    def __matmul__(self, other: "FockOperator") -> "FockOperator":
        if self.space != other.space:
            raise SpaceMismatchError("operator product across different spaces")
        return FockOperator(self.space, self.matrix @ other.matrix)

    def __add__(self, other: "FockOperator") -> "FockOperator":
        if self.space != other.space:
            raise SpaceMismatchError("operator sum across different spaces")
        return FockOperator(self.space, self.matrix + other.matrix)

    def __sub__(self, other: "FockOperator") -> "FockOperator":
        if self.space != other.space:
            raise SpaceMismatchError("operator difference across different spaces")
        return FockOperator(self.space, self.matrix - other.matrix)

    def __mul__(self, scalar: complex) -> "FockOperator":
        return FockOperator(self.space, scalar * self.matrix)

    __rmul__ = __mul__

    def hermiticity_defect(self) -> float:
        return float(np.abs(self.matrix - self.matrix.conj().T).max())

    def antihermiticity_defect(self) -> float:
        return float(np.abs(self.matrix + self.matrix.conj().T).max())

    def unitarity_defect(self) -> float:
        d = self.matrix @ self.matrix.conj().T - np.eye(self.space.dim)
        return float(np.abs(d).max())

    def is_hermitian(self, tol: float = HERMITICITY_TOL) -> bool:
        return self.hermiticity_defect() <= tol

    def is_antihermitian(self, tol: float = HERMITICITY_TOL) -> bool:
        return self.antihermiticity_defect() <= tol

    def is_unitary(self, tol: float = UNITARITY_TOL) -> bool:
        return self.unitarity_defect() <= tol


def _mode_annihilator(n_max: int) -> np.ndarray:
    m = np.zeros((n_max, n_max), dtype=complex)
    for n in range(1, n_max):
        m[n - 1, n] = np.sqrt(n)
    return m


def identity(space: FockSpace) -> FockOperator:
    return FockOperator(space, np.eye(space.dim, dtype=complex))


def _embed_mode(space: FockSpace, op: np.ndarray, mode: int) -> np.ndarray:
    """Embed a single-mode matrix at the given mode slot (identity elsewhere)."""
    full = np.eye(space.internal_dim, dtype=complex)
    for m in range(space.modes):
        factor = op if m == mode else np.eye(space.n_max, dtype=complex)
        full = np.kron(full, factor)
    return full


def _embed_internal(space: FockSpace, op: np.ndarray, atom: int) -> np.ndarray:
    full = np.eye(1, dtype=complex)
    for s in range(space.atoms):
        factor = op if s == atom else np.eye(2, dtype=complex)
        full = np.kron(full, factor)
    return np.kron(full, np.eye(space.mode_dim, dtype=complex))


def annihilation(space: FockSpace, mode: int = 0) -> FockOperator:
    """Annihilation operator ``a`` on the given mode.

    Matrix elements ``<n-1|a|n> = sqrt(n)``, identity on all other factors.
    """
    if not 0 <= mode < space.modes:
        raise SpaceMismatchError(f"mode {mode} not in space with {space.modes} mode(s)")
    return FockOperator(space, _embed_mode(space, _mode_annihilator(space.n_max), mode))


def creation(space: FockSpace, mode: int = 0) -> FockOperator:
    return annihilation(space, mode).dag()


def number_operator(space: FockSpace, mode: int = 0) -> FockOperator:
    a = annihilation(space, mode)
    return a.dag() @ a


def pauli(space: FockSpace, which: str, atom: int = 0) -> FockOperator:
    """Pauli operator on one internal factor.

    ``plus`` is ``|e><g|``, ``minus`` is ``|g><e|``, ``z`` is
    ``|e><e| - |g><g|``; identity on every other factor.
    """
    if space.atoms == 0:
        raise SpaceMismatchError("space carries no internal factor")
    if not 0 <= atom < space.atoms:
        raise SpaceMismatchError(f"atom {atom} not in space with {space.atoms} atom(s)")
    two = {
        "plus": np.array([[0, 0], [1, 0]], dtype=complex),
        "minus": np.array([[0, 1], [0, 0]], dtype=complex),
        "z": np.array([[-1, 0], [0, 1]], dtype=complex),
    }
    if which not in two:
        raise ValueError(f"which must be plus, minus or z, got {which!r}")
    return FockOperator(space, _embed_internal(space, two[which], atom))


def tensor(a: FockOperator, b: FockOperator) -> FockOperator:
    """Kronecker product in the documented ordering.

    The left factor must carry no modes, or the right factor no atoms, so
    that the combined ordering stays internal-then-modes.
    """
    sa, sb = a.space, b.space
    if sa.modes > 0 and sb.atoms > 0:
        raise SpaceMismatchError(
            "tensor would interleave modes before internal factors; "
            "compose internal (x) modes instead"
        )
    if sa.modes > 0 and sb.modes > 0 and sa.n_max != sb.n_max:
        raise SpaceMismatchError("mode factors must share n_max")
    modes = sa.modes + sb.modes
    atoms = sa.atoms + sb.atoms
    if modes > 2 or atoms > 2:
        raise SpaceMismatchError("at most two modes and two atoms are supported")
    n_max = sa.n_max if sa.modes else sb.n_max
    if modes == 0:
        raise SpaceMismatchError("tensor result must retain at least one mode")
    if atoms not in (0, modes):
        raise SpaceMismatchError(
            "combined space must dress every mode or none (atoms == modes or 0)"
        )
    space = FockSpace(n_max, modes=modes, internal_levels=2 if atoms else 1)
    return FockOperator(space, np.kron(a.matrix, b.matrix))


def expm_antihermitian(g: FockOperator, tol: float = HERMITICITY_TOL) -> FockOperator:
    """Unitary exponential ``exp(G)`` of an anti-Hermitian generator.

    Computed through the eigendecomposition of the Hermitian matrix
    ``iG``, which stays spectrally stable for the large generator norms a
    squeeze at r ~ 2 produces and returns a unitary to machine precision.
    """
    defect = g.antihermiticity_defect()
    if defect > tol:
        raise NotAntiHermitianError(
            f"generator anti-Hermiticity defect {defect:.2e} exceeds {tol:.0e}"
        )
    lam, v = eigh(1j * g.matrix)
    u = (v * np.exp(-1j * lam)) @ v.conj().T
    return FockOperator(g.space, u)


def edge_population(space: FockSpace, state: np.ndarray, levels: int = 2) -> float:
    """Population of the top ``levels`` Fock levels of any mode.

    This is the truncation-leakage monitor: downstream operations compare
    it against their declared leakage budget.
    """
    if state.shape[0] != space.dim:
        raise SpaceMismatchError("state dimension does not match space")
    shape = (space.internal_dim,) + (space.n_max,) * space.modes
    pop = np.abs(state.reshape(shape + state.shape[1:])) ** 2
    edge = 0.0
    for m in range(space.modes):
        axis = 1 + m
        sel = [slice(None)] * pop.ndim
        sel[axis] = slice(space.n_max - levels, space.n_max)
        edge += float(pop[tuple(sel)].sum())
    return edge
