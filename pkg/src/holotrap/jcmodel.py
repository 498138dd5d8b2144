"""Resonant Jaynes-Cummings model, its degenerate logical subspace, and
the measurement pulse.

At resonance ``g = nu`` the Hamiltonian

    H = nu a+ a + (g/2) sz + g (s+ a + a+ s-)        (hbar = 1)

has the ground state ``|g,0>`` at energy ``E_deg = omega1 = -g/2`` and
dressed excited states ``|n,+-> = (|g,n+1> +- |e,n>)/sqrt(2)`` at
``E_{n,+-} = omega1 + nu (n+1) +- nu sqrt(n+1)``.  Resonance makes
``|0,->`` degenerate with ``|g,0>``, and the pair spans the qubit:

    |0_L> = |g,0>,   |1_L> = |0,-> = (|g,1> - |e,0>)/sqrt(2)

with spectral gap ``(2 - sqrt(2)) nu`` to the next level.  Two dressed
ions with ``g_i = nu_i`` and a common ground energy give a fourfold
degenerate two-qubit space spanned by tensor products of the per-ion
kets, ordered ``|00>, |01>, |10>, |11>`` (qubit 1 slowest).

Conjugating ``H`` with any frame unitary ``U(sigma)`` yields the
iso-spectral family the holonomy machinery transports over.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import minimize_scalar

from .controlframe import ControlPoint, apply_control_unitary, control_unitary
from .errors import (DegeneracyError, LeakageBudgetError, SpaceMismatchError,
                     TruncationError)
from .fock import FockOperator, FockSpace, annihilation, edge_population, pauli

#: Default stretch-to-COM trap frequency ratio for the two-ion chain.
NU2_OVER_NU1 = np.sqrt(3.0)


@dataclass(frozen=True)
class JCParams:
    """Trap frequency, coupling and ground internal energy (units hbar = 1).

    ``omega1`` defaults to ``-g/2``, which places the degenerate energy at
    ``E_deg = omega1`` with no overall offset term.
    """

    nu: float = 1.0
    g: float = 1.0
    omega1: float | None = None

    def __post_init__(self):
        if self.nu <= 0:
            raise ValueError("nu must be positive")
        if self.omega1 is None:
            object.__setattr__(self, "omega1", -self.g / 2)

    @property
    def resonant(self) -> bool:
        return self.g == self.nu

    @property
    def e_deg(self) -> float:
        return self.omega1

    def require_resonance(self):
        if not self.resonant:
            raise DegeneracyError(
                f"degeneracy requires g = nu exactly, got g={self.g}, nu={self.nu}"
            )


def jc_hamiltonian(p: JCParams, space: FockSpace) -> FockOperator:
    """Single-ion Hamiltonian ``nu a+a + (g/2) sz + g(s+ a + a+ s-)``.

    A constant ``(omega1 + g/2) I`` restores a general ground offset; it
    vanishes under the default convention ``omega1 = -g/2``.
    """
    if space.modes != 1 or space.atoms != 1:
        raise SpaceMismatchError("jc_hamiltonian needs one mode dressed by one atom")
    a = annihilation(space)
    sp_, sm_ = pauli(space, "plus"), pauli(space, "minus")
    h = (p.nu * (a.dag() @ a) + (p.g / 2) * pauli(space, "z")
         + p.g * (sp_ @ a + a.dag() @ sm_))
    offset = p.omega1 + p.g / 2
    if offset != 0.0:
        h = FockOperator(space, h.matrix + offset * np.eye(space.dim))
    return h


def jc_total_hamiltonian(p1: JCParams, p2: JCParams, space: FockSpace) -> FockOperator:
    """Two-ion Hamiltonian: ion 1 with mode 1 plus ion 2 with mode 2.

    Block-decomposes into the two single-ion problems, so the spectrum is
    the Minkowski sum of the per-ion spectra on the retained space.
    """
    if space.modes != 2 or space.atoms != 2:
        raise SpaceMismatchError("jc_total_hamiltonian needs two dressed modes")
    terms = []
    for atom, (p, mode) in enumerate([(p1, 0), (p2, 1)]):
        a = annihilation(space, mode)
        sp_, sm_ = pauli(space, "plus", atom), pauli(space, "minus", atom)
        h = (p.nu * (a.dag() @ a) + (p.g / 2) * pauli(space, "z", atom)
             + p.g * (sp_ @ a + a.dag() @ sm_))
        offset = p.omega1 + p.g / 2
        if offset != 0.0:
            h = FockOperator(space, h.matrix + offset * np.eye(space.dim))
        terms.append(h)
    return terms[0] + terms[1]


def dressed_energy(p: JCParams, n: int, sign: int) -> float:
    """Closed-form dressed energy ``omega1 + nu(n+1) +- nu sqrt(n+1)``."""
    return p.omega1 + p.nu * (n + 1) + sign * p.nu * np.sqrt(n + 1)


def dressed_state(n: int, sign: int, space: FockSpace) -> np.ndarray:
    """Dressed ket ``(|g,n+1> +- |e,n>)/sqrt(2)``; needs ``n+1 < n_max``."""
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    if n + 1 >= space.n_max:
        raise TruncationError(f"dressed state n={n} needs n_max > {n + 1}")
    v = (space.ket((0,), (n + 1,)) + sign * space.ket((1,), (n,))) / np.sqrt(2)
    return v


@dataclass(frozen=True)
class LogicalBasis:
    """Ordered orthonormal kets spanning the degenerate logical subspace."""

    space: FockSpace
    kets: np.ndarray = field(repr=False)   # (dim, k), columns are kets
    energy: float = 0.0

    @property
    def k(self) -> int:
        return self.kets.shape[1]

    def project(self, states: np.ndarray) -> np.ndarray:
        """Overlap matrix ``<basis_i | state_j>``."""
        return self.kets.conj().T @ states


def logical_basis(space: FockSpace, p: JCParams,
                  p2: JCParams | None = None) -> LogicalBasis:
    """Degenerate logical basis at resonance.

    One dressed mode: ``{|g,0>, |0,->}``.  Two dressed modes: the four
    tensor products of per-ion logical kets, ordered ``00, 01, 10, 11``
    with qubit 1 as the slow index; requires both ions resonant and a
    common ground energy.
    """
    p.require_resonance()
    if space.modes == 1:
        if space.atoms != 1:
            raise SpaceMismatchError("one-qubit basis needs the internal factor")
        kets = np.stack([space.ket((0,), (0,)), dressed_state(0, -1, space)], axis=1)
        return LogicalBasis(space, kets, energy=p.e_deg)
    if space.atoms != 2:
        raise SpaceMismatchError("two-qubit basis needs two internal factors")
    if p2 is None:
        p2 = JCParams(nu=NU2_OVER_NU1 * p.nu, g=NU2_OVER_NU1 * p.g,
                      omega1=p.omega1)
    p2.require_resonance()
    if p2.omega1 != p.omega1:
        raise DegeneracyError("two-qubit degeneracy needs equal ground energies")
    rt2 = np.sqrt(2)
    kets = []
    for q1 in (0, 1):
        for q2 in (0, 1):
            v = np.zeros(space.dim, dtype=complex)
            # per-ion logical kets: 0 -> |g,0>, 1 -> (|g,1> - |e,0>)/sqrt(2)
            comps1 = [((0,), (0,), 1.0)] if q1 == 0 else \
                     [((0,), (1,), 1 / rt2), ((1,), (0,), -1 / rt2)]
            comps2 = [((0,), (0,), 1.0)] if q2 == 0 else \
                     [((0,), (1,), 1 / rt2), ((1,), (0,), -1 / rt2)]
            for i1, o1, c1 in comps1:
                for i2, o2, c2 in comps2:
                    v += c1 * c2 * space.ket(i1 + i2, o1 + o2)
            kets.append(v)
    return LogicalBasis(space, np.stack(kets, axis=1), energy=p.e_deg + p2.e_deg)


def degeneracy_multiplicity(h: FockOperator, energy: float,
                            cluster_tol: float = 1e-9) -> int:
    """Number of eigenvalues within ``cluster_tol`` of ``energy``."""
    w = eigh(h.matrix, eigvals_only=True)
    return int(np.sum(np.abs(w - energy) <= cluster_tol))


def iso_spectral_hamiltonian(point: ControlPoint, p: JCParams, space: FockSpace,
                             leak_budget: float | None = None) -> FockOperator:
    """Conjugated Hamiltonian ``H(sigma) = U H U+`` of the iso-spectral family.

    When ``leak_budget`` is given, the truncation-leakage monitor is run
    on the transformed logical kets and a :class:`LeakageBudgetError`
    raised if the edge population exceeds it.
    """
    h = jc_hamiltonian(p, space)
    u = control_unitary(point, space)
    if leak_budget is not None:
        p.require_resonance()
        kets = logical_basis(space, p).kets
        moved = apply_control_unitary(point, space, kets)
        leak = edge_population(space, moved)
        if leak > leak_budget:
            raise LeakageBudgetError(
                f"edge population {leak:.3e} exceeds budget {leak_budget:.1e}; "
                f"raise n_max for this point"
            )
    return FockOperator(space, u.matrix @ h.matrix @ u.matrix.conj().T)


# ---------------------------------------------------------------------------
# measurement
# ---------------------------------------------------------------------------

def measurement_pulse(phi: float, space: FockSpace) -> FockOperator:
    """Readout pulse ``exp[-i (pi/4)(|e><g| a e^{-i phi} + h.c.)]``.

    Leaves ``|g,0>`` invariant (the generator annihilates it) and rotates
    the ``{|g,1>, |e,0>}`` pair; at :func:`measurement_phase` it maps
    ``|0,->`` onto ``-|e,0>`` exactly.
    """
    if space.modes != 1 or space.atoms != 1:
        raise SpaceMismatchError("measurement pulse needs one dressed mode")
    a = annihilation(space)
    sp_ = pauli(space, "plus")
    gen = sp_.matrix @ a.matrix * np.exp(-1j * phi)
    gen = -0.25j * np.pi * (gen + gen.conj().T)
    lam, v = np.linalg.eigh(1j * gen)
    u = (v * np.exp(-1j * lam)) @ v.conj().T
    return FockOperator(space, u)


def measurement_phase() -> float:
    """Pulse phase ``phi*`` that sends ``|0,->`` to the excited manifold.

    Derived from the 2x2 generator on span{|g,1>, |e,0>}: the generator
    restricted there is ``-i(pi/4) [[0, e^{i phi}], [e^{-i phi}, 0]]``,
    and the transfer probability out of ``|0,->`` is
    ``(1 + sin phi)/2``, maximized at ``phi* = pi/2``.  The value is
    recomputed here by a numerical 2x2 exponential search rather than
    trusted from the closed form.
    """
    from scipy.linalg import expm

    minus = np.array([1.0, -1.0]) / np.sqrt(2)   # (|g,1> - |e,0>)/sqrt2

    def excited_deficit(phi: float) -> float:
        gen = -0.25j * np.pi * np.array(
            [[0.0, np.exp(1j * phi)], [np.exp(-1j * phi), 0.0]]
        )
        out = expm(gen) @ minus
        return 1.0 - abs(out[1]) ** 2

    res = minimize_scalar(excited_deficit, bounds=(0.0, 2 * np.pi), method="bounded",
                          options={"xatol": 1e-12})
    return float(res.x)


def readout_probabilities(state: np.ndarray, space: FockSpace,
                          tol: float = 1e-10) -> tuple[float, float]:
    """Internal-level populations ``(p_g, p_e)`` after tracing the mode."""
    if space.modes != 1 or space.atoms != 1:
        raise SpaceMismatchError("readout needs one dressed mode")
    norm = float(np.linalg.norm(state))
    if abs(norm - 1.0) > tol:
        raise ValueError(f"state norm {norm} is not 1 within {tol:.0e}")
    pop = np.abs(state.reshape(2, space.n_max)) ** 2
    return float(pop[0].sum()), float(pop[1].sum())
