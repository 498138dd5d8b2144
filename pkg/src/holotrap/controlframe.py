"""Control manifold and the iso-spectral Gaussian unitaries.

The control knobs are the displacement ``D(alpha)``, the single-mode
squeeze ``S(eps)``, the two-mode squeeze ``M(zeta)`` and the two-mode
displace (beam-splitter) ``N(xi)``:

    D(alpha) = exp(alpha a+  -  conj(alpha) a)
    S(eps)   = exp(eps a+^2  -  conj(eps) a^2)        eps  = r1 e^{i th1}
    M(zeta)  = exp(zeta a1+ a2+ - conj(zeta) a1 a2)   zeta = r2 e^{i th2}
    N(xi)    = exp(xi a1+ a2  -  conj(xi) a1 a2+)     xi   = r3 e^{i th3}

CONVENTION: the squeeze generator carries NO factor 1/2.  ``S(eps)``
above equals a textbook squeeze of parameter ``2 r1``, so for example the
squeezed-vacuum variance shrinks by ``exp(-4 r1)``.  This is the gauge in
which the analytic connection components of :mod:`holotrap.geometry` are
stated; the finite-difference generator tests are the guard.

The one-qubit frame unitary is ``U(sigma) = D(alpha) S(eps)`` over the
coordinates ``(x, y, r1, th1)`` with ``alpha = x + i y``; the two-qubit
frame is ``U(sigma) = N(xi) M(zeta)`` over ``(r2, th2, r3, th3)``.  The
ordering is fixed by requiring ``U+ dU/dr3 = M+ (N+ dN/dr3 N) M``.

Phases ``th1, th2`` absorb any laser-frame time dependence; the engine
treats all four coordinates as freely schedulable statics, since a
holonomy depends only on the path traced in the manifold.

Implementation note: every unitary is a phase rotation conjugating a
one-parameter group of a fixed generator, e.g.
``S(r e^{i th}) = R(th/2) exp(r (a+^2 - a^2)) R(-th/2)`` with
``R(phi) = exp(i phi n)`` diagonal.  The fixed generators are
eigendecomposed once per truncation and cached, which makes repeated
application along a path (transport, finite differences, time stepping)
a handful of dense mat-vecs instead of a matrix exponential per call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh

from .errors import SpaceMismatchError
from .fock import FockOperator, FockSpace, _mode_annihilator

#: Default one-mode truncation for one-qubit work.
DEFAULT_N_MAX_1Q = 80
#: Default per-mode truncation for two-qubit work.
DEFAULT_N_MAX_2Q = 24


@dataclass(frozen=True)
class ControlPoint1Q:
    """Point of the one-qubit control manifold ``(x, y, r1, th1)``."""

    x: float = 0.0
    y: float = 0.0
    r1: float = 0.0
    theta1: float = 0.0

    def __post_init__(self):
        vals = (self.x, self.y, self.r1, self.theta1)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite control point {vals}")
        if self.r1 < 0:
            raise ValueError("r1 is an amplitude; use theta1 to carry sign")

    @property
    def alpha(self) -> complex:
        return self.x + 1j * self.y

    @property
    def epsilon(self) -> complex:
        return self.r1 * np.exp(1j * self.theta1)

    def coords(self) -> dict[str, float]:
        return {"x": self.x, "y": self.y, "r1": self.r1, "theta1": self.theta1}

    def replace(self, **kw) -> "ControlPoint1Q":
        d = self.coords()
        d.update(kw)
        return ControlPoint1Q(d["x"], d["y"], d["r1"], d["theta1"])


@dataclass(frozen=True)
class ControlPoint2Q:
    """Point of the two-qubit control manifold ``(r2, th2, r3, th3)``."""

    r2: float = 0.0
    theta2: float = 0.0
    r3: float = 0.0
    theta3: float = 0.0

    def __post_init__(self):
        vals = (self.r2, self.theta2, self.r3, self.theta3)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite control point {vals}")

    @property
    def zeta(self) -> complex:
        return self.r2 * np.exp(1j * self.theta2)

    @property
    def xi(self) -> complex:
        return self.r3 * np.exp(1j * self.theta3)

    def coords(self) -> dict[str, float]:
        return {"r2": self.r2, "theta2": self.theta2, "r3": self.r3, "theta3": self.theta3}

    def replace(self, **kw) -> "ControlPoint2Q":
        d = self.coords()
        d.update(kw)
        return ControlPoint2Q(d["r2"], d["theta2"], d["r3"], d["theta3"])


ControlPoint = ControlPoint1Q | ControlPoint2Q


# ---------------------------------------------------------------------------
# cached spectral factors of the fixed generators
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def _factor_1mode(kind: str, n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of i*(fixed generator) on one mode.

    Returns (eigenvalues, eigenvectors) of the Hermitian matrix iK with
    K = a+ - a (kind "disp") or K = a+^2 - a^2 (kind "sqz"), so that
    exp(t K) = V exp(-i t lam) V+.
    """
    a = _mode_annihilator(n_max)
    ad = a.conj().T
    if kind == "disp":
        k = ad - a
    elif kind == "sqz":
        k = ad @ ad - a @ a
    else:
        raise ValueError(kind)
    lam, v = eigh(1j * k)
    return lam, v


@lru_cache(maxsize=16)
def _factor_2mode(kind: str, n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Same as :func:`_factor_1mode` for the joint two-mode generators."""
    a = _mode_annihilator(n_max)
    eye = np.eye(n_max)
    a1 = np.kron(a, eye)
    a2 = np.kron(eye, a)
    if kind == "tms":
        k = a1.conj().T @ a2.conj().T - a1 @ a2
    elif kind == "bs":
        k = a1.conj().T @ a2 - a1 @ a2.conj().T
    else:
        raise ValueError(kind)
    lam, v = eigh(1j * k)
    return lam, v


def _as_columns(states: np.ndarray) -> tuple[np.ndarray, bool]:
    if states.ndim == 1:
        return states[:, None], True
    return states, False


def _apply_on_modes(space: FockSpace, states: np.ndarray, fn) -> np.ndarray:
    """Apply a mode-factor operator to full-space states.

    The frame unitaries act as identity on the internal factors, so the
    internal index is treated as a batch dimension.
    """
    cols, squeeze = _as_columns(np.asarray(states, dtype=complex))
    d_int, d_mode, b = space.internal_dim, space.mode_dim, cols.shape[1]
    z = cols.reshape(d_int, d_mode, b).transpose(1, 0, 2).reshape(d_mode, d_int * b)
    z = fn(z)
    out = z.reshape(d_mode, d_int, b).transpose(1, 0, 2).reshape(space.dim, b)
    return out[:, 0] if squeeze else out


def _rotated_group_apply(lam, v, nvec, amp, phase, z):
    """Apply R(phase) V e^{-i amp lam} V+ R(-phase) with R = exp(i phase n)."""
    if phase != 0.0:
        z = np.exp(-1j * phase * nvec)[:, None] * z
    z = v @ (np.exp(-1j * amp * lam)[:, None] * (v.conj().T @ z))
    if phase != 0.0:
        z = np.exp(1j * phase * nvec)[:, None] * z
    return z


def apply_displacement(alpha: complex, space: FockSpace, states: np.ndarray,
                       dagger: bool = False) -> np.ndarray:
    """Apply ``D(alpha)`` (or its inverse) to full-space states."""
    if space.modes != 1:
        raise SpaceMismatchError("displacement acts on a single-mode space")
    if dagger:
        alpha = -alpha
    m, ph = abs(alpha), float(np.angle(alpha)) if alpha != 0 else 0.0
    if m == 0.0:
        return np.array(states, dtype=complex, copy=True)
    lam, v = _factor_1mode("disp", space.n_max)
    nvec = np.arange(space.n_max)
    return _apply_on_modes(
        space, states, lambda z: _rotated_group_apply(lam, v, nvec, m, ph, z)
    )


def apply_squeeze(epsilon: complex, space: FockSpace, states: np.ndarray,
                  dagger: bool = False) -> np.ndarray:
    """Apply ``S(eps)`` (or its inverse) to full-space states."""
    if space.modes != 1:
        raise SpaceMismatchError("single-mode squeeze acts on a single-mode space")
    if dagger:
        epsilon = -epsilon
    r, th = abs(epsilon), float(np.angle(epsilon)) if epsilon != 0 else 0.0
    if r == 0.0:
        return np.array(states, dtype=complex, copy=True)
    lam, v = _factor_1mode("sqz", space.n_max)
    nvec = np.arange(space.n_max)
    # R(th/2) (a+^2 - a^2) R(-th/2) = e^{i th} a+^2 - e^{-i th} a^2
    return _apply_on_modes(
        space, states, lambda z: _rotated_group_apply(lam, v, nvec, r, th / 2, z)
    )


def _nvec_mode1(n_max: int) -> np.ndarray:
    return np.repeat(np.arange(n_max), n_max)


def apply_two_mode_squeeze(zeta: complex, space: FockSpace, states: np.ndarray,
                           dagger: bool = False) -> np.ndarray:
    """Apply ``M(zeta)`` (or its inverse) to full-space states."""
    if space.modes != 2:
        raise SpaceMismatchError("two-mode squeeze acts on a two-mode space")
    if dagger:
        zeta = -zeta
    r, th = abs(zeta), float(np.angle(zeta)) if zeta != 0 else 0.0
    if r == 0.0:
        return np.array(states, dtype=complex, copy=True)
    lam, v = _factor_2mode("tms", space.n_max)
    n1 = _nvec_mode1(space.n_max)
    # rotating mode 1 alone carries the phase: R1(th) a1+ a2+ R1(-th) = e^{i th} a1+ a2+
    return _apply_on_modes(
        space, states, lambda z: _rotated_group_apply(lam, v, n1, r, th, z)
    )


def apply_two_mode_displace(xi: complex, space: FockSpace, states: np.ndarray,
                            dagger: bool = False) -> np.ndarray:
    """Apply ``N(xi)`` (or its inverse) to full-space states."""
    if space.modes != 2:
        raise SpaceMismatchError("two-mode displace acts on a two-mode space")
    if dagger:
        xi = -xi
    r, th = abs(xi), float(np.angle(xi)) if xi != 0 else 0.0
    if r == 0.0:
        return np.array(states, dtype=complex, copy=True)
    lam, v = _factor_2mode("bs", space.n_max)
    n1 = _nvec_mode1(space.n_max)
    return _apply_on_modes(
        space, states, lambda z: _rotated_group_apply(lam, v, n1, r, th, z)
    )


def apply_control_unitary(point: ControlPoint, space: FockSpace, states: np.ndarray,
                          dagger: bool = False) -> np.ndarray:
    """Apply the frame unitary ``U(sigma)`` (or its inverse) to states.

    One qubit: ``U = D S`` so ``U psi = D(S psi)`` and
    ``U+ psi = S+(D+ psi)``.  Two qubits: ``U = N M`` analogously.
    """
    if isinstance(point, ControlPoint1Q):
        if not dagger:
            states = apply_squeeze(point.epsilon, space, states)
            return apply_displacement(point.alpha, space, states)
        states = apply_displacement(point.alpha, space, states, dagger=True)
        return apply_squeeze(point.epsilon, space, states, dagger=True)
    if isinstance(point, ControlPoint2Q):
        if not dagger:
            states = apply_two_mode_squeeze(point.zeta, space, states)
            return apply_two_mode_displace(point.xi, space, states)
        states = apply_two_mode_displace(point.xi, space, states, dagger=True)
        return apply_two_mode_squeeze(point.zeta, space, states, dagger=True)
    raise TypeError(f"unsupported control point {type(point)!r}")


# ---------------------------------------------------------------------------
# full-matrix constructors
# ---------------------------------------------------------------------------

def displacement(alpha: complex, space: FockSpace) -> FockOperator:
    """Displacement operator ``D(alpha)`` on a single-mode space."""
    eye = np.eye(space.dim, dtype=complex)
    return FockOperator(space, apply_displacement(alpha, space, eye))


def squeeze(epsilon: complex, space: FockSpace) -> FockOperator:
    """Single-mode squeeze ``S(eps)``; note the no-1/2 convention above."""
    eye = np.eye(space.dim, dtype=complex)
    return FockOperator(space, apply_squeeze(epsilon, space, eye))


def two_mode_squeeze(zeta: complex, space: FockSpace) -> FockOperator:
    """Two-mode squeeze ``M(zeta)`` on a two-mode space."""
    eye = np.eye(space.dim, dtype=complex)
    return FockOperator(space, apply_two_mode_squeeze(zeta, space, eye))


def two_mode_displace(xi: complex, space: FockSpace) -> FockOperator:
    """Two-mode displace (beam splitter) ``N(xi)``; conserves total photon number."""
    eye = np.eye(space.dim, dtype=complex)
    return FockOperator(space, apply_two_mode_displace(xi, space, eye))


def control_unitary(point: ControlPoint, space: FockSpace) -> FockOperator:
    """Frame unitary ``U(sigma)``: ``D S`` (one qubit) or ``N M`` (two qubits)."""
    eye = np.eye(space.dim, dtype=complex)
    return FockOperator(space, apply_control_unitary(point, space, eye))


def required_n_max(point: ControlPoint, floor: int | None = None,
                   tail: float | None = None) -> int:
    """Truncation needed to apply ``U(sigma)`` to low-lying states.

    The squeezed-vacuum photon distribution decays like ``tanh(s)^n``
    with ``s = 2 r1`` on one mode (no-1/2 convention), and like
    ``tanh(r2)^(2n)`` per mode for the two-mode squeezed vacuum.  The
    returned n_max pushes that tail below ``tail`` with a displacement
    margin, rounded up to a multiple of 16 so cached factorizations are
    reused across nearby requests.
    """
    if isinstance(point, ControlPoint1Q):
        floor = DEFAULT_N_MAX_1Q if floor is None else floor
        tail = 1e-10 if tail is None else tail
        s = 2.0 * (abs(point.r1) + 1e-3)
        decay = -math.log(math.tanh(s)) if s > 0.05 else None
        margin = int(40 * (1.0 + abs(point.alpha) ** 2))
        quantum = 64
    else:
        floor = DEFAULT_N_MAX_2Q if floor is None else floor
        tail = 1e-7 if tail is None else tail
        s = abs(point.r2) + 1e-3
        decay = -2.0 * math.log(math.tanh(s)) if s > 0.05 else None
        margin = 8
        quantum = 8
    need = floor if decay is None else int(math.ceil(-math.log(tail) / decay)) + margin
    if need <= floor:
        return floor
    return int(quantum * math.ceil(need / quantum))
