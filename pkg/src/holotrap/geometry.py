"""Non-abelian connection components and field strengths over the control
manifold, with an independent numerical oracle for every formula.

The connection is defined directly on the unrotated logical basis,

    A_s[i, j] = <i| U+(sigma) d/ds U(sigma) |j>,

and every closed-form expression in this module was adjudicated against
a central finite difference of that definition.  In the fixed gauge
``U = D S`` (one qubit) and ``U = N M`` (two qubits) the derived
components are, with ``c = cosh 2 r1``, ``s = sinh 2 r1``:

    A_x  = [[-i y,                    -(c - e^{-i th1} s)/sqrt2],
            [ (c - e^{+i th1} s)/sqrt2,                    -i y]]
    A_y  = [[ i x,                   i (c + e^{-i th1} s)/sqrt2],
            [ i (c + e^{+i th1} s)/sqrt2,                   i x]]
    A_r1 = 0
    A_th1 = (i/4)(cosh 4 r1 - 1) diag(1, 2)

    A_r2 = (1/2)        [[0,0,0,-e^{-i th2}], 0..., [e^{i th2},0,0,0]]
    A_r3 = (cosh 2 r2)/2 on the (01,10) block with phases -e^{-i th3} / e^{+i th3}

Closed-form field strengths derived from these (F = dA - dA + [A, A]):

    F_r1x |_{th1=0}  = sqrt2 e^{-2 r1} [[0, 1], [-1, 0]]
    F_r1y |_{th1=pi} = sqrt2 e^{-2 r1} [[0,-i], [-i, 0]]
    F_r2r3           = sinh 2 r2  on the (01,10) block with phases of A_r3

Some coefficients here differ from commonly quoted forms (a conjugated
off-diagonal phase pair in A_x/A_y, the 2 in A_th1's diagonal, an
overall sqrt2 in the two-qubit entries, and the sign of the printed
field strengths).  The numeric oracle from the defining equation wins
such conflicts; :func:`conventions_report` records each comparison, and
the exponential damping law |F_r1x| = sqrt2 e^{-2 r1} holds exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .controlframe import (ControlPoint, ControlPoint1Q, ControlPoint2Q,
                           apply_control_unitary, required_n_max)
from .errors import OffPlaneError
from .fock import FockSpace
from .jcmodel import JCParams, logical_basis

#: Coordinates of each manifold, in canonical order.
COORDS_1Q = ("x", "y", "r1", "theta1")
COORDS_2Q = ("r2", "theta2", "r3", "theta3")

#: Components with closed forms (theta2/theta3 are numeric-only output).
ANALYTIC_COORDS_1Q = ("x", "y", "r1", "theta1")
ANALYTIC_COORDS_2Q = ("r2", "r3")

DEFAULT_FD_STEP = 1e-4


@dataclass(frozen=True)
class ConnectionMatrix:
    """One connection component at one control point, logical-basis matrix."""

    coord: str
    at: ControlPoint
    matrix: np.ndarray = field(repr=False)

    def antihermiticity_defect(self) -> float:
        return float(np.abs(self.matrix + self.matrix.conj().T).max())


@dataclass(frozen=True)
class CurvatureMatrix:
    """One field-strength component F_{c1 c2} at one control point."""

    coords: tuple[str, str]
    at: ControlPoint
    matrix: np.ndarray = field(repr=False)


def _coords_of(point: ControlPoint) -> tuple[str, ...]:
    return COORDS_1Q if isinstance(point, ControlPoint1Q) else COORDS_2Q


def connection_analytic(point: ControlPoint, coord: str) -> ConnectionMatrix:
    """Closed-form connection component in the fixed gauge (see module doc)."""
    rt2 = np.sqrt(2.0)
    if isinstance(point, ControlPoint1Q):
        c, s = np.cosh(2 * point.r1), np.sinh(2 * point.r1)
        ep, em = np.exp(1j * point.theta1), np.exp(-1j * point.theta1)
        if coord == "x":
            m = np.array([[-1j * point.y, -(c - em * s) / rt2],
                          [(c - ep * s) / rt2, -1j * point.y]])
        elif coord == "y":
            m = np.array([[1j * point.x, 1j * (c + em * s) / rt2],
                          [1j * (c + ep * s) / rt2, 1j * point.x]])
        elif coord == "r1":
            m = np.zeros((2, 2), dtype=complex)
        elif coord == "theta1":
            m = 0.25j * (np.cosh(4 * point.r1) - 1) * np.diag([1.0, 2.0]).astype(complex)
        else:
            raise ValueError(f"unknown one-qubit coordinate {coord!r}")
        return ConnectionMatrix(coord, point, m)
    if not isinstance(point, ControlPoint2Q):
        raise TypeError(f"unsupported control point {type(point)!r}")
    m = np.zeros((4, 4), dtype=complex)
    if coord == "r2":
        m[0, 3] = -np.exp(-1j * point.theta2) / 2
        m[3, 0] = np.exp(1j * point.theta2) / 2
    elif coord == "r3":
        w = np.cosh(2 * point.r2) / 2
        m[1, 2] = -np.exp(-1j * point.theta3) * w
        m[2, 1] = np.exp(1j * point.theta3) * w
    elif coord in COORDS_2Q:
        raise ValueError(f"no closed form for coordinate {coord!r}; "
                         "use connection_numeric")
    else:
        raise ValueError(f"unknown two-qubit coordinate {coord!r}")
    return ConnectionMatrix(coord, point, m)


# ---------------------------------------------------------------------------
# numeric oracle
# ---------------------------------------------------------------------------

def _oracle_space(point: ControlPoint, n_max: int | None) -> FockSpace:
    if n_max is None:
        n_max = required_n_max(point)
    modes = 1 if isinstance(point, ControlPoint1Q) else 2
    return FockSpace(n_max, modes=modes, internal_levels=2)


def _logical_kets(space: FockSpace) -> np.ndarray:
    return logical_basis(space, JCParams()).kets


_PHASE_OF_AMPLITUDE = {"r1": "theta1", "r2": "theta2", "r3": "theta3"}


def shifted_point(point: ControlPoint, coord: str, q: float) -> ControlPoint:
    """Point with one coordinate shifted by ``q``.

    An amplitude pushed below zero is folded into its phase,
    ``(-r, th) -> (r, th + pi)``, which leaves the frame unitary
    unchanged; finite differences at ``r = 0`` rely on this.
    """
    val = getattr_coord(point, coord) + q
    if coord in _PHASE_OF_AMPLITUDE and val < 0:
        phase = _PHASE_OF_AMPLITUDE[coord]
        return point.replace(**{coord: -val,
                                phase: getattr_coord(point, phase) + np.pi})
    return point.replace(**{coord: val})


def _connection_fd(point: ControlPoint, coord: str, h: float,
                   space: FockSpace, kets: np.ndarray) -> np.ndarray:
    def moved(q: float) -> np.ndarray:
        return apply_control_unitary(shifted_point(point, coord, q), space, kets)

    here = moved(0.0)
    diff = (moved(h) - moved(-h)) / (2 * h)
    return here.conj().T @ diff


def getattr_coord(point: ControlPoint, coord: str) -> float:
    return point.coords()[coord]


def connection_numeric(point: ControlPoint, coord: str, h: float = DEFAULT_FD_STEP,
                       n_max: int | None = None,
                       richardson: bool = True) -> ConnectionMatrix:
    """Connection component evaluated from the defining equation.

    Central finite difference of ``<i| U+(sigma) U'(sigma) |j>`` over the
    logical kets, Richardson-extrapolated by default (steps ``h`` and
    ``h/2``, leaving an O(h^4) error).  The truncation is auto-scaled
    with :func:`holotrap.controlframe.required_n_max` so the Fock tail
    stays below the finite-difference error.
    """
    if not 1e-6 <= h <= 1e-3:
        raise ValueError(f"finite-difference step {h} outside [1e-6, 1e-3]")
    if coord not in _coords_of(point):
        raise ValueError(f"unknown coordinate {coord!r} for {type(point).__name__}")
    space = _oracle_space(point, n_max)
    kets = _logical_kets(space)
    a1 = _connection_fd(point, coord, h, space, kets)
    if richardson:
        a2 = _connection_fd(point, coord, h / 2, space, kets)
        a1 = (4 * a2 - a1) / 3
    return ConnectionMatrix(coord, point, a1)


# ---------------------------------------------------------------------------
# field strengths
# ---------------------------------------------------------------------------

def curvature_analytic(point: ControlPoint, coords: tuple[str, str]) -> CurvatureMatrix:
    """Closed-form field strength on its plane of validity.

    Available pairs: ``(r1, x)`` at ``th1 = 0``, ``(r1, y)`` at
    ``th1 = pi`` (both with ``A_r1 = 0``, so F is the plain r1-derivative
    of the other component), and ``(r2, r3)`` at any phases.  Off-plane
    one-qubit requests raise :class:`OffPlaneError`; the numeric
    evaluator covers those.
    """
    c1, c2 = coords
    swap = False
    if isinstance(point, ControlPoint1Q):
        if {c1, c2} == {"r1", "x"}:
            if abs((point.theta1 + np.pi) % (2 * np.pi) - np.pi) > 1e-12:
                raise OffPlaneError("closed-form F_{r1 x} holds at theta1 = 0")
            m = np.sqrt(2) * np.exp(-2 * point.r1) * np.array([[0, 1], [-1, 0]],
                                                              dtype=complex)
            swap = (c1, c2) != ("r1", "x")
        elif {c1, c2} == {"r1", "y"}:
            if abs(point.theta1 % (2 * np.pi) - np.pi) > 1e-12:
                raise OffPlaneError("closed-form F_{r1 y} holds at theta1 = pi")
            m = np.sqrt(2) * np.exp(-2 * point.r1) * np.array([[0, -1j], [-1j, 0]])
            swap = (c1, c2) != ("r1", "y")
        else:
            raise OffPlaneError(f"no closed form for F_{{{c1} {c2}}}")
    elif isinstance(point, ControlPoint2Q):
        if {c1, c2} != {"r2", "r3"}:
            raise OffPlaneError(f"no closed form for F_{{{c1} {c2}}}")
        m = np.zeros((4, 4), dtype=complex)
        w = np.sinh(2 * point.r2)
        m[1, 2] = -np.exp(-1j * point.theta3) * w
        m[2, 1] = np.exp(1j * point.theta3) * w
        swap = (c1, c2) != ("r2", "r3")
    else:
        raise TypeError(f"unsupported control point {type(point)!r}")
    if swap:
        m = -m
    return CurvatureMatrix(coords, point, m)


def _connection_source(source: str, h_conn: float, n_max: int | None):
    if source == "analytic":
        return lambda pt, c: connection_analytic(pt, c).matrix
    if source == "numeric":
        return lambda pt, c: connection_numeric(pt, c, h=h_conn, n_max=n_max).matrix
    raise ValueError(f"source must be 'analytic' or 'numeric', got {source!r}")


def curvature_fd(point: ControlPoint, coords: tuple[str, str], h: float = 1e-2,
                 source: str = "numeric", h_conn: float = DEFAULT_FD_STEP,
                 n_max: int | None = None) -> CurvatureMatrix:
    """F = d_{c1} A_{c2} - d_{c2} A_{c1} + [A_{c1}, A_{c2}] by finite
    differences of the selected connection source."""
    c1, c2 = coords
    conn = _connection_source(source, h_conn, n_max)

    def shifted(coord_move: str, q: float, coord_eval: str) -> np.ndarray:
        return conn(shifted_point(point, coord_move, q), coord_eval)

    d1a2 = (shifted(c1, h, c2) - shifted(c1, -h, c2)) / (2 * h)
    d2a1 = (shifted(c2, h, c1) - shifted(c2, -h, c1)) / (2 * h)
    a1m, a2m = conn(point, c1), conn(point, c2)
    return CurvatureMatrix(coords, point, d1a2 - d2a1 + a1m @ a2m - a2m @ a1m)


def curvature_plaquette(point: ControlPoint, coords: tuple[str, str], h: float = 1e-2,
                        source: str = "numeric", h_conn: float = DEFAULT_FD_STEP,
                        n_max: int | None = None) -> CurvatureMatrix:
    """Field strength from the holonomy of a small square.

    Transports the logical frame around an h-by-h square centred on the
    point, traversed counterclockwise in the ``(c1, c2)`` plane, one
    midpoint-exponential per edge; then ``F = -log(hol)/h^2`` in the
    engine's transport convention (see :mod:`holotrap.holonomy`).
    """
    from scipy.linalg import logm

    c1, c2 = coords
    conn = _connection_source(source, h_conn, n_max)
    u0, v0 = getattr_coord(point, c1), getattr_coord(point, c2)
    corners = [(u0 - h / 2, v0 - h / 2), (u0 + h / 2, v0 - h / 2),
               (u0 + h / 2, v0 + h / 2), (u0 - h / 2, v0 + h / 2),
               (u0 - h / 2, v0 - h / 2)]
    k = 2 if isinstance(point, ControlPoint1Q) else 4
    hol = np.eye(k, dtype=complex)
    for (ua, va), (ub, vb) in zip(corners[:-1], corners[1:]):
        mid = shifted_point(shifted_point(point, c1, (ua + ub) / 2 - u0),
                            c2, (va + vb) / 2 - v0)
        gen = -(conn(mid, c1) * (ub - ua) + conn(mid, c2) * (vb - va))
        gen = (gen - gen.conj().T) / 2
        lam, vec = np.linalg.eigh(1j * gen)
        hol = ((vec * np.exp(-1j * lam)) @ vec.conj().T) @ hol
    f = -logm(hol) / h ** 2
    return CurvatureMatrix(coords, point, f)


def curvature_numeric(point: ControlPoint, coords: tuple[str, str], h: float = 1e-2,
                      source: str = "numeric", h_conn: float = DEFAULT_FD_STEP,
                      n_max: int | None = None) -> dict[str, CurvatureMatrix]:
    """Both numeric evaluations of one field-strength component.

    Returns ``{"fd": ..., "plaquette": ...}``; the two must agree with
    each other to O(h) and with :func:`curvature_analytic` on its plane.
    """
    return {
        "fd": curvature_fd(point, coords, h, source, h_conn, n_max),
        "plaquette": curvature_plaquette(point, coords, h, source, h_conn, n_max),
    }


# ---------------------------------------------------------------------------
# conventions report
# ---------------------------------------------------------------------------

def _nominal_connection(point: ControlPoint, coord: str) -> np.ndarray | None:
    """Alternate printed coefficients kept for the ledger comparison."""
    rt2 = np.sqrt(2.0)
    if isinstance(point, ControlPoint1Q):
        c, s = np.cosh(2 * point.r1), np.sinh(2 * point.r1)
        ep, em = np.exp(1j * point.theta1), np.exp(-1j * point.theta1)
        if coord == "x":
            return np.array([[-1j * point.y, -(c - ep * s) / rt2],
                             [(c - em * s) / rt2, -1j * point.y]])
        if coord == "y":
            return np.array([[1j * point.x, 1j * (c + ep * s) / rt2],
                             [1j * (c + em * s) / rt2, 1j * point.x]])
        if coord == "theta1":
            return 0.25j * (np.cosh(4 * point.r1) - 1) * np.diag([1.0, 1.5])
        return None
    if coord in ("r2", "r3"):
        return np.sqrt(2.0) * connection_analytic(point, coord).matrix
    return None


def _nominal_curvature(point: ControlPoint, coords: tuple[str, str]) -> np.ndarray:
    if isinstance(point, ControlPoint1Q):
        return -curvature_analytic(point, coords).matrix
    return np.sqrt(2.0) * curvature_analytic(point, coords).matrix


def conventions_report(n_points: int = 20, seed: int = 7,
                       h: float = DEFAULT_FD_STEP,
                       tol_conn: float = 1e-5) -> dict:
    """Run the formula checks and build the conventions-ledger payload.

    Each entry states what was compared, the numeric verdict, and any
    constant separating the engine's derived form from the nominal
    (printed) one.  Calibration records from the holonomy module are
    appended separately by the verify command.
    """
    rng = np.random.default_rng(seed)
    checks: list[dict] = []

    def sample_1q():
        return ControlPoint1Q(x=rng.uniform(-1, 1), y=rng.uniform(-1, 1),
                              r1=rng.uniform(0, 1), theta1=rng.uniform(0, 2 * np.pi))

    def sample_2q():
        return ControlPoint2Q(r2=rng.uniform(0, 1), theta2=rng.uniform(0, 2 * np.pi),
                              r3=rng.uniform(0, 1), theta3=rng.uniform(0, 2 * np.pi))

    pts_1q = [sample_1q() for _ in range(n_points)]
    pts_2q = [sample_2q() for _ in range(max(2, n_points // 4))]

    for coord in ANALYTIC_COORDS_1Q:
        err = max(np.abs(connection_numeric(p, coord, h=h).matrix
                         - connection_analytic(p, coord).matrix).max()
                  for p in pts_1q)
        checks.append({"name": f"A_{coord}_numeric_vs_analytic", "points": len(pts_1q),
                       "max_abs_error": float(err), "tolerance": tol_conn,
                       "status": "pass" if err <= tol_conn else "fail"})
    for coord in ANALYTIC_COORDS_2Q:
        err = max(np.abs(connection_numeric(p, coord, h=h).matrix
                         - connection_analytic(p, coord).matrix).max()
                  for p in pts_2q)
        checks.append({"name": f"A_{coord}_numeric_vs_analytic", "points": len(pts_2q),
                       "max_abs_error": float(err), "tolerance": tol_conn,
                       "status": "pass" if err <= tol_conn else "fail"})

    err_r1 = max(np.abs(connection_numeric(p, "r1", h=h).matrix).max() for p in pts_1q)
    checks.append({"name": "A_r1_zero", "points": len(pts_1q),
                   "max_abs_error": float(err_r1), "tolerance": 1e-6,
                   "status": "pass" if err_r1 <= 1e-6 else "fail"})

    defect = max(connection_numeric(p, c, h=h).antihermiticity_defect()
                 for p in pts_1q[:5] for c in ANALYTIC_COORDS_1Q)
    checks.append({"name": "connection_anti_hermiticity", "max_defect": float(defect),
                   "tolerance": 1e-8, "status": "pass" if defect <= 1e-8 else "fail"})

    law_err = 0.0
    for r1 in (0.0, 1.0, 2.0, 3.0):
        p = ControlPoint1Q(r1=r1)
        mag = abs(curvature_analytic(p, ("r1", "x")).matrix[0, 1])
        law_err = max(law_err, abs(mag - np.sqrt(2) * np.exp(-2 * r1)))
    checks.append({"name": "F_r1x_exponential_damping_law", "max_abs_error": float(law_err),
                   "tolerance": 1e-8, "status": "pass" if law_err <= 1e-8 else "fail"})

    # nominal-convention comparisons: measure the derived matrices against
    # the commonly printed variants at witness points
    witness = ControlPoint1Q(x=0.3, y=0.2, r1=0.5, theta1=0.9)
    on_plane = ControlPoint1Q(x=0.3, r1=0.5)
    d_off = float(np.abs(connection_analytic(witness, "x").matrix
                         - _nominal_connection(witness, "x")).max())
    d_on = float(np.abs(connection_analytic(on_plane, "x").matrix
                        - _nominal_connection(on_plane, "x")).max())
    checks.append({"name": "A_x_A_y_offdiagonal_phase",
                   "derived": "phases e^{-i th1} (row 0) / e^{+i th1} (row 1)",
                   "nominal": "conjugate arrangement",
                   "max_diff_off_plane": d_off, "max_diff_on_loop_planes": d_on,
                   "status": "nominal_differs_off_plane"})
    a_th = connection_analytic(witness, "theta1").matrix
    a_th_nom = _nominal_connection(witness, "theta1")
    checks.append({"name": "A_theta1_second_diagonal",
                   "derived_coefficient": float((a_th[1, 1] / a_th[0, 0]).real),
                   "nominal_coefficient": float((a_th_nom[1, 1] / a_th_nom[0, 0]).real),
                   "status": "nominal_scale_mismatch"})
    w2 = ControlPoint2Q(r2=0.4, theta2=0.7, r3=0.3, theta3=0.5)
    ratio = float(np.abs(connection_analytic(w2, "r2").matrix[3, 0])
                  / np.abs(_nominal_connection(w2, "r2")[3, 0]))
    checks.append({"name": "two_qubit_connection_scale",
                   "derived_over_nominal": ratio,
                   "applies_to": ["A_r2", "A_r3", "F_r2r3"],
                   "status": "nominal_scale_mismatch"})
    f_pt = ControlPoint1Q(r1=0.5)
    sign = float((curvature_analytic(f_pt, ("r1", "x")).matrix[0, 1]
                  / _nominal_curvature(f_pt, ("r1", "x"))[0, 1]).real)
    checks.append({"name": "one_qubit_field_strength_sign",
                   "derived_over_nominal": sign, "applies_to": ["F_r1x", "F_r1y"],
                   "note": "derived F is the r1-derivative of the derived A_x/A_y",
                   "status": "nominal_sign_mismatch"})

    return {
        "units": {"hbar": 1.0, "nu": 1.0},
        "gauge": {"one_qubit": "U = D(alpha) S(eps), eps = r1 e^{i th1}, no 1/2 in S",
                  "two_qubit": "U = N(xi) M(zeta)"},
        "transport_convention": {
            "ordering": "later segments multiply on the left",
            "step": "exp(-sum_c A_c(midpoint) dsigma_c)",
            "rationale": "matches the Schrodinger transport of logical coefficients",
        },
        "finite_difference": {"h": h, "richardson": True},
        "checks": checks,
    }
