"""Loops in the control manifold, path-ordered transport, weighted areas,
and the calibration reconciling closed-form gate conventions with
first-principles transport.

Transport solves the parallel-transport equation of the logical
coefficients, ``dc/ds = -A(sigma(s)) sigma'(s) c``, so a loop is mapped
to the ordered product

    hol(C) = exp(-A(m_N) dsigma_N) ... exp(-A(m_1) dsigma_1)

with midpoints ``m_k`` and later segments multiplying on the left.  The
sign and ordering are fixed by requiring that the adiabatic module's
Schrodinger propagation converge to this operator.

On the four named planes the connection components commute along the
path, the transport reduces to an exponential of a weighted area, and
nominal closed-form gates are quoted as ``exp(-i sigma_hat Sigma)`` with
a unit coefficient.  First-principles transport instead obeys

    hol(C) = exp(G kappa Sigma)

with plane constants kappa = 1/sqrt(2) (one qubit) and 1/2 (two qubits)
and, on C_I/C_II, generators relabeled relative to the nominal
sigma-hats.  :func:`calibrate` measures (G, kappa) by fitting transport
over probe rectangles and records the comparison; gate-value questions
are settled by the calibrated law, while :func:`closed_form_gate` keeps
the nominal convention verbatim.

Planes (active coordinates, frozen coordinates, area weight):

    C_I   (x,  r1) at th1 = 0,      y = 0   weight 2 exp(-2 r1)
    C_II  (y,  r1) at th1 = pi,     x = 0   weight 2 exp(-2 r1)
    C_III (r2, r3) at th2 = th3 = 0         weight 2 sinh(2 r2)
    C_IV  (r2, r3) at th2 = 0, th3 = 3pi/2  weight 2 sinh(2 r2)

Loops are piecewise linear, closed (first vertex = last), oriented, and
serialized as JSON ``{"plane": ..., "vertices": [[u, v], ...],
"orientation": +-1}``; free (untagged) loops carry full 4-coordinate
vertices instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import logm

from .controlframe import ControlPoint, ControlPoint1Q, ControlPoint2Q
from .errors import CalibrationError, LoopError, SelfIntersectingLoopError
from .geometry import (COORDS_1Q, COORDS_2Q, connection_analytic,
                       connection_numeric)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _block_1q(m2: np.ndarray) -> np.ndarray:
    """Embed a 2x2 on the (|01>,|10>) block of the two-qubit space."""
    m = np.zeros((4, 4), dtype=complex)
    m[1:3, 1:3] = m2
    return m


#: Pauli-type generators of the two-qubit gates, supported on (|01>,|10>).
SIGMA_1_12 = _block_1q(SIGMA_X)
SIGMA_2_12 = _block_1q(SIGMA_Y)


@dataclass(frozen=True)
class Plane:
    name: str
    manifold: str                      # "1q" | "2q"
    active: tuple[str, str]
    frozen: dict[str, float]
    weight: str                        # "exp" (in v = r1) | "sinh" (in u = r2)
    nominal_generator: np.ndarray = field(repr=False)


PLANES: dict[str, Plane] = {
    "C_I": Plane("C_I", "1q", ("x", "r1"), {"y": 0.0, "theta1": 0.0},
                 "exp", -1j * SIGMA_X),
    "C_II": Plane("C_II", "1q", ("y", "r1"), {"x": 0.0, "theta1": np.pi},
                  "exp", 1j * SIGMA_Y),
    "C_III": Plane("C_III", "2q", ("r2", "r3"), {"theta2": 0.0, "theta3": 0.0},
                   "sinh", -1j * SIGMA_2_12),
    "C_IV": Plane("C_IV", "2q", ("r2", "r3"),
                  {"theta2": 0.0, "theta3": 3 * np.pi / 2},
                  "sinh", -1j * SIGMA_1_12),
}


@dataclass(frozen=True)
class Loop:
    """Closed, oriented, piecewise-linear path of control points.

    ``vertices`` has shape (k, 2) on a tagged plane (active coordinates)
    or (k, 4) for a free loop in the full manifold; the first and last
    vertex must coincide.  ``orientation = -1`` traverses in reverse.
    """

    vertices: np.ndarray
    plane: str | None = None
    orientation: int = 1
    manifold: str | None = None

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if self.plane is not None:
            if self.plane not in PLANES:
                raise LoopError(f"unknown plane {self.plane!r}")
            if v.shape[1] != 2:
                raise LoopError("plane-tagged loops use 2-coordinate vertices")
            object.__setattr__(self, "manifold", PLANES[self.plane].manifold)
        else:
            if v.shape[1] != 4:
                raise LoopError("free loops use 4-coordinate vertices")
            if self.manifold not in ("1q", "2q"):
                raise LoopError("free loops need manifold '1q' or '2q'")
        if v.shape[0] < 2 or not np.allclose(v[0], v[-1], atol=1e-12):
            raise LoopError("loop must be closed: first vertex == last vertex")
        if self.orientation not in (1, -1):
            raise LoopError("orientation must be +1 or -1")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @classmethod
    def rectangle(cls, plane: str, u_max: float, v_max: float,
                  u_min: float = 0.0, v_min: float = 0.0,
                  orientation: int = 1) -> "Loop":
        """Axis-aligned rectangle traversed counterclockwise in (u, v)."""
        verts = [(u_min, v_min), (u_max, v_min), (u_max, v_max),
                 (u_min, v_max), (u_min, v_min)]
        return cls(np.array(verts), plane=plane, orientation=orientation)

    def effective_vertices(self) -> np.ndarray:
        return self.vertices if self.orientation == 1 else self.vertices[::-1]

    @property
    def logical_dim(self) -> int:
        return 2 if self.manifold == "1q" else 4

    def coord_names(self) -> tuple[str, ...]:
        if self.plane is not None:
            return PLANES[self.plane].active
        return COORDS_1Q if self.manifold == "1q" else COORDS_2Q

    def control_point(self, vertex: np.ndarray) -> ControlPoint:
        names = self.coord_names()
        coords = dict(zip(names, vertex))
        if self.plane is not None:
            coords.update(PLANES[self.plane].frozen)
        for amp in ("r1", "r2", "r3"):
            # absorb float dust from midpoint arithmetic at the r = 0 axis
            if -1e-12 < coords.get(amp, 0.0) < 0.0:
                coords[amp] = 0.0
        if self.manifold == "1q":
            return ControlPoint1Q(coords.get("x", 0.0), coords.get("y", 0.0),
                                  coords.get("r1", 0.0), coords.get("theta1", 0.0))
        return ControlPoint2Q(coords.get("r2", 0.0), coords.get("theta2", 0.0),
                              coords.get("r3", 0.0), coords.get("theta3", 0.0))

    def to_dict(self) -> dict:
        d = {"plane": self.plane, "vertices": self.vertices.tolist(),
             "orientation": self.orientation}
        if self.plane is None:
            d["manifold"] = self.manifold
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Loop":
        return cls(np.asarray(d["vertices"], dtype=float), plane=d.get("plane"),
                   orientation=int(d.get("orientation", 1)),
                   manifold=d.get("manifold"))

    def save(self, path: str | Path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    @classmethod
    def load(cls, path: str | Path) -> "Loop":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class HolonomyResult:
    """Logical gate plus provenance metadata."""

    unitary: np.ndarray = field(repr=False)
    method: str = "transport"          # transport | closed_form | calibrated | adiabatic
    steps: int = 0
    calibration: float = 1.0           # scalar applied to Sigma (1.0 = nominal)
    residual_nonunitarity: float = 0.0

    @property
    def logical_dim(self) -> int:
        return self.unitary.shape[0]


def gate_distance(a: np.ndarray | HolonomyResult, b: np.ndarray | HolonomyResult) -> float:
    """Spectral-norm distance between two logical gates."""
    ua = a.unitary if isinstance(a, HolonomyResult) else a
    ub = b.unitary if isinstance(b, HolonomyResult) else b
    return float(np.linalg.norm(ua - ub, ord=2))


# ---------------------------------------------------------------------------
# weighted areas
# ---------------------------------------------------------------------------

def _segment_area_exp(u0, v0, u1, v1) -> float:
    """Exact integral of e^{-2 v} du along one straight segment."""
    du, dv = u1 - u0, v1 - v0
    if du == 0.0:
        return 0.0
    if dv == 0.0:
        return du * np.exp(-2 * v0)
    return du * np.exp(-2 * v0) * -np.expm1(-2 * dv) / (2 * dv)


def _segment_area_sinh(u0, v0, u1, v1) -> float:
    """Exact integral of cosh(2 u) dv along one straight segment."""
    du, dv = u1 - u0, v1 - v0
    if dv == 0.0:
        return 0.0
    if du == 0.0:
        return dv * np.cosh(2 * u0)
    return dv * (np.sinh(2 * u1) - np.sinh(2 * u0)) / (2 * du)


def _orient(p, q, r) -> float:
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def _proper_crossing(a, b, c, d) -> bool:
    """Strict interior crossing of segments ab and cd."""
    d1, d2 = _orient(c, d, a), _orient(c, d, b)
    d3, d4 = _orient(a, b, c), _orient(a, b, d)
    return (d1 * d2 < 0) and (d3 * d4 < 0)


def _check_simple(verts: np.ndarray):
    segs = [(verts[i], verts[i + 1]) for i in range(len(verts) - 1)
            if not np.allclose(verts[i], verts[i + 1])]
    n = len(segs)
    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue          # first and last segments share the base point
            if _proper_crossing(*segs[i], *segs[j]):
                raise SelfIntersectingLoopError(
                    "area requested for a self-intersecting loop"
                )


def sigma_area(loop: Loop) -> float:
    """Signed weighted area enclosed by a plane-tagged loop.

    Computed as an exact boundary line integral (Green's theorem with
    closed-form segment primitives), so axis-aligned rectangles match
    the closed forms ``X (1 - e^{-2R})`` and ``R3 (cosh 2 R2 - 1)`` to
    machine precision.  Counterclockwise traversal in the plane's (u, v)
    order counts positive.
    """
    if loop.plane is None:
        raise LoopError("sigma_area needs a plane-tagged loop with a weight")
    verts = loop.effective_vertices()
    _check_simple(verts)
    seg = _segment_area_exp if PLANES[loop.plane].weight == "exp" else _segment_area_sinh
    return float(sum(seg(verts[i, 0], verts[i, 1], verts[i + 1, 0], verts[i + 1, 1])
                     for i in range(len(verts) - 1)))


# ---------------------------------------------------------------------------
# transport
# ---------------------------------------------------------------------------

def _expm_small_antiherm(g: np.ndarray) -> np.ndarray:
    lam, v = np.linalg.eigh(1j * g)
    return (v * np.exp(-1j * lam)) @ v.conj().T


def _connection_fn(source: str, h_conn: float, n_max: int | None):
    if source == "analytic":
        return lambda pt, c: connection_analytic(pt, c).matrix
    if source == "numeric":
        return lambda pt, c: connection_numeric(pt, c, h=h_conn, n_max=n_max).matrix
    raise ValueError(f"source must be 'analytic' or 'numeric', got {source!r}")


def transport(loop: Loop, steps: int = 1000, source: str = "analytic",
              h_conn: float = 1e-4, n_max: int | None = None) -> HolonomyResult:
    """Path-ordered transport of the logical frame around a loop.

    Each segment is split into substeps (allocated by length, at least
    ``steps`` in total) and every substep contributes one midpoint
    exponential; convergence is O(steps^-2).  Loops based at the manifold
    origin give a basepoint-independent gate; reversal returns the
    adjoint.
    """
    if steps < 100:
        raise ValueError("transport needs steps >= 100")
    verts = loop.effective_vertices()
    names = loop.coord_names()
    conn = _connection_fn(source, h_conn, n_max)
    deltas = np.diff(verts, axis=0)
    lengths = np.linalg.norm(deltas, axis=1)
    total = float(lengths.sum())
    k = loop.logical_dim
    hol = np.eye(k, dtype=complex)
    if total == 0.0:
        return HolonomyResult(hol, "transport", 0, 1.0, 0.0)
    nsub_all = np.maximum(1, np.ceil(steps * lengths / total).astype(int))
    nsub_all[lengths == 0.0] = 0
    for seg_i in range(len(deltas)):
        nsub = int(nsub_all[seg_i])
        if nsub == 0:
            continue
        p0, d = verts[seg_i], deltas[seg_i]
        for j in range(nsub):
            mid = p0 + d * (j + 0.5) / nsub
            base = loop.control_point(mid)
            gen = np.zeros((k, k), dtype=complex)
            for c_i, name in enumerate(names):
                dc = d[c_i] / nsub
                if dc != 0.0:
                    gen -= conn(base, name) * dc
            gen = (gen - gen.conj().T) / 2
            hol = _expm_small_antiherm(gen) @ hol
    defect = float(np.abs(hol @ hol.conj().T - np.eye(k)).max())
    return HolonomyResult(hol, "transport", int(nsub_all.sum()), 1.0, defect)


# ---------------------------------------------------------------------------
# gates
# ---------------------------------------------------------------------------

def closed_form_gate(plane: str, sigma: float) -> HolonomyResult:
    """Nominal closed-form gate ``exp(nominal_generator * Sigma)``.

    This is the unit-coefficient convention (``exp(-i sigma_hat Sigma)``
    up to the per-plane sign); see :func:`calibrate` for the measured
    transport law the engine uses for gate values.
    """
    if plane not in PLANES:
        raise LoopError(f"unknown plane {plane!r}")
    u = _expm_small_antiherm(PLANES[plane].nominal_generator * sigma)
    return HolonomyResult(u, "closed_form", 0, 1.0, 0.0)


@dataclass(frozen=True)
class CalibrationRecord:
    """Fitted area law ``transport = exp(G kappa Sigma)`` for one plane."""

    plane: str
    kappa: float
    generator: np.ndarray = field(repr=False)
    generator_label: str = ""
    generator_match_error: float = 0.0
    nominal_kappa: float = 1.0
    nominal_generator_label: str = ""
    kappa_matches_nominal: bool = False
    generator_matches_nominal: bool = False
    residual: float = 0.0
    kappa_spread: float = 0.0
    probes: tuple = ()

    def gate(self, sigma: float) -> HolonomyResult:
        """Calibrated-law gate for a given weighted area."""
        u = _expm_small_antiherm(self.generator * (self.kappa * sigma))
        return HolonomyResult(u, "calibrated", 0, self.kappa, 0.0)

    def to_dict(self) -> dict:
        return {
            "plane": self.plane,
            "kappa": self.kappa,
            "generator_real": np.real(self.generator).tolist(),
            "generator_imag": np.imag(self.generator).tolist(),
            "generator_label": self.generator_label,
            "generator_match_error": self.generator_match_error,
            "nominal_kappa": self.nominal_kappa,
            "nominal_generator_label": self.nominal_generator_label,
            "kappa_matches_nominal": self.kappa_matches_nominal,
            "generator_matches_nominal": self.generator_matches_nominal,
            "residual": self.residual,
            "kappa_spread": self.kappa_spread,
            "probes": [list(p) for p in self.probes],
        }


_CANDIDATES_1Q = {"-i*sigma_x": -1j * SIGMA_X, "+i*sigma_x": 1j * SIGMA_X,
                  "-i*sigma_y": -1j * SIGMA_Y, "+i*sigma_y": 1j * SIGMA_Y,
                  "-i*sigma_z": -1j * SIGMA_Z, "+i*sigma_z": 1j * SIGMA_Z}
_CANDIDATES_2Q = {"-i*sigma_1_12": -1j * SIGMA_1_12, "+i*sigma_1_12": 1j * SIGMA_1_12,
                  "-i*sigma_2_12": -1j * SIGMA_2_12, "+i*sigma_2_12": 1j * SIGMA_2_12}

_DEFAULT_PROBES = {
    "1q": ((0.5, 1.0), (1.0, 1.0), (1.0, 2.0)),
    "2q": ((0.3, 0.5), (0.5, 0.5), (0.5, 1.0)),
}


def _label_generator(g: np.ndarray, manifold: str) -> tuple[str, float]:
    cands = _CANDIDATES_1Q if manifold == "1q" else _CANDIDATES_2Q
    best, err = "unrecognized", np.inf
    for label, m in cands.items():
        d = float(np.abs(g - m).max())
        if d < err:
            best, err = label, d
    return best, err


def _assert_abelian(plane: Plane, probes, tol: float = 1e-12):
    mats = []
    for u_max, v_max in probes:
        for frac in (0.25, 0.8):
            vert = np.array([u_max * frac, v_max * frac])
            pt = Loop.rectangle(plane.name, u_max, v_max).control_point(vert)
            for c in plane.active:
                mats.append(connection_analytic(pt, c).matrix)
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            comm = mats[i] @ mats[j] - mats[j] @ mats[i]
            if np.abs(comm).max() > tol:
                raise CalibrationError(
                    f"connection not abelian along plane {plane.name}; "
                    "area-law fit precondition violated"
                )


def calibrate(plane: str, probe_rectangles=None, steps: int = 4000,
              source: str = "analytic", residual_tol: float = 1e-6) -> CalibrationRecord:
    """Fit ``transport(rect) = exp(G kappa Sigma(rect))`` on one plane.

    Needs at least three probe rectangles of distinct areas.  Verifies
    abelian commutativity of the connection along the plane, linearity
    of the matrix logarithm in Sigma (residual <= ``residual_tol``), and
    kappa independence of probe size; raises
    :class:`~holotrap.errors.CalibrationError` otherwise.  The record
    states how the fit compares to the nominal unit-kappa convention.
    """
    if plane not in PLANES:
        raise LoopError(f"unknown plane {plane!r}")
    plane_def = PLANES[plane]
    probes = tuple(probe_rectangles) if probe_rectangles is not None \
        else _DEFAULT_PROBES[plane_def.manifold]
    if len(probes) < 3:
        raise CalibrationError("calibration needs >= 3 probe rectangles")
    if len({round(s, 12) for s in
            (sigma_area(Loop.rectangle(plane, u, v)) for u, v in probes)}) < 3:
        raise CalibrationError("probe rectangles must have distinct areas")
    _assert_abelian(plane_def, probes)

    sigmas, logs = [], []
    for u_max, v_max in probes:
        rect = Loop.rectangle(plane, u_max, v_max)
        sig = sigma_area(rect)
        hol = transport(rect, steps=steps, source=source).unitary
        lg = logm(hol)
        lg = (lg - lg.conj().T) / 2
        sigmas.append(sig)
        logs.append(lg)
    sigmas = np.asarray(sigmas)
    logs = np.asarray(logs)
    slope = np.tensordot(sigmas, logs, axes=1) / float(np.sum(sigmas ** 2))
    residual = float(max(np.abs(logs[i] - sigmas[i] * slope).max()
                         for i in range(len(sigmas))))
    if residual > residual_tol:
        raise CalibrationError(
            f"area law violated on {plane}: fit residual {residual:.2e} "
            f"> {residual_tol:.0e}"
        )
    kappa = float(np.linalg.norm(slope, ord=2))
    gen = slope / kappa
    kappas = [float(np.linalg.norm(logs[i], ord=2)) / sigmas[i]
              for i in range(len(sigmas))]
    spread = float(max(abs(k - kappa) for k in kappas))
    if spread > 10 * residual_tol:
        raise CalibrationError(
            f"kappa varies across probe sizes on {plane}: spread {spread:.2e}"
        )
    label, label_err = _label_generator(gen, plane_def.manifold)
    nominal_label, _ = _label_generator(plane_def.nominal_generator, plane_def.manifold)
    return CalibrationRecord(
        plane=plane, kappa=kappa, generator=gen,
        generator_label=label, generator_match_error=label_err,
        nominal_kappa=1.0, nominal_generator_label=nominal_label,
        kappa_matches_nominal=abs(kappa - 1.0) <= 1e-6,
        generator_matches_nominal=(label == nominal_label and label_err <= 1e-6),
        residual=residual, kappa_spread=spread, probes=probes,
    )


def gate_sequence(gates: list[HolonomyResult]) -> HolonomyResult:
    """Compose gates in application order (first entry acts first)."""
    if not gates:
        raise ValueError("empty gate sequence")
    dim = gates[0].logical_dim
    u = np.eye(dim, dtype=complex)
    for g in gates:
        if g.logical_dim != dim:
            raise ValueError(
                "mixed logical dimensions; embed one-qubit gates first "
                "(embed_one_qubit_gate)"
            )
        u = g.unitary @ u
    defect = float(np.abs(u @ u.conj().T - np.eye(dim)).max())
    return HolonomyResult(u, "sequence", sum(g.steps for g in gates), 1.0, defect)


def embed_one_qubit_gate(gate: HolonomyResult | np.ndarray, qubit: int) -> HolonomyResult:
    """Embed a 2x2 logical gate into the two-qubit space.

    Qubit 1 is the slow tensor index (basis |q1 q2>), so a gate on qubit
    1 becomes ``g (x) I`` and on qubit 2 ``I (x) g``.
    """
    u = gate.unitary if isinstance(gate, HolonomyResult) else np.asarray(gate)
    if u.shape != (2, 2):
        raise ValueError("embedding expects a 2x2 gate")
    if qubit == 1:
        m = np.kron(u, np.eye(2))
    elif qubit == 2:
        m = np.kron(np.eye(2), u)
    else:
        raise ValueError("qubit index is 1 or 2")
    return HolonomyResult(m, "sequence", 0, 1.0, 0.0)
