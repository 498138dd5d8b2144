import numpy as np
import pytest

from holotrap.controlframe import (ControlPoint1Q, ControlPoint2Q,
                                   apply_control_unitary, control_unitary,
                                   displacement, required_n_max, squeeze,
                                   two_mode_displace, two_mode_squeeze)
from holotrap.errors import SpaceMismatchError
from holotrap.fock import FockSpace, annihilation

SP1 = FockSpace(60, internal_levels=1)
SP2 = FockSpace(12, modes=2, internal_levels=1)


def coherent_state_series(alpha, n_max):
    """Independent oracle: coherent state from its Fock series."""
    n = np.arange(n_max)
    from scipy.special import gammaln
    amps = np.exp(-abs(alpha) ** 2 / 2 + n * np.log(alpha + 0j) - gammaln(n + 1) / 2)
    amps[0] = np.exp(-abs(alpha) ** 2 / 2)
    return amps


def test_displacement_identity_at_zero():
    assert np.allclose(displacement(0.0, SP1).matrix, np.eye(SP1.dim))


def test_displacement_vacuum_is_coherent_state():
    alpha = 0.7 + 0.4j
    got = displacement(alpha, SP1).matrix[:, 0]
    want = coherent_state_series(alpha, SP1.n_max)
    assert np.abs(got - want).max() < 1e-12


def test_displacement_vacuum_overlap_value():
    # <0|D(1)|0> = e^{-1/2}
    val = displacement(1.0, SP1).matrix[0, 0]
    assert val == pytest.approx(0.6065306597126334, abs=1e-12)


def test_displacement_group_inverse():
    for alpha in (1.3, -0.8 + 1.1j, 2.0j):
        d = displacement(alpha, SP1)
        dm = displacement(-alpha, SP1)
        assert np.abs((d @ dm).matrix - np.eye(SP1.dim)).max() < 1e-10


def test_squeeze_identity_at_zero():
    assert np.allclose(squeeze(0.0, SP1).matrix, np.eye(SP1.dim))


SP_FD = FockSpace(40, internal_levels=1)   # h^2 error grows with level; see test


def test_squeeze_generator_finite_difference():
    # S+(eps) dS/dr1 must be a+^2 - a^2 at theta1 = 0 (no factor 1/2).
    # The O(h^2) difference error grows with the Fock level, so the
    # 1e-6 bound is checked on the lowest n_max/2 levels.
    r1, h = 0.3, 1e-5
    s0 = squeeze(r1, SP_FD).matrix
    sp_ = squeeze(r1 + h, SP_FD).matrix
    sm_ = squeeze(r1 - h, SP_FD).matrix
    got = s0.conj().T @ (sp_ - sm_) / (2 * h)
    a = annihilation(SP_FD).matrix
    want = a.conj().T @ a.conj().T - a @ a
    half = SP_FD.n_max // 2
    assert np.abs(got - want)[:half, :half].max() < 1e-6


def test_squeeze_generator_finite_difference_with_phase():
    r1, th, h = 0.25, 1.2, 1e-5
    eps = r1 * np.exp(1j * th)
    s0 = squeeze(eps, SP_FD).matrix
    sp_ = squeeze((r1 + h) * np.exp(1j * th), SP_FD).matrix
    sm_ = squeeze((r1 - h) * np.exp(1j * th), SP_FD).matrix
    got = s0.conj().T @ (sp_ - sm_) / (2 * h)
    a = annihilation(SP_FD).matrix
    want = np.exp(1j * th) * a.conj().T @ a.conj().T - np.exp(-1j * th) * a @ a
    half = SP_FD.n_max // 2
    assert np.abs(got - want)[:half, :half].max() < 1e-6


def test_squeezed_vacuum_variance():
    # variance in the squeezed direction shrinks by e^{-4 r1}
    r1 = 0.25
    psi = squeeze(r1, SP1).matrix[:, 0]
    a = annihilation(SP1).matrix
    x = (a + a.conj().T) / np.sqrt(2)
    p = (a - a.conj().T) / (1j * np.sqrt(2))
    var = []
    for q in (x, p):
        mean = np.vdot(psi, q @ psi).real
        var.append(np.vdot(psi, q @ q @ psi).real - mean ** 2)
    ratio = min(var) / 0.5
    assert ratio == pytest.approx(np.exp(-1.0), abs=1e-10)
    assert np.exp(-1.0) == pytest.approx(0.36787944117144233)


def test_two_mode_squeeze_vacuum_overlap():
    # truncation tail of the r2 = 1 two-mode squeezed vacuum decays like
    # tanh(1)^(2 n_max); n_max = 36 puts it below 1e-8
    zeta = 1.0
    space = FockSpace(36, modes=2, internal_levels=1)
    m = two_mode_squeeze(zeta, space)
    # independent oracle: two-mode squeezed vacuum series sum tanh^n / cosh |nn>
    n = np.arange(12)
    series = np.tanh(zeta) ** n / np.cosh(zeta)
    psi = m.matrix[:, 0].reshape(space.n_max, space.n_max)
    assert np.abs(np.diag(psi)[:12] - series).max() < 1e-8
    assert psi[0, 0] == pytest.approx(0.6480542736638855, abs=1e-8)
    assert psi[0, 0] == pytest.approx(1 / np.cosh(1.0), abs=1e-8)


def test_two_mode_squeeze_generator_finite_difference():
    r2, th, h = 0.4, 0.7, 1e-5
    m0 = two_mode_squeeze(r2 * np.exp(1j * th), SP2).matrix
    mp = two_mode_squeeze((r2 + h) * np.exp(1j * th), SP2).matrix
    mm = two_mode_squeeze((r2 - h) * np.exp(1j * th), SP2).matrix
    got = m0.conj().T @ (mp - mm) / (2 * h)
    a1 = annihilation(SP2, 0).matrix
    a2 = annihilation(SP2, 1).matrix
    want = (np.exp(1j * th) * a1.conj().T @ a2.conj().T
            - np.exp(-1j * th) * a1 @ a2)
    sub = np.ix_(range(SP2.dim // 2), range(SP2.dim // 2))
    assert np.abs(got - want)[sub].max() < 1e-6


def test_two_mode_displace_conserves_photon_number():
    n_tot = (annihilation(SP2, 0).dag() @ annihilation(SP2, 0)
             + annihilation(SP2, 1).dag() @ annihilation(SP2, 1)).matrix
    nmat = two_mode_displace(0.6 * np.exp(0.3j), SP2).matrix
    assert np.abs(nmat @ n_tot - n_tot @ nmat).max() < 1e-10


def test_two_mode_displace_swaps_single_photon():
    # 2x2 rotation oracle on the one-photon block
    from scipy.linalg import expm
    xi = np.pi / 2
    rot = expm(np.array([[0, xi], [-xi, 0]]))   # acts on (|10>, |01>)
    assert abs(rot[1, 0]) == pytest.approx(1.0)
    nmat = two_mode_displace(xi, SP2).matrix
    ket10 = SP2.ket((), (1, 0))
    out = nmat @ ket10
    amp01 = out[SP2.index((), (0, 1))]
    assert abs(amp01) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_unitarity_within_caps():
    assert displacement(2.0 + 1.0j, SP1).unitarity_defect() < 1e-10
    assert squeeze(1.0 * np.exp(0.5j), SP1).unitarity_defect() < 1e-10
    assert two_mode_squeeze(1.0 * np.exp(1.0j), SP2).unitarity_defect() < 1e-10
    assert two_mode_displace(1.5 * np.exp(2.0j), SP2).unitarity_defect() < 1e-10


def test_control_unitary_composition():
    origin = ControlPoint1Q()
    assert np.allclose(control_unitary(origin, SP1).matrix, np.eye(SP1.dim))
    pt = ControlPoint1Q(x=0.5)
    assert np.allclose(control_unitary(pt, SP1).matrix,
                       displacement(0.5, SP1).matrix)
    pt2 = ControlPoint2Q(r2=0.3)
    assert np.allclose(control_unitary(pt2, SP2).matrix,
                       two_mode_squeeze(0.3, SP2).matrix)
    # order D S, not S D
    both = ControlPoint1Q(x=0.4, r1=0.3)
    want = displacement(0.4, SP1).matrix @ squeeze(0.3, SP1).matrix
    assert np.abs(control_unitary(both, SP1).matrix - want).max() < 1e-12


def test_control_unitary_two_qubit_order():
    pt = ControlPoint2Q(r2=0.3, theta2=0.4, r3=0.5, theta3=1.0)
    want = (two_mode_displace(pt.xi, SP2).matrix
            @ two_mode_squeeze(pt.zeta, SP2).matrix)
    assert np.abs(control_unitary(pt, SP2).matrix - want).max() < 1e-12


def test_apply_matches_matrix_with_internal_factor():
    space = FockSpace(20)
    rng = np.random.default_rng(3)
    states = rng.normal(size=(space.dim, 3)) + 1j * rng.normal(size=(space.dim, 3))
    pt = ControlPoint1Q(x=0.3, y=-0.2, r1=0.2, theta1=0.9)
    direct = control_unitary(pt, space).matrix @ states
    fast = apply_control_unitary(pt, space, states)
    assert np.abs(direct - fast).max() < 1e-11
    back = apply_control_unitary(pt, space, fast, dagger=True)
    assert np.abs(back - states).max() < 1e-11


def test_point_validation():
    with pytest.raises(ValueError):
        ControlPoint1Q(x=np.inf)
    with pytest.raises(ValueError):
        ControlPoint1Q(r1=-0.1)
    with pytest.raises(ValueError):
        ControlPoint2Q(theta3=np.nan)


def test_space_mismatch_rejected():
    with pytest.raises(SpaceMismatchError):
        displacement(1.0, SP2)
    with pytest.raises(SpaceMismatchError):
        two_mode_squeeze(0.3, SP1)


def test_required_n_max_scaling():
    small = required_n_max(ControlPoint1Q(r1=0.1))
    big = required_n_max(ControlPoint1Q(r1=1.0))
    assert small == 80
    assert big > 500
    assert required_n_max(ControlPoint2Q(r2=1.0)) >= 32
