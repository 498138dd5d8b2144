import numpy as np
import pytest

from holotrap.errors import NotAntiHermitianError, SpaceMismatchError
from holotrap.fock import (FockOperator, FockSpace, annihilation, creation,
                           edge_population, expm_antihermitian, identity,
                           number_operator, pauli, tensor)


def test_space_dimensions():
    assert FockSpace(5).dim == 10
    assert FockSpace(5, internal_levels=1).dim == 5
    assert FockSpace(4, modes=2).dim == 4 * 16
    assert FockSpace(4, modes=2, internal_levels=1).dim == 16


def test_space_validation():
    with pytest.raises(ValueError):
        FockSpace(1)
    with pytest.raises(ValueError):
        FockSpace(4, modes=3)
    with pytest.raises(ValueError):
        FockSpace(4, internal_levels=3)


def test_basis_ordering_internal_slowest():
    space = FockSpace(3, modes=2, internal_levels=2)
    # index = ((2 a1 + a2) * 3 + n1) * 3 + n2
    assert space.index((0, 0), (0, 0)) == 0
    assert space.index((0, 0), (0, 1)) == 1
    assert space.index((0, 0), (1, 0)) == 3
    assert space.index((0, 1), (0, 0)) == 9
    assert space.index((1, 0), (0, 0)) == 18
    assert space.index((1, 1), (2, 2)) == space.dim - 1


def test_annihilation_elements():
    space = FockSpace(3, internal_levels=1)
    a = annihilation(space).matrix
    assert a[0, 1] == pytest.approx(1.0)
    assert a[1, 2] == pytest.approx(np.sqrt(2))
    assert np.count_nonzero(a) == 2
    assert np.array_equal(creation(space).matrix, a.conj().T)


def test_commutator_up_to_truncation_edge():
    space = FockSpace(40, internal_levels=1)
    a = annihilation(space)
    comm = (a @ a.dag() - a.dag() @ a).matrix
    assert np.abs(comm[:39, :39] - np.eye(39)).max() < 1e-13


def test_number_operator_spectrum_exact():
    space = FockSpace(17, internal_levels=1)
    w = np.linalg.eigvalsh(number_operator(space).matrix)
    assert np.abs(np.sort(w) - np.arange(17)).max() < 1e-12


def test_invalid_mode_rejected():
    with pytest.raises(SpaceMismatchError):
        annihilation(FockSpace(4), mode=1)


def test_pauli_actions():
    space = FockSpace(4)
    g0 = space.ket((0,), (0,))
    e0 = space.ket((1,), (0,))
    assert np.allclose(pauli(space, "z").matrix @ g0, -g0)
    assert np.allclose(pauli(space, "plus").matrix @ g0, e0)
    sp2 = pauli(space, "plus") @ pauli(space, "plus")
    assert np.abs(sp2.matrix).max() == 0.0


def test_pauli_requires_internal_factor():
    with pytest.raises(SpaceMismatchError):
        pauli(FockSpace(4, internal_levels=1), "z")


def test_expm_identity_and_pauli_block():
    space = FockSpace(4)
    zero = FockOperator(space, np.zeros((space.dim, space.dim)))
    assert np.allclose(expm_antihermitian(zero).matrix, np.eye(space.dim))
    g = 1j * np.pi * pauli(space, "z").matrix
    u = expm_antihermitian(FockOperator(space, g)).matrix
    assert np.allclose(u, -np.eye(space.dim), atol=1e-12)


def test_expm_unitarity_random_generators():
    rng = np.random.default_rng(11)
    for dim in (8, 60, 200):
        space = FockSpace(dim, internal_levels=1)
        m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        g = FockOperator(space, (m - m.conj().T) / 2)
        assert expm_antihermitian(g).unitarity_defect() <= 1e-10


def test_expm_stable_at_large_generator_norm():
    # squeeze-sized generator, norm ~ cosh(8) territory
    space = FockSpace(120, internal_levels=1)
    a = annihilation(space)
    g = 2.0 * (a.dag() @ a.dag() - a @ a)
    u = expm_antihermitian(g)
    assert u.unitarity_defect() <= 1e-10


def test_expm_rejects_non_antihermitian():
    space = FockSpace(4, internal_levels=1)
    with pytest.raises(NotAntiHermitianError):
        expm_antihermitian(identity(space))


def test_tensor_products():
    s1 = FockSpace(3, internal_levels=1)
    a = annihilation(s1)
    eye = identity(s1)
    both = tensor(a, eye) @ tensor(eye, a)
    direct = tensor(a, a)
    assert np.allclose(both.matrix, direct.matrix)
    assert tensor(a, a).space.dim == 9
    assert np.allclose(tensor(eye, eye).matrix, np.eye(9))


def test_tensor_rejects_interleaving():
    mode = identity(FockSpace(3, internal_levels=1))
    dressed = identity(FockSpace(3))
    with pytest.raises(SpaceMismatchError):
        tensor(mode, dressed)     # would put modes before internal factors


def test_operator_space_checks():
    a3 = annihilation(FockSpace(3, internal_levels=1))
    a4 = annihilation(FockSpace(4, internal_levels=1))
    with pytest.raises(SpaceMismatchError):
        _ = a3 @ a4
    with pytest.raises(SpaceMismatchError):
        FockOperator(FockSpace(3), np.eye(2))


def test_operators_are_frozen():
    a = annihilation(FockSpace(4))
    with pytest.raises(ValueError):
        a.matrix[0, 0] = 1.0


def test_edge_population_monitor():
    space = FockSpace(6, internal_levels=1)
    top = space.ket((), (5,))
    assert edge_population(space, top) == pytest.approx(1.0)
    low = space.ket((), (0,))
    assert edge_population(space, low) == 0.0
    mix = (top + low) / np.sqrt(2)
    assert edge_population(space, mix) == pytest.approx(0.5)
