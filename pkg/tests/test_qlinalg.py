import numpy as np
import pytest

from memchannel.qlinalg import (
    SpaceLayout,
    eigvals_hermitian,
    kron,
    partial_trace,
    trace_norm_distance,
)

SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)  # |g><g| - |e><e|


def random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return a + a.conj().T


def random_state(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def test_layout_validation():
    with pytest.raises(ValueError, match="duplicate"):
        SpaceLayout([("Q1", 2), ("Q1", 3)])
    with pytest.raises(ValueError, match="dimension"):
        SpaceLayout([("Q1", 0)])
    lay = SpaceLayout([("R1", 2), ("Q1", 2), ("O", 4)])
    assert lay.dim == 16
    assert lay.dim_of("O") == 4
    assert lay.restricted_to(["O", "R1"]).labels == ("R1", "O")
    with pytest.raises(ValueError, match="Q7"):
        lay.index("Q7")


def test_kron_identity():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_sign_convention():
    # sigma_z (x) I on |e>|g>: |e> is the second basis vector, eigenvalue -1
    op = kron(SIGMA_Z, np.eye(2))
    ket_eg = np.kron(np.array([0.0, 1.0]), np.array([1.0, 0.0]))
    assert np.allclose(op @ ket_eg, -ket_eg)


def test_kron_against_bruteforce():
    rng = np.random.default_rng(7)
    a = random_hermitian(rng, 2)
    b = random_hermitian(rng, 2)
    got = kron(a, b)
    expected = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    expected[2 * i + k, 2 * j + l] = a[i, j] * b[k, l]
    assert np.abs(got - expected).max() == 0.0


def test_kron_mixed_product_property():
    rng = np.random.default_rng(8)
    a, b, c, d = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(4))
    lhs = kron(a, b) @ kron(c, d)
    rhs = kron(a @ c, b @ d)
    assert np.abs(lhs - rhs).max() < 1e-12


def test_kron_associativity():
    rng = np.random.default_rng(9)
    a, b, c = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(3))
    assert np.abs(kron(kron(a, b), c) - kron(a, kron(b, c))).max() < 1e-12


def test_partial_trace_bell_state():
    bell = np.zeros(4, dtype=complex)
    bell[0] = bell[3] = 1 / np.sqrt(2)
    rho = np.outer(bell, bell.conj())
    lay = SpaceLayout([("A", 2), ("B", 2)])
    for keep in (["A"], ["B"]):
        assert np.abs(partial_trace(rho, lay, keep) - np.eye(2) / 2).max() < 1e-14


def test_partial_trace_product_state():
    rng = np.random.default_rng(10)
    rho_a = random_state(rng, 2)
    rho_b = random_state(rng, 3)
    lay = SpaceLayout([("A", 2), ("B", 3)])
    got = partial_trace(np.kron(rho_a, rho_b), lay, ["A"])
    assert np.abs(got - rho_a).max() < 1e-14


def test_partial_trace_against_bruteforce():
    rng = np.random.default_rng(11)
    dims = (2, 3, 2)
    lay = SpaceLayout([("A", 2), ("B", 3), ("C", 2)])
    rho = random_state(rng, 12)
    got = partial_trace(rho, lay, ["A", "C"])
    t = rho.reshape(dims + dims)
    expected = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for k in range(2):
            for ip in range(2):
                for kp in range(2):
                    for j in range(3):
                        expected[2 * i + k, 2 * ip + kp] += t[i, j, k, ip, j, kp]
    assert np.abs(got - expected).max() < 1e-12
    assert abs(np.trace(got) - 1.0) < 1e-12


def test_partial_trace_composes():
    rng = np.random.default_rng(12)
    lay = SpaceLayout([("A", 2), ("B", 2), ("C", 3)])
    rho = random_state(rng, 12)
    both = partial_trace(rho, lay, ["A"])
    one = partial_trace(rho, lay, ["A", "C"])
    then = partial_trace(one, SpaceLayout([("A", 2), ("C", 3)]), ["A"])
    assert np.abs(both - then).max() < 1e-12


def test_partial_trace_unknown_label():
    lay = SpaceLayout([("A", 2)])
    with pytest.raises(ValueError, match="nope"):
        partial_trace(np.eye(2) / 2, lay, ["nope"])


def test_eigvals_simple():
    assert np.allclose(eigvals_hermitian(np.eye(2) / 2), [0.5, 0.5])
    assert np.allclose(eigvals_hermitian(np.diag([0.2, 0.8])), [0.2, 0.8])


def test_eigvals_ascending_and_trace():
    rng = np.random.default_rng(13)
    h = random_hermitian(rng, 8)
    vals = eigvals_hermitian(h)
    assert np.all(np.diff(vals) >= 0)
    assert abs(vals.sum() - np.trace(h).real) < 1e-10


def test_eigvals_reconstruction_oracle():
    rng = np.random.default_rng(14)
    h = random_hermitian(rng, 6)
    vals = eigvals_hermitian(h)
    # independent reconstruction through the eigenvector decomposition
    w, v = np.linalg.eigh(h)
    rebuilt = (v * w) @ v.conj().T
    assert np.abs(rebuilt - h).max() < 1e-10
    assert np.abs(np.sort(w) - vals).max() < 1e-10


def test_eigvals_rejects_non_hermitian():
    bad = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ValueError, match="Hermitian"):
        eigvals_hermitian(bad)


def test_trace_norm_distance_basics():
    rho = np.diag([0.3, 0.7]).astype(complex)
    assert trace_norm_distance(rho, rho) == 0.0
    g = np.diag([1.0, 0.0]).astype(complex)
    e = np.diag([0.0, 1.0]).astype(complex)
    assert abs(trace_norm_distance(g, e) - 2.0) < 1e-14


def test_trace_norm_distance_hermitian_oracle():
    rng = np.random.default_rng(15)
    a = random_state(rng, 5)
    b = random_state(rng, 5)
    got = trace_norm_distance(a, b)
    expected = np.abs(np.linalg.eigvalsh(a - b)).sum()
    assert abs(got - expected) < 1e-10
    assert abs(got - trace_norm_distance(b, a)) < 1e-14


def test_trace_norm_triangle_inequality():
    rng = np.random.default_rng(16)
    for _ in range(5):
        a, b, c = (random_state(rng, 4) for _ in range(3))
        assert trace_norm_distance(a, c) <= (
            trace_norm_distance(a, b) + trace_norm_distance(b, c) + 1e-10
        )


def test_trace_norm_dim_mismatch():
    with pytest.raises(ValueError, match="mismatch"):
        trace_norm_distance(np.eye(2), np.eye(3))
