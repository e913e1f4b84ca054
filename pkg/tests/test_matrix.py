import itertools
import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pairgraph import _backend
from pairgraph.graph import add_crystal, graph_with_paths
from pairgraph.matrix import (
    MatrixError,
    bipartite_embedding,
    coincidence_distribution,
    coincidence_probability,
    hafnian,
    hafnian_inclusion_exclusion,
    hafnian_naive,
    permanent_naive,
    permanent_ryser,
)

GOLDENS = json.loads((Path(__file__).parent / "goldens" / "derived.json").read_text())
ORDER = ["a", "c", "e", "b", "d", "f"]

U_P = np.array(
    [
        [0, 0, 0, 0.0097 - 0.0315j, 0.0277 - 0.0055j, 0.0114 + 0.0218j],
        [0, 0, 0, -0.1110 + 0.0133j, -0.0367 - 0.0074j, 0.0066 + 0.0125j],
        [0, 0, 0, -0.0024 - 0.0382j, -0.0347 + 0.0959j, 0.0019 - 0.0328j],
        [0.0097 - 0.0315j, -0.1110 + 0.0133j, -0.0024 - 0.0382j, 0, 0, 0],
        [0.0277 - 0.0055j, -0.0367 - 0.0074j, -0.0347 + 0.0959j, 0, 0, 0],
        [0.0114 + 0.0218j, 0.0066 + 0.0125j, 0.0019 - 0.0328j, 0, 0, 0],
    ]
)
U_H = np.array(
    [
        [0, 0.0277 - 0.0055j, 0.0114 + 0.0218j, 0.0097 - 0.0315j, 0, -0.1110 + 0.0133j],
        [0.0277 - 0.0055j, 0, 0, 0, -0.0367 - 0.0074j, -0.0024 - 0.0382j],
        [0.0114 + 0.0218j, 0, 0, -0.0347 + 0.0959j, 0.0019 - 0.0328j, 0],
        [0.0097 - 0.0315j, 0, -0.0347 + 0.0959j, 0, 0, 0],
        [0, -0.0367 - 0.0074j, 0.0019 - 0.0328j, 0, 0, 0.0066 + 0.0125j],
        [-0.1110 + 0.0133j, -0.0024 - 0.0382j, 0, 0, 0.0066 + 0.0125j, 0],
    ]
)


def rand_complex(rng, n):
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


def rand_symmetric(rng, n):
    a = rand_complex(rng, n)
    return (a + a.T) / 2


def graph_from(u):
    g = graph_with_paths(ORDER)
    for i, j in itertools.combinations(range(6), 2):
        if u[i, j] != 0:
            g = add_crystal(g, ORDER[i], "H", ORDER[j], "H", u[i, j])
    return g


def test_backends_listed():
    assert "python" in _backend.available()
    assert _backend.BACKEND in _backend.available()


def test_forced_python_backend(monkeypatch):
    monkeypatch.setenv("PAIRGRAPH_BACKEND", "python")
    assert _backend.load().__name__ == "pairgraph._kernels_py"


@pytest.mark.parametrize("n", range(1, 9))
def test_ryser_matches_naive(backend, n):
    rng = np.random.default_rng(n)
    a = rand_complex(rng, n)
    assert permanent_ryser(a, backend) == pytest.approx(permanent_naive(a), rel=1e-11)


@pytest.mark.parametrize("n", [2, 4, 6, 8, 10])
def test_hafnian_matches_naive(backend, n):
    rng = np.random.default_rng(100 + n)
    a = rand_symmetric(rng, n)
    assert hafnian(a, backend) == pytest.approx(hafnian_naive(a), rel=1e-10)


@pytest.mark.parametrize("n", [2, 4, 6, 8])
def test_inclusion_exclusion_matches_naive(backend, n):
    rng = np.random.default_rng(200 + n)
    a = rand_symmetric(rng, n)
    assert hafnian_inclusion_exclusion(a, backend) == pytest.approx(hafnian_naive(a), rel=1e-9)


def test_backends_agree_at_n16():
    if len(_backend.available()) < 2:
        pytest.skip("compiled kernels not built")
    rng = np.random.default_rng(16)
    a, s = rand_complex(rng, 16), rand_symmetric(rng, 16)
    assert permanent_ryser(a, "cython") == pytest.approx(permanent_ryser(a, "python"), rel=1e-10)
    assert hafnian(s, "cython") == pytest.approx(hafnian(s, "python"), rel=1e-10)


@pytest.mark.parametrize("n", range(1, 7))
def test_all_ones(backend, n):
    ones = np.ones((n, n))
    assert permanent_ryser(ones, backend) == pytest.approx(math.factorial(n))
    if n % 2 == 0:
        assert hafnian(ones, backend) == pytest.approx(math.prod(range(1, n, 2)))


def test_edge_cases(backend):
    assert hafnian(np.zeros((0, 0)), backend) == 1
    assert permanent_ryser(np.zeros((0, 0)), backend) == 1
    assert hafnian(np.ones((3, 3)), backend) == 0
    assert permanent_ryser(np.eye(5), backend) == pytest.approx(1)


def test_hafnian_ignores_diagonal(backend):
    a = rand_symmetric(np.random.default_rng(3), 6)
    b = a.copy()
    np.fill_diagonal(b, 7.5)
    assert hafnian(a, backend) == pytest.approx(hafnian(b, backend), rel=1e-12)


def test_input_validation():
    with pytest.raises(MatrixError, match="square"):
        permanent_ryser(np.ones((2, 3)))
    with pytest.raises(MatrixError, match="symmetric"):
        hafnian(np.array([[0, 1], [2, 0]]))
    with pytest.raises(MatrixError):
        permanent_naive(np.ones((11, 11)))


@pytest.mark.parametrize("n", range(1, 7))
def test_bipartite_embedding_identity(backend, n):
    b = rand_complex(np.random.default_rng(300 + n), n)
    assert hafnian(bipartite_embedding(b), backend) == pytest.approx(permanent_ryser(b, backend), rel=1e-10)


@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_permanent_invariant_under_permutations(n, seed):
    rng = np.random.default_rng(seed)
    a = rand_complex(rng, n)
    p, q = rng.permutation(n), rng.permutation(n)
    assert permanent_ryser(a[p][:, q]) == pytest.approx(permanent_ryser(a), rel=1e-9, abs=1e-9)
    assert permanent_ryser(a.T) == pytest.approx(permanent_ryser(a), rel=1e-9, abs=1e-9)


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_hafnian_invariant_under_relabelling(k, seed):
    rng = np.random.default_rng(seed)
    a = rand_symmetric(rng, 2 * k)
    p = rng.permutation(2 * k)
    assert hafnian(a[p][:, p]) == pytest.approx(hafnian(a), rel=1e-9, abs=1e-9)


@given(st.integers(1, 4), st.integers(0, 2**32 - 1), st.complex_numbers(max_magnitude=3, allow_nan=False))
def test_hafnian_scaling(k, seed, c):
    a = rand_symmetric(np.random.default_rng(seed), 2 * k)
    assert hafnian(c * a) == pytest.approx(c**k * hafnian(a), rel=1e-9, abs=1e-9)


def test_printed_perm_submatrix_probability():
    # rows a, c; columns b, d of the printed matrix
    p = abs(permanent_ryser(U_P[np.ix_([0, 1], [3, 4])])) ** 2
    assert p == pytest.approx(GOLDENS["perm_abcd_probability"], rel=1e-12)


def test_printed_haf_submatrix_probability():
    idx = [ORDER.index(x) for x in "abce"]
    p = abs(hafnian(U_H[np.ix_(idx, idx)])) ** 2
    assert p == pytest.approx(GOLDENS["haf_abce_probability"], rel=1e-12)


@pytest.mark.parametrize("u, key", [(U_P, "perm_histogram"), (U_H, "haf_histogram")])
def test_printed_matrix_histograms(u, key):
    dist = coincidence_distribution(graph_from(u), 4)
    got = {"".join(sorted(s)): v for s, v in dist.items()}
    assert len(got) == 15
    assert sum(got.values()) == pytest.approx(1, abs=1e-12)
    for k, v in GOLDENS[key].items():
        assert got[k] == pytest.approx(v, rel=1e-9, abs=1e-15)


def test_bipartite_network_uses_permanent():
    g = graph_from(U_P)
    sub = ["a", "c", "b", "d"]
    perm = permanent_ryser(U_P[np.ix_([0, 1], [3, 4])])
    assert coincidence_probability(g, sub) == pytest.approx(abs(perm) ** 2, rel=1e-12)


def test_odd_subset_rejected():
    with pytest.raises(MatrixError, match="odd"):
        coincidence_probability(graph_from(U_P), ["a", "b", "c"])
