import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moddft._lattice import LatticeSearch, lll_reduce
from moddft._search import BoxSearch
from moddft.errors import DomainError, EmptySupportError
from moddft.harness import gen_pbl, scenario1_V
from moddft.ident import PBLConfig, identifiable_full
from moddft.modcore import (GaussianIntegerVector, SensingConfig, centered_mod, complex_mod,
                            dft_apply, dft_matrix, fold_decompose, forward)
from moddft.recover import (PBL_RESIDUAL_TOL, SolverConfig, enumerate_solutions, pbl_recover,
                            recover_signal, solve_integer_equations)

ENGINES = ["lattice", "box"]


def _signal(rng, N, V):
    s = rng.uniform(-1, 1, N) + 1j * rng.uniform(-1, 1, N)
    s[list(V)] = 0
    return s


def _brute(z, V, B, tol=1e-6):
    N = len(z)
    A = dft_matrix(N).conj().T[sorted(V)]
    grid = np.array(list(itertools.product(range(-B, B + 1), repeat=2 * N)))
    eps = grid[:, :N] + 1j * grid[:, N:]
    r = np.linalg.norm((z[None, :] - eps) @ A.T, axis=1)
    return {tuple(g) for g in grid[r <= tol]}


@pytest.mark.parametrize("method", ENGINES)
def test_round_trip_prime(method):
    rng = np.random.default_rng(7)
    for _ in range(20):
        s = _signal(rng, 7, {0, 1})
        z = forward(s, SensingConfig(7, {0, 1}))
        res = solve_integer_equations(z, {0, 1}, SolverConfig(method=method))
        if res.status != "unique_in_box":
            # only possible when the true fold vector leaves the box
            eps = fold_decompose(z, dft_apply(s))
            assert max(np.abs(eps.re).max(), np.abs(eps.im).max()) > 1
            continue
        assert np.max(np.abs(res.s_hat - s)) <= 1e-6
        assert np.all(res.s_hat[[0, 1]] == 0)


@pytest.mark.parametrize("method", ENGINES)
def test_unidentifiable_n16_has_two_solutions(method):
    N, V = 16, {0, 1, 3, 4, 8, 12}
    rng = np.random.default_rng(16)
    s = 0.2 * _signal(rng, N, V)
    s2 = s.copy()
    s2[[2, 10]] += 4
    z = forward(s, SensingConfig(N, V))
    np.testing.assert_allclose(z, forward(s2, SensingConfig(N, V)), atol=1e-12)
    eps1 = fold_decompose(z, dft_apply(s))
    eps2 = fold_decompose(z, dft_apply(s2))
    assert eps1 != eps2
    B = int(max(np.abs(e).max() for e in (eps1.re, eps1.im, eps2.re, eps2.im)))
    A = dft_matrix(N).conj().T[sorted(V)]
    for e in (eps1, eps2):
        assert np.linalg.norm(A @ (z - e.to_complex())) <= 1e-6
    res = solve_integer_equations(z, V, SolverConfig(box_bound=B, mode="enumerate_all",
                                                     max_solutions=8, method=method))
    assert res.status == "multiple" and len(res.eps_solutions) == 8
    np.testing.assert_allclose(recover_signal(z, eps2), s2, atol=1e-9)


@pytest.mark.parametrize("method", ENGINES)
@pytest.mark.parametrize("N", [5, 6, 8, 16])
def test_zero_measurements(N, method):
    V = scenario1_V(N)
    res = solve_integer_equations(np.zeros(N), V, SolverConfig(method=method))
    assert res.status == "unique_in_box"
    assert res.eps == GaussianIntegerVector.zeros(N)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 4), st.integers(0, 2**32 - 1), st.sampled_from(ENGINES))
def test_matches_brute_force(N, seed, method):
    rng = np.random.default_rng(seed)
    V = [int(v) for v in np.flatnonzero(rng.random(N) < 0.5)] or [0]
    z = complex_mod(dft_matrix(N) @ _signal(rng, N, V))
    res = solve_integer_equations(z, V, SolverConfig(mode="enumerate_all", max_solutions=10**5,
                                                     method=method))
    got = {tuple(e.re.tolist() + e.im.tolist()) for e in res.eps_solutions}
    assert got == _brute(z, V, 1)


def test_engines_agree_on_random_instances():
    rng = np.random.default_rng(5)
    for _ in range(40):
        N = int(rng.integers(3, 9))
        V = [int(v) for v in np.flatnonzero(rng.random(N) < 0.5)] or [1]
        z = complex_mod(dft_matrix(N) @ _signal(rng, N, V))
        sets = []
        for method in ENGINES:
            res = solve_integer_equations(z, V, SolverConfig(mode="enumerate_all", max_solutions=10**6,
                                                             method=method))
            assert res.status != "budget_exhausted"
            sets.append({e for e in res.eps_solutions})
        assert sets[0] == sets[1]


def test_solutions_satisfy_residual_bound():
    rng = np.random.default_rng(11)
    N, V = 10, [0, 3, 5]
    z = complex_mod(dft_matrix(N) @ _signal(rng, N, V))
    res = enumerate_solutions(z, V, max_solutions=50)
    A = np.fft.ifft(np.eye(N), norm="ortho")[V]
    for e in res.eps_solutions:
        assert np.linalg.norm(A @ (z - e.to_complex())) <= 1e-6
    assert [e.sort_key() for e in res.eps_solutions] == sorted(e.sort_key() for e in res.eps_solutions)


def test_identifiable_in_box_never_multiple():
    rng = np.random.default_rng(12)
    for N in (5, 6, 8, 10, 12, 16):
        V = scenario1_V(N)
        assert identifiable_full(N, V)
        for _ in range(10):
            s = _signal(rng, N, V)
            z = complex_mod(dft_apply(s))
            assert solve_integer_equations(z, V).status != "multiple"


def test_first_feasible_tie_break_is_lexicographic():
    N, V = 16, {0, 1, 3, 4, 8, 12}
    z = np.zeros(N)
    full = enumerate_solutions(z, V, box_bound=1, max_solutions=10**4)
    first = solve_integer_equations(z, V, SolverConfig(tie_cap=10**4))
    assert first.status == "multiple"
    assert first.eps == full.eps_solutions[0]


def test_stop_at_first():
    N, V = 16, {0, 1, 3, 4, 8, 12}
    res = solve_integer_equations(np.zeros(N), V, SolverConfig(stop_at_first=True))
    assert res.status == "feasible" and len(res.eps_solutions) == 1


def test_infeasible_and_budget():
    rng = np.random.default_rng(3)
    z = rng.uniform(-0.4, 0.4, 6) + 0.1
    assert solve_integer_equations(z, range(6)).status == "infeasible"
    z = complex_mod(dft_matrix(16) @ _signal(rng, 16, {0, 1, 2}))
    res = solve_integer_equations(z, {0, 1, 2}, SolverConfig(max_nodes=1))
    assert res.status == "budget_exhausted"


def test_input_errors():
    with pytest.raises(EmptySupportError):
        solve_integer_equations(np.zeros(4), [])
    with pytest.raises(DomainError):
        solve_integer_equations(np.full(4, 0.5), [0])
    with pytest.raises(DomainError):
        solve_integer_equations(np.zeros(4), [4])
    with pytest.raises(DomainError):
        solve_integer_equations([np.nan, 0], [0])
    with pytest.raises(DomainError):
        SolverConfig(box_bound=0)
    with pytest.raises(DomainError):
        SolverConfig(mode="all")
    with pytest.raises(DomainError):
        SolverConfig(method="milp")


def test_recover_signal():
    rng = np.random.default_rng(4)
    s = _signal(rng, 8, [])
    np.testing.assert_allclose(recover_signal(dft_apply(s), np.zeros(8)), s, atol=1e-12)
    V = {0, 1, 2, 4}
    s = _signal(rng, 8, V)
    y = dft_apply(s)
    z = complex_mod(y)
    np.testing.assert_allclose(recover_signal(z, fold_decompose(z, y)), s, atol=1e-10)


def test_shifted_fold_vector_gives_other_signal():
    """Adding a kernel vector built from a missed class changes s_hat but keeps V zero."""
    N, V = 16, [0, 1, 3, 4, 8, 12]
    g = np.zeros(N, complex)
    g[[2, 10]] = 4
    g = dft_matrix(N) @ g  # Gaussian integers: 2 * (e^{-j pi n/4}) on even n
    g = np.round(g.real) + 1j * np.round(g.imag)
    rng = np.random.default_rng(6)
    s = 0.2 * _signal(rng, N, V)
    y = dft_apply(s)
    z = complex_mod(y)
    eps = fold_decompose(z, y).to_complex()
    shat2 = recover_signal(z, eps + g)
    assert np.max(np.abs(shat2 - s)) > 1
    assert np.max(np.abs(shat2[V])) < 1e-12


def test_pbl_unique_up_to_constant():
    cfg = PBLConfig.from_positive(1, 12, [0.3 + 0.2j])
    y = cfg.samples()
    res = pbl_recover(centered_mod(y), 1)
    assert res.status == "unique_in_box"
    d = res.y_hat - y
    assert np.ptp(d) < 1e-9 and abs(d[0] - round(d[0])) < 1e-9
    assert res.eps.re[0] == 0


def test_pbl_unidentifiable_n6():
    rng = np.random.default_rng(1)
    y = gen_pbl(6, 1, rng).samples()
    res = pbl_recover(centered_mod(y), 1, SolverConfig(box_bound=2, mode="enumerate_all",
                                                       residual_tol=PBL_RESIDUAL_TOL))
    assert len(res.eps_solutions) >= 2
    # canonical, distinct and not constant shifts of each other
    assert all(e.re[0] == 0 for e in res.eps_solutions)
    assert len({tuple(e.re) for e in res.eps_solutions}) == len(res.eps_solutions)


def test_pbl_no_folding():
    cfg = PBLConfig.from_positive(2, 16, [0.05, 0.02j])
    y = cfg.samples()
    assert np.all(np.abs(y) < 0.5)
    res = pbl_recover(y, 2)
    assert res.eps == GaussianIntegerVector.zeros(16)


@pytest.mark.parametrize("method", ENGINES)
def test_pbl_engines_agree(method):
    rng = np.random.default_rng(21)
    for P, N in [(1, 9), (2, 10), (3, 12)]:
        y = gen_pbl(N, P, rng).samples()
        z = centered_mod(y)
        res = pbl_recover(z, P, SolverConfig(box_bound=3, mode="enumerate_all", max_solutions=500,
                                             residual_tol=PBL_RESIDUAL_TOL, method=method))
        ref = pbl_recover(z, P, SolverConfig(box_bound=3, mode="enumerate_all", max_solutions=500,
                                             residual_tol=PBL_RESIDUAL_TOL, method="lattice"))
        assert res.eps_solutions == ref.eps_solutions


def test_pbl_errors():
    with pytest.raises(DomainError):
        pbl_recover(np.zeros(5), 2)
    with pytest.raises(DomainError):
        pbl_recover(np.full(8, 0.7), 1)


def test_repeat_calls_identical():
    rng = np.random.default_rng(9)
    z = complex_mod(dft_matrix(10) @ _signal(rng, 10, [0, 2, 5]))
    a = solve_integer_equations(z, [0, 2, 5]).to_dict()
    b = solve_integer_equations(z, [5, 2, 0]).to_dict()
    assert a == b


def test_lll_basis_is_reduced_and_unimodular():
    rng = np.random.default_rng(0)
    B = np.vstack([np.eye(6), 50 * rng.normal(size=(2, 6))])
    R, U = lll_reduce(B)
    np.testing.assert_allclose(B @ U, R, atol=1e-8)
    assert abs(abs(np.linalg.det(np.rint(U))) - 1) < 1e-9
    Q, T = np.linalg.qr(R)
    d = np.abs(np.diag(T))
    mu = T / np.diag(T)[:, None]
    assert np.all(np.abs(np.triu(mu, 1)) <= 0.5 + 1e-9)
    assert np.all(d[1:] ** 2 >= (0.99 - np.diag(mu, 1) ** 2) * d[:-1] ** 2 - 1e-9)


def test_lattice_and_box_search_agree_on_generic_constraints():
    rng = np.random.default_rng(2)
    for _ in range(10):
        n = int(rng.integers(3, 7))
        M = rng.normal(size=(2, n))
        x = rng.integers(-2, 3, n)
        c = M @ x
        lo, hi = np.full(n, -2), np.full(n, 2)
        a, _, ea = LatticeSearch(M, lo, hi).run(c, 1e-6, max_sol=100)
        b, _, eb = BoxSearch(M, lo, hi).run(c, 1e-6, max_sol=100)
        assert not ea and not eb
        assert {tuple(v) for v in a} == {tuple(v) for v in b}
        assert tuple(x) in {tuple(v) for v in a}
