"""Tests for the interior-point conic solver.

Two independent oracles back the random-problem checks: problems
constructed around a known optimal pair (complementary primal/dual
solutions fixed first, data derived from them), and a long-run ADMM
first-order method implemented at the bottom of this module.
"""

import numpy as np
import pytest

from steerkit.linalg import dagger
from steerkit.sdp import (
    SdpProblem,
    _herm_basis,
    hermitian_embed,
    hermitian_unembed,
    smat,
    solve,
    svec,
)


def rng(seed=0):
    return np.random.default_rng(seed)


def random_hermitian(n, gen):
    m = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
    return 0.5 * (m + m.conj().T)


class TestSvec:
    def test_roundtrip(self):
        gen = rng(0)
        for n in (1, 2, 5, 8):
            m = gen.standard_normal((n, n))
            m = 0.5 * (m + m.T)
            assert np.max(np.abs(smat(svec(m), n) - m)) <= 1e-14

    def test_inner_product_preserved(self):
        gen = rng(1)
        a = gen.standard_normal((4, 4))
        a = 0.5 * (a + a.T)
        b = gen.standard_normal((4, 4))
        b = 0.5 * (b + b.T)
        assert abs(svec(a) @ svec(b) - np.trace(a @ b)) <= 1e-12


class TestHermitianEmbed:
    def test_real_input_duplicates_blocks(self):
        m = np.array([[2.0, 1.0], [1.0, 0.0]])
        e = hermitian_embed(m)
        assert np.allclose(e[:2, :2], m)
        assert np.allclose(e[2:, 2:], m)
        assert np.allclose(e[:2, 2:], 0)

    def test_pauli_y_eigenvalues(self):
        y = np.array([[0.0, -1j], [1j, 0.0]])
        w = np.linalg.eigvalsh(hermitian_embed(y))
        assert np.allclose(w, [-1.0, -1.0, 1.0, 1.0])

    def test_spectrum_doubles(self):
        gen = rng(2)
        h = random_hermitian(4, gen)
        we = np.linalg.eigvalsh(hermitian_embed(h))
        wh = np.linalg.eigvalsh(h)
        assert np.max(np.abs(we - np.repeat(np.sort(wh), 2))) <= 1e-10

    def test_unembed_roundtrip(self):
        gen = rng(3)
        h = random_hermitian(3, gen)
        assert np.max(np.abs(hermitian_unembed(hermitian_embed(h)) - h)) <= 1e-14


class TestSmallProblems:
    def test_max_trace_below_identity(self):
        p = SdpProblem()
        x = p.add_block(2, "herm")
        s = p.add_block(2, "herm")
        p.set_objective({x: np.eye(2)}, sense="max")
        p.add_matrix_equality({x: 1.0, s: 1.0}, np.eye(2))
        sol = solve(p)
        assert sol.status == "optimal"
        assert abs(sol.primal_objective - 2.0) <= 1e-7

    def test_scalar_lp(self):
        # min x subject to x >= 3, with x a free scalar and a slack block
        p = SdpProblem()
        x = p.add_block(1, "free")
        s = p.add_block(1, "sym")
        p.set_objective({x: [1.0]}, sense="min")
        p.add_scalar_constraint({x: [1.0], s: [[-1.0]]}, 3.0)
        sol = solve(p)
        assert sol.status == "optimal"
        assert abs(sol.primal_objective - 3.0) <= 1e-7
        assert abs(sol.x[0][0] - 3.0) <= 1e-6

    def test_extremal_eigenvalues(self):
        gen = rng(4)
        c = random_hermitian(4, gen)
        w = np.linalg.eigvalsh(c)
        for sense, target in (("max", w[-1]), ("min", w[0])):
            p = SdpProblem()
            x = p.add_block(4, "herm")
            p.set_objective({x: c}, sense=sense)
            p.add_scalar_constraint({x: np.eye(4)}, 1.0)
            sol = solve(p)
            assert sol.status == "optimal"
            assert abs(sol.primal_objective - target) <= 1e-7

    def test_primal_infeasible_certificate(self):
        # tr X = -1 cannot hold for X >= 0
        p = SdpProblem()
        x = p.add_block(2, "herm")
        p.set_objective({x: np.eye(2)}, sense="min")
        p.add_scalar_constraint({x: np.eye(2)}, -1.0)
        sol = solve(p)
        assert sol.status == "primal_infeasible"
        assert sol.certificate["min_eig_slack"] > -1e-6

    def test_dual_infeasible_certificate(self):
        # max x11 with only x22 pinned is unbounded above
        p = SdpProblem()
        x = p.add_block(2, "sym")
        p.set_objective({x: np.array([[1.0, 0.0], [0.0, 0.0]])}, sense="max")
        p.add_scalar_constraint({x: np.array([[0.0, 0.0], [0.0, 1.0]])}, 1.0)
        sol = solve(p)
        assert sol.status == "dual_infeasible"
        assert sol.certificate["primal_residual"] <= 1e-6


def constructed_problem(n, m, gen, complex_blocks):
    """Random SDP with a known optimal pair, built from complementary
    primal and dual solutions of complementary rank."""
    if complex_blocks:
        g = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
    else:
        g = gen.standard_normal((n, n))
    q, _ = np.linalg.qr(g)
    r = n // 2 or 1
    x_star = q[:, :r] @ np.diag(gen.uniform(0.5, 2.0, r)) @ dagger(q[:, :r])
    s_star = q[:, r:] @ np.diag(gen.uniform(0.5, 2.0, n - r)) @ dagger(q[:, r:])
    a_mats = []
    for _ in range(m):
        if complex_blocks:
            a = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
            a = 0.5 * (a + a.conj().T)
        else:
            a = gen.standard_normal((n, n))
            a = 0.5 * (a + a.T)
        a_mats.append(a)
    y_star = gen.standard_normal(m)
    c = s_star + sum(yk * ak for yk, ak in zip(y_star, a_mats))
    opt = float(np.trace(c @ x_star).real)

    p = SdpProblem()
    x = p.add_block(n, "herm" if complex_blocks else "sym")
    p.set_objective({x: c}, sense="min")
    for ak in a_mats:
        p.add_scalar_constraint({x: ak}, float(np.trace(ak @ x_star).real))
    return p, opt, x_star


class TestConstructedOptima:
    @pytest.mark.parametrize("complex_blocks", [False, True])
    def test_known_optimum_recovered(self, complex_blocks):
        gen = rng(11 if complex_blocks else 12)
        for _ in range(5):
            n = int(gen.integers(3, 7))
            # enough constraints to pin the solution on the optimal face,
            # otherwise only the objective value is determined
            r = n // 2 or 1
            face = r * r if complex_blocks else r * (r + 1) // 2
            m = face + 2
            p, opt, x_star = constructed_problem(n, m, gen, complex_blocks)
            sol = solve(p, tol=1e-9)
            assert sol.status == "optimal"
            scale = 1.0 + abs(opt)
            assert abs(sol.primal_objective - opt) <= 1e-6 * scale
            assert np.max(np.abs(sol.x[0] - x_star)) <= 1e-4 * max(1.0, np.abs(x_star).max())

    def test_objectives_bracket_known_optimum(self):
        # max convention: primal <= opt + margin, dual >= opt - margin, where
        # the certified accuracy is rel_gap <= tol, i.e. a margin of order
        # tol * (1 + |pobj| + |dobj|)
        gen = rng(13)
        tol = 1e-8
        for _ in range(5):
            p, opt, _ = constructed_problem(5, 4, gen, True)
            p.sense = "max"
            p._objective = {k: -v for k, v in p._objective.items()}
            sol = solve(p, tol=tol)
            assert sol.status == "optimal"
            margin = 10 * tol * (1.0 + abs(opt))
            assert sol.primal_objective <= -opt + margin
            assert sol.dual_objective >= -opt - margin


class TestDualSlackConvention:
    def test_slack_satisfies_dual_identity_at_caller_scale(self):
        # min tr X s.t. X - T = G with both blocks PSD: the optimum is the
        # positive part of G, the dual matrix Y groups the equality
        # multipliers, and the returned slacks must satisfy s_X = I - Y and
        # s_T = Y in the caller's (complex) convention.
        gen = rng(21)
        n = 4
        g = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
        g = 0.5 * (g + g.conj().T)
        p = SdpProblem()
        xb = p.add_block(n, "herm")
        tb = p.add_block(n, "herm")
        p.set_objective({xb: np.eye(n)}, sense="min")
        p.add_matrix_equality({xb: 1.0, tb: -1.0}, g)
        sol = solve(p, tol=1e-9)
        assert sol.status == "optimal"
        opt = float(np.clip(np.linalg.eigvalsh(g), 0.0, None).sum())
        assert abs(sol.primal_objective - opt) <= 1e-6 * (1.0 + abs(opt))

        basis = list(_herm_basis(n, complex_blocks=True))
        y_mat = sum(yk * bk for yk, bk in zip(sol.y, basis))
        assert np.max(np.abs(sol.s[1] - y_mat)) <= 1e-6
        assert np.max(np.abs(sol.s[0] - (np.eye(n) - y_mat))) <= 1e-6
        # complementary slackness ties the pieces together
        assert abs(np.vdot(sol.s[0], sol.x[0]).real) <= 1e-6
        assert abs(np.vdot(sol.s[1], sol.x[1]).real) <= 1e-6


class TestIterateProperties:
    def test_cone_inner_product_nonnegative_every_iterate(self):
        gen = rng(14)
        p, _, _ = constructed_problem(5, 4, gen, True)
        sol = solve(p)
        assert sol.status == "optimal"
        assert len(sol.trace) >= 2
        assert all(rec["xs_inner"] >= 0.0 for rec in sol.trace)

    def test_certified_relative_gap(self):
        gen = rng(15)
        p, _, _ = constructed_problem(4, 3, gen, False)
        sol = solve(p, tol=1e-8)
        assert sol.status == "optimal"
        assert sol.rel_gap <= 1e-8

    def test_deterministic_resolve(self):
        gen = rng(16)
        p, _, _ = constructed_problem(4, 3, gen, True)
        a = solve(p)
        b = solve(p)
        assert a.status == b.status == "optimal"
        assert a.primal_objective == b.primal_objective
        assert all(np.array_equal(xa, xb) for xa, xb in zip(a.x, b.x))


# --- ADMM first-order oracle ---


def hvec(m):
    """Real coordinates of a Hermitian matrix with <A,B> = hvec(A).hvec(B)."""
    n = m.shape[0]
    iu = np.triu_indices(n, 1)
    return np.concatenate(
        [np.real(np.diag(m)), np.sqrt(2.0) * np.real(m[iu]), np.sqrt(2.0) * np.imag(m[iu])]
    )


def hmat(v, n):
    iu = np.triu_indices(n, 1)
    k = n * (n - 1) // 2
    m = np.diag(v[:n].astype(complex))
    m[iu] = (v[n : n + k] + 1j * v[n + k :]) / np.sqrt(2.0)
    return m + dagger(np.triu(m, 1))


def admm_sdp(c, a_mats, b, n, iters=20_000, rho=1.0):
    """min <c, X> s.t. tr(a_k X) = b_k, X >= 0, by two-block splitting."""
    a = np.stack([hvec(ak) for ak in a_mats])
    cvec = hvec(c)
    aat_inv = np.linalg.inv(a @ a.T)

    def project_affine(v):
        return v - a.T @ (aat_inv @ (a @ v - b))

    z = np.zeros(len(cvec))
    u = np.zeros(len(cvec))
    for _ in range(iters):
        xv = project_affine(z - u - cvec / rho)
        w, vv = np.linalg.eigh(hmat(xv + u, n))
        z = hvec(vv @ np.diag(np.maximum(w, 0.0)) @ dagger(vv))
        u = u + xv - z
    return float(cvec @ z)


class TestAgainstAdmmOracle:
    def test_strictly_feasible_random_problems(self):
        gen = rng(17)
        for _ in range(4):
            n = int(gen.integers(3, 6))
            m = int(gen.integers(2, 4))
            # strictly feasible on both sides
            x0 = random_hermitian(n, gen)
            x0 = x0 @ dagger(x0) / n + np.eye(n)
            a_mats = [random_hermitian(n, gen) for _ in range(m)]
            b = np.array([float(np.trace(ak @ x0).real) for ak in a_mats])
            s0 = random_hermitian(n, gen)
            s0 = s0 @ dagger(s0) / n + np.eye(n)
            y0 = gen.standard_normal(m)
            c = s0 + sum(yk * ak for yk, ak in zip(y0, a_mats))

            p = SdpProblem()
            x = p.add_block(n, "herm")
            p.set_objective({x: c}, sense="min")
            for ak, bk in zip(a_mats, b):
                p.add_scalar_constraint({x: ak}, bk)
            sol = solve(p, tol=1e-9)
            assert sol.status == "optimal"

            ref = admm_sdp(c, a_mats, b, n)
            scale = 1.0 + abs(ref)
            assert abs(sol.primal_objective - ref) <= 1e-5 * scale
