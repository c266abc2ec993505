"""Small dense semidefinite solver.

Primal-dual path-following interior-point method on the homogeneous
self-dual embedding, with Nesterov-Todd scaling and a Mehrotra
predictor-corrector step. The cone is a product of PSD blocks; equality
constraints are the only affine constraints. That is exactly the shape of
every program in this package (POVM optimization, LHS membership, the three
steering monotones), so no free cones or second-order cones are supported.

Standard form handled internally:

    minimize    <c, x>
    subject to  A x = b,   x in K = S_+^{n_1} x ... x S_+^{n_k}

Hermitian blocks are stated by the caller in complex form and handled through
the real symmetric embedding H = A + iB -> [[A, -B], [B, A]]; data matrices
are embedded with a factor 1/2 so inner products match the complex model, and
solutions are mapped back. Eigenvalues of the embedded matrix are those of H,
each twice, which is what makes the cone constraint equivalent.

The solver is deterministic: identical problem data produce bit-identical
iterates and solutions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import json

import numpy as np

from .linalg import dagger, herm

_STEP_FRACTION = 0.98
_SVEC_CACHE: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def _svec_index(n: int):
    try:
        return _SVEC_CACHE[n]
    except KeyError:
        rows, cols = np.triu_indices(n)
        w = np.where(rows == cols, 1.0, np.sqrt(2.0))
        _SVEC_CACHE[n] = (rows, cols, w)
        return _SVEC_CACHE[n]


def svec(m: np.ndarray) -> np.ndarray:
    """Isometric vectorization of a real symmetric matrix (scaled upper triangle)."""
    n = m.shape[0]
    rows, cols, w = _svec_index(n)
    return m[rows, cols] * w


def smat(v: np.ndarray, n: int) -> np.ndarray:
    rows, cols, w = _svec_index(n)
    m = np.zeros((n, n))
    u = v / w
    m[rows, cols] = u
    m[cols, rows] = u
    return m


def hermitian_embed(h: np.ndarray) -> np.ndarray:
    """Real symmetric embedding of a Hermitian matrix.

    H = A + iB maps to [[A, -B], [B, A]]; the embedded spectrum is the
    spectrum of H with every eigenvalue doubled.
    """
    h = np.asarray(h, dtype=np.complex128)
    a, b = h.real, h.imag
    return np.block([[a, -b], [b, a]])


def hermitian_unembed(y: np.ndarray) -> np.ndarray:
    """Project a real symmetric 2n x 2n matrix back to complex Hermitian form."""
    n = y.shape[0] // 2
    a = 0.5 * (y[:n, :n] + y[n:, n:])
    b = 0.5 * (y[n:, :n] - y[:n, n:])
    h = 0.5 * (a + a.T) + 0.5j * (b - b.T)
    return h


@dataclass
class _Block:
    kind: str  # 'herm', 'sym', or 'free'
    dim: int   # complex dimension for 'herm'; real dim for 'sym'; count for 'free'

    @property
    def edim(self) -> int:
        return 2 * self.dim if self.kind == "herm" else self.dim

    @property
    def svec_len(self) -> int:
        e = self.edim
        return e * (e + 1) // 2


class SdpProblem:
    """Incremental problem builder.

    Blocks are PSD variables; constraints are scalar rows or matrix
    equalities between scalar-weighted sums of blocks and a fixed matrix
    (the matrix form is expanded into dim^2 scalar rows on an orthonormal
    Hermitian basis, keeping the constraint matrix full row rank).
    """

    def __init__(self):
        self.blocks: list[_Block] = []
        self._objective: dict[int, np.ndarray] = {}
        self.sense = "min"
        self._rows: list[tuple[dict[int, np.ndarray], float]] = []

    def add_block(self, dim: int, kind: str = "herm") -> int:
        """Add a variable block: a PSD matrix ('herm' complex, 'sym' real)
        or a vector of unconstrained scalars ('free')."""
        assert kind in ("herm", "sym", "free")
        assert dim >= 1
        self.blocks.append(_Block(kind, dim))
        return len(self.blocks) - 1

    def _check_coeff(self, idx: int, m) -> np.ndarray:
        blk = self.blocks[idx]
        if blk.kind == "free":
            a = np.asarray(m, dtype=float).reshape(-1)
            assert a.shape == (blk.dim,)
            return a
        if blk.kind == "herm":
            a = herm(np.asarray(m, dtype=np.complex128))
        else:
            a = np.asarray(m, dtype=float)
            assert np.allclose(a, a.T, atol=1e-12), "sym block expects a symmetric matrix"
            a = 0.5 * (a + a.T)
        assert a.shape == (blk.dim, blk.dim)
        return a

    def set_objective(self, terms: dict[int, np.ndarray], sense: str = "min"):
        assert sense in ("min", "max")
        self.sense = sense
        self._objective = {i: self._check_coeff(i, m) for i, m in terms.items()}

    def add_scalar_constraint(self, terms: dict[int, np.ndarray], rhs: float):
        """<A_i, X_i> summed over the given blocks equals rhs."""
        self._rows.append(({i: self._check_coeff(i, m) for i, m in terms.items()}, float(rhs)))

    def add_matrix_equality(self, terms: dict[int, float], rhs: np.ndarray):
        """sum_i coeff_i * X_i = rhs, all blocks and rhs of one common dimension."""
        idxs = list(terms)
        dim = self.blocks[idxs[0]].dim
        kind = self.blocks[idxs[0]].kind
        assert kind != "free", "matrix equality applies to PSD blocks only"
        for i in idxs:
            assert self.blocks[i].dim == dim and self.blocks[i].kind == kind, \
                "matrix equality mixes incompatible blocks"
        r = self._check_coeff(idxs[0], rhs)
        for basis in _herm_basis(dim, complex_blocks=(kind == "herm")):
            row = {i: float(terms[i]) * basis for i in idxs}
            self._rows.append((row, float(np.trace(basis @ r).real)))

    @property
    def n_constraints(self) -> int:
        return len(self._rows)


def _herm_basis(n: int, complex_blocks: bool):
    """Orthonormal basis of Hermitian (or real symmetric) n x n matrices."""
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for j in range(n):
        e = np.zeros((n, n), dtype=np.complex128)
        e[j, j] = 1.0
        yield e
    for j in range(n):
        for k in range(j + 1, n):
            e = np.zeros((n, n), dtype=np.complex128)
            e[j, k] = inv_sqrt2
            e[k, j] = inv_sqrt2
            yield e
    if complex_blocks:
        for j in range(n):
            for k in range(j + 1, n):
                e = np.zeros((n, n), dtype=np.complex128)
                e[j, k] = -1j * inv_sqrt2
                e[k, j] = 1j * inv_sqrt2
                yield e


def _expand_free(problem: SdpProblem) -> tuple[SdpProblem, list]:
    """Rewrite 'free' blocks as differences of nonnegative scalar pairs.

    Each free coordinate x becomes u - v with u, v >= 0, so the interior
    point kernel only ever sees cone blocks. Returns the expanded problem
    and a regrouping map used to fold solutions back to the caller's
    block structure.
    """
    expanded = SdpProblem()
    expanded.sense = problem.sense
    groups: list = []
    for blk in problem.blocks:
        if blk.kind == "free":
            pairs = []
            for _ in range(blk.dim):
                u = expanded.add_block(1, "sym")
                v = expanded.add_block(1, "sym")
                pairs.append((u, v))
            groups.append(("free", pairs))
        else:
            groups.append(("keep", expanded.add_block(blk.dim, blk.kind)))

    def translate(terms: dict) -> dict:
        out = {}
        for i, m in terms.items():
            tag, ref = groups[i]
            if tag == "keep":
                out[ref] = m
            else:
                vec = np.asarray(m, dtype=float).reshape(-1)
                for (u, v), cj in zip(ref, vec):
                    out[u] = np.array([[cj]])
                    out[v] = np.array([[-cj]])
        return out

    expanded._objective = {i: expanded._check_coeff(i, m)
                           for i, m in translate(problem._objective).items()}
    for terms, rhs in problem._rows:
        expanded._rows.append(({i: expanded._check_coeff(i, m)
                                for i, m in translate(terms).items()}, rhs))
    return expanded, groups


@dataclass
class SdpSolution:
    status: str                      # optimal | primal_infeasible | dual_infeasible | indeterminate
    x: list[np.ndarray] | None       # primal blocks in the caller's (complex) form
    y: np.ndarray | None             # equality multipliers
    s: list[np.ndarray] | None       # dual slack blocks
    primal_objective: float | None   # in the caller's sense
    dual_objective: float | None
    gap: float | None                # absolute duality gap, caller's sense
    rel_gap: float | None
    iterations: int = 0
    certificate: dict | None = None  # Farkas ray for infeasible statuses
    trace: list[dict] = field(default_factory=list)


def _embed_data(block: _Block, m: np.ndarray) -> np.ndarray:
    """Data matrices get the 1/2-scaled embedding so <emb(A), emb(X)> = tr(AX)."""
    if block.kind == "herm":
        return 0.5 * hermitian_embed(m)
    return np.asarray(m, dtype=float)


def _commutant_project(block: _Block, m: np.ndarray) -> np.ndarray:
    """Kill roundoff drift of 'herm' block iterates off the embedded subalgebra."""
    if block.kind != "herm":
        return 0.5 * (m + m.T)
    return hermitian_embed(hermitian_unembed(0.5 * (m + m.T)))


def _max_step(x_chol: np.ndarray, dx: np.ndarray) -> float:
    """Largest alpha with X + alpha dX PSD, given the Cholesky factor of X."""
    li = np.linalg.inv(x_chol)
    g = li @ dx @ li.T
    wmin = float(np.linalg.eigvalsh(0.5 * (g + g.T))[0])
    if wmin >= 0.0:
        return np.inf
    return -1.0 / wmin


class _Scaling:
    """Per-block NT scaling: R with R^T S R = R^-1 X R^-T = diag(lam)."""

    def __init__(self, x: np.ndarray, s: np.ndarray):
        self.lx = np.linalg.cholesky(x)
        self.ls = np.linalg.cholesky(s)
        u, lam, vt = np.linalg.svd(self.ls.T @ self.lx)
        lam = np.maximum(lam, 1e-300)
        isq = 1.0 / np.sqrt(lam)
        self.r = self.lx @ vt.T * isq[np.newaxis, :]
        self.rinv = (isq[:, np.newaxis] * u.T) @ self.ls.T
        self.w = self.r @ self.r.T
        self.lam = lam

    def apply_w(self, m: np.ndarray) -> np.ndarray:
        return self.w @ m @ self.w

    def scale_x(self, m: np.ndarray) -> np.ndarray:   # R^-1 M R^-T
        return self.rinv @ m @ self.rinv.T

    def scale_s(self, m: np.ndarray) -> np.ndarray:   # R^T M R
        return self.r.T @ m @ self.r

    def unscale_x(self, m: np.ndarray) -> np.ndarray:  # R M R^T
        return self.r @ m @ self.r.T


def solve(problem: SdpProblem, tol: float = 1e-8, max_iters: int = 100,
          debug_path: str | None = None) -> SdpSolution:
    """Solve the problem to the requested tolerance.

    Returns an optimal solution with a certified duality gap, or an
    infeasibility certificate (Farkas ray), or an indeterminate status after
    max_iters. The iterate trace (mu, residuals, objectives, <x,s>) is kept
    on the solution for auditing and optionally dumped as JSON lines.
    """
    groups = None
    if any(blk.kind == "free" for blk in problem.blocks):
        problem, groups = _expand_free(problem)

    blocks = problem.blocks
    assert blocks, "problem has no variables"
    assert problem.n_constraints >= 1, "problem has no constraints"

    def regroup(mats, halve=False):
        if groups is None:
            return mats
        out = []
        w = 0.5 if halve else 1.0
        for tag, ref in groups:
            if tag == "keep":
                out.append(mats[ref])
            else:
                out.append(np.array([w * float(np.real(mats[u][0, 0]) - np.real(mats[v][0, 0]))
                                     for u, v in ref]))
        return out

    sign = 1.0 if problem.sense == "min" else -1.0
    edims = [blk.edim for blk in blocks]
    tlens = [blk.svec_len for blk in blocks]
    offsets = np.concatenate([[0], np.cumsum(tlens)]).astype(int)
    total = int(offsets[-1])
    nu = float(sum(edims))

    # Assemble c, A, b in embedded svec coordinates.
    c = np.zeros(total)
    for i, m in problem._objective.items():
        sl = slice(offsets[i], offsets[i + 1])
        c[sl] = sign * svec(_embed_data(blocks[i], m))
    nrows = problem.n_constraints
    a_mat = np.zeros((nrows, total))
    b = np.zeros(nrows)
    for r, (terms, rhs) in enumerate(problem._rows):
        for i, m in terms.items():
            sl = slice(offsets[i], offsets[i + 1])
            a_mat[r, sl] = svec(_embed_data(blocks[i], m))
        b[r] = rhs

    def split(vec):
        return [smat(vec[offsets[i]:offsets[i + 1]], edims[i]) for i in range(len(blocks))]

    def join(mats):
        return np.concatenate([svec(m) for m in mats])

    # HSD starting point.
    xs = [np.eye(e) for e in edims]
    ss = [np.eye(e) for e in edims]
    y = np.zeros(nrows)
    tau, kappa = 1.0, 1.0
    x = join(xs)
    s = join(ss)
    mu0 = (x @ s + tau * kappa) / (nu + 1.0)

    bnorm = 1.0 + float(np.abs(b).max(initial=0.0))
    cnorm = 1.0 + float(np.abs(c).max(initial=0.0))
    trace_rows: list[dict] = []
    debug_file = open(debug_path, "w") if debug_path else None

    def emit(rec):
        trace_rows.append(rec)
        if debug_file:
            debug_file.write(json.dumps(rec) + "\n")

    def finish(status, extra=None, iters=0):
        if debug_file:
            debug_file.close()
        sol = SdpSolution(status=status, x=None, y=None, s=None,
                          primal_objective=None, dual_objective=None,
                          gap=None, rel_gap=None, iterations=iters,
                          trace=trace_rows)
        if extra:
            for k, v in extra.items():
                setattr(sol, k, v)
        return sol

    def deembed(mats, dual=False):
        # Primal iterates are plain embeddings; dual slacks are combinations
        # of the 1/2-scaled data embeddings, so they fold back at twice the
        # unembedded value.
        out = []
        for blk, m in zip(blocks, mats):
            if blk.kind == "herm":
                h = hermitian_unembed(m)
                out.append(2.0 * h if dual else h)
            else:
                out.append(0.5 * (m + m.T))
        return out

    best = None
    for it in range(max_iters):
        rp = a_mat @ x - b * tau
        rd = -(a_mat.T @ y) + c * tau - s
        rg = b @ y - c @ x - kappa
        mu = (x @ s + tau * kappa) / (nu + 1.0)

        pres = float(np.abs(a_mat @ (x / tau) - b).max(initial=0.0)) / bnorm
        dres = float(np.abs(a_mat.T @ (y / tau) + s / tau - c).max(initial=0.0)) / cnorm
        pobj = float(c @ x / tau)
        dobj = float(b @ y / tau)
        relgap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        emit({"iter": it, "mu": mu, "tau": tau, "kappa": kappa,
              "pres": pres, "dres": dres, "pobj": sign * pobj, "dobj": sign * dobj,
              "xs_inner": float(x @ s)})

        if pres <= tol and dres <= tol and relgap <= tol:
            xm = regroup(deembed(split(x / tau)))
            sm = regroup(deembed(split(s / tau), dual=True), halve=True)
            po, do = sign * pobj, sign * dobj
            return finish("optimal", {
                "x": xm, "y": sign * y / tau, "s": sm,
                "primal_objective": po, "dual_objective": do,
                "gap": abs(po - do), "rel_gap": relgap,
            }, iters=it)

        # Infeasibility: test Farkas certificates once tau collapses.
        if tau < 1e-8 * min(1.0, kappa) or (mu < 1e-10 * mu0 and tau < 1e-6):
            by = float(b @ y)
            cx = float(c @ x)
            if by > tol:
                yhat = y / by
                shat = split(-(a_mat.T @ yhat))
                wmin = min(float(np.linalg.eigvalsh(0.5 * (m + m.T))[0]) for m in shat)
                if wmin > -1e-6:
                    return finish("primal_infeasible",
                                  {"certificate": {"y": yhat, "min_eig_slack": wmin}},
                                  iters=it)
            if cx < -tol:
                xhat = x / (-cx)
                axn = float(np.abs(a_mat @ xhat).max(initial=0.0))
                if axn < 1e-6:
                    return finish("dual_infeasible",
                                  {"certificate": {"x": regroup(deembed(split(xhat))),
                                                   "primal_residual": axn}},
                                  iters=it)
            return finish("indeterminate", iters=it)

        # NT scalings.
        try:
            scalings = [_Scaling(xb, sb) for xb, sb in zip(split(x), split(s))]
        except np.linalg.LinAlgError:
            return finish("indeterminate", iters=it)

        def apply_w_vec(vec):
            mats = split(vec)
            return join([sc.apply_w(m) for sc, m in zip(scalings, mats)])

        # Schur complement M = A W A^T built row by row.
        wa = np.empty_like(a_mat)
        for r in range(nrows):
            wa[r] = apply_w_vec(a_mat[r])
        m_schur = a_mat @ wa.T
        m_schur = 0.5 * (m_schur + m_schur.T)
        try:
            chol = np.linalg.cholesky(m_schur + 1e-14 * np.trace(m_schur) / nrows * np.eye(nrows))
        except np.linalg.LinAlgError:
            chol = None

        def schur_solve(v):
            if chol is not None:
                z = np.linalg.solve(chol, v)
                return np.linalg.solve(chol.T, z)
            return np.linalg.lstsq(m_schur, v, rcond=None)[0]

        wc = apply_w_vec(c)
        awc = a_mat @ wc
        g1 = awc + b
        g2 = b - awc
        alpha_sc = float(c @ wc) + kappa / tau
        q2 = schur_solve(g1)
        denom = float(g2 @ q2) + alpha_sc
        if abs(denom) < 1e-300:
            return finish("indeterminate", iters=it)

        lam_list = [sc.lam for sc in scalings]

        def newton(p1, p2, p3, p4, p5):
            p2_mats = split(p2)
            hmats = []
            for sc, p4b, p2b in zip(scalings, split(p4), p2_mats):
                inner = p4b + sc.scale_s(p2b)
                hmats.append(sc.unscale_x(inner))
            h = join(hmats)
            v1 = p1 - a_mat @ h
            q1 = schur_solve(v1)
            rhs2 = p3 + float(c @ h) + p5 / tau
            dtau = (rhs2 - float(g2 @ q1)) / denom
            dy = q1 + q2 * dtau
            dx = h + apply_w_vec(a_mat.T @ dy) - wc * dtau
            ds = -(a_mat.T @ dy) + c * dtau - p2
            dkappa = (p5 - kappa * dtau) / tau
            return dx, dy, ds, dtau, dkappa

        def max_alpha(dx, ds, dtau, dkappa):
            a = np.inf
            for sc, dxb, dsb in zip(scalings, split(dx), split(ds)):
                a = min(a, _max_step(sc.lx, dxb), _max_step(sc.ls, dsb))
            if dtau < 0:
                a = min(a, -tau / dtau)
            if dkappa < 0:
                a = min(a, -kappa / dkappa)
            return a

        # Predictor (affine scaling direction).
        p4_aff = join([smat_diag(-lam) for lam in lam_list])
        dx_a, dy_a, ds_a, dtau_a, dkap_a = newton(-rp, -rd, -rg, p4_aff, -tau * kappa)
        alpha_aff = min(1.0, max_alpha(dx_a, ds_a, dtau_a, dkap_a))
        mu_aff = ((x + alpha_aff * dx_a) @ (s + alpha_aff * ds_a)
                  + (tau + alpha_aff * dtau_a) * (kappa + alpha_aff * dkap_a)) / (nu + 1.0)
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3))

        # Corrector (combined direction).
        p4_mats = []
        for sc, lam, dxb, dsb in zip(scalings, lam_list, split(dx_a), split(ds_a)):
            dxs = sc.scale_x(dxb)
            dss = sc.scale_s(dsb)
            hcorr = 0.5 * (dxs @ dss + dss @ dxs)
            target = sigma * mu * np.eye(len(lam)) - np.diag(lam * lam) - hcorr
            denom_ij = 0.5 * (lam[:, np.newaxis] + lam[np.newaxis, :])
            p4_mats.append(target / denom_ij)
        p4 = join(p4_mats)
        p5 = sigma * mu - tau * kappa - dtau_a * dkap_a
        eta = 1.0 - sigma
        dx, dy, ds, dtau, dkappa = newton(-eta * rp, -eta * rd, -eta * rg, p4, p5)

        alpha = min(1.0, _STEP_FRACTION * max_alpha(dx, ds, dtau, dkappa))
        for _ in range(40):
            x_new = x + alpha * dx
            s_new = s + alpha * ds
            tau_new = tau + alpha * dtau
            kappa_new = kappa + alpha * dkappa
            xb_new = [_commutant_project(blk, m) for blk, m in zip(blocks, split(x_new))]
            sb_new = [_commutant_project(blk, m) for blk, m in zip(blocks, split(s_new))]
            ok = tau_new > 0 and kappa_new > 0
            if ok:
                try:
                    for m in xb_new + sb_new:
                        np.linalg.cholesky(m)
                except np.linalg.LinAlgError:
                    ok = False
            if ok:
                x, s = join(xb_new), join(sb_new)
                tau, kappa = tau_new, kappa_new
                y = y + alpha * dy
                break
            alpha *= 0.5
        else:
            return finish("indeterminate", iters=it)
        best = it

    return finish("indeterminate", iters=best if best is not None else max_iters)


def smat_diag(d: np.ndarray) -> np.ndarray:
    return np.diag(np.asarray(d, dtype=float))
