"""Dense primal-dual interior-point method for second-order cone programs.

Solves the conic pair

    minimize    c'x                maximize   -h'z
    subject to  G x + s = h        subject to G'z + c = 0
                s in K                        z in K

over K = R^l_+ x Q^{q_1} x ... x Q^{q_N}, where Q^q is the second-order
cone {(t, u) in R x R^{q-1} : ||u|| <= t}.  The algorithm is the standard
homogeneous self-dual embedding with Nesterov-Todd scaling and a Mehrotra
predictor-corrector step; the embedding makes primal and dual infeasibility
detectable through Farkas certificates instead of divergence heuristics.

Everything is dense: the intended problem sizes are tens of variables and
at most a few hundred cone rows, where robustness matters far more than
sparsity.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ConeDims", "ConicSolution", "solve_conelp"]

_STEP_FRACTION = 0.99
_MIN_STEP = 1e-10
_OUTER_REFINE_ROUNDS = 6


@dataclass(frozen=True)
class ConeDims:
    """Cone sizes: `nonneg` scalar rows followed by second-order cones."""

    nonneg: int
    soc: tuple[int, ...] = ()

    def __post_init__(self):
        if self.nonneg < 0 or any(q < 2 for q in self.soc):
            raise ValueError(f"invalid cone dimensions {self}")

    @property
    def total(self) -> int:
        return self.nonneg + sum(self.soc)

    @property
    def degree(self) -> int:
        # Barrier degree: 1 per scalar row, 1 per second-order cone under the
        # s'z = mu * degree normalization used here.
        return self.nonneg + len(self.soc)

    def soc_slices(self) -> list[slice]:
        out, start = [], self.nonneg
        for q in self.soc:
            out.append(slice(start, start + q))
            start += q
        return out


@dataclass
class ConicSolution:
    status: str  # optimal | primal_infeasible | dual_infeasible | max_iterations | numerical_failure
    x: np.ndarray | None
    s: np.ndarray | None
    z: np.ndarray | None
    primal_objective: float
    dual_objective: float
    gap: float
    relative_gap: float
    primal_residual: float
    dual_residual: float
    iterations: int
    certificate: np.ndarray | None = None
    message: str = ""


# ---------------------------------------------------------------------------
# Jordan-algebra utilities for the second-order cone.
# x = (x0, x1) with eigenvalues x0 +/- ||x1||; J(x) = x0^2 - ||x1||^2.


def _soc_quad_form(x: np.ndarray) -> float:
    # (t - ||u||)(t + ||u||) avoids the cancellation of t^2 - ||u||^2 near
    # the cone boundary.
    tail = float(np.sqrt(x[1:] @ x[1:]))
    return float((x[0] - tail) * (x[0] + tail))


def _soc_sqrt(x: np.ndarray) -> np.ndarray:
    jx = _soc_quad_form(x)
    a = np.sqrt(0.5 * (x[0] + np.sqrt(jx)))
    out = np.empty_like(x)
    out[0] = a
    out[1:] = x[1:] / (2.0 * a)
    return out


def _soc_inverse(x: np.ndarray) -> np.ndarray:
    jx = _soc_quad_form(x)
    out = np.empty_like(x)
    out[0] = x[0] / jx
    out[1:] = -x[1:] / jx
    return out


def _soc_quad_rep(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Q_x y = 2 x (x'y) - J(x) (y0, -y1)."""
    jx = _soc_quad_form(x)
    out = 2.0 * x * (x @ y)
    out[0] -= jx * y[0]
    out[1:] += jx * y[1:]
    return out


def _soc_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Jordan product a o b = (a'b, a0 b1 + b0 a1)."""
    out = np.empty_like(a)
    out[0] = a @ b
    out[1:] = a[0] * b[1:] + b[0] * a[1:]
    return out


def _soc_arrow_solve(lam: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Solve lam o u = v for u."""
    det = _soc_quad_form(lam)
    out = np.empty_like(v)
    u0 = (lam[0] * v[0] - lam[1:] @ v[1:]) / det
    out[0] = u0
    out[1:] = (v[1:] - u0 * lam[1:]) / lam[0]
    return out


def _soc_max_step(p: np.ndarray, d: np.ndarray) -> float:
    """Largest alpha with p + alpha d staying in the cone (p strictly inside)."""
    jp = _soc_quad_form(p)
    cross = p[0] * d[0] - p[1:] @ d[1:]
    jd = _soc_quad_form(d)
    # First positive root of jp + 2 alpha cross + alpha^2 jd = 0.
    candidates = []
    if abs(jd) < 1e-300:
        if cross < 0:
            candidates.append(-jp / (2.0 * cross))
    else:
        disc = cross * cross - jd * jp
        if disc >= 0:
            sq = np.sqrt(disc)
            for root in ((-cross - sq) / jd, (-cross + sq) / jd):
                if root > 0:
                    candidates.append(root)
    if d[0] < 0:
        candidates.append(-p[0] / d[0])
    return min(candidates) if candidates else np.inf


class _Scaling:
    """Nesterov-Todd scaling W with W^{-1} s = W z = lambda.

    Every application uses the quadratic-representation form
    Q_x y = 2 x (x'y) - J(x) (y0, -y1), which evaluates the well-conditioned
    inner product first; materializing Q_x as a dense matrix loses several
    digits at the extreme scaling states reached near convergence.
    """

    def __init__(self, dims: ConeDims, s: np.ndarray, z: np.ndarray):
        self.dims = dims
        self.slices = dims.soc_slices()
        l = dims.nonneg
        if np.any(s[:l] <= 0) or np.any(z[:l] <= 0):
            raise FloatingPointError("orthant variables left the interior")
        self.w_lin = np.sqrt(s[:l] / z[:l])
        self.w_lin_inv = 1.0 / self.w_lin
        self.lmbda = np.empty(dims.total)
        self.lmbda[:l] = np.sqrt(s[:l] * z[:l])
        # Per cone: (vector, J(vector)) so applies never recompute quad forms.
        self.soc_u: list[tuple[np.ndarray, float]] = []  # W = Q_u per cone
        self.soc_u_inv: list[tuple[np.ndarray, float]] = []
        self.soc_w: list[tuple[np.ndarray, float]] = []  # W^2 = Q_w
        self.soc_w_inv: list[tuple[np.ndarray, float]] = []
        for sl in self.slices:
            sb, zb = s[sl], z[sl]
            if _soc_quad_form(sb) <= 0 or sb[0] <= 0 or _soc_quad_form(zb) <= 0 or zb[0] <= 0:
                raise FloatingPointError("cone variables left the interior")
            s_half = _soc_sqrt(sb)
            inner = _soc_quad_rep(s_half, zb)
            w = _soc_quad_rep(s_half, _soc_inverse(_soc_sqrt(inner)))
            u = _soc_sqrt(w)
            u_inv = _soc_inverse(u)
            w_inv = _soc_inverse(w)
            self.soc_u.append((u, _soc_quad_form(u)))
            self.soc_u_inv.append((u_inv, _soc_quad_form(u_inv)))
            self.soc_w.append((w, _soc_quad_form(w)))
            self.soc_w_inv.append((w_inv, _soc_quad_form(w_inv)))
            self.lmbda[sl] = _soc_quad_rep(u, zb)

    def _blockwise(self, soc_vectors, lin_scale, m):
        vec = m.ndim == 1
        m2 = m[:, None] if vec else m
        out = np.empty_like(m2)
        l = self.dims.nonneg
        out[:l] = m2[:l] * lin_scale[:, None]
        for (xv, jx), sl in zip(soc_vectors, self.slices):
            blk = m2[sl]
            res = np.outer(xv, (2.0 * xv) @ blk)
            res[0] -= jx * blk[0]
            res[1:] += jx * blk[1:]
            out[sl] = res
        return out[:, 0] if vec else out

    def apply_w(self, v: np.ndarray) -> np.ndarray:
        return self._blockwise(self.soc_u, self.w_lin, v)

    def apply_w_inv(self, v: np.ndarray) -> np.ndarray:
        return self._blockwise(self.soc_u_inv, self.w_lin_inv, v)

    def apply_w2_inv_mat(self, m: np.ndarray) -> np.ndarray:
        return self._blockwise(self.soc_w_inv, self.w_lin_inv**2, m)

    def apply_w2_mat(self, m: np.ndarray) -> np.ndarray:
        return self._blockwise(self.soc_w, self.w_lin**2, m)


def _cone_identity(dims: ConeDims) -> np.ndarray:
    e = np.zeros(dims.total)
    e[: dims.nonneg] = 1.0
    for sl in dims.soc_slices():
        e[sl.start] = 1.0
    return e


def _jordan_product(dims: ConeDims, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.empty(dims.total)
    l = dims.nonneg
    out[:l] = a[:l] * b[:l]
    for sl in dims.soc_slices():
        out[sl] = _soc_product(a[sl], b[sl])
    return out


def _arrow_solve(dims: ConeDims, lam: np.ndarray, v: np.ndarray) -> np.ndarray:
    out = np.empty(dims.total)
    l = dims.nonneg
    out[:l] = v[:l] / lam[:l]
    for sl in dims.soc_slices():
        out[sl] = _soc_arrow_solve(lam[sl], v[sl])
    return out


def _max_step(dims: ConeDims, p: np.ndarray, d: np.ndarray) -> float:
    l = dims.nonneg
    alpha = np.inf
    if l:
        neg = d[:l] < 0
        if np.any(neg):
            alpha = float(np.min(-p[:l][neg] / d[:l][neg]))
    for sl in dims.soc_slices():
        alpha = min(alpha, _soc_max_step(p[sl], d[sl]))
    return alpha


def _min_cone_eig(dims: ConeDims, v: np.ndarray) -> float:
    """Smallest cone eigenvalue of v: distance into (or out of) the cone."""
    l = dims.nonneg
    worst = np.inf if dims.total else 0.0
    if l:
        worst = float(np.min(v[:l]))
    for sl in dims.soc_slices():
        worst = min(worst, float(v[sl.start] - np.linalg.norm(v[sl.start + 1 : sl.stop])))
    return worst


def solve_conelp(
    c: np.ndarray,
    G: np.ndarray,
    h: np.ndarray,
    dims: ConeDims,
    feastol: float = 1e-8,
    reltol: float = 1e-8,
    abstol: float = 1e-9,
    max_iterations: int = 200,
) -> ConicSolution:
    """Solve min c'x s.t. Gx + s = h, s in K, via the self-dual embedding."""
    c = np.asarray(c, dtype=np.float64)
    G = np.asarray(G, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    n = c.shape[0]
    m = dims.total
    if G.shape != (m, n) or h.shape != (m,):
        raise ValueError(f"G/h shapes {G.shape}/{h.shape} do not match dims {m} x {n}")

    e = _cone_identity(dims)
    # Least-squares starting point pushed strictly inside the cone; saves a
    # third of the iterations relative to starting at the cone identity.
    x, *_ = np.linalg.lstsq(G, h, rcond=None)
    s_hat = h - G @ x
    margin = _min_cone_eig(dims, s_hat)
    s = s_hat if margin > 1e-3 else s_hat + (1.0 - margin) * e
    z_hat, *_ = np.linalg.lstsq(G.T, -c, rcond=None)
    margin = _min_cone_eig(dims, z_hat)
    z = z_hat if margin > 1e-3 else z_hat + (1.0 - margin) * e
    tau, kappa = 1.0, 1.0
    norm_h = max(1.0, float(np.linalg.norm(h)))
    norm_c = max(1.0, float(np.linalg.norm(c)))
    nu = dims.degree + 1

    # Boundary-degenerate Jordan operations yield inf/nan rather than warn;
    # finiteness guards inside the loop turn those into clean failure statuses.
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return _iterate(
            c, G, h, dims, feastol, reltol, abstol, max_iterations,
            e, x, s, z, tau, kappa, norm_h, norm_c, nu,
        )


def _iterate(
    c, G, h, dims, feastol, reltol, abstol, max_iterations,
    e, x, s, z, tau, kappa, norm_h, norm_c, nu,
):
    n = c.shape[0]
    m = dims.total
    best = None
    best_merit = np.inf
    best_progress = np.inf
    last_progress_iteration = 0
    centering_budget = 20
    for iteration in range(max_iterations):
        rx = G.T @ z + c * tau
        rz = G @ x + s - h * tau
        rtau = float(c @ x + h @ z + kappa)

        xs, ss, zs = x / tau, s / tau, z / tau
        pres = float(np.linalg.norm(G @ xs + ss - h)) / norm_h
        dres = float(np.linalg.norm(G.T @ zs + c)) / norm_c
        pobj = float(c @ xs)
        dobj = float(-h @ zs)
        gap = float(ss @ zs)
        relgap = gap / max(1.0, abs(pobj), abs(dobj))
        merit = max(pres, dres, relgap)
        if merit <= best_merit:
            best_merit = merit
            best = ConicSolution(
                status="max_iterations",
                x=xs,
                s=ss,
                z=zs,
                primal_objective=pobj,
                dual_objective=dobj,
                gap=gap,
                relative_gap=relgap,
                primal_residual=pres,
                dual_residual=dres,
                iterations=iteration,
            )
        if pres <= feastol and dres <= feastol and (gap <= abstol or relgap <= reltol):
            best.status = "optimal"
            return best

        hz = float(h @ z)
        cx = float(c @ x)
        pinfres = np.inf
        if hz < -1e-14:
            cert = z / (-hz)
            pinfres = float(np.linalg.norm(G.T @ cert)) / norm_c
            if pinfres <= feastol:
                best.status = "primal_infeasible"
                best.certificate = cert
                best.message = "Farkas dual ray found: G'z = 0, h'z = -1, z in K"
                return best
        dinfres = np.inf
        if cx < -1e-14:
            certx = x / (-cx)
            dinfres = float(np.linalg.norm(G @ certx + s / (-cx))) / norm_h
            if dinfres <= feastol:
                best.status = "dual_infeasible"
                best.certificate = certx
                best.message = "unbounded primal ray found: Gx + s = 0, c'x = -1"
                return best

        # Progress means either the optimality merit or one of the
        # infeasibility-certificate residuals improved; for feasible problems
        # only the former converges, for infeasible ones only the latter.
        # An infeasibility certificate can take a couple dozen iterations to
        # change the sign of h'z or c'x before its residual starts falling,
        # so the patience here is generous.
        progress = min(merit, pinfres, dinfres)
        if progress < 0.9 * best_progress:
            best_progress = progress
            last_progress_iteration = iteration
        elif iteration - last_progress_iteration >= 25:
            # Residual blow-ups near the boundary are often transient (the
            # embedding re-absorbs them), so give the iterates a few rounds
            # to recover before settling for the best point seen.
            best.status = "numerical_failure"
            best.message = (
                f"stalled at merit {best_merit:.2e} "
                "(accuracy floor of the reduced KKT solve)"
            )
            return best

        mu = (float(s @ z) + tau * kappa) / nu

        try:
            scaling = _Scaling(dims, s, z)
        except FloatingPointError as exc:
            best.status = "numerical_failure"
            best.message = str(exc)
            return best
        lam = scaling.lmbda

        w2inv_G = scaling.apply_w2_inv_mat(G)
        H = G.T @ w2inv_G
        # Regularize only when the factorization actually fails; refinement
        # removes the bias afterwards.
        scale = float(np.trace(H)) / max(n, 1) + 1.0
        cho = None
        jitter = 0.0
        for attempt in range(6):
            try:
                cho = np.linalg.cholesky(H + jitter * np.eye(n) if jitter else H)
                break
            except np.linalg.LinAlgError:
                jitter = 1e-12 * scale if jitter == 0.0 else jitter * 1e3
        if cho is None:
            best.status = "numerical_failure"
            best.message = "KKT matrix factorization failed"
            return best

        def chol_solve(b: np.ndarray) -> np.ndarray:
            y = np.linalg.solve(cho, b)
            return np.linalg.solve(cho.T, y)

        def solve_reduced(bx: np.ndarray, bz: np.ndarray):
            # [0 G'; G -W^2] [dx; dz] = [bx; bz] via the regularized normal
            # equations, polished against the block system itself.
            dx = chol_solve(bx + w2inv_G.T @ bz)
            dz = scaling.apply_w2_inv_mat(G @ dx - bz)
            floor = 1e-13 * (1.0 + max(np.max(np.abs(bx), initial=0.0),
                                       np.max(np.abs(bz), initial=0.0)))
            for _ in range(4):
                r1 = bx - G.T @ dz
                r2 = bz - (G @ dx - scaling.apply_w2_mat(dz))
                if max(np.max(np.abs(r1), initial=0.0), np.max(np.abs(r2), initial=0.0)) < floor:
                    break
                ddx = chol_solve(r1 + w2inv_G.T @ r2)
                ddz = scaling.apply_w2_inv_mat(G @ ddx - r2)
                dx += ddx
                dz += ddz
            return dx, dz

        dx2, dz2 = solve_reduced(-c, h)
        # Evaluated with the computed (dx2, dz2) so the dtau elimination stays
        # consistent with the residual equations.
        denom = float(c @ dx2 + h @ dz2) - kappa / tau

        def newton_solve(bx, bz, btau, arrow, b_kappa):
            """Solve the embedding's Newton system

                G'dz + c dtau                    = bx
                G dx + W ds_sc - h dtau          = bz
                c'dx + h'dz + dkappa             = btau
                lam o (ds_sc + W dz)             = b_s   (arrow = Arw(lam)^{-1} b_s)
                kappa dtau + tau dkappa          = b_kappa

            ds is carried in scaled coordinates (ds = W ds_sc): the
            complementarity equation then holds exactly by construction, and
            no residual is ever formed at W^2 scale.
            """
            dx1, dz1 = solve_reduced(bx, bz - scaling.apply_w(arrow))
            dtau = (btau - b_kappa / tau - float(c @ dx1 + h @ dz1)) / denom
            dx = dx1 + dtau * dx2
            dz = dz1 + dtau * dz2
            ds_sc = arrow - scaling.apply_w(dz)
            dkappa = (b_kappa - kappa * dtau) / tau
            return dx, dz, ds_sc, dtau, dkappa

        zero_arrow = np.zeros(m)

        def direction(eta: float, ds_rhs: np.ndarray, dkappa_rhs: float):
            bx, bz, btau = -eta * rx, -eta * rz, -eta * rtau
            arrow = _arrow_solve(dims, lam, ds_rhs)
            delta = newton_solve(bx, bz, btau, arrow, dkappa_rhs)

            def residual(d):
                dx, dz, ds_sc, dtau, dkappa = d
                e1 = bx - (G.T @ dz + c * dtau)
                e2 = bz - (G @ dx + scaling.apply_w(ds_sc) - h * dtau)
                e3 = btau - (float(c @ dx + h @ dz) + dkappa)
                e5 = dkappa_rhs - (kappa * dtau + tau * dkappa)
                err = max(
                    np.max(np.abs(e1), initial=0.0),
                    np.max(np.abs(e2), initial=0.0),
                    abs(e3),
                    abs(e5),
                )
                return (e1, e2, e3, e5), err

            # Refine against the full system: the regularized reduced solve
            # alone loses accuracy as the scaling blows up near the boundary.
            # Stop when converged, revert a correction that made things worse.
            (e1, e2, e3, e5), err = residual(delta)
            floor = 1e-12 * (1.0 + np.max(np.abs(bz)))
            for _ in range(_OUTER_REFINE_ROUNDS):
                if err < floor:
                    break
                corr = newton_solve(e1, e2, e3, zero_arrow, e5)
                candidate = tuple(d + cd for d, cd in zip(delta, corr))
                (n1, n2, n3, n5), new_err = residual(candidate)
                if new_err >= err:
                    break
                delta = candidate
                (e1, e2, e3, e5), err = (n1, n2, n3, n5), new_err
            dx, dz, ds_sc, dtau, dkappa = delta
            dz_scaled = scaling.apply_w(dz)
            ds = scaling.apply_w(ds_sc)
            return dx, dz, ds, dtau, dkappa, ds_sc, dz_scaled

        lam_sq = _jordan_product(dims, lam, lam)

        # Predictor (affine scaling) direction.
        aff = direction(1.0, -lam_sq, -tau * kappa)
        dxa, dza, dsa, dtaua, dkappaa, dsa_sc, dza_sc = aff
        alpha_aff = min(
            1.0,
            _max_step(dims, lam, dsa_sc),
            _max_step(dims, lam, dza_sc),
            tau / -dtaua if dtaua < 0 else np.inf,
            kappa / -dkappaa if dkappaa < 0 else np.inf,
        )
        gap_now = float(s @ z) + tau * kappa
        gap_aff = (
            float((s + alpha_aff * dsa) @ (z + alpha_aff * dza))
            + (tau + alpha_aff * dtaua) * (kappa + alpha_aff * dkappaa)
        )
        sigma = min(1.0, max(0.0, gap_aff / gap_now)) ** 3

        # Corrector (combined) direction.
        ds_rhs = -lam_sq + sigma * mu * e - _jordan_product(dims, dsa_sc, dza_sc)
        dkappa_rhs = -tau * kappa + sigma * mu - dtaua * dkappaa
        dx, dz, ds, dtau, dkappa, ds_sc, dz_sc = direction(1.0 - sigma, ds_rhs, dkappa_rhs)

        def step_length(ds_sc_, dz_sc_, dtau_, dkappa_):
            return min(
                1.0,
                _STEP_FRACTION
                * min(
                    _max_step(dims, lam, ds_sc_),
                    _max_step(dims, lam, dz_sc_),
                    tau / -dtau_ if dtau_ < 0 else np.inf,
                    kappa / -dkappa_ if dkappa_ < 0 else np.inf,
                ),
            )

        alpha = step_length(ds_sc, dz_sc, dtau, dkappa)
        if alpha <= 1e-7 and centering_budget > 0:
            # Iterate pinned to the cone boundary: recenter (sigma = 1, no
            # residual reduction) and try again next iteration.
            centering_budget -= 1
            ds_rhs = -lam_sq + mu * e
            dkappa_rhs = -tau * kappa + mu
            dx, dz, ds, dtau, dkappa, ds_sc, dz_sc = direction(0.0, ds_rhs, dkappa_rhs)
            alpha = step_length(ds_sc, dz_sc, dtau, dkappa)
        if not np.isfinite(alpha) or alpha <= _MIN_STEP:
            best.status = "numerical_failure"
            best.message = f"step length collapsed to {alpha:.2e}"
            return best
        if not (
            np.isfinite(dx).all()
            and np.isfinite(dz).all()
            and np.isfinite(ds).all()
            and np.isfinite(dtau)
            and np.isfinite(dkappa)
        ):
            best.status = "numerical_failure"
            best.message = "search direction lost finiteness"
            return best

        x += alpha * dx
        z += alpha * dz
        s += alpha * ds
        tau += alpha * dtau
        kappa += alpha * dkappa
        if tau <= 0 or kappa < 0:
            best.status = "numerical_failure"
            best.message = "homogenizing variables left their domain"
            return best

    best.iterations = max_iterations
    return best
