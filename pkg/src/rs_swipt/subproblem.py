"""Convex subproblem of the precoder update: assembly and solution.

With equalizers and MSE weights frozen, the precoder step is a convex QCQP
in the stacked real/imaginary precoder coordinates plus one slack X_k per
receiver for the shared-stream rate bookkeeping:

    minimize    sum_k u_k (X_k + xi_k(P))
    subject to  xi_{c,k}(P) <= 1 + sum_i X_i        for every receiver k
                linearized harvested energy >= E_th
                total transmit power <= P_t
                X <= 0

The nonconvex harvested-energy constraint is replaced by its first-order
lower bound at an anchor point, which is tight at the anchor.  The solver
backend reformulates the QCQP as a second-order cone program and runs the
interior-point method in `conic`; alternative backends can be registered
for cross-validation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import conic
from .physics import effective_ir_channels
from .types import ChannelSet, PrecoderSet, SystemConfig, total_transmit_power
from .wmmse import EqualizerState

__all__ = [
    "VariableLayout",
    "QuadraticForm",
    "QuadraticLeqConstraint",
    "LinearGeqConstraint",
    "BallConstraint",
    "SignConstraint",
    "ConvexSubproblem",
    "SolverTolerances",
    "KktResiduals",
    "SolverResult",
    "taylor_lower_bound",
    "full_layout",
    "assemble_from_state",
    "solve",
    "register_backend",
    "dump_problem",
]


# ---------------------------------------------------------------------------
# Complex-to-real lifting: p in C^n becomes [Re p; Im p] in R^{2n}.


def lift(v: np.ndarray) -> np.ndarray:
    return np.concatenate([v.real, v.imag])


def lower(x: np.ndarray) -> np.ndarray:
    n = x.shape[0] // 2
    return x[:n] + 1j * x[n:]


def _re_row(hconj: np.ndarray) -> np.ndarray:
    """Row a with a @ lift(p) = Re(h^H p); pass h itself (conjugation internal)."""
    return np.concatenate([hconj.real, hconj.imag])


def _im_row(hconj: np.ndarray) -> np.ndarray:
    """Row b with b @ lift(p) = Im(h^H p)."""
    return np.concatenate([-hconj.imag, hconj.real])


@dataclass(frozen=True)
class VariableLayout:
    """Placement of precoder slots and X slacks in the real decision vector.

    Pinned slots (absent precoders, absent X entries) simply do not appear;
    `unpack` restores them as zeros.
    """

    n_t: int
    num_irs: int
    num_ers: int
    include_common: bool
    active_privates: tuple[int, ...]
    active_energy: tuple[int, ...]
    active_x: tuple[int, ...]

    def slots(self) -> list[tuple[str, int | None]]:
        out: list[tuple[str, int | None]] = []
        if self.include_common:
            out.append(("common", None))
        out.extend(("private", k) for k in self.active_privates)
        out.extend(("energy", j) for j in self.active_energy)
        return out

    def slot_slice(self, slot: tuple[str, int | None]) -> slice:
        idx = self.slots().index(slot)
        return slice(2 * self.n_t * idx, 2 * self.n_t * (idx + 1))

    @property
    def num_precoder_vars(self) -> int:
        return 2 * self.n_t * len(self.slots())

    @property
    def num_variables(self) -> int:
        return self.num_precoder_vars + len(self.active_x)

    def x_index(self, k: int) -> int:
        return self.num_precoder_vars + self.active_x.index(k)

    def pack(self, precoders: PrecoderSet, x: np.ndarray) -> np.ndarray:
        z = np.zeros(self.num_variables)
        for slot in self.slots():
            kind, idx = slot
            if kind == "common":
                vec = precoders.common
            elif kind == "private":
                vec = precoders.private[idx]
            else:
                vec = precoders.energy[idx]
            z[self.slot_slice(slot)] = lift(vec)
        for k in self.active_x:
            z[self.x_index(k)] = x[k]
        return z

    def unpack(self, z: np.ndarray) -> tuple[PrecoderSet, np.ndarray]:
        common = np.zeros(self.n_t, dtype=np.complex128)
        private = np.zeros((self.num_irs, self.n_t), dtype=np.complex128)
        energy = np.zeros((self.num_ers, self.n_t), dtype=np.complex128)
        for slot in self.slots():
            kind, idx = slot
            vec = lower(z[self.slot_slice(slot)])
            if kind == "common":
                common = vec
            elif kind == "private":
                private[idx] = vec
            else:
                energy[idx] = vec
        x = np.zeros(self.num_irs)
        for k in self.active_x:
            x[k] = z[self.x_index(k)]
        return PrecoderSet(common=common, private=private, energy=energy), x


def full_layout(config: SystemConfig) -> VariableLayout:
    """Layout with every precoder slot and every X slack active."""
    return VariableLayout(
        n_t=config.num_tx_antennas,
        num_irs=config.num_irs,
        num_ers=config.num_ers,
        include_common=True,
        active_privates=tuple(range(config.num_irs)),
        active_energy=tuple(range(config.num_ers)),
        active_x=tuple(range(config.num_irs)),
    )


# ---------------------------------------------------------------------------
# Problem description.


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    """f(z) = z' M z + r' z + constant with M symmetric PSD."""

    matrix: np.ndarray
    linear: np.ndarray
    constant: float

    def value(self, z: np.ndarray) -> float:
        return float(z @ self.matrix @ z + self.linear @ z + self.constant)


@dataclass(frozen=True, eq=False)
class QuadraticLeqConstraint:
    """z' M z + r' z + constant <= 0 with M symmetric PSD."""

    tag: str
    matrix: np.ndarray
    linear: np.ndarray
    constant: float

    def violation(self, z: np.ndarray) -> float:
        return float(z @ self.matrix @ z + self.linear @ z + self.constant)


@dataclass(frozen=True, eq=False)
class LinearGeqConstraint:
    """coeffs' z >= bound."""

    tag: str
    coeffs: np.ndarray
    bound: float


@dataclass(frozen=True, eq=False)
class BallConstraint:
    """sum of z_i^2 over `indices` <= bound."""

    tag: str
    indices: np.ndarray
    bound: float


@dataclass(frozen=True, eq=False)
class SignConstraint:
    """z_i <= 0 for every i in `indices`."""

    tag: str
    indices: np.ndarray


@dataclass(frozen=True, eq=False)
class ConvexSubproblem:
    num_variables: int
    objective: QuadraticForm
    constraints: tuple
    layout: VariableLayout | None = None


@dataclass(frozen=True)
class SolverTolerances:
    feasibility: float = 1e-8
    relative_gap: float = 1e-8
    absolute_gap: float = 1e-9
    max_iterations: int = 200


@dataclass(frozen=True)
class KktResiduals:
    primal: float
    dual: float
    gap: float


@dataclass(frozen=True, eq=False)
class SolverResult:
    status: str  # optimal | infeasible | max_iterations | numerical_failure
    solution: np.ndarray | None
    objective_value: float | None
    kkt_residuals: KktResiduals
    iterations: int
    diagnostic: str = ""


# ---------------------------------------------------------------------------
# First-order lower bound of |g^H p|^2 around an anchor.


def taylor_lower_bound(g: np.ndarray, p: np.ndarray, p_anchor: np.ndarray) -> float:
    """Phi = 2 Re{p_anchor^H g g^H p} - |g^H p_anchor|^2, always <= |g^H p|^2
    with equality at p = p_anchor."""
    anchor_gain = complex(np.vdot(g, p_anchor))  # g^H p_anchor
    current = complex(np.vdot(g, p))
    return float(2.0 * (np.conj(anchor_gain) * current).real - abs(anchor_gain) ** 2)


# ---------------------------------------------------------------------------
# Assembly.


def assemble_from_state(
    config: SystemConfig,
    channels: ChannelSet,
    state: EqualizerState,
    expansion_point: PrecoderSet,
    energy_threshold: float | None = None,
    layout: VariableLayout | None = None,
    rate_weights: tuple[float, ...] | None = None,
    power_tolerance: float = 1e-7,
) -> ConvexSubproblem:
    """Build the convex precoder subproblem at a given anchor.

    The objective and shared-stream constraints expand the weighted MSEs as
    exact quadratics in the lifted precoders; the harvested-energy constraint
    is the first-order lower bound anchored at `expansion_point` (and is
    scaled by 1/E_th so its residual tolerance is relative).
    """
    if layout is None:
        layout = full_layout(config)
    if energy_threshold is None:
        energy_threshold = config.energy_threshold
    u = np.asarray(rate_weights if rate_weights is not None else config.rate_weights)

    anchor_power = total_transmit_power(expansion_point)
    budget = config.total_power
    if anchor_power > budget * (1.0 + power_tolerance) + 1e-15:
        raise ValueError(
            f"expansion point radiates {anchor_power:.6g} W, beyond the "
            f"{budget:.6g} W budget; the energy linearization would be anchored "
            "at an infeasible point"
        )

    n = layout.num_variables
    h_eff = effective_ir_channels(config, channels)
    q_mat = np.zeros((n, n))
    q_lin = np.zeros(n)
    q_const = 0.0

    private_slots = [("private", k) for k in layout.active_privates]
    w_p = state.private_weights
    w_c = state.common_weights
    g_p = state.private_equalizers
    g_c = state.common_equalizers

    # Objective: sum_k u_k (X_k + w_k eps_k(P) - log2 w_k), with
    # eps_k = |g_k|^2 T_k - 2 Re{g_k h_k^H p_k} + 1 and T_k the total private
    # received power plus unit noise.
    for k in range(config.num_irs):
        rows_re = _re_row(h_eff[k])
        rows_im = _im_row(h_eff[k])
        gain_mat = np.outer(rows_re, rows_re) + np.outer(rows_im, rows_im)
        coeff = u[k] * w_p[k] * abs(g_p[k]) ** 2
        for slot in private_slots:
            sl = layout.slot_slice(slot)
            q_mat[sl, sl] += coeff * gain_mat
        if k in layout.active_privates:
            sl = layout.slot_slice(("private", k))
            lin = g_p[k].real * rows_re - g_p[k].imag * rows_im
            q_lin[sl] += -2.0 * u[k] * w_p[k] * lin
        q_const += u[k] * (w_p[k] * (abs(g_p[k]) ** 2 + 1.0) - np.log2(w_p[k]))
        if k in layout.active_x:
            q_lin[layout.x_index(k)] += u[k]

    constraints: list = []

    # Shared-stream decodability: xi_{c,k}(P) - 1 - sum_i X_i <= 0.
    if layout.include_common:
        common_sl = layout.slot_slice(("common", None))
        for k in range(config.num_irs):
            rows_re = _re_row(h_eff[k])
            rows_im = _im_row(h_eff[k])
            gain_mat = np.outer(rows_re, rows_re) + np.outer(rows_im, rows_im)
            c_mat = np.zeros((n, n))
            c_lin = np.zeros(n)
            coeff = w_c[k] * abs(g_c[k]) ** 2
            c_mat[common_sl, common_sl] += coeff * gain_mat
            for slot in private_slots:
                sl = layout.slot_slice(slot)
                c_mat[sl, sl] += coeff * gain_mat
            lin = g_c[k].real * rows_re - g_c[k].imag * rows_im
            c_lin[common_sl] += -2.0 * w_c[k] * lin
            for i in layout.active_x:
                c_lin[layout.x_index(i)] -= 1.0
            c_const = w_c[k] * (abs(g_c[k]) ** 2 + 1.0) - np.log2(w_c[k]) - 1.0
            constraints.append(
                QuadraticLeqConstraint(
                    tag=f"common-rate:{k}", matrix=c_mat, linear=c_lin, constant=c_const
                )
            )

    # Linearized harvested energy, scaled by 1/E_th.
    if energy_threshold > 0.0 and config.num_ers > 0:
        coeffs = np.zeros(n)
        const = 0.0
        zeta = config.harvest_efficiency
        for j in range(config.num_ers):
            g = channels.er_channels[j]
            rows_re = _re_row(g)
            rows_im = _im_row(g)
            for slot in layout.slots():
                kind, idx = slot
                if kind == "common":
                    anchor = expansion_point.common
                elif kind == "private":
                    anchor = expansion_point.private[idx]
                else:
                    anchor = expansion_point.energy[idx]
                anchor_gain = complex(np.vdot(g, anchor))
                sl = layout.slot_slice(slot)
                coeffs[sl] += (
                    2.0 * zeta * (anchor_gain.real * rows_re + anchor_gain.imag * rows_im)
                )
                const -= zeta * abs(anchor_gain) ** 2
        constraints.append(
            LinearGeqConstraint(
                tag="energy",
                coeffs=coeffs / energy_threshold,
                bound=(energy_threshold - const) / energy_threshold,
            )
        )

    constraints.append(
        BallConstraint(
            tag="power",
            indices=np.arange(layout.num_precoder_vars),
            bound=config.total_power,
        )
    )
    if layout.active_x:
        constraints.append(
            SignConstraint(
                tag="x-nonpositive",
                indices=np.array([layout.x_index(k) for k in layout.active_x]),
            )
        )

    return ConvexSubproblem(
        num_variables=n,
        objective=QuadraticForm(matrix=q_mat, linear=q_lin, constant=q_const),
        constraints=tuple(constraints),
        layout=layout,
    )


# ---------------------------------------------------------------------------
# Solving: SOCP reformulation plus a pluggable backend seam.


def _psd_factor(matrix: np.ndarray, tag: str) -> np.ndarray:
    """Rows W with W'W = matrix; rejects indefinite matrices."""
    sym = 0.5 * (matrix + matrix.T)
    eigvals, eigvecs = np.linalg.eigh(sym)
    top = max(float(eigvals[-1]), 0.0)
    if eigvals[0] < -1e-8 * max(1.0, top):
        raise ValueError(f"matrix of {tag} is not positive semidefinite "
                         f"(min eigenvalue {eigvals[0]:.3e})")
    keep = eigvals > max(top * 1e-14, 1e-300)
    return (eigvecs[:, keep] * np.sqrt(eigvals[keep])).T


def _interior_point_backend(
    problem: ConvexSubproblem, tolerances: SolverTolerances
) -> SolverResult:
    n0 = problem.num_variables
    obj_factor = _psd_factor(problem.objective.matrix, "objective")
    quad_cons = [c for c in problem.constraints if isinstance(c, QuadraticLeqConstraint)]
    lin_cons = [c for c in problem.constraints if isinstance(c, LinearGeqConstraint)]
    ball_cons = [c for c in problem.constraints if isinstance(c, BallConstraint)]
    sign_cons = [c for c in problem.constraints if isinstance(c, SignConstraint)]
    quad_factors = [_psd_factor(c.matrix, c.tag) for c in quad_cons]

    if not problem.constraints:
        # Unconstrained convex quadratic: solve the normal equations directly.
        sol, *_ = np.linalg.lstsq(
            2.0 * problem.objective.matrix, -problem.objective.linear, rcond=None
        )
        return SolverResult(
            status="optimal",
            solution=sol,
            objective_value=problem.objective.value(sol),
            kkt_residuals=KktResiduals(primal=0.0, dual=0.0, gap=0.0),
            iterations=0,
        )

    has_epigraph = obj_factor.shape[0] > 0
    n = n0 + (1 if has_epigraph else 0)
    t_index = n0

    c_vec = np.zeros(n)
    c_vec[:n0] = problem.objective.linear
    if has_epigraph:
        c_vec[t_index] = 1.0

    g_rows: list[np.ndarray] = []
    h_vals: list[float] = []

    def add_row(coeffs_n0: np.ndarray | None, t_coeff: float, rhs: float) -> None:
        row = np.zeros(n)
        if coeffs_n0 is not None:
            row[:n0] = coeffs_n0
        if has_epigraph:
            row[t_index] += t_coeff
        g_rows.append(row)
        h_vals.append(rhs)

    # Nonnegative-orthant rows: linear and sign constraints (s = h - Gx >= 0).
    for con in lin_cons:
        add_row(-con.coeffs, 0.0, -con.bound)
    for con in sign_cons:
        for i in con.indices:
            coeffs = np.zeros(n0)
            coeffs[i] = 1.0
            add_row(coeffs, 0.0, 0.0)
    n_orthant = len(g_rows)

    soc_dims: list[int] = []
    if has_epigraph:
        # ||W z||^2 <= t  as  ||(2 W z, t - 1)|| <= t + 1.
        add_row(None, -1.0, 1.0)
        for row in obj_factor:
            add_row(-2.0 * row, 0.0, 0.0)
        add_row(None, -1.0, -1.0)
        soc_dims.append(obj_factor.shape[0] + 2)

    for con, factor in zip(quad_cons, quad_factors):
        # ||W z||^2 <= -r'z - s0  as  ||(2 W z, u - 1)|| <= u + 1.
        add_row(con.linear, 0.0, 1.0 - con.constant)
        for row in factor:
            add_row(-2.0 * row, 0.0, 0.0)
        add_row(con.linear, 0.0, -1.0 - con.constant)
        soc_dims.append(factor.shape[0] + 2)

    for con in ball_cons:
        add_row(None, 0.0, np.sqrt(con.bound))
        for i in con.indices:
            coeffs = np.zeros(n0)
            coeffs[i] = 1.0
            add_row(-coeffs, 0.0, 0.0)
        soc_dims.append(len(con.indices) + 1)

    G = np.vstack(g_rows)
    h = np.array(h_vals)
    dims = conic.ConeDims(nonneg=n_orthant, soc=tuple(soc_dims))
    sol = conic.solve_conelp(
        c_vec,
        G,
        h,
        dims,
        feastol=tolerances.feasibility,
        reltol=tolerances.relative_gap,
        abstol=tolerances.absolute_gap,
        max_iterations=tolerances.max_iterations,
    )

    residuals = KktResiduals(
        primal=sol.primal_residual, dual=sol.dual_residual, gap=sol.relative_gap
    )
    if sol.status == "optimal":
        z = sol.x[:n0]
        return SolverResult(
            status="optimal",
            solution=z,
            objective_value=problem.objective.value(z),
            kkt_residuals=residuals,
            iterations=sol.iterations,
        )
    if sol.status == "primal_infeasible":
        return SolverResult(
            status="infeasible",
            solution=None,
            objective_value=None,
            kkt_residuals=residuals,
            iterations=sol.iterations,
            diagnostic=sol.message,
        )
    if sol.status == "dual_infeasible":
        return SolverResult(
            status="numerical_failure",
            solution=None,
            objective_value=None,
            kkt_residuals=residuals,
            iterations=sol.iterations,
            diagnostic="problem is unbounded below: " + sol.message,
        )
    return SolverResult(
        status=sol.status,
        solution=sol.x[:n0] if sol.x is not None else None,
        objective_value=None,
        kkt_residuals=residuals,
        iterations=sol.iterations,
        diagnostic=sol.message,
    )


_BACKENDS: dict[str, Callable[[ConvexSubproblem, SolverTolerances], SolverResult]] = {
    "interior_point": _interior_point_backend,
}


def register_backend(
    name: str, fn: Callable[[ConvexSubproblem, SolverTolerances], SolverResult]
) -> None:
    """Install an alternative solve backend (used for oracle cross-validation)."""
    _BACKENDS[name] = fn


def solve(
    problem: ConvexSubproblem,
    tolerances: SolverTolerances | None = None,
    backend: str = "interior_point",
) -> SolverResult:
    """Solve a ConvexSubproblem; status 'optimal' guarantees the KKT residuals
    are below the configured tolerances."""
    if tolerances is None:
        tolerances = SolverTolerances()
    return _BACKENDS[backend](problem, tolerances)


def dump_problem(problem: ConvexSubproblem, path) -> None:
    """Plain-text dump of the assembled problem for external cross-checking.

    Format: one section per block.  `objective` lists the matrix (dense rows),
    then the linear vector, then the constant.  Each constraint section starts
    with its type tag on a line of its own and uses the same layout.
    """
    lines: list[str] = []

    def emit_matrix(m: np.ndarray) -> None:
        for row in np.atleast_2d(m):
            lines.append(" ".join(f"{v:.17g}" for v in row))

    lines.append(f"variables {problem.num_variables}")
    lines.append("objective")
    emit_matrix(problem.objective.matrix)
    lines.append("linear")
    emit_matrix(problem.objective.linear)
    lines.append(f"constant {problem.objective.constant:.17g}")
    for con in problem.constraints:
        if isinstance(con, QuadraticLeqConstraint):
            lines.append(f"quadratic-leq {con.tag}")
            emit_matrix(con.matrix)
            lines.append("linear")
            emit_matrix(con.linear)
            lines.append(f"constant {con.constant:.17g}")
        elif isinstance(con, LinearGeqConstraint):
            lines.append(f"linear-geq {con.tag}")
            emit_matrix(con.coeffs)
            lines.append(f"bound {con.bound:.17g}")
        elif isinstance(con, BallConstraint):
            lines.append(f"ball {con.tag}")
            lines.append(" ".join(str(i) for i in con.indices))
            lines.append(f"bound {con.bound:.17g}")
        elif isinstance(con, SignConstraint):
            lines.append(f"sign {con.tag}")
            lines.append(" ".join(str(i) for i in con.indices))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
