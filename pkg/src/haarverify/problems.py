"""Problem catalog and floating-point collocation solver.

Each problem represents an initial-value ODE on [0, 1] whose right-hand
side is at most quadratic.  The unknown is the coefficient vector c of the
solution's derivative in the truncated Haar basis; the solution itself is
u(t) = u0 + sum_i c_i w_i(t) with w_i the wavelet antiderivatives.  The
residual map F and its Jacobian are assembled on the collocation grid
t_q = (q - 1/2) / M, and Newton iteration drives the residual to the
rounding floor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .haar import integral_values_float
from .opmat import OpMatrixSet


class NoConvergence(RuntimeError):
    def __init__(self, iterations: int, residual: float):
        super().__init__(
            f"Newton did not converge in {iterations} iterations "
            f"(last residual {residual:.3e})"
        )
        self.iterations = iterations
        self.residual = residual


class SingularJacobian(RuntimeError):
    pass


@dataclass(frozen=True)
class Logistic:
    """u' = lam * u * (1 - u), u(0) = u0."""

    lam: float
    u0: float


@dataclass(frozen=True)
class ForcedLogistic:
    """u' = lam * u * (1 - u) + g(t), g = 1 on [0, 1/2), 0 on [1/2, 1]."""

    lam: float
    u0: float


@dataclass(frozen=True)
class Lorenz:
    """x' = sigma (y - x), y' = x (rho - z) - y, z' = x y - beta z."""

    sigma: float
    rho: float
    beta: float
    # default start near the positive equilibrium: the unit-interval orbit
    # stays moderate there, which keeps the tail defect small enough for
    # the contraction argument to close at reachable resolutions
    x0: float = 9.0
    y0: float = 9.0
    z0: float = 27.0

    def __post_init__(self):
        if min(self.sigma, self.rho, self.beta) <= 0:
            raise ValueError("system parameters must be positive")


ProblemSpec = Logistic | ForcedLogistic | Lorenz


@dataclass(frozen=True)
class SolveResult:
    cbar: np.ndarray  # length M, or 3M stacked (x, y, z) for Lorenz
    A_M: np.ndarray  # approximate inverse Jacobian at cbar
    residual_norm: float
    iterations: int


def n_unknowns(spec: ProblemSpec, ops: OpMatrixSet) -> int:
    return 3 * ops.M if isinstance(spec, Lorenz) else ops.M


def _mats(ops: OpMatrixSet):
    H = ops.H.mid()
    PT = ops.P.mid().T
    return H, PT, H.T @ PT


def _check_dim(spec: ProblemSpec, ops: OpMatrixSet, c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=np.float64)
    n = n_unknowns(spec, ops)
    if c.shape != (n,):
        raise ValueError(f"coefficient vector has shape {c.shape}, expected ({n},)")
    return c


def forcing_coeffs(ops: OpMatrixSet) -> np.ndarray:
    """Haar coefficients of the step forcing: (1/M) H_M g_M with g sampled
    on the collocation grid (exactly (1/2, 1/2, 0, ...))."""
    H, _, _ = _mats(ops)
    M = ops.M
    t = (np.arange(1, M + 1) - 0.5) / M
    g = (t < 0.5).astype(np.float64)
    return (H @ g) / M


def assemble_F(spec: ProblemSpec, ops: OpMatrixSet, c: np.ndarray) -> np.ndarray:
    c = _check_dim(spec, ops, c)
    H, PT, V = _mats(ops)
    M = ops.M
    e1 = np.zeros(M)
    e1[0] = 1.0

    def quad(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return H @ ((V @ a) * (V @ b)) / M

    if isinstance(spec, (Logistic, ForcedLogistic)):
        lam, u0 = spec.lam, spec.u0
        F = (
            c
            + lam * (2 * u0 - 1) * (PT @ c)
            + lam * (u0 * u0 - u0) * e1
            + lam * quad(c, c)
        )
        if isinstance(spec, ForcedLogistic):
            F = F - forcing_coeffs(ops)
        return F

    s, r, b = spec.sigma, spec.rho, spec.beta
    x0, y0, z0 = spec.x0, spec.y0, spec.z0
    cx, cy, cz = c[:M], c[M : 2 * M], c[2 * M :]
    Fx = cx + s * (PT @ cx) - s * (PT @ cy) - s * (y0 - x0) * e1
    Fy = (
        cy
        + quad(cx, cz)
        + x0 * (PT @ cz)
        - (r - z0) * (PT @ cx)
        + (PT @ cy)
        - (x0 * (r - z0) - y0) * e1
    )
    Fz = (
        cz
        - quad(cx, cy)
        - y0 * (PT @ cx)
        - x0 * (PT @ cy)
        + b * (PT @ cz)
        - (x0 * y0 - b * z0) * e1
    )
    return np.concatenate([Fx, Fy, Fz])


def assemble_DF(spec: ProblemSpec, ops: OpMatrixSet, c: np.ndarray) -> np.ndarray:
    c = _check_dim(spec, ops, c)
    H, PT, V = _mats(ops)
    M = ops.M
    I = np.eye(M)

    def quad_jac(a: np.ndarray) -> np.ndarray:
        # derivative of quad(a, .) = (1/M) H diag(V a) V
        return H @ ((V @ a)[:, None] * V) / M

    if isinstance(spec, (Logistic, ForcedLogistic)):
        lam, u0 = spec.lam, spec.u0
        return I + lam * (2 * u0 - 1) * PT + 2 * lam * quad_jac(c)

    s, r, b = spec.sigma, spec.rho, spec.beta
    x0, y0, z0 = spec.x0, spec.y0, spec.z0
    cx, cy, cz = c[:M], c[M : 2 * M], c[2 * M :]
    Z = np.zeros((M, M))
    row_x = [I + s * PT, -s * PT, Z]
    row_y = [quad_jac(cz) - (r - z0) * PT, I + PT, quad_jac(cx) + x0 * PT]
    row_z = [-quad_jac(cy) - y0 * PT, -quad_jac(cx) - x0 * PT, I + b * PT]
    return np.block([row_x, row_y, row_z])


def newton_solve(
    spec: ProblemSpec,
    ops: OpMatrixSet,
    initial: np.ndarray | None = None,
    tol: float = 1e-12,
    max_iter: int = 50,
) -> SolveResult:
    n = n_unknowns(spec, ops)
    c = np.zeros(n) if initial is None else _check_dim(spec, ops, initial).copy()
    res = np.inf
    for it in range(1, max_iter + 1):
        F = assemble_F(spec, ops, c)
        res = float(np.linalg.norm(F))
        if res <= tol:
            DF = assemble_DF(spec, ops, c)
            try:
                A = np.linalg.inv(DF)
            except np.linalg.LinAlgError as exc:
                raise SingularJacobian(str(exc)) from exc
            return SolveResult(cbar=c, A_M=A, residual_norm=res, iterations=it - 1)
        DF = assemble_DF(spec, ops, c)
        try:
            step = np.linalg.solve(DF, F)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(str(exc)) from exc
        c = c - step
    raise NoConvergence(max_iter, res)


def default_initial_guess(spec: ProblemSpec, ops: OpMatrixSet) -> np.ndarray:
    """Initial Newton guess from a standard adaptive ODE integration.

    The derivative of the integrated trajectory is sampled on the
    collocation grid and Haar-transformed; this lands well inside Newton's
    basin even for the chaotic system, where a zero guess diverges.
    """
    from scipy.integrate import solve_ivp

    H, _, _ = _mats(ops)
    M = ops.M
    t = (np.arange(1, M + 1) - 0.5) / M
    if isinstance(spec, (Logistic, ForcedLogistic)):
        lam, u0 = spec.lam, spec.u0

        def rhs(tt, u):
            out = lam * u * (1 - u)
            if isinstance(spec, ForcedLogistic):
                out = out + (tt < 0.5)
            return out

        sol = solve_ivp(rhs, (0.0, 1.0), [u0], t_eval=t, rtol=1e-10, atol=1e-12)
        du = rhs(t, sol.y[0])
        return (H @ du) / M

    s, r, b = spec.sigma, spec.rho, spec.beta

    def rhs3(_, v):
        x, y, z = v
        return [s * (y - x), x * (r - z) - y, x * y - b * z]

    sol = solve_ivp(
        rhs3, (0.0, 1.0), [spec.x0, spec.y0, spec.z0],
        t_eval=t, rtol=1e-10, atol=1e-12,
    )
    dv = np.array(rhs3(None, sol.y))
    return np.concatenate([(H @ dv[k]) / M for k in range(3)])


def warm_start(coarse: np.ndarray, blocks: int = 1) -> np.ndarray:
    """Zero-pad a coefficient vector from level J to level J+1 (per block)."""
    coarse = np.asarray(coarse, dtype=np.float64)
    m = coarse.shape[0] // blocks
    out = []
    for b in range(blocks):
        out.append(coarse[b * m : (b + 1) * m])
        out.append(np.zeros(m))
    return np.concatenate(out)


def reconstruct_solution(
    spec: ProblemSpec, ops: OpMatrixSet, cbar: np.ndarray, t: np.ndarray
) -> np.ndarray:
    """Sample the reconstructed solution u(t) = u0 + sum_i c_i w_i(t).

    Returns shape (len(t),) for scalar problems and (3, len(t)) for Lorenz.
    """
    cbar = _check_dim(spec, ops, cbar)
    W = integral_values_float(ops.J, np.asarray(t, dtype=np.float64))
    M = ops.M
    if isinstance(spec, Lorenz):
        ics = np.array([spec.x0, spec.y0, spec.z0])
        return ics[:, None] + cbar.reshape(3, M) @ W
    return spec.u0 + cbar @ W
