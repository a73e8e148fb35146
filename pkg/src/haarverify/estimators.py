"""Thin scikit-learn-style estimator wrappers around the functional API.

These offer get_params/set_params, fit, and predict so the solver and
verifier compose with sklearn tooling (grid search over J or omega,
pipelines in notebooks).  All numerical work lives in the functional
modules; the estimators only hold configuration and fitted state.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from . import opmat, problems, verifier
from .problems import ForcedLogistic, Logistic, Lorenz, ProblemSpec


def _make_spec(problem: str, **params) -> ProblemSpec:
    if problem == "logistic":
        return Logistic(lam=params["lam"], u0=params["u0"])
    if problem == "forced_logistic":
        return ForcedLogistic(lam=params["lam"], u0=params["u0"])
    if problem == "lorenz":
        return Lorenz(
            sigma=params["sigma"],
            rho=params["rho"],
            beta=params["beta"],
            x0=params.get("x0", 9.0),
            y0=params.get("y0", 9.0),
            z0=params.get("z0", 27.0),
        )
    raise ValueError(f"unknown problem {problem!r}")


class HaarCollocationSolver(BaseEstimator):
    """Solve an initial-value ODE by Haar-wavelet collocation.

    Parameters mirror the CLI: the problem name selects the catalog entry,
    J sets the resolution (M = 2**(J+1) collocation points), and the
    remaining keys are problem parameters.  After ``fit()`` the converged
    coefficients are in ``coeffs_`` and ``predict(t)`` samples the
    reconstructed solution.
    """

    def __init__(
        self,
        problem: str = "logistic",
        J: int = 6,
        lam: float = 6.0,
        u0: float = 0.2,
        sigma: float = 10.0,
        rho: float = 28.0,
        beta: float = 8.0 / 3.0,
        x0: float = 9.0,
        y0: float = 9.0,
        z0: float = 27.0,
        tol: float = 1e-12,
        max_iter: int = 50,
        use_cache: bool = True,
    ):
        self.problem = problem
        self.J = J
        self.lam = lam
        self.u0 = u0
        self.sigma = sigma
        self.rho = rho
        self.beta = beta
        self.x0 = x0
        self.y0 = y0
        self.z0 = z0
        self.tol = tol
        self.max_iter = max_iter
        self.use_cache = use_cache

    def _spec(self) -> ProblemSpec:
        params = self.get_params()
        return _make_spec(params.pop("problem"), **params)

    def fit(self, X=None, y=None):
        spec = self._spec()
        ops = opmat.get_opmats(self.J, use_cache=self.use_cache)
        initial = problems.default_initial_guess(spec, ops)
        result = problems.newton_solve(
            spec, ops, initial=initial, tol=self.tol, max_iter=self.max_iter
        )
        self.spec_ = spec
        self.ops_ = ops
        self.result_ = result
        self.coeffs_ = result.cbar
        self.residual_ = result.residual_norm
        self.n_iter_ = result.iterations
        return self

    def predict(self, t) -> np.ndarray:
        if not hasattr(self, "result_"):
            raise RuntimeError("call fit() before predict()")
        return problems.reconstruct_solution(
            self.spec_, self.ops_, self.coeffs_, np.asarray(t, dtype=np.float64)
        )


class RadiiPolynomialVerifier(BaseEstimator):
    """Prove existence of a true solution near a fitted solver's output.

    ``fit(solver)`` runs the interval-arithmetic verification; afterwards
    ``certificate_`` holds the result and ``r0_`` the proven L2 radius (or
    None on failure).  With omega=None the weight is grid-optimized.
    """

    def __init__(self, omega: float | None = None, gram_iterations: int = 2):
        self.omega = omega
        self.gram_iterations = gram_iterations

    def fit(self, solver: HaarCollocationSolver, y=None):
        if not hasattr(solver, "result_"):
            raise ValueError("solver must be fitted first")
        cert = verifier.verify(
            solver.spec_,
            solver.ops_,
            solver.coeffs_,
            omega=self.omega,
            solver_residual=solver.residual_,
            gram_iterations=self.gram_iterations,
        )
        self.certificate_ = cert
        self.r0_ = cert.r0
        self.verified_ = cert.verified
        return self

    def predict(self, X=None):
        if not hasattr(self, "certificate_"):
            raise RuntimeError("call fit() before predict()")
        return self.verified_
