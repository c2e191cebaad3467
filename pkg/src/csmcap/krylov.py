"""Matrix-free Krylov solvers.

``gmres`` is full (never restarted) GMRES with modified Gram-Schmidt,
selective reorthogonalization and Givens rotations.  Left preconditioning
is supported; the convergence test uses the preconditioned relative
residual and the true residual is evaluated once at the end.  ``minres``
is the Paige-Saunders three-term method for symmetric operators.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigurationError, ParameterError
from .precond import BlockPreconditioner

REORTH_TRIGGER = 1e-8

Operator = Callable[[np.ndarray], np.ndarray]


class Method(str, enum.Enum):
    GMRES = "gmres"
    MINRES = "minres"


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-12
    maxit: int = 400
    method: Method = Method.GMRES
    preconditioner: BlockPreconditioner | None = None

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not self.tol > 0:
            raise ConfigurationError("tol must be positive")
        if int(self.maxit) < 1:
            raise ConfigurationError("maxit must be at least 1")


@dataclass
class KrylovResult:
    solution: np.ndarray
    iterations: int
    relative_residual_history: list[float]
    converged: bool
    wall_time: float
    true_relative_residual: float = float("nan")
    reorthogonalizations: int = 0
    matvecs: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def relative_residual(self) -> float:
        h = self.relative_residual_history
        return h[-1] if h else float("nan")


def _check_rhs(rhs) -> np.ndarray:
    b = np.asarray(rhs, dtype=np.float64).ravel()
    if not np.any(b):
        raise ParameterError("right-hand side must be nonzero")
    return b


def _givens(a: float, b: float) -> tuple[float, float]:
    if b == 0.0:
        return 1.0, 0.0
    r = np.hypot(a, b)
    return a / r, b / r


def gmres(apply: Operator, rhs, cfg: SolverConfig | None = None) -> KrylovResult:
    """Solve ``M A y = M b`` from ``y0 = 0`` where ``M`` is the inverse preconditioner."""
    cfg = cfg or SolverConfig()
    t0 = time.perf_counter()
    b = _check_rhs(rhs)
    n = b.size
    pre = cfg.preconditioner
    precond = (lambda v: v) if pre is None else pre.apply_inverse

    r0 = precond(b)
    beta = float(np.linalg.norm(r0))
    maxit = min(int(cfg.maxit), n)
    V = np.zeros((maxit + 1, n))  # basis vectors stored as rows
    H = np.zeros((maxit + 1, maxit))
    cs = np.zeros(maxit)
    sn = np.zeros(maxit)
    g = np.zeros(maxit + 1)
    g[0] = beta
    V[0] = r0 / beta
    history: list[float] = []
    reorth = 0
    converged = False
    it = 0
    for j in range(maxit):
        w = np.array(precond(apply(V[j])), dtype=np.float64)  # never alias V
        wnorm0 = np.linalg.norm(w)
        for i in range(j + 1):
            h = V[i] @ w
            H[i, j] = h
            w -= h * V[i]
        hnext = np.linalg.norm(w)
        if hnext > 0.0 and np.abs(V[: j + 1] @ w).max() > REORTH_TRIGGER * hnext:
            c = V[: j + 1] @ w
            w -= c @ V[: j + 1]
            H[: j + 1, j] += c
            hnext = np.linalg.norm(w)
            reorth += 1
        H[j + 1, j] = hnext
        for i in range(j):
            a, bb = H[i, j], H[i + 1, j]
            H[i, j] = cs[i] * a + sn[i] * bb
            H[i + 1, j] = -sn[i] * a + cs[i] * bb
        cs[j], sn[j] = _givens(H[j, j], H[j + 1, j])
        H[j, j] = cs[j] * H[j, j] + sn[j] * H[j + 1, j]
        H[j + 1, j] = 0.0
        g[j + 1] = -sn[j] * g[j]
        g[j] = cs[j] * g[j]
        it = j + 1
        rel = abs(g[j + 1]) / beta
        history.append(float(rel))
        breakdown = hnext <= 1e-14 * max(wnorm0, 1.0)
        if rel <= cfg.tol or breakdown:
            converged = True
            break
        V[j + 1] = w / hnext

    coef = np.linalg.solve(np.triu(H[:it, :it]), g[:it]) if it else np.zeros(0)
    y = coef @ V[:it]
    true_rel = float(np.linalg.norm(b - apply(y)) / np.linalg.norm(b))
    return KrylovResult(
        y, it, history, converged, time.perf_counter() - t0, true_rel, reorth, it + 1,
    )


def minres(apply: Operator, rhs, cfg: SolverConfig | None = None) -> KrylovResult:
    """Paige-Saunders MINRES for a symmetric operator, unpreconditioned."""
    cfg = cfg or SolverConfig(method=Method.MINRES)
    if cfg.preconditioner is not None:
        raise ConfigurationError("minres is provided without preconditioning")
    t0 = time.perf_counter()
    b = _check_rhs(rhs)
    n = b.size
    x = np.zeros(n)
    beta1 = float(np.linalg.norm(b))
    v_prev = np.zeros(n)
    v = b / beta1
    beta = 0.0
    cs, sn = -1.0, 0.0
    dbar = epsln = 0.0
    phibar = beta1
    w1 = np.zeros(n)
    w2 = np.zeros(n)
    history: list[float] = []
    converged = False
    it = 0
    for it in range(1, int(cfg.maxit) + 1):
        p = apply(v)
        alpha = float(v @ p)
        u = p - alpha * v - beta * v_prev
        beta_next = float(np.linalg.norm(u))
        oldeps = epsln
        delta = cs * dbar + sn * alpha
        gbar = sn * dbar - cs * alpha
        epsln = sn * beta_next
        dbar = -cs * beta_next
        gamma = max(float(np.hypot(gbar, beta_next)), 1e-300)
        cs, sn = gbar / gamma, beta_next / gamma
        phi = cs * phibar
        phibar = sn * phibar
        w = (v - oldeps * w1 - delta * w2) / gamma
        w1, w2 = w2, w
        x += phi * w
        rel = abs(phibar) / beta1
        history.append(float(rel))
        if rel <= cfg.tol or beta_next <= 1e-14 * beta1:
            converged = True
            break
        v_prev, v = v, u / beta_next
        beta = beta_next
    true_rel = float(np.linalg.norm(b - apply(x)) / beta1)
    return KrylovResult(x, it, history, converged, time.perf_counter() - t0, true_rel, 0, it + 1)
