"""Primal-dual path-following interior-point method for small dense block SDPs.

Solves the standard pair

    (P)  min <C, X>   s.t. <A_i, X> = b_i,  X >= 0
    (D)  max b^T y    s.t. Z = C - sum_i y_i A_i >= 0

where every matrix is block diagonal with real symmetric blocks (1x1 blocks
are ordinary LP inequalities). Uses the HKM search direction with a
Mehrotra predictor-corrector and an infeasible starting point.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla


class SdpConvergenceError(RuntimeError):
    def __init__(self, message: str, gap: float, iterations: int, result=None):
        super().__init__(message)
        self.gap = gap
        self.iterations = iterations
        self.result = result


@dataclass
class BlockSdp:
    """Problem data; A[k] has shape (m, n_k, n_k), C[k] shape (n_k, n_k)."""

    C: list
    A: list
    b: np.ndarray

    @property
    def m(self) -> int:
        return self.b.size

    @property
    def block_sizes(self) -> list:
        return [c.shape[0] for c in self.C]


@dataclass
class IpmOptions:
    tol: float = 1e-7
    max_iter: int = 200
    step_frac: float = 0.98
    verbose: bool = False


@dataclass
class IpmResult:
    X: list
    y: np.ndarray
    Z: list
    primal_obj: float
    dual_obj: float
    rel_gap: float
    primal_infeas: float
    dual_infeas: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list, repr=False)


def _inner(U: list, V: list) -> float:
    return float(sum(np.vdot(u, v) for u, v in zip(U, V)))


def _op_A(p: BlockSdp, X: list) -> np.ndarray:
    out = np.zeros(p.m)
    for Ak, Xk in zip(p.A, X):
        out += Ak.reshape(p.m, -1) @ Xk.reshape(-1)
    return out


def _op_At(p: BlockSdp, y: np.ndarray) -> list:
    return [np.tensordot(y, Ak, axes=1) for Ak in p.A]


def _sym(M):
    return 0.5 * (M + M.T)


def _max_step(X: list, dX: list) -> float:
    """Largest alpha with X + alpha dX PSD (inf if unbounded)."""
    alpha = np.inf
    for Xk, dXk in zip(X, dX):
        if Xk.shape[0] == 1:
            if dXk[0, 0] < 0:
                alpha = min(alpha, -Xk[0, 0] / dXk[0, 0])
            continue
        Lc = np.linalg.cholesky(Xk)
        T = sla.solve_triangular(Lc, dXk, lower=True)
        T = sla.solve_triangular(Lc, T.T, lower=True)
        lam = np.linalg.eigvalsh(_sym(T))[0]
        if lam < 0:
            alpha = min(alpha, -1.0 / lam)
    return alpha


def _schur(p: BlockSdp, X: list, Zinv: list) -> np.ndarray:
    m = p.m
    M = np.zeros((m, m))
    for Ak, Xk, Zik in zip(p.A, X, Zinv):
        G = Xk @ Ak @ Zik  # (m, n, n): X A_j Z^-1
        M += Ak.reshape(m, -1) @ G.transpose(0, 2, 1).reshape(m, -1).T
    return _sym(M)


def _solve_spd(M: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        return sla.cho_solve(sla.cho_factor(M), rhs)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(M, rhs, rcond=None)[0]


def solve(p: BlockSdp, opts: IpmOptions | None = None) -> IpmResult:
    opts = opts or IpmOptions()
    m = p.m
    n_total = sum(p.block_sizes)
    normA = max(np.linalg.norm(Ak.reshape(m, -1), axis=1).max() for Ak in p.A)
    normC = np.sqrt(sum(np.sum(c * c) for c in p.C))
    normb = np.linalg.norm(p.b)

    # Starting point scaled to the data.
    row_norms = np.sqrt(sum(np.sum(Ak.reshape(m, -1) ** 2, axis=1) for Ak in p.A))
    xi = max(10.0, np.sqrt(n_total), n_total * np.max((1 + np.abs(p.b)) / (1 + row_norms)))
    eta = max(10.0, np.sqrt(n_total), normA, normC)
    X = [xi * np.eye(n) for n in p.block_sizes]
    Z = [eta * np.eye(n) for n in p.block_sizes]
    y = np.zeros(m)

    history = []
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        AtY = _op_At(p, y)
        Rd = [c - z - aty for c, z, aty in zip(p.C, Z, AtY)]
        rp = p.b - _op_A(p, X)
        pobj = _inner(p.C, X)
        dobj = float(p.b @ y)
        mu = _inner(X, Z) / n_total
        rel_gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        pinf = np.linalg.norm(rp) / (1.0 + normb)
        dinf = np.sqrt(sum(np.sum(r * r) for r in Rd)) / (1.0 + normC)
        history.append((pobj, dobj, rel_gap, pinf, dinf, mu))
        if opts.verbose:
            print(f"{it:3d} pobj={pobj:+.9e} dobj={dobj:+.9e} gap={rel_gap:.2e} "
                  f"pinf={pinf:.2e} dinf={dinf:.2e}")
        if rel_gap <= opts.tol and pinf <= opts.tol and dinf <= opts.tol:
            converged = True
            break

        try:
            X, y, Z = _step(p, X, y, Z, Rd, mu, n_total, opts)
        except np.linalg.LinAlgError:
            # an iterate lost definiteness to rounding; report the last one as not converged
            break

    return IpmResult(
        X=X, y=y, Z=Z, primal_obj=pobj, dual_obj=dobj, rel_gap=rel_gap,
        primal_infeas=pinf, dual_infeas=dinf, iterations=it, converged=converged,
        history=history,
    )


def _step(p: BlockSdp, X: list, y: np.ndarray, Z: list, Rd: list, mu: float, n_total: int,
          opts: IpmOptions):
    """One Mehrotra predictor-corrector step along the HKM direction."""
    m = p.m
    Zinv = [np.linalg.inv(z) for z in Z]
    Zinv = [_sym(z) for z in Zinv]
    M = _schur(p, X, Zinv)
    base = p.b + np.array(
        [sum(np.vdot(Ak[i], Xk @ Rk @ Zik) for Ak, Xk, Rk, Zik in zip(p.A, X, Rd, Zinv))
         for i in range(m)]
    )
    AZinv = np.array([sum(np.vdot(Ak[i], Zik) for Ak, Zik in zip(p.A, Zinv)) for i in range(m)])

    def direction(sigma_mu, corr):
        rhs = base - sigma_mu * AZinv
        if corr is not None:
            rhs = rhs + np.array(
                [sum(np.vdot(Ak[i], Ck) for Ak, Ck in zip(p.A, corr)) for i in range(m)]
            )
        dy = _solve_spd(M, rhs)
        dZ = [r - a for r, a in zip(Rd, _op_At(p, dy))]
        dX = []
        for k, (Xk, Zik) in enumerate(zip(X, Zinv)):
            K = Xk @ dZ[k] @ Zik
            if corr is not None:
                K = K + corr[k]
            dX.append(sigma_mu * Zik - Xk - _sym(K))
        return dX, dy, dZ

    # Predictor (affine scaling).
    dXa, dya, dZa = direction(0.0, None)
    ap = min(1.0, opts.step_frac * _max_step(X, dXa))
    ad = min(1.0, opts.step_frac * _max_step(Z, dZa))
    mu_aff = _inner([x + ap * dx for x, dx in zip(X, dXa)],
                    [z + ad * dz for z, dz in zip(Z, dZa)]) / n_total
    sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3
    # Corrector with second-order term dX_a dZ_a Z^-1.
    corr = [dx @ dz @ zi for dx, dz, zi in zip(dXa, dZa, Zinv)]
    dX, dy, dZ = direction(sigma * mu, corr)
    ap = min(1.0, opts.step_frac * _max_step(X, dX))
    ad = min(1.0, opts.step_frac * _max_step(Z, dZ))

    X = [_sym(x + ap * dx) for x, dx in zip(X, dX)]
    y = y + ad * dy
    Z = [_sym(z + ad * dz) for z, dz in zip(Z, dZ)]
    return X, y, Z
