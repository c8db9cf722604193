"""Semidefinite relaxation of the interference-aware design.

Lifts w to W = w w^H, replaces the fractional MI objective by an auxiliary
variable t bounded through a 2x2 Schur-complement LMI, drops rank(W) = 1 and
solves the resulting SDP with the embedded interior-point method. A feasible
beamformer is recovered from W* by eigen-extraction or Gaussian randomization.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ipm, numerics
from .metrics import mi_with_interference
from .scenario import Beamformer, ScenarioConfig, interferer_model, make_rng, target_model
from .solver_closed_form import InfeasibleError, feasibility


class ExtractionError(RuntimeError):
    pass


@dataclass
class SdrOptions:
    tol: float = 1e-7
    max_iter: int = 200
    n_rand: int = 1000
    rank_one_tol: float = 1e-6
    step_frac: float = 0.98
    seed: int = 0
    polish: bool = True
    # re-solve to this gap when W is not rank-one at tol; a stopped-early
    # interior point leaves a small spurious second eigenvalue
    refine_tol: float = 1e-9


@dataclass(frozen=True)
class SdpProblem:
    """Problem data in physical units (watts, linear scale).

    The LMI reads [[Tr(lmi_11 W) + sigma_z^2 - t, Tr(lmi_12 W)],
                   [Tr(lmi_21 W), Tr(lmi_22 W) + sigma_z^2]] >= 0.
    """

    dim: int
    lmi_11: np.ndarray
    lmi_12: np.ndarray
    lmi_21: np.ndarray
    lmi_22: np.ndarray
    sigma_z_sq: float
    power_cap: float
    rate_matrix: np.ndarray
    rate_floor: float

    def lmi(self, W: np.ndarray, t: float) -> np.ndarray:
        s2 = self.sigma_z_sq
        return np.array([
            [np.trace(self.lmi_11 @ W) + s2 - t, np.trace(self.lmi_12 @ W)],
            [np.trace(self.lmi_21 @ W), np.trace(self.lmi_22 @ W) + s2],
        ])

    def t_upper(self) -> float:
        """Upper bound on t over the feasible set, used for scaling."""
        lam = numerics.herm_eig(self.lmi_11).eigenvalues[0]
        return self.sigma_z_sq + self.power_cap * max(lam, 0.0)


@dataclass
class SdpSolution:
    W: np.ndarray
    t_star: float
    duality_gap: float
    iterations: int
    eig_ratio: float
    converged: bool
    primal_infeas: float = 0.0
    dual_infeas: float = 0.0
    upper_bound: float = float("nan")  # dual certificate on t
    eig_ratio_center: float = float("nan")  # ratio of the interior-point iterate
    purified: bool = False


def build_sdp(h, cfg: ScenarioConfig) -> SdpProblem:
    h = np.asarray(h, dtype=complex)
    feas = feasibility(h, cfg)
    if not feas.feasible:
        raise InfeasibleError(f"rate demand infeasible (t = {feas.t:.4g} > 1)", feas.t)
    P = target_model(cfg).matrix
    Q = interferer_model(cfg).matrix
    L, beta, gamma = cfg.frame_len, cfg.beta, cfg.gamma
    return SdpProblem(
        dim=cfg.n_tx,
        lmi_11=L * beta**2 * P @ P.conj().T,
        lmi_12=L * gamma * beta * Q @ P.conj().T,
        lmi_21=L * beta * gamma * P @ Q.conj().T,
        lmi_22=L * gamma**2 * Q @ Q.conj().T,
        sigma_z_sq=cfg.sigma_z_sq,
        power_cap=cfg.p0,
        rate_matrix=np.outer(h, h.conj()),
        rate_floor=cfg.omega,
    )


def hermitian_basis(n: int) -> np.ndarray:
    """Real basis E_k of n x n Hermitian matrices: diagonals, then Re and Im off-diagonals."""
    basis = []
    for j in range(n):
        e = np.zeros((n, n), complex)
        e[j, j] = 1
        basis.append(e)
    for j in range(n):
        for k in range(j + 1, n):
            e = np.zeros((n, n), complex)
            e[j, k] = e[k, j] = 1
            basis.append(e)
            e = np.zeros((n, n), complex)
            e[j, k], e[k, j] = 1j, -1j
            basis.append(e)
    return np.array(basis)


def _tr(K: np.ndarray, E: np.ndarray) -> np.ndarray:
    """Tr(K E_k) for every basis element."""
    return np.einsum("ij,kji->k", K, E)


def _embed_2x2(a11, a12, a22) -> np.ndarray:
    """Vectorized real embedding of [[a11, a12], [conj a12, a22]] with a11, a22 real."""
    m = np.shape(a11)[0]
    out = np.zeros((m, 4, 4))
    re, im = np.real(a12), np.imag(a12)
    out[:, 0, 0] = out[:, 2, 2] = a11
    out[:, 1, 1] = out[:, 3, 3] = a22
    out[:, 0, 1] = out[:, 1, 0] = out[:, 2, 3] = out[:, 3, 2] = re
    # [[Re, -Im], [Im, Re]] with Im H = [[0, im], [-im, 0]]
    out[:, 2, 1] = out[:, 1, 2] = im
    out[:, 3, 0] = out[:, 0, 3] = -im
    return out


def _to_block_sdp(p: SdpProblem):
    """Scaled real block SDP; variables are the basis coordinates of W / P0 and t / t_ref."""
    n = p.dim
    E = hermitian_basis(n)
    m_w = E.shape[0]
    m = m_w + 1
    p0, s2 = p.power_cap, p.sigma_z_sq
    t_ref = p.t_upper()

    a11 = p0 * _tr(p.lmi_11, E).real / t_ref
    a12 = p0 * _tr(p.lmi_12, E) / t_ref
    a22 = p0 * _tr(p.lmi_22, E).real / t_ref
    c22 = s2 / t_ref
    # Row/column scaling of the LMI (a congruence, so PSD-ness is unchanged)
    # keeps the interferer diagonal entry at most O(1).
    d2 = 1.0 / max(1.0, c22 + max(numerics.herm_eig(p.lmi_22).eigenvalues[0], 0.0) * p0 / t_ref)
    d = np.sqrt(d2)

    C, A = [], []
    # W >= 0 via the real embedding
    A.append(np.concatenate([-np.array([numerics.real_embed(e) for e in E]),
                             np.zeros((1, 2 * n, 2 * n))]))
    C.append(np.zeros((2 * n, 2 * n)))
    # 2x2 LMI
    lmi_w = -_embed_2x2(a11, d * a12, d2 * a22)
    lmi_t = _embed_2x2(np.ones(1), np.zeros(1), np.zeros(1))
    A.append(np.concatenate([lmi_w, lmi_t]))
    C.append(_embed_2x2(np.array([s2 / t_ref]), np.zeros(1), np.array([d2 * c22]))[0])
    # Tr(W) <= P0
    A.append(np.concatenate([np.trace(E, axis1=1, axis2=2).real, [0.0]]).reshape(m, 1, 1))
    C.append(np.ones((1, 1)))
    # Tr(h h^H W) >= Omega, normalized by P0 ||h||^2
    hn2 = np.trace(p.rate_matrix).real
    if p.rate_floor > 0:
        rate = _tr(p.rate_matrix / hn2, E).real
        A.append(np.concatenate([-rate, [0.0]]).reshape(m, 1, 1))
        C.append(np.array([[-p.rate_floor / (p0 * hn2)]]))
    b = np.zeros(m)
    b[-1] = 1.0
    return ipm.BlockSdp(C=C, A=A, b=b), E, t_ref


def paired_eig_ratio(W: np.ndarray) -> float:
    """lambda_2 / lambda_1 of W from the doubled spectrum of its real embedding."""
    lam = numerics.herm_eig(numerics.real_embed(W)).eigenvalues
    pairs = 0.5 * (lam[0::2] + lam[1::2])
    if pairs[0] <= 0:
        return float("nan")
    if pairs.size < 2:
        return 0.0
    return float(max(pairs[1], 0.0) / pairs[0])


def schur_value(p: SdpProblem, W: np.ndarray) -> float:
    """Largest t for which the LMI holds at W (the Schur complement of the (2,2) entry)."""
    M = p.lmi(W, 0.0)
    return float((M[0, 0] - abs(M[0, 1]) ** 2 / M[1, 1]).real)


def _rank_one_in_range(p: SdpProblem, W: np.ndarray, rank_tol: float, rng) -> np.ndarray | None:
    """Best full-power, rate-feasible w in range(W), by local search on the unit sphere.

    Every optimal point of an SDP lies in the range of the maximum-rank optimal
    solution, which is what an interior-point method converges to.
    """
    from scipy.optimize import minimize

    eig = numerics.herm_eig(W)
    lam = eig.eigenvalues
    r = int(np.sum(lam > rank_tol * lam[0]))
    V = eig.eigenvectors[:, :r]
    p0, omega = p.power_cap, p.rate_floor
    t_ref = p.t_upper()

    def unpack(x):
        c = x[:r] + 1j * x[r:]
        u = V @ c
        return np.sqrt(p0) * u / np.linalg.norm(u)

    def neg_t(x):
        w = unpack(x)
        return -schur_value(p, np.outer(w, w.conj())) / t_ref

    def rate_slack(x):
        w = unpack(x)
        return (np.vdot(w, p.rate_matrix @ w).real - omega) / p0

    starts = [np.concatenate([np.eye(r)[k], np.zeros(r)]) for k in range(r)]
    g = rng.standard_normal((64, 2 * r)) * np.tile(np.sqrt(lam[:r]), 2)
    starts += list(g)
    feas = [x for x in starts if rate_slack(x) >= 0]
    if not feas:
        return None
    feas.sort(key=neg_t)
    best, best_val = None, np.inf
    for x0 in feas[:4]:
        cons = [{"type": "ineq", "fun": rate_slack}] if omega > 0 else []
        res = minimize(neg_t, x0, method="SLSQP", constraints=cons,
                       options={"ftol": 1e-15, "maxiter": 200})
        for x in (res.x, x0):
            if rate_slack(x) >= -1e-12 * p0 and neg_t(x) < best_val:
                best, best_val = x, neg_t(x)
    return unpack(best)


def solve_sdp(p: SdpProblem, opts: SdrOptions | None = None) -> SdpSolution:
    """Solve the relaxation; prefer a certified-optimal rank-one point when one exists.

    A W that is not rank-one at ``tol`` is first re-solved to ``refine_tol``.
    When the optimal face is not a single point the interior-point iterate is
    its (higher-rank) centre. A rank-one matrix from range(W) replaces it if
    its objective is within ``tol`` of the dual bound.
    """
    opts = opts or SdrOptions()
    blk, E, t_ref = _to_block_sdp(p)

    def run(tol):
        res = ipm.solve(blk, ipm.IpmOptions(tol=tol, max_iter=opts.max_iter,
                                            step_frac=opts.step_frac))
        W = p.power_cap * np.tensordot(res.y[:-1], E, axes=1)
        W = 0.5 * (W + W.conj().T)
        return res, W, paired_eig_ratio(W)

    res, W, ratio = run(opts.tol)
    if res.converged and not ratio <= opts.rank_one_tol and opts.refine_tol < opts.tol:
        refined = run(opts.refine_tol)
        if refined[0].converged:
            res, W, ratio = refined
    y = res.y
    # primal objective of the block SDP bounds t / t_ref from above
    upper = float(res.primal_obj * t_ref)
    sol = SdpSolution(
        W=W,
        t_star=float(y[-1] * t_ref),
        duality_gap=res.rel_gap,
        iterations=res.iterations,
        eig_ratio=ratio,
        converged=res.converged,
        primal_infeas=res.primal_infeas,
        dual_infeas=res.dual_infeas,
        upper_bound=upper,
        eig_ratio_center=ratio,
    )
    if res.converged and not ratio <= opts.rank_one_tol:
        w = _rank_one_in_range(p, W, opts.rank_one_tol, make_rng(opts.seed))
        if w is not None:
            W1 = np.outer(w, w.conj())
            t1 = schur_value(p, W1)
            gap1 = abs(upper - t1) / t_ref / (1.0 + abs(upper / t_ref) + abs(t1 / t_ref))
            if gap1 <= opts.tol and t1 <= upper * (1 + opts.tol):
                sol.W, sol.t_star, sol.duality_gap = W1, t1, gap1
                sol.eig_ratio = paired_eig_ratio(W1)
                sol.purified = True
    if not res.converged:
        raise ipm.SdpConvergenceError(
            f"interior point did not converge in {res.iterations} iterations "
            f"(gap {res.rel_gap:.2e}, pinf {res.primal_infeas:.2e}, dinf {res.dual_infeas:.2e})",
            gap=res.rel_gap, iterations=res.iterations, result=sol,
        )
    return sol


def _rate_blend(u: np.ndarray, h: np.ndarray, p0: float, omega: float) -> np.ndarray | None:
    """Mix u toward h / ||h|| by bisection until |h^H w|^2 >= Omega at full power."""
    h_hat = h / np.linalg.norm(h)
    # align phases first, otherwise mixing in h_hat can lower |h^H w| before raising it
    hu = np.vdot(h_hat, u)
    if abs(hu) > 0:
        u = u * np.conj(hu) / abs(hu)

    def at(c):
        v = (1.0 - c) * u / np.linalg.norm(u) + c * h_hat
        nv = np.linalg.norm(v)
        if nv == 0:
            return None
        return np.sqrt(p0) * v / nv

    def ok(w):
        return w is not None and abs(np.vdot(h, w)) ** 2 >= omega

    if not ok(at(1.0)):
        return None
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if ok(at(mid)):
            hi = mid
        else:
            lo = mid
    return at(hi)


def extract_rank_one(sol: SdpSolution, h, cfg: ScenarioConfig, n_rand: int = 1000,
                     rank_one_tol: float = 1e-6, rng=None, polish: bool = True) -> Beamformer:
    """Recover a feasible full-power beamformer from the relaxed solution.

    A rank-one W* gives its principal eigenvector directly. Otherwise
    ``n_rand`` candidates u ~ CN(0, W*) (plus the principal eigenvector) are
    scaled to full power, rate-infeasible ones are dropped (or blended toward
    h when none survive), the survivors are ranked by MI, and the three best
    plus the rate-repaired principal eigenvector get a local constrained ascent.
    """
    h = np.asarray(h, dtype=complex)
    p0, omega = cfg.p0, cfg.omega
    eig = numerics.herm_eig(sol.W)
    lam = np.clip(eig.eigenvalues, 0.0, None)
    V = eig.eigenvectors

    def feasible(w):
        return abs(np.vdot(h, w)) ** 2 >= omega * (1 - 1e-12)

    def full_power(u):
        return np.sqrt(p0) * u / np.linalg.norm(u)

    principal = full_power(V[:, 0]) if lam[0] > 0 else None
    if principal is not None and sol.eig_ratio <= rank_one_tol and feasible(principal):
        return Beamformer.from_vector(principal, h, cfg.sigma_n_sq)

    rng = rng if rng is not None else make_rng(0)
    n = sol.W.shape[0]
    g = (rng.standard_normal((n_rand, n)) + 1j * rng.standard_normal((n_rand, n))) / np.sqrt(2)
    cands = (g * np.sqrt(lam)) @ V.T  # rows ~ CN(0, W*)
    if principal is not None:
        cands = np.vstack([principal[None, :], cands])
    norms = np.linalg.norm(cands, axis=1)
    cands = cands[norms > 0]
    cands = np.sqrt(p0) * cands / np.linalg.norm(cands, axis=1, keepdims=True)

    ok = np.abs(cands @ h.conj()) ** 2 >= omega * (1 - 1e-12)
    pool = list(cands[ok])
    starts = []
    if principal is not None:
        # a nearly rank-one W* can leave its eigenvector a hair short of the rate
        w = principal if feasible(principal) else _rate_blend(principal, h, p0, omega)
        if w is not None:
            pool.append(w)
            starts.append(len(pool) - 1)
    if not pool and np.linalg.norm(h) > 0:
        for u in cands:
            w = _rate_blend(u, h, p0, omega)
            if w is not None:
                pool.append(w)
    if not pool:
        raise ExtractionError("no feasible beamformer found among randomized candidates")
    scores = np.array([mi_with_interference(w, cfg).nats for w in pool])
    order = np.argsort(scores)[::-1]
    best, best_mi = pool[order[0]], scores[order[0]]
    if polish:
        for k in list(order[:3]) + [k for k in starts if k not in order[:3]]:
            w = _polish(pool[k], h, cfg)
            if w is not None:
                mi = mi_with_interference(w, cfg).nats
                if mi > best_mi:
                    best, best_mi = w, mi
    return Beamformer.from_vector(best, h, cfg.sigma_n_sq)


def _mi_and_grad(z: np.ndarray, cfg: ScenarioConfig, a, a2, kappa):
    """MI of w = sqrt(P0) z and its gradient as a complex vector (d/dRe + i d/dIm)."""
    L, s2, nr = cfg.frame_len, cfg.sigma_z_sq, cfg.n_rx
    lb, lg = L * cfg.beta**2, L * cfg.gamma**2
    ga, gq = np.vdot(a, z), np.vdot(a2, z)
    x, y = cfg.p0 * abs(ga) ** 2, cfg.p0 * abs(gq) ** 2
    B = lg * nr * y + s2
    num = lb * (nr * x + lg * kappa * x * y / s2)
    F = num / B
    F_x = lb * (nr + lg * kappa * y / s2) / B
    F_y = (lb * lg * kappa * x / s2 * B - num * lg * nr) / B**2
    grad = 2 * cfg.p0 * (F_x * a * ga + F_y * a2 * gq) / (1 + F)
    return np.log1p(F), grad


def _polish(w0: np.ndarray, h: np.ndarray, cfg: ScenarioConfig) -> np.ndarray | None:
    """Local ascent of the MI on the full-power sphere, keeping the rate constraint."""
    from scipy.optimize import minimize

    n, p0, omega = w0.size, cfg.p0, cfg.omega
    a = target_model(cfg).a
    itf = interferer_model(cfg)
    kappa = max(cfg.n_rx**2 - abs(np.vdot(itf.b, target_model(cfg).b)) ** 2, 0.0)

    def split(g):
        return np.concatenate([g.real, g.imag])

    def cz(x):
        return x[:n] + 1j * x[n:]

    def fun(x):
        mi, g = _mi_and_grad(cz(x), cfg, a, itf.a, kappa)
        return -mi, -split(g)

    hn = h / np.linalg.norm(h) if omega > 0 else h
    rate_floor = omega / (p0 * np.vdot(h, h).real) if omega > 0 else 0.0
    cons = [{"type": "eq", "fun": lambda x: np.vdot(cz(x), cz(x)).real - 1.0,
             "jac": lambda x: 2 * x}]
    if omega > 0:
        cons.append({"type": "ineq",
                     "fun": lambda x: abs(np.vdot(hn, cz(x))) ** 2 - rate_floor,
                     "jac": lambda x: split(2 * hn * np.vdot(hn, cz(x)))})
    z0 = w0 / np.linalg.norm(w0)
    res = minimize(fun, split(z0), jac=True, method="SLSQP", constraints=cons,
                   options={"ftol": 1e-15, "maxiter": 500})
    z = cz(res.x)
    w = np.sqrt(p0) * z / np.linalg.norm(z)
    if abs(np.vdot(h, w)) ** 2 < omega:
        # SLSQP may stop with the rate active up to rounding
        return _rate_blend(w, h, p0, omega)
    return w


def solve_with_interference(h, cfg: ScenarioConfig, opts: SdrOptions | None = None):
    opts = opts or SdrOptions()
    prob = build_sdp(h, cfg)
    sol = solve_sdp(prob, opts)
    bf = extract_rank_one(sol, h, cfg, n_rand=opts.n_rand, rank_one_tol=opts.rank_one_tol,
                          rng=make_rng(opts.seed), polish=opts.polish)
    return bf, sol
