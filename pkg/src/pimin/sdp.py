"""Transmit-covariance subproblem: a small semidefinite program.

Given the radar weights and RIS phases, the covariance step minimizes the
path-interference trace form over Hermitian PSD matrices with a fixed trace,
one communication-SNR trace inequality and one sensing-ratio trace
inequality.

The solver is a first-order consensus splitting (ADMM) between the PSD cone
(eigenvalue clipping) and the affine set (closed-form projection onto the
trace equality plus the two half-spaces, by active-set enumeration). Two
shortcuts keep the common cases fast and sharp:

* a spectral certificate declares infeasibility immediately when even the
  best rank-one covariance cannot satisfy an inequality, and
* when the objective matrix is PSD with a nontrivial null space, a pure
  feasibility solve restricted to that null space is attempted first; any
  feasible point there is exactly optimal (objective zero), which is the
  typical interference-nulling outcome.

The public contract stays complex Hermitian; problems are scaled internally
to unit trace and unit-norm coefficient matrices for conditioning.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError
from .linalg import check_hermitian, hermitian_evd
from .scenario import ChannelSet, ScenarioConfig
from .sysmodel import EffectiveChannels

FEASIBILITY_SLACK = 1e-9


# ---------------------------------------------------------------------------
# Problem and solution containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SdpProblem:
    """Trace-form covariance subproblem data, all matrices Hermitian."""

    dim: int
    obj: np.ndarray         # minimized: <obj, R>
    comm_mat: np.ndarray    # <comm_mat, R> >= comm_rhs
    comm_rhs: float
    sense_mat: np.ndarray   # <sense_mat, R> >= sense_rhs
    sense_rhs: float
    trace_budget: float

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise DimensionError(f"dim must be >= 1, got {self.dim}")
        if self.trace_budget <= 0.0:
            raise DomainError(f"trace budget must be > 0, got {self.trace_budget}")
        for name in ("obj", "comm_mat", "sense_mat"):
            mat = np.asarray(getattr(self, name), dtype=np.complex128)
            if mat.shape != (self.dim, self.dim):
                raise DimensionError(f"{name} has shape {mat.shape}, expected "
                                     f"({self.dim}, {self.dim})")
            check_hermitian(mat, rel_tol=1e-10, name=name)
            object.__setattr__(self, name, 0.5 * (mat + mat.conj().T))


@dataclass(frozen=True)
class TransmitCovariance:
    """Hermitian PSD transmit covariance with a fixed trace budget."""

    matrix: np.ndarray
    budget: float

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def validate(self) -> None:
        check_hermitian(self.matrix, rel_tol=1e-10, name="covariance")
        eigs = np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))
        if eigs.min() < -1e-8 * self.budget:
            raise DomainError(f"covariance not PSD: min eigenvalue {eigs.min():.3e}")
        if abs(self.trace - self.budget) > 1e-6 * self.budget:
            raise DomainError(
                f"trace {self.trace:.9e} deviates from budget {self.budget:.9e}")


@dataclass(frozen=True)
class SdpSolution:
    R_ss: TransmitCovariance
    objective_value: float
    kkt_residual: float
    status: str                 # "optimal", "infeasible" or "max_iters"
    constraint_violation: float  # best max relative violation achieved
    iterations: int


# ---------------------------------------------------------------------------
# Problem assembly from the system model
# ---------------------------------------------------------------------------

def _stacked_adjoint(block: np.ndarray, w: np.ndarray, n_samples: int) -> np.ndarray:
    """``(I_L kron block)^H w`` computed per sample block."""
    m, m_t = block.shape
    out = np.empty(n_samples * m_t, dtype=np.complex128)
    bh = block.conj().T
    for ell in range(n_samples):
        out[ell * m_t: (ell + 1) * m_t] = bh @ w[ell * m: (ell + 1) * m]
    return out


def assemble_p2(w: np.ndarray, phi: np.ndarray, ch: ChannelSet,
                effective: EffectiveChannels, cfg: ScenarioConfig) -> SdpProblem:
    """Build the covariance subproblem at the current beamformer and phases.

    The interference and echo trace coefficients are rank-one Gram matrices of
    the stacked adjoint channel-beamformer products; the communication
    coefficient is block diagonal in the per-sample channel Gram.
    """
    m, m_t = effective.Ac_block.shape
    if len(w) % m != 0:
        raise DimensionError(f"w length {len(w)} not a multiple of M = {m}")
    n_samples = len(w) // m
    dim = n_samples * m_t

    u = _stacked_adjoint(effective.Ac_block, w, n_samples)
    a = _stacked_adjoint(effective.Ar_block, w, n_samples)
    o = _stacked_adjoint(effective.Ao_block, w, n_samples)

    obj = np.outer(u, u.conj())
    gram = effective.Hc_block.conj().T @ effective.Hc_block
    comm_mat = np.kron(np.eye(n_samples), gram)
    gamma_s = cfg.gamma_sense
    sense_mat = np.outer(a, a.conj()) - gamma_s * (obj + np.outer(o, o.conj()))

    return SdpProblem(
        dim=dim,
        obj=obj,
        comm_mat=comm_mat,
        comm_rhs=cfg.gamma_comm * cfg.M_r * n_samples * cfg.sigma_c2_W,
        sense_mat=sense_mat,
        sense_rhs=gamma_s * cfg.sigma_r2_W * len(w),
        trace_budget=cfg.P_B,
    )


# ---------------------------------------------------------------------------
# Projections
# ---------------------------------------------------------------------------

def _psd_clip(a: np.ndarray) -> np.ndarray:
    lam, v = np.linalg.eigh(a)
    np.maximum(lam, 0.0, out=lam)
    out = (v * lam) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def _inner(a: np.ndarray, b: np.ndarray) -> float:
    # Real for Hermitian arguments.
    return float(np.tensordot(a.conj(), b, axes=2).real)


class _AffineSet:
    """Projection onto {trace = 1} intersected with two trace half-spaces.

    The projection has the form ``Y + mu0 I + mu1 A1 + mu2 A2``; the correct
    active set among the four candidates is found by checking multiplier
    signs and residual feasibility.
    """

    def __init__(self, dim: int, mats: list[np.ndarray], rhs: list[float]):
        self.dim = dim
        self.eye = np.eye(dim, dtype=np.complex128)
        self.mats = [self.eye] + mats          # index 0 is the trace equality
        self.rhs = [1.0] + rhs
        k = len(self.mats)
        self.gram = np.empty((k, k))
        for i in range(k):
            for j in range(k):
                self.gram[i, j] = _inner(self.mats[i], self.mats[j])
        self.farkas_gap = self._farkas_gap()

    def _farkas_gap(self) -> float:
        """Positive when the affine set itself is empty.

        Emptiness needs linearly dependent functionals with incompatible
        right-hand sides: a combination ``mu0 I + mu1 A1 + mu2 A2 = 0`` with
        ``mu1, mu2 >= 0`` and ``mu . rhs > 0``. Null directions of the Gram
        matrix are enumerated (single directions and pairwise sums cover the
        low-dimensional null spaces that occur here).
        """
        eigval, eigvec = np.linalg.eigh(self.gram)
        scale = max(float(eigval[-1]), 1e-300)
        null_dirs = [eigvec[:, i] for i in range(len(eigval))
                     if eigval[i] <= 1e-12 * scale]
        if not null_dirs:
            return 0.0
        candidates = []
        for v in null_dirs:
            candidates += [v, -v]
        for i in range(len(null_dirs)):
            for j in range(i + 1, len(null_dirs)):
                for si in (1.0, -1.0):
                    for sj in (1.0, -1.0):
                        candidates.append(si * null_dirs[i] + sj * null_dirs[j])
        rhs = np.asarray(self.rhs)
        worst = 0.0
        for mu in candidates:
            norm = np.linalg.norm(mu)
            if norm == 0.0:
                continue
            mu = mu / norm
            if np.all(mu[1:] >= -1e-12):
                worst = max(worst, float(mu @ rhs))
        return worst if worst > 1e-12 * max(1.0, float(np.abs(rhs).max())) else 0.0

    def project(self, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return (projection, multipliers[len mats])."""
        vals = np.array([_inner(m, y) for m in self.mats])
        resid = np.array(self.rhs) - vals
        n_ineq = len(self.mats) - 1
        best = None
        for active_mask in range(2**n_ineq):
            idx = [0] + [i + 1 for i in range(n_ineq) if active_mask >> i & 1]
            g = self.gram[np.ix_(idx, idx)]
            try:
                mu_act = np.linalg.solve(g, resid[idx])
            except np.linalg.LinAlgError:
                mu_act, *_ = np.linalg.lstsq(g, resid[idx], rcond=None)
            mu = np.zeros(len(self.mats))
            mu[idx] = mu_act
            if np.any(mu[1:] < -FEASIBILITY_SLACK):
                continue
            # inactive inequalities must end up satisfied
            new_vals = vals + self.gram @ mu
            slack = new_vals[1:] - np.array(self.rhs[1:])
            if np.all(slack >= -FEASIBILITY_SLACK * np.maximum(1.0, np.abs(self.rhs[1:]))):
                best = mu
                break
        if best is None:
            # numerically marginal case: fall back to the fully active system
            idx = list(range(len(self.mats)))
            mu_act, *_ = np.linalg.lstsq(self.gram, resid, rcond=None)
            best = np.maximum(mu_act, [-np.inf] + [0.0] * n_ineq)
        z = y.copy()
        for coef, mat in zip(best, self.mats):
            if coef != 0.0:
                z = z + coef * mat
        return 0.5 * (z + z.conj().T), best

    def violation(self, y: np.ndarray) -> float:
        """Max relative constraint violation at ``y`` (trace and inequalities)."""
        worst = abs(_inner(self.eye, y) - 1.0)
        for mat, b in zip(self.mats[1:], self.rhs[1:]):
            worst = max(worst, max(0.0, b - _inner(mat, y)) / max(1.0, abs(b)))
        return worst


# ---------------------------------------------------------------------------
# Core ADMM loop (scaled units: trace 1, unit-norm coefficient matrices)
# ---------------------------------------------------------------------------

@dataclass
class _AdmmOutcome:
    x: np.ndarray
    status: str
    primal: float
    dual: float
    violation: float
    iterations: int


def _admm(c: np.ndarray, aff: _AffineSet, tol: float, max_iters: int,
          over_relax: float = 1.6) -> _AdmmOutcome:
    n = aff.dim
    z = aff.eye / n
    u = np.zeros_like(z)
    rho = 1.0
    primal = dual = np.inf
    best_violation = np.inf
    stall_window = 500
    primal_log: list[float] = []
    x = z

    for it in range(1, max_iters + 1):
        x = _psd_clip(z - u - c / rho)
        z_old = z
        x_relaxed = over_relax * x + (1.0 - over_relax) * z_old
        z, _ = aff.project(x_relaxed + u)
        u = u + x_relaxed - z

        primal = float(np.linalg.norm(x - z))
        dual = float(rho * np.linalg.norm(z - z_old))
        primal_log.append(primal)
        scale = max(float(np.linalg.norm(x)), float(np.linalg.norm(z)), 1.0)
        if primal <= tol * scale and dual <= tol * scale:
            return _AdmmOutcome(x=x, status="optimal", primal=primal / scale,
                                dual=dual / scale, violation=aff.violation(x),
                                iterations=it)

        best_violation = min(best_violation, aff.violation(x))
        if it % 100 == 0:
            if primal > 10.0 * dual:
                rho *= 2.0
                u *= 0.5
            elif dual > 10.0 * primal:
                rho *= 0.5
                u *= 2.0
        if it % (2 * stall_window) == 0 and it >= 2 * stall_window:
            recent = min(primal_log[-stall_window:])
            earlier = min(primal_log[-2 * stall_window: -stall_window])
            if recent > 0.995 * earlier and recent > 50.0 * tol:
                return _AdmmOutcome(x=x, status="infeasible", primal=primal,
                                    dual=dual, violation=best_violation,
                                    iterations=it)

    return _AdmmOutcome(x=x, status="max_iters", primal=primal, dual=dual,
                        violation=best_violation, iterations=max_iters)


# ---------------------------------------------------------------------------
# Public solver
# ---------------------------------------------------------------------------

def _polish(x: np.ndarray, aff: _AffineSet) -> np.ndarray:
    """Snap an approximate iterate onto the cone with an exact unit trace."""
    y, _ = aff.project(x)
    r = _psd_clip(y)
    tr = float(np.trace(r).real)
    if tr > 0.0:
        r = r / tr
    else:
        r = aff.eye / aff.dim
    return r


def solve_sdp(problem: SdpProblem, tol: float = 1e-7,
              max_iters: int = 50_000) -> SdpSolution:
    """Solve the covariance subproblem.

    Returns a solution whose status is ``optimal`` when both ADMM residuals
    fall below ``tol`` (relative), ``infeasible`` with a violation diagnostic
    when the constraint set is certified or detected empty, and ``max_iters``
    with the best iterate otherwise.
    """
    n = problem.dim
    s = problem.trace_budget

    def finish(r_scaled: np.ndarray, status: str, kkt: float, violation: float,
               iterations: int) -> SdpSolution:
        r = s * r_scaled
        return SdpSolution(
            R_ss=TransmitCovariance(matrix=r, budget=s),
            objective_value=_inner(problem.obj, r),
            kkt_residual=kkt,
            status=status,
            constraint_violation=violation,
            iterations=iterations,
        )

    # Scale: R = s * R_tilde with trace(R_tilde) = 1; unit-norm coefficients.
    mats: list[np.ndarray] = []
    rhs: list[float] = []
    for mat, b in ((problem.comm_mat, problem.comm_rhs),
                   (problem.sense_mat, problem.sense_rhs)):
        f = float(np.linalg.norm(mat))
        if f == 0.0:
            if b / s > FEASIBILITY_SLACK:
                return finish(np.eye(n, dtype=np.complex128) / n, "infeasible",
                              np.inf, b / s, 0)
            continue    # vacuous constraint
        mats.append(np.asarray(mat, dtype=np.complex128) / f)
        rhs.append(b / (s * f))
    f_obj = float(np.linalg.norm(problem.obj))
    c = np.asarray(problem.obj, dtype=np.complex128) / f_obj if f_obj > 0.0 \
        else np.zeros((n, n), dtype=np.complex128)

    # Spectral infeasibility certificate: even the best rank-one covariance
    # cannot reach the right-hand side.
    worst_gap = 0.0
    for mat, b in zip(mats, rhs):
        top = float(np.linalg.eigvalsh(mat)[-1])
        gap = b - top
        if gap > FEASIBILITY_SLACK * max(1.0, abs(b)):
            worst_gap = max(worst_gap, gap / max(1.0, abs(b)))
    if worst_gap > 0.0:
        return finish(np.eye(n, dtype=np.complex128) / n, "infeasible",
                      np.inf, worst_gap, 0)

    aff = _AffineSet(n, mats, rhs)
    if aff.farkas_gap > 0.0:
        return finish(np.eye(n, dtype=np.complex128) / n, "infeasible",
                      np.inf, aff.farkas_gap, 0)

    if n == 1:
        # trace equality pins the scalar; feasibility was certified above
        r = np.ones((1, 1), dtype=np.complex128)
        return finish(r, "optimal", 0.0, aff.violation(r), 0)

    # Null-space shortcut: with a PSD objective, any feasible point supported
    # on its null space attains the global minimum of zero.
    evd = hermitian_evd(c)
    lam_max = max(float(evd.eigenvalues[0]), 0.0)
    if float(evd.eigenvalues[-1]) >= -1e-8 * max(lam_max, 1.0):
        null_cols = evd.eigenvalues <= 1e-10 * max(lam_max, 1e-300)
        k = int(np.count_nonzero(null_cols))
        if k >= 1:
            w_null = evd.eigenvectors[:, null_cols]
            red_mats = [w_null.conj().T @ m @ w_null for m in mats]
            red_aff = _AffineSet(k, [0.5 * (m + m.conj().T) for m in red_mats], rhs)
            feas_tol = min(tol, 1e-9)
            out = None
            if red_aff.farkas_gap == 0.0:
                out = _admm(np.zeros((k, k), dtype=np.complex128), red_aff,
                            feas_tol, max_iters)
            if out is not None and out.status == "optimal":
                s_red = _polish(out.x, red_aff)
                r = w_null @ s_red @ w_null.conj().T
                r = 0.5 * (r + r.conj().T)
                return finish(r, "optimal", max(out.primal, out.dual),
                              aff.violation(r), out.iterations)
            # fall through: the null space may be infeasible while the full
            # problem is not

    out = _admm(c, aff, tol, max_iters)
    if out.status == "infeasible":
        return finish(_polish(out.x, aff), "infeasible", np.inf, out.violation,
                      out.iterations)
    r = _polish(out.x, aff)
    return finish(r, out.status, max(out.primal, out.dual), aff.violation(r),
                  out.iterations)
