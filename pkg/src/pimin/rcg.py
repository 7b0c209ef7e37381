"""Conjugate-gradient descent on the product-of-circles manifold.

Minimizes the path-interference power over the stacked unit-modulus variable
``x = [w; phi]`` (radar space-time weights first, RIS phases last). The
objective is the eigen-reduced sum of squared bilinear terms; its Euclidean
gradient is projected onto the tangent space of the complex circle manifold,
steps are taken by entrywise renormalization, and previous directions are
carried over by tangent-space projection at the new point.

An optional boolean mask freezes coordinates (used by the benchmark designs
that keep the RIS phases fixed); frozen entries get zero gradient and zero
step, which keeps every formula below unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateStepError, DimensionError, DomainError
from .linalg import EvdResult, kron_identity_apply
from .scenario import ChannelSet


# ---------------------------------------------------------------------------
# State and precomputed forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BeamformerState:
    """Stacked unit-modulus variable: ``num_bf`` radar weights then RIS phases."""

    x: np.ndarray
    num_bf: int     # length of the radar space-time block (L*M)

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=np.complex128)
        object.__setattr__(self, "x", x)
        if x.ndim != 1 or not (0 <= self.num_bf <= x.shape[0]):
            raise DimensionError(
                f"state of length {x.shape} cannot split at {self.num_bf}")

    @property
    def w(self) -> np.ndarray:
        return self.x[: self.num_bf]

    @property
    def phi(self) -> np.ndarray:
        return self.x[self.num_bf:]

    @property
    def dim(self) -> int:
        return self.x.shape[0]

    def max_modulus_error(self) -> float:
        return float(np.max(np.abs(np.abs(self.x) - 1.0)))


def random_state(num_bf: int, num_phases: int, rng: np.random.Generator) -> BeamformerState:
    """Independent uniform phases on every coordinate."""
    angles = rng.uniform(0.0, 2.0 * np.pi, size=num_bf + num_phases)
    return BeamformerState(x=np.exp(1j * angles), num_bf=num_bf)


@dataclass(frozen=True)
class PrecomputedForms:
    """Per-eigenpair linear and bilinear coefficients of the reduced objective.

    ``b[i]`` is the direct-leakage vector and ``c[i]`` the reflected-leakage
    matrix of term ``i``; the objective is ``sum_i |w^H b[i] + w^H c[i] phi|^2``.
    One term per eigenpair of the transmit covariance, zero rows for
    eigenvalues clipped at zero.
    """

    b: np.ndarray   # (terms, LM)
    c: np.ndarray   # (terms, LM, N)

    @property
    def num_terms(self) -> int:
        return self.b.shape[0]

    @property
    def num_bf(self) -> int:
        return self.b.shape[1]

    @property
    def num_phases(self) -> int:
        return self.c.shape[2]

    def __len__(self) -> int:
        return self.num_terms


def precompute_forms(evd: EvdResult, ch: ChannelSet, n_samples: int) -> PrecomputedForms:
    """Reduce the covariance quadratic form to per-eigenpair coefficients.

    For eigenpair ``(lam_i, v_i)`` of the transmit covariance:
    ``b_i = sqrt(lam_i) gamma_DPI (I_L kron H_DPI) v_i`` and ``c_i`` stacks the
    per-sample blocks ``sqrt(lam_i) gamma_RPI G_rR^H diag(H_cR v_i_block)``
    vertically into an (LM, N) matrix, which is the unique shape that makes
    the reduced objective well formed.
    """
    m, m_t = ch.H_DPI.shape
    n = ch.H_cR.shape[0]
    dim = evd.dim
    if dim != n_samples * m_t:
        raise DimensionError(
            f"covariance dim {dim} does not match n_samples*M_t = {n_samples * m_t}")
    g_rr_h = ch.G_rR.conj().T    # (M, N)
    lam = evd.clipped_eigenvalues()
    b = np.zeros((dim, n_samples * m), dtype=np.complex128)
    c = np.zeros((dim, n_samples * m, n), dtype=np.complex128)
    for i in range(dim):
        if lam[i] == 0.0:
            continue
        root = np.sqrt(lam[i])
        v_i = evd.eigenvectors[:, i]
        b[i] = root * ch.gamma_DPI * kron_identity_apply(ch.H_DPI, v_i, n_samples)
        scale = root * ch.gamma_RPI
        for ell in range(n_samples):
            d_ell = ch.H_cR @ v_i[ell * m_t: (ell + 1) * m_t]
            c[i, ell * m: (ell + 1) * m, :] = scale * (g_rr_h * d_ell[None, :])
    return PrecomputedForms(b=b, c=c)


# ---------------------------------------------------------------------------
# Objective and gradients
# ---------------------------------------------------------------------------

def _check_state(x: BeamformerState, forms: PrecomputedForms) -> None:
    if x.num_bf != forms.num_bf or x.dim - x.num_bf != forms.num_phases:
        raise DimensionError(
            f"state split ({x.num_bf}, {x.dim - x.num_bf}) does not match forms "
            f"({forms.num_bf}, {forms.num_phases})")


def _terms(x: BeamformerState, forms: PrecomputedForms) -> tuple[np.ndarray, np.ndarray]:
    """Return (t, e): t[i] = b_i + c_i phi, e[i] = w^H t[i]."""
    t = forms.b + forms.c @ x.phi
    e = t @ x.w.conj()
    return t, e


def objective(x: BeamformerState, forms: PrecomputedForms) -> float:
    """Path-interference power at ``x`` in reduced form."""
    _check_state(x, forms)
    _, e = _terms(x, forms)
    return float(np.sum(e.real**2 + e.imag**2))


def euclid_grad(x: BeamformerState, forms: PrecomputedForms) -> np.ndarray:
    """Euclidean gradient of the reduced objective at ``x``.

    Uses the standard real-inner-product convention for complex variables:
    the directional derivative of the objective along a perturbation ``delta``
    equals ``Re(grad^H delta)``.
    """
    _check_state(x, forms)
    t, e = _terms(x, forms)
    grad_w = 2.0 * (e.conj() @ t)
    r = np.einsum("ikn,k->in", forms.c.conj(), x.w)
    grad_phi = 2.0 * (e @ r)
    return np.concatenate([grad_w, grad_phi])


def riem_grad(x: BeamformerState, egrad: np.ndarray) -> np.ndarray:
    """Project a Euclidean gradient onto the tangent space at ``x``."""
    egrad = np.asarray(egrad, dtype=np.complex128)
    if egrad.shape != x.x.shape:
        raise DimensionError(f"gradient shape {egrad.shape} != state shape {x.x.shape}")
    return egrad - np.real(egrad * x.x.conj()) * x.x


def transport(x_new: BeamformerState, vec: np.ndarray) -> np.ndarray:
    """Carry a tangent vector into the tangent space at ``x_new``."""
    vec = np.asarray(vec, dtype=np.complex128)
    if vec.shape != x_new.x.shape:
        raise DimensionError(f"vector shape {vec.shape} != state shape {x_new.x.shape}")
    return vec - np.real(vec * x_new.x.conj()) * x_new.x


def retract(x: BeamformerState, step: np.ndarray) -> BeamformerState:
    """Entrywise renormalization of ``x + step`` back onto the circles."""
    step = np.asarray(step, dtype=np.complex128)
    if step.shape != x.x.shape:
        raise DimensionError(f"step shape {step.shape} != state shape {x.x.shape}")
    moved = x.x + step
    mags = np.abs(moved)
    if np.any(mags == 0.0):
        raise DegenerateStepError("retraction hit a zero entry; shrink the step")
    return BeamformerState(x=moved / mags, num_bf=x.num_bf)


def _re_inner(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.real(np.vdot(a, b)))


# ---------------------------------------------------------------------------
# Line search and the CG loop
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RcgConfig:
    """Loop controls for the manifold conjugate-gradient solver."""

    max_iters: int = 300
    armijo_c1: float = 1e-4
    armijo_shrink: float = 0.5
    alpha_init: float = 1.0
    grad_tol: float | None = None   # default 1e-8 * (problem dimension)
    restart_period: int | None = None  # default: problem dimension
    max_backtracks: int = 50

    def __post_init__(self) -> None:
        if self.max_iters < 0:
            raise DomainError(f"max_iters must be >= 0, got {self.max_iters}")
        if not (0.0 < self.armijo_c1 < 1.0):
            raise DomainError(f"armijo_c1 must lie in (0, 1), got {self.armijo_c1}")
        if not (0.0 < self.armijo_shrink < 1.0):
            raise DomainError(f"armijo_shrink must lie in (0, 1), got {self.armijo_shrink}")
        if self.alpha_init <= 0.0:
            raise DomainError(f"alpha_init must be > 0, got {self.alpha_init}")
        if self.grad_tol is not None and self.grad_tol < 0.0:
            raise DomainError(f"grad_tol must be >= 0, got {self.grad_tol}")

    def resolved_grad_tol(self, dim: int) -> float:
        return self.grad_tol if self.grad_tol is not None else 1e-8 * dim

    def resolved_restart(self, dim: int) -> int:
        return self.restart_period if self.restart_period is not None else max(dim, 10)


@dataclass(frozen=True)
class LineSearchResult:
    alpha: float
    x_new: BeamformerState
    f_new: float


def line_search(x: BeamformerState, direction: np.ndarray, forms: PrecomputedForms,
                cfg: RcgConfig, f_x: float | None = None,
                slope: float | None = None,
                alpha_start: float | None = None) -> LineSearchResult:
    """Backtracking Armijo search along a tangent direction.

    Returns the largest ``alpha_start * shrink^k`` satisfying the sufficient
    decrease condition (``alpha_start`` defaults to the configured initial
    step), or ``alpha = 0`` (with ``x`` unchanged) when the direction is zero
    or no admissible step exists within the backtrack budget; the resulting
    objective never increases.
    """
    direction = np.asarray(direction, dtype=np.complex128)
    if f_x is None:
        f_x = objective(x, forms)
    if not np.any(direction):
        return LineSearchResult(alpha=0.0, x_new=x, f_new=f_x)
    if slope is None:
        grad = riem_grad(x, euclid_grad(x, forms))
        slope = _re_inner(grad, direction)
    alpha = cfg.alpha_init if alpha_start is None else alpha_start
    for _ in range(cfg.max_backtracks + 1):
        try:
            x_trial = retract(x, alpha * direction)
        except DegenerateStepError:
            alpha *= cfg.armijo_shrink
            continue
        f_trial = objective(x_trial, forms)
        if f_trial <= f_x + cfg.armijo_c1 * alpha * slope:
            return LineSearchResult(alpha=alpha, x_new=x_trial, f_new=f_trial)
        alpha *= cfg.armijo_shrink
    return LineSearchResult(alpha=0.0, x_new=x, f_new=f_x)


@dataclass(frozen=True)
class RcgResult:
    x: BeamformerState
    history: np.ndarray     # objective value at x0 and after each iteration
    grad_norm: float
    iterations: int


def rcg_solve(forms: PrecomputedForms, x0: BeamformerState, cfg: RcgConfig,
              free: np.ndarray | None = None,
              callback: "Callable[[BeamformerState, np.ndarray, np.ndarray], None] | None" = None,
              ) -> RcgResult:
    """Run the manifold conjugate-gradient loop from ``x0``.

    ``free`` optionally marks which coordinates may move (True = optimized);
    anything else stays frozen at its initial value. The recorded history is
    non-increasing: each step is accepted only under the Armijo condition.
    ``callback`` observes ``(iterate, gradient, direction)`` once per
    accepted step.
    """
    _check_state(x0, forms)
    if free is not None:
        free = np.asarray(free, dtype=bool)
        if free.shape != x0.x.shape:
            raise DimensionError(f"mask shape {free.shape} != state shape {x0.x.shape}")

    def grad_at(state: BeamformerState) -> np.ndarray:
        g = riem_grad(state, euclid_grad(state, forms))
        if free is not None:
            g = np.where(free, g, 0.0)
        return g

    # Frozen coordinates are not part of the problem: scale-aware knobs see
    # only the free dimension (a no-RIS run must not depend on the RIS size).
    dim = int(free.sum()) if free is not None else x0.dim
    grad_tol = cfg.resolved_grad_tol(dim)
    restart_every = cfg.resolved_restart(dim)
    # Steps are searched along the normalized direction so alpha measures
    # displacement in x-space; a half-turn per entry bounds any useful step.
    alpha_cap = float(np.pi * np.sqrt(dim))

    x = x0
    f_x = objective(x, forms)
    g = grad_at(x)
    direction = -g
    history = [f_x]
    iterations = 0
    alpha_warm = cfg.alpha_init

    for it in range(cfg.max_iters):
        g_norm = float(np.linalg.norm(g))
        if g_norm <= grad_tol:
            break

        d_norm = float(np.linalg.norm(direction))
        slope = _re_inner(g, direction) / d_norm if d_norm > 0.0 else 0.0
        if slope >= 0.0:
            direction = -g
            d_norm = g_norm
            slope = -g_norm
        d_unit = direction / d_norm
        ls = line_search(x, d_unit, forms, cfg, f_x=f_x, slope=slope,
                         alpha_start=alpha_warm)
        if ls.alpha == 0.0 and not np.array_equal(direction, -g):
            direction = -g
            d_unit = -g / g_norm
            ls = line_search(x, d_unit, forms, cfg, f_x=f_x, slope=-g_norm,
                             alpha_start=alpha_warm)
        if ls.alpha == 0.0:
            break   # stationary within line-search resolution

        alpha_warm = min(2.0 * ls.alpha, alpha_cap)
        x_new = ls.x_new
        if free is not None:
            # keep frozen coordinates bit-identical across renormalizations
            x_new = BeamformerState(x=np.where(free, x_new.x, x.x), num_bf=x.num_bf)
        g_new = grad_at(x_new)
        c_plus = transport(x_new, direction)
        g_plus = transport(x_new, g)
        denom = float(np.linalg.norm(g_plus)) ** 2
        beta = (float(np.linalg.norm(g_new)) ** 2) / denom if denom > 0.0 else 0.0
        direction = -g_new + beta * c_plus
        if (it + 1) % restart_every == 0:
            direction = -g_new

        x, g, f_x = x_new, g_new, ls.f_new
        history.append(f_x)
        iterations = it + 1
        if callback is not None:
            callback(x, g, direction)

    return RcgResult(x=x, history=np.asarray(history), grad_norm=float(np.linalg.norm(g)),
                     iterations=iterations)
