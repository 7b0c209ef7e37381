"""Shared oracles and generators for the test suite.

Dense-matrix reference paths live here, never in the package: production code
works blockwise, the tests rebuild the full identity-Kronecker matrices and
compare.
"""

import numpy as np

from pimin import ScenarioConfig
from pimin.rcg import PrecomputedForms


def cplx(rng: np.random.Generator, *shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    a = cplx(rng, n, n)
    return 0.5 * (a + a.conj().T)


def random_psd(rng: np.random.Generator, n: int, trace: float | None = None) -> np.ndarray:
    a = cplx(rng, n, n)
    p = a.conj().T @ a
    if trace is not None:
        p *= trace / np.trace(p).real
    return p


def random_unit_modulus(rng: np.random.Generator, n: int) -> np.ndarray:
    return np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=n))


def dense_kron_block(block: np.ndarray, blocks: int) -> np.ndarray:
    """The full ``I_blocks kron block`` matrix (test-only reference)."""
    return np.kron(np.eye(blocks), block)


def dense_power_quadratic(block: np.ndarray, w: np.ndarray, r_ss: np.ndarray) -> float:
    a = dense_kron_block(block, r_ss.shape[0] // block.shape[1])
    return float(np.real(w.conj() @ a @ r_ss @ a.conj().T @ w))


def random_forms(rng: np.random.Generator, terms: int, lm: int, n: int,
                 scale: float = 1.0) -> PrecomputedForms:
    return PrecomputedForms(
        b=scale * cplx(rng, terms, lm),
        c=scale * cplx(rng, terms, lm, n),
    )


def tiny_scenario(**overrides) -> ScenarioConfig:
    """Minimal-footprint configuration for fast structural tests."""
    base = dict(M_t=2, M_r=2, M=3, N_x=2, N_y=1, L=2, seed=0)
    base.update(overrides)
    return ScenarioConfig(**base)


# ---------------------------------------------------------------------------
# Exhaustive grid oracle for the 2x2 covariance subproblem
# ---------------------------------------------------------------------------

_PAULI = (
    np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
)


def sdp2_grid_oracle(prob, per_axis: int = 100, stages: int = 4,
                     extra_centers: list | None = None):
    """Brute-force optimum of a 2x2 covariance subproblem.

    Every trace-``P_B`` Hermitian PSD matrix is ``P_B/2 (I + r . sigma)``
    with ``|r| <= 1``; the objective and constraints are affine in ``r``, so
    a dense grid over the unit ball (eigenbasis angles plus eigenvalue
    split), refined around the best candidates, bounds the optimum. Returns
    ``None`` when no grid point is feasible.
    """
    half = prob.trace_budget / 2.0

    def affine(mat):
        coeffs = np.array([np.trace(mat @ s).real for s in _PAULI]) * half
        return coeffs, float(np.trace(mat).real) * half

    c_obj, o_obj = affine(prob.obj)
    c_1, o_1 = affine(prob.comm_mat)
    c_2, o_2 = affine(prob.sense_mat)

    def scan(lo, hi):
        axes = [np.linspace(lo[i], hi[i], per_axis) for i in range(3)]
        gx, gy, gz = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)
        keep = (pts**2).sum(axis=1) <= 1.0 + 1e-15
        keep &= pts @ c_1 + o_1 >= prob.comm_rhs - 1e-12
        keep &= pts @ c_2 + o_2 >= prob.sense_rhs - 1e-12
        if not keep.any():
            return []
        vals = pts[keep] @ c_obj + o_obj
        order = np.argsort(vals)[:3]
        return [(float(vals[i]), pts[keep][i]) for i in order]

    candidates = scan(np.full(3, -1.0), np.full(3, 1.0))
    if not candidates:
        return None
    for center in extra_centers or []:
        candidates.append((np.inf, np.asarray(center, dtype=float)))
    span = 2.0 / (per_axis - 1) * 4.0
    for _ in range(stages - 1):
        nxt = list(candidates)
        for _, pt in candidates:
            lo = np.maximum(pt - span, -1.0)
            hi = np.minimum(pt + span, 1.0)
            nxt += scan(lo, hi)
        nxt.sort(key=lambda t: t[0])
        candidates = nxt[:3]
        span *= 4.0 / (per_axis - 1)
    return candidates[0][0]


def pauli_coords(r: np.ndarray, budget: float) -> np.ndarray:
    """Ball coordinates of a 2x2 trace-``budget`` Hermitian matrix."""
    half = budget / 2.0
    return np.array([np.trace(r @ s).real for s in _PAULI]) / (2.0 * half)


def sample_feasible_points(prob, rng: np.random.Generator, count: int,
                           max_tries: int = 200_000):
    """Rejection-sample PSD trace-budget matrices satisfying both inequalities."""
    n = prob.dim
    out = []
    tries = 0
    while len(out) < count and tries < max_tries:
        tries += 1
        q, _ = np.linalg.qr(cplx(rng, n, n))
        lam = rng.dirichlet(np.ones(n)) * prob.trace_budget
        r = (q * lam) @ q.conj().T
        if np.trace(prob.comm_mat @ r).real < prob.comm_rhs:
            continue
        if np.trace(prob.sense_mat @ r).real < prob.sense_rhs:
            continue
        out.append(r)
    return out
