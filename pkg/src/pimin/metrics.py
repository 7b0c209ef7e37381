"""Figures of merit: received powers, SNDR, communication SNR, dynamic range.

All quadratic power forms are evaluated through the eigendecomposition of the
transmit covariance and blockwise identity-Kronecker products; dense Kronecker
matrices are never formed here (the test suite keeps a dense oracle instead).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, DimensionError
from .linalg import hermitian_evd, kron_identity_apply
from .scenario import linear_to_db
from .sysmodel import EffectiveChannels

logger = logging.getLogger(__name__)

# Warn when round-off drives a power this far below zero (relative to the
# largest eigen-term) before clamping.
NEGATIVE_POWER_WARN_REL = 1e-9


@dataclass(frozen=True)
class PowerBreakdown:
    """The four received-power components at the radar plus derived ratios."""

    p_pi: float
    p_sense: float
    p_obs: float
    p_noise: float
    sndr_db: float
    comm_snr_db: float
    dr_db: float


def power_quadratic(block: np.ndarray, w: np.ndarray, r_ss: np.ndarray) -> float:
    """``w^H (I_L kron block) R_ss (I_L kron block)^H w`` evaluated blockwise.

    ``L`` is inferred from the covariance dimension; the result is real and
    clamped to zero if round-off drives it slightly negative.
    """
    block = np.asarray(block, dtype=np.complex128)
    w = np.asarray(w, dtype=np.complex128)
    r_ss = np.asarray(r_ss, dtype=np.complex128)
    rows, cols = block.shape
    dim = r_ss.shape[0]
    if dim % cols != 0:
        raise DimensionError(f"covariance dim {dim} not a multiple of block cols {cols}")
    blocks = dim // cols
    if w.shape != (blocks * rows,):
        raise DimensionError(f"w has shape {w.shape}, expected ({blocks * rows},)")

    evd = hermitian_evd(r_ss)
    lam = evd.clipped_eigenvalues()
    total = 0.0
    largest = 0.0
    for i in range(dim):
        if lam[i] == 0.0:
            continue
        proj = np.vdot(w, kron_identity_apply(block, evd.eigenvectors[:, i], blocks))
        term = lam[i] * (proj.real**2 + proj.imag**2)
        total += term
        largest = max(largest, abs(term))
    if total < 0.0:
        if total < -NEGATIVE_POWER_WARN_REL * largest:
            logger.warning("clamping negative power %e (largest term %e)", total, largest)
        total = 0.0
    return float(total)


def power_noise(w: np.ndarray, sigma_r2: float) -> float:
    """Noise power after unit-modulus beamforming: exactly ``sigma_r2 * len(w)``."""
    return float(sigma_r2) * len(w)


def sndr(p_sense: float, p_pi: float, p_obs: float, p_noise: float) -> float:
    """Sensing power over interference-plus-noise power (linear ratio)."""
    denom = p_pi + p_obs + p_noise
    if denom <= 0.0:
        raise DegenerateInputError("SNDR denominator must be positive")
    return p_sense / denom


def comm_snr(hc_block: np.ndarray, r_ss: np.ndarray, m_r: int, n_samples: int,
             sigma_c2: float) -> float:
    """Communication SNR: trace form over the block-diagonal composite channel."""
    hc_block = np.asarray(hc_block, dtype=np.complex128)
    r_ss = np.asarray(r_ss, dtype=np.complex128)
    m_t = hc_block.shape[1]
    if r_ss.shape != (n_samples * m_t, n_samples * m_t):
        raise DimensionError(
            f"covariance has shape {r_ss.shape}, expected ({n_samples * m_t},)^2")
    if sigma_c2 <= 0.0:
        raise DegenerateInputError("sigma_c2 must be positive")
    gram = hc_block.conj().T @ hc_block
    blocks = r_ss.reshape(n_samples, m_t, n_samples, m_t)
    num = 0.0
    for ell in range(n_samples):
        num += np.trace(blocks[ell, :, ell, :] @ gram).real
    return float(num) / (m_r * n_samples * sigma_c2)


def dynamic_range(p_pi: float, p_noise: float) -> float:
    """Interference-to-noise ratio the ADC must span (linear)."""
    if p_noise <= 0.0:
        raise DegenerateInputError("noise power must be positive")
    return p_pi / p_noise


def adc_snr(n_enob: float) -> float:
    """Peak ADC SNR in dBFS for a given effective number of bits."""
    if n_enob < 0:
        raise DegenerateInputError("effective bit count must be >= 0")
    return 6.02 * n_enob + 1.76


def adc_power(bits: float, f_samp: float, f_om: float) -> float:
    """Dissipated ADC power: ``2^bits * f_samp / f_om`` (W)."""
    if f_om <= 0.0:
        raise DegenerateInputError("figure of merit must be positive")
    return 2.0**bits * f_samp / f_om


def power_breakdown(eff: EffectiveChannels, w: np.ndarray, r_ss: np.ndarray,
                    sigma_r2: float, sigma_c2: float, m_r: int) -> PowerBreakdown:
    """Evaluate every figure of merit at one (w, phi, R_ss) operating point."""
    m = eff.Ac_block.shape[0]
    if len(w) % m != 0:
        raise DimensionError(f"w length {len(w)} not a multiple of radar antennas {m}")
    n_samples = len(w) // m
    p_pi = power_quadratic(eff.Ac_block, w, r_ss)
    p_sense = power_quadratic(eff.Ar_block, w, r_ss)
    p_obs = power_quadratic(eff.Ao_block, w, r_ss)
    p_noise = power_noise(w, sigma_r2)
    snr = comm_snr(eff.Hc_block, r_ss, m_r, n_samples, sigma_c2)
    return PowerBreakdown(
        p_pi=p_pi,
        p_sense=p_sense,
        p_obs=p_obs,
        p_noise=p_noise,
        sndr_db=linear_to_db(sndr(p_sense, p_pi, p_obs, p_noise)),
        comm_snr_db=linear_to_db(snr),
        dr_db=linear_to_db(dynamic_range(p_pi, p_noise)),
    )
