"""Effective per-block channels as functions of the RIS phase vector.

Every receive-side channel in the model is block-diagonal over the time
samples (an identity-Kronecker structure), so only the repeated diagonal
block is ever materialized here. Phase-shift products ``diag(phi) @ v`` are
Hadamard products throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError
from .scenario import ChannelSet

UNIT_MODULUS_TOL = 1e-9


def _check_phases(phi: np.ndarray, n: int, validate: bool) -> np.ndarray:
    phi = np.asarray(phi, dtype=np.complex128)
    if phi.shape != (n,):
        raise DimensionError(f"phase vector has shape {phi.shape}, expected ({n},)")
    if validate and np.max(np.abs(np.abs(phi) - 1.0)) > UNIT_MODULUS_TOL:
        raise DomainError("phase vector entries must have unit modulus")
    return phi


@dataclass(frozen=True)
class EffectiveChannels:
    """Diagonal blocks of the four effective channels at a fixed phase vector."""

    Hc_block: np.ndarray    # (M_r, M_t) user-side composite channel
    Ac_block: np.ndarray    # (M, M_t) path interference (direct + reflected)
    Ar_block: np.ndarray    # (M, M_t) four-path target echo
    Ao_block: np.ndarray    # (M, M_t) obstacle returns, zero when no obstacles


def build_comm_channel(ch: ChannelSet, phi: np.ndarray, validate: bool = True) -> np.ndarray:
    """User-side block: direct link plus the RIS-reflected link."""
    n = ch.H_cR.shape[0]
    phi = _check_phases(phi, n, validate)
    return ch.gamma_c_d * ch.H_k + ch.gamma_c_r * ((ch.H_Rk * phi[None, :]) @ ch.H_cR)


def build_pi_channel(ch: ChannelSet, phi: np.ndarray, validate: bool = True) -> np.ndarray:
    """Path-interference block: direct leakage plus RIS-reflected leakage."""
    n = ch.H_cR.shape[0]
    phi = _check_phases(phi, n, validate)
    return ch.gamma_DPI * ch.H_DPI \
        + ch.gamma_RPI * ((ch.G_rR.conj().T * phi[None, :]) @ ch.H_cR)


def build_sensing_channel(ch: ChannelSet, phi: np.ndarray, validate: bool = True) -> np.ndarray:
    """Four-path target echo block; the double-bounce path is quadratic in phi."""
    n = ch.H_cR.shape[0]
    phi = _check_phases(phi, n, validate)
    ht_row = ch.h_t.conj()[None, :]
    ris_to_pr = ch.G_rR.conj().T @ (phi * ch.g_Rt)          # (M,)
    ris_from_bs = (ch.g_Rt.conj() * phi) @ ch.H_cR          # (M_t,)
    return (
        ch.gamma_s1 * ch.g_t[:, None] @ ht_row
        + ch.gamma_s2 * ris_to_pr[:, None] @ ht_row
        + ch.gamma_s3 * ch.g_t[:, None] @ ris_from_bs[None, :]
        + ch.gamma_s4 * ris_to_pr[:, None] @ ris_from_bs[None, :]
    )


def build_obstacle_channel(ch: ChannelSet) -> np.ndarray:
    """Sum of rank-one obstacle returns; a zero block when the scene is clear."""
    m, m_t = ch.H_DPI.shape
    out = np.zeros((m, m_t), dtype=np.complex128)
    for g_ob, h_ob, gamma_ob in ch.obstacles:
        out += gamma_ob * g_ob[:, None] @ h_ob.conj()[None, :]
    return out


def build_effective_channels(ch: ChannelSet, phi: np.ndarray,
                             validate: bool = True) -> EffectiveChannels:
    return EffectiveChannels(
        Hc_block=build_comm_channel(ch, phi, validate),
        Ac_block=build_pi_channel(ch, phi, validate),
        Ar_block=build_sensing_channel(ch, phi, validate),
        Ao_block=build_obstacle_channel(ch),
    )
