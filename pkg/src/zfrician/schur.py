"""Block partitioning and Schur-complement machinery.

Everything here views the transmit side split into an intended block of
``v`` streams and an interfering block of ``n_t - v`` streams. The Schur
complement of the interfering block in the Gramian ``W = H^H H`` is the
conditional sample correlation of the intended columns given the others;
its distribution drives every ZF SNR result in this package.

The mean-correlation alignment condition ``H_d1 = H_d2 @ r_cond`` is what
makes that Schur complement central-Wishart, and equivalently makes the
mean-matched "virtual" central-Wishart model exact. ``check_condition``
measures it, and ``virtual_sc_residual`` / ``whitening_check`` expose two
independent equivalent diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:  # avoid a runtime import cycle with .channel
    from .channel import ChannelModel

__all__ = [
    "UlFactor",
    "GramianBlocks",
    "PartitionBlocks",
    "ConditionReport",
    "ul_decompose",
    "gramian_and_sc",
    "projection_eigencheck",
    "conditional_params",
    "check_condition",
    "virtual_scale",
    "virtual_sc_residual",
    "whitening_check",
]

# Numerical rank: singular-value ratio below this is treated as deficient.
RANK_TOL = 1e-10

# Default relative tolerance for the mean-correlation condition.
CONDITION_TOL = 1e-8


@dataclass
class UlFactor:
    """Upper-triangular factor with ``a @ a^H = r`` (strictly lower block zero)."""

    a: np.ndarray

    def blocks(self, v: int):
        """Return (a11, a12, a22) for the v | rest split; a21 is zero."""
        return self.a[:v, :v], self.a[:v, v:], self.a[v:, v:]


@dataclass
class GramianBlocks:
    """2x2 block view of one Gramian draw W = H^H H."""

    w11: np.ndarray
    w12: np.ndarray
    w21: np.ndarray
    w22: np.ndarray


@dataclass
class PartitionBlocks:
    """Model-level partition quantities for a given split v.

    ``r_cond`` is the regression matrix of the intended columns on the
    interfering ones, ``m_matrix`` the conditional-mean offset
    ``H_d1 - H_d2 @ r_cond``, and ``sc_corr`` the v x v Schur complement of
    the interfering block in r_tk (the conditional row covariance).
    """

    v: int
    r11: np.ndarray
    r12: np.ndarray
    r21: np.ndarray
    r22: np.ndarray
    r_cond: np.ndarray
    m_matrix: np.ndarray
    sc_corr: np.ndarray
    h_d1: np.ndarray
    h_d2: np.ndarray


@dataclass
class ConditionReport:
    """Residual of the mean-correlation alignment condition."""

    residual: float
    holds: bool
    tol: float


def _hermitize(x: np.ndarray) -> np.ndarray:
    return 0.5 * (x + x.conj().T)


def ul_decompose(r: np.ndarray) -> UlFactor:
    """Factor a Hermitian positive-definite r as a @ a^H, a upper triangular.

    Implemented as a Cholesky factorization under index reversal, which
    flips the usual lower-triangular factor into the upper orientation.
    """
    r = np.asarray(r, dtype=complex)
    if np.abs(r - r.conj().T).max() > 1e-10 * max(1.0, np.abs(r).max()):
        raise ValueError("matrix must be Hermitian")
    flip = np.flip  # a = J L J with L = chol(J r J)
    try:
        low = np.linalg.cholesky(flip(flip(r, 0), 1))
    except np.linalg.LinAlgError:
        raise np.linalg.LinAlgError("correlation matrix not positive definite") from None
    return UlFactor(a=flip(flip(low, 0), 1))


def gramian_and_sc(h: np.ndarray, v: int):
    """Gramian blocks and the v x v Schur complement for one channel draw.

    The complement is computed both as ``w11 - w12 w22^-1 w21`` and as the
    Hermitian form of the intended columns against the null-space projector
    of the interfering columns; the two must agree, which guards against
    ill-conditioned draws.

    Returns (GramianBlocks, gamma1).
    """
    h = np.asarray(h, dtype=complex)
    n_t = h.shape[1]
    if not 1 <= v < n_t:
        raise ValueError("need 1 <= v < n_t")
    sv = np.linalg.svd(h, compute_uv=False)
    if sv[-1] <= RANK_TOL * sv[0]:
        raise np.linalg.LinAlgError("channel matrix rank deficient")
    w = h.conj().T @ h
    w11, w12, w21, w22 = w[:v, :v], w[:v, v:], w[v:, :v], w[v:, v:]
    gamma1 = _hermitize(w11 - w12 @ np.linalg.solve(w22, w21))

    h1, h2 = h[:, :v], h[:, v:]
    q2 = np.eye(h.shape[0]) - h2 @ np.linalg.solve(h2.conj().T @ h2, h2.conj().T)
    gamma1_proj = _hermitize(h1.conj().T @ q2 @ h1)
    if np.abs(gamma1 - gamma1_proj).max() > 1e-9 * max(1.0, np.abs(gamma1).max()):
        raise np.linalg.LinAlgError("Schur-complement cross-check failed (ill-conditioned draw)")
    return GramianBlocks(w11, w12, w21, w22), gamma1


def projection_eigencheck(h2: np.ndarray) -> np.ndarray:
    """Eigenvalues (ascending) of the null-space projector of h2^H.

    For an n_r x (n_t - v) full-rank h2 these are n_t - v zeros and
    n_r - n_t + v ones.
    """
    h2 = np.asarray(h2, dtype=complex)
    sv = np.linalg.svd(h2, compute_uv=False)
    if sv[-1] <= RANK_TOL * sv[0]:
        raise np.linalg.LinAlgError("channel matrix rank deficient")
    q2 = np.eye(h2.shape[0]) - h2 @ np.linalg.solve(h2.conj().T @ h2, h2.conj().T)
    return np.linalg.eigvalsh(_hermitize(q2))


def conditional_params(model: "ChannelModel", v: int) -> PartitionBlocks:
    """Partition r_tk and the mean, and derive the conditional parameters."""
    n_t = model.n_t
    if not 1 <= v < n_t:
        raise ValueError("need 1 <= v < n_t")
    r = model.r_tk
    r11, r12, r21, r22 = r[:v, :v], r[:v, v:], r[v:, :v], r[v:, v:]
    try:
        np.linalg.cholesky(_hermitize(r22))
    except np.linalg.LinAlgError:
        raise np.linalg.LinAlgError("interfering-block correlation singular") from None
    r_cond = np.linalg.solve(r22, r21)
    h_d1, h_d2 = model.h_d[:, :v], model.h_d[:, v:]
    m_matrix = h_d1 - h_d2 @ r_cond
    sc_corr = _hermitize(r11 - r12 @ r_cond)
    return PartitionBlocks(
        v=v,
        r11=r11,
        r12=r12,
        r21=r21,
        r22=r22,
        r_cond=r_cond,
        m_matrix=m_matrix,
        sc_corr=sc_corr,
        h_d1=h_d1,
        h_d2=h_d2,
    )


def check_condition(model: "ChannelModel", v: int, tol: float = CONDITION_TOL) -> ConditionReport:
    """Measure the mean-correlation alignment H_d1 = H_d2 @ r_cond.

    The residual is relative to ||h_d||_F; a purely Rayleigh model
    (h_d = 0) always satisfies the condition.
    """
    blocks = conditional_params(model, v)
    residual = float(np.linalg.norm(blocks.m_matrix))
    holds = residual <= tol * float(np.linalg.norm(model.h_d))
    return ConditionReport(residual=residual, holds=holds, tol=tol)


def virtual_scale(model: "ChannelModel") -> np.ndarray:
    """Scale matrix of the mean-matched zero-mean (virtual) Gramian model.

    E{W} under the actual model equals n_r times this matrix, so a
    zero-mean Gaussian channel with this transmit covariance reproduces
    the Gramian mean exactly.
    """
    return _hermitize(model.r_tk + model.h_d.conj().T @ model.h_d / model.n_r)


def _sc_block(x: np.ndarray, v: int) -> np.ndarray:
    x11, x12, x21, x22 = x[:v, :v], x[:v, v:], x[v:, :v], x[v:, v:]
    try:
        sol = np.linalg.solve(x22, x21)
    except np.linalg.LinAlgError:
        raise np.linalg.LinAlgError("interfering-block correlation singular") from None
    return _hermitize(x11 - x12 @ sol)


def virtual_sc_residual(model: "ChannelModel", v: int) -> float:
    """Distance between the virtual and actual conditional covariances.

    Returns ||SC_v(virtual scale) - SC_v(r_tk)||_F, which is zero exactly
    when the mean-correlation condition holds.
    """
    return float(np.linalg.norm(_sc_block(virtual_scale(model), v) - _sc_block(model.r_tk, v)))


def whitening_check(model: "ChannelModel", v: int) -> float:
    """Norm of the first v mean columns after transmit-correlation whitening.

    Right-multiplying the channel by a^-H (a from ul_decompose of r_tk)
    whitens the rows; the condition holds exactly when the whitened mean
    has zero first-v columns.
    """
    a = ul_decompose(model.r_tk).a
    whitened_mean = model.h_d @ np.linalg.inv(a).conj().T
    return float(np.linalg.norm(whitened_mean[:, :v]))
