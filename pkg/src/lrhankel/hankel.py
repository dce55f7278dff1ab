"""Structure-exploiting Hankel machinery.

An n-by-n Hankel matrix is parameterized by the length-(2n-1) vector of its
anti-diagonal values, [H]_{k,l} = z[k+l]. All hot-path operations here work
on that parameter vector: matvecs run through FFT convolution, anti-diagonal
reductions of rank factorizations run through batched FFT convolutions, and
the data-consistent projection is the anti-diagonal mean with observed
entries overwritten exactly. Dense matrices appear only in oracle helpers.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .dense_guard import ensure_dense_allowed
from .lowrank import LinearOperator, LowRankFactors


@dataclass(frozen=True)
class HankelVector:
    """Anti-diagonal parameter vector of an n-by-n Hankel matrix."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"Hankel dimension must be at least 2, got {self.n}")
        v = np.array(self.values, dtype=np.complex128, copy=True).reshape(-1)
        if v.shape != (2 * self.n - 1,):
            raise ValueError(
                f"parameter vector has length {v.shape[0]}, expected "
                f"2n-1 = {2 * self.n - 1} for n = {self.n}"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_signal(cls, x) -> "HankelVector":
        """Wrap a uniformly sampled signal; its length must be odd."""
        x = np.asarray(x).reshape(-1)
        if x.shape[0] < 3 or x.shape[0] % 2 == 0:
            raise ValueError(
                f"signal length must be odd and at least 3 to define a square "
                f"Hankel matrix, got length {x.shape[0]}"
            )
        return cls((x.shape[0] + 1) // 2, x)

    @classmethod
    def zeros(cls, n: int) -> "HankelVector":
        return cls(n, np.zeros(2 * n - 1, dtype=np.complex128))


@dataclass(frozen=True)
class ObservationSet:
    """Observed coordinates of the length-(2n-1) signal and their values."""

    n: int
    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"Hankel dimension must be at least 2, got {self.n}")
        idx = np.array(self.indices, dtype=np.int64, copy=True).reshape(-1)
        vals = np.array(self.values, dtype=np.complex128, copy=True).reshape(-1)
        if idx.shape != vals.shape:
            raise ValueError(
                f"{idx.shape[0]} indices but {vals.shape[0]} observed values"
            )
        if idx.size:
            if idx[0] < 0 or idx[-1] > 2 * self.n - 2:
                raise ValueError(f"indices must lie in [0, {2 * self.n - 2}]")
            if np.any(np.diff(idx) <= 0):
                raise ValueError("indices must be strictly increasing")
        idx.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", vals)

    @property
    def num_observed(self) -> int:
        return self.indices.shape[0]


@lru_cache(maxsize=None)
def antidiag_weights(n: int) -> np.ndarray:
    """w[j] = number of positions (k, l) with k + l = j in an n-by-n matrix."""
    j = np.arange(2 * n - 1)
    w = np.minimum(np.minimum(j, 2 * n - 2 - j) + 1, n)
    w.setflags(write=False)
    return w


@lru_cache(maxsize=None)
def fft_length(n: int) -> int:
    # smallest power of two holding the length-(3n-2) linear convolution,
    # fixed at >= 2(2n-1) so one plan size serves every product at this n
    return 1 << (4 * n - 3).bit_length()


def hankel_dense(h: HankelVector) -> np.ndarray:
    """Dense n-by-n Hankel matrix. Oracle and debugging only, never hot paths."""
    ensure_dense_allowed(h.n, "hankel_dense")
    k = np.arange(h.n)
    return h.values[k[:, None] + k[None, :]]


def _correlate(zf: np.ndarray, v: np.ndarray, n: int, length: int) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    if v.shape != (n,):
        raise ValueError(f"vector has shape {v.shape}, expected ({n},)")
    vf = np.fft.fft(v[::-1], length)
    return np.fft.ifft(zf * vf)[n - 1 : 2 * n - 1]


def hankel_matvec(h: HankelVector, v: np.ndarray) -> np.ndarray:
    """H(z) @ v through FFT convolution, O(n log n) time."""
    length = fft_length(h.n)
    return _correlate(np.fft.fft(h.values, length), v, h.n, length)


def hankel_adjoint_matvec(h: HankelVector, v: np.ndarray) -> np.ndarray:
    """H(z)* @ v. Hankel matrices are complex symmetric, so H* = conj(H)."""
    length = fft_length(h.n)
    return _correlate(np.fft.fft(np.conj(h.values), length), v, h.n, length)


def hankel_operator(h: HankelVector) -> LinearOperator:
    """Matvec contract for H(z) with the parameter transform cached."""
    n = h.n
    length = fft_length(n)
    zf = np.fft.fft(h.values, length)
    zcf = np.fft.fft(np.conj(h.values), length)
    return LinearOperator(
        n=n,
        apply=lambda v: _correlate(zf, v, n, length),
        apply_adjoint=lambda v: _correlate(zcf, v, n, length),
        materialize=lambda: hankel_dense(h),
    )


def antidiag_sums_lowrank(f: LowRankFactors) -> np.ndarray:
    """Anti-diagonal sums of U diag(sigma) V*, in O(n r log n).

    Each rank-one term contributes the linear convolution of sigma_r * u_r
    with conj(v_r); the terms are summed in the transform domain.
    """
    n = f.n
    if f.rank == 0:
        return np.zeros(2 * n - 1, dtype=np.complex128)
    length = fft_length(n)
    uf = np.fft.fft(f.U * f.sigma, length, axis=0)
    vf = np.fft.fft(np.conj(f.V), length, axis=0)
    return np.fft.ifft((uf * vf).sum(axis=1))[: 2 * n - 1]


def antidiag_sums_dense(X: np.ndarray) -> np.ndarray:
    """Anti-diagonal sums of a dense square matrix (oracle helper)."""
    X = np.asarray(X)
    n = X.shape[0]
    if X.shape != (n, n):
        raise ValueError(f"expected a square matrix, got shape {X.shape}")
    flipped = np.flipud(X)
    return np.array(
        [flipped.diagonal(j - n + 1).sum() for j in range(2 * n - 1)],
        dtype=np.complex128,
    )


def project_dense_to_hankel(X: np.ndarray, obs: Optional[ObservationSet] = None) -> HankelVector:
    """Closest data-consistent Hankel matrix to a dense X (oracle entry point).

    Unconstrained coordinates take the anti-diagonal mean; observed
    coordinates are copied from the observations exactly.
    """
    n = X.shape[0]
    z = antidiag_sums_dense(X) / antidiag_weights(n)
    if obs is not None:
        if obs.n != n:
            raise ValueError(f"observations are for n={obs.n}, matrix has n={n}")
        z[obs.indices] = obs.values
    return HankelVector(n, z)


def project_hankel_blend(
    h: HankelVector,
    f: LowRankFactors,
    delta2: float,
    obs: ObservationSet,
) -> HankelVector:
    """Data-consistent Hankel projection of (1-delta2)*H(z) + delta2*L.

    Unobserved coordinate j of the blend has anti-diagonal mean
    (1-delta2)*z[j] + delta2*sums(L)[j]/w[j]; observed coordinates are
    overwritten last so they match the data bit for bit. The blended matrix
    is never formed densely.
    """
    if not 0.0 < delta2 < 1.0:
        raise ValueError(f"delta2 must lie in (0, 1), got {delta2}")
    if f.n != h.n or obs.n != h.n:
        raise ValueError(
            f"dimension mismatch: h has n={h.n}, factors n={f.n}, observations n={obs.n}"
        )
    means = antidiag_sums_lowrank(f) / antidiag_weights(h.n)
    out = h.values - delta2 * (h.values - means)
    out[obs.indices] = obs.values
    return HankelVector(h.n, out)


def hankel_frobenius_sq(h: HankelVector) -> float:
    """Squared Frobenius norm of H(z): sum_j w[j] |z[j]|^2."""
    return float(np.sum(antidiag_weights(h.n) * np.abs(h.values) ** 2))


def inner_product_lowrank_hankel(f: LowRankFactors, h: HankelVector) -> complex:
    """Frobenius inner product <L, H(z)> = trace(H(z)* L), no densification."""
    if f.n != h.n:
        raise ValueError(f"dimension mismatch: factors n={f.n}, h n={h.n}")
    return complex(np.sum(antidiag_sums_lowrank(f) * np.conj(h.values)))
