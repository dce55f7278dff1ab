"""Alternating projected descent on the rank-R / data-consistent Hankel split.

The recovery problem is min 0.5*||L - H||_F^2 over rank-<=R matrices L and
data-consistent Hankel matrices H. One iteration relaxes each block toward
the other and projects back:

    L_{t+1} = P_rank( (1-delta1) L_t + delta1 H_t )
    H_{t+1} = P_data( (1-delta2) H_t + delta2 L_{t+1} )

Both projections run matrix-free: L lives as factors, H as its parameter
vector. The accelerated variant takes both half-steps from an extrapolated
Hankel iterate with the classic momentum schedule
k_{t+1} = (sqrt(1 + 4 k_t^2) + 1) / 2, and the solve loop resets the
momentum whenever the objective rises (adaptive restart). Every iterate
stays feasible, because the data-consistent set is affine and extrapolation
along it cannot leave it.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .hankel import (
    HankelVector,
    ObservationSet,
    antidiag_weights,
    hankel_dense,
    hankel_frobenius_sq,
    hankel_operator,
    inner_product_lowrank_hankel,
    project_hankel_blend,
)
from .lowrank import (
    LinearOperator,
    LowRankFactors,
    lowrank_adjoint_matvec,
    lowrank_dense,
    lowrank_matvec,
    project_rank,
)


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of a recovery run.

    Step sizes must lie strictly inside (0, 1); values of 0.9999 work well
    and are the defaults. `tol` bounds the relative Frobenius change of the
    Hankel iterate used as the stopping rule. `bound`, when set, clamps the
    magnitude of every unobserved coordinate after each projection.
    """

    rank: int
    delta1: float = 0.9999
    delta2: float = 0.9999
    tol: float = 1e-4
    max_iter: int = 1000
    accelerated: bool = False
    bound: float | None = None
    svd_tol: float = 1e-10
    svd_seed: int = 0

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError(f"rank must be at least 1, got {self.rank}")
        for name in ("delta1", "delta2"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie strictly in (0, 1), got {value}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be at least 1, got {self.max_iter}")
        if self.bound is not None and not self.bound > 0:
            raise ValueError(f"bound must be positive when set, got {self.bound}")


@dataclass(frozen=True)
class IterateState:
    """State after t iterations; all fields are feasible by construction."""

    factors: LowRankFactors
    z: HankelVector
    z_prev: HankelVector
    z_tilde: HankelVector
    momentum: float
    t: int


@dataclass(frozen=True)
class RecoveryResult:
    """Outcome of a solve.

    `objective_history[k]` is the objective after k iterations (entry 0 is
    the initial state), `relchange_history[k]` the stopping statistic of
    iteration k+1, so the lists have lengths iterations+1 and iterations.
    """

    z_hat: np.ndarray
    iterations: int
    converged: bool
    objective_history: np.ndarray = field(repr=False)
    relchange_history: np.ndarray = field(repr=False)


def blend_operator(f: LowRankFactors, h: HankelVector, delta1: float) -> LinearOperator:
    """(1-delta1)*L + delta1*H(z) as a matvec contract, O(n r + n log n) per apply."""
    if f.n != h.n:
        raise ValueError(f"dimension mismatch: factors n={f.n}, h n={h.n}")
    hop = hankel_operator(h)
    c = 1.0 - delta1

    def apply(v):
        return c * lowrank_matvec(f, v) + delta1 * hop.apply(v)

    def apply_adjoint(v):
        return c * lowrank_adjoint_matvec(f, v) + delta1 * hop.apply_adjoint(v)

    return LinearOperator(
        n=h.n,
        apply=apply,
        apply_adjoint=apply_adjoint,
        materialize=lambda: c * lowrank_dense(f) + delta1 * hankel_dense(h),
    )


def objective(f: LowRankFactors, h: HankelVector) -> float:
    """0.5 * ||L - H(z)||_F^2 evaluated factor-wise, clamped at 0 for roundoff."""
    value = 0.5 * (
        f.frobenius_sq()
        - 2.0 * inner_product_lowrank_hankel(f, h).real
        + hankel_frobenius_sq(h)
    )
    return max(value, 0.0)


def _clamped(h: HankelVector, bound: float, obs: ObservationSet) -> HankelVector:
    """Scale unobserved coordinates down to magnitude <= bound."""
    values = np.array(h.values)
    mags = np.abs(values)
    over = mags > bound
    if np.any(over):
        values[over] *= bound / mags[over]
        values[obs.indices] = obs.values
        return HankelVector(h.n, values)
    return h


def init_state(obs: ObservationSet, cfg: SolverConfig) -> IterateState:
    """Feasible start: zero-fill the unobserved coordinates, then rank-project."""
    z0 = np.zeros(2 * obs.n - 1, dtype=np.complex128)
    z0[obs.indices] = obs.values
    h0 = HankelVector(obs.n, z0)
    f0 = project_rank(hankel_operator(h0), cfg.rank, tol=cfg.svd_tol, seed=cfg.svd_seed)
    return IterateState(factors=f0, z=h0, z_prev=h0, z_tilde=h0, momentum=1.0, t=0)


def pgd_step(state: IterateState, obs: ObservationSet, cfg: SolverConfig) -> IterateState:
    """One plain descent iteration."""
    f1 = project_rank(
        blend_operator(state.factors, state.z, cfg.delta1),
        cfg.rank,
        tol=cfg.svd_tol,
        seed=cfg.svd_seed,
    )
    z1 = project_hankel_blend(state.z, f1, cfg.delta2, obs)
    if cfg.bound is not None:
        z1 = _clamped(z1, cfg.bound, obs)
    return IterateState(factors=f1, z=z1, z_prev=state.z, z_tilde=z1, momentum=1.0, t=state.t + 1)


def fista_step(state: IterateState, obs: ObservationSet, cfg: SolverConfig) -> IterateState:
    """One accelerated iteration.

    Both half-steps are taken from the extrapolated iterate z_tilde: the
    rank projection pulls toward H(z_tilde), and the data projection starts
    at z_tilde as well. Centering the data step at z instead (keeping
    z_tilde only in its gradient) injects the momentum term with a negative
    sign and empirically diverges once the momentum coefficient grows, so
    that variant is not used. With momentum frozen at 1 the step reduces to
    pgd_step exactly. Extrapolation keeps observed coordinates exact; when
    a magnitude bound is active it is applied after the extrapolation too.
    """
    f1 = project_rank(
        blend_operator(state.factors, state.z_tilde, cfg.delta1),
        cfg.rank,
        tol=cfg.svd_tol,
        seed=cfg.svd_seed,
    )
    z1 = project_hankel_blend(state.z_tilde, f1, cfg.delta2, obs)
    if cfg.bound is not None:
        z1 = _clamped(z1, cfg.bound, obs)
    k_next = (math.sqrt(1.0 + 4.0 * state.momentum**2) + 1.0) / 2.0
    coeff = (state.momentum - 1.0) / k_next
    z_tilde = HankelVector(obs.n, z1.values + coeff * (z1.values - state.z.values))
    if cfg.bound is not None:
        z_tilde = _clamped(z_tilde, cfg.bound, obs)
    return IterateState(factors=f1, z=z1, z_prev=state.z, z_tilde=z_tilde, momentum=k_next, t=state.t + 1)


def solve(obs: ObservationSet, cfg: SolverConfig) -> RecoveryResult:
    """Run the configured iteration until the stopping rule or max_iter.

    Stops when the weighted relative change of the Hankel iterate, which
    equals ||H_{t+1} - H_t||_F / ||H_t||_F of the dense matrices, drops to
    `tol`. A zero-norm iterate counts as converged only when the update is
    exactly zero too. On the accelerated path the momentum is restarted
    (k reset to 1, extrapolation collapsed onto the current iterate)
    whenever the objective increases; without this safeguard the momentum
    recursion oscillates and can diverge on this nonconvex problem.
    """
    weights = antidiag_weights(obs.n)
    step = fista_step if cfg.accelerated else pgd_step
    state = init_state(obs, cfg)
    objective_history = [objective(state.factors, state.z)]
    relchange_history = []
    converged = False

    for _ in range(cfg.max_iter):
        previous = state.z.values
        state = step(state, obs, cfg)
        current = objective(state.factors, state.z)
        if cfg.accelerated and current > objective_history[-1]:
            state = replace(state, momentum=1.0, z_tilde=state.z)
        objective_history.append(current)
        num = math.sqrt(float(np.sum(weights * np.abs(state.z.values - previous) ** 2)))
        den = math.sqrt(float(np.sum(weights * np.abs(previous) ** 2)))
        if den > 0.0:
            rel = num / den
        else:
            rel = 0.0 if num == 0.0 else math.inf
        relchange_history.append(rel)
        if rel <= cfg.tol:
            converged = True
            break

    return RecoveryResult(
        z_hat=np.array(state.z.values),
        iterations=state.t,
        converged=converged,
        objective_history=np.asarray(objective_history),
        relchange_history=np.asarray(relchange_history),
    )
