"""Time evolution, steady-state solvers and spectral analysis.

The integrator is an adaptive embedded Dormand-Prince 5(4) pair acting
on the column-stacked state.  Hermiticity is restored after every
accepted step (rho <- (rho + rho+)/2); the trace is conserved exactly
by linearity of a trace-preserving generator, and drift beyond 1e-9 is
treated as an integrator failure.  Positivity is never projected:
violations surface in the returned states and are the caller's signal
that tolerances were too loose.

Strongly detuned models carry fast coherences whose frequencies exceed
any step an explicit method can take for accuracy.  For a linear
generator this is benign: capping the step just below the stability
bound keeps those modes bounded while the slow (observable) dynamics
and the steady state remain accurate, because every eigenmode of the
generator is propagated independently.  Builders advertise their fast
scale via ``stiff_rate`` and the integrator caps the step accordingly.

Steady states come from the superoperator null space when the space is
small enough to materialize (dim <= 64) and from long-time relaxation
otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    ConvergenceError,
    DegenerateSteadyState,
    DimensionMismatch,
    IntegrationError,
)
from .linalg import dagger, unvec, vec_stack

#: dense superoperators are only materialized up to this state dimension
NULLSPACE_DIM_LIMIT = 64

#: fraction of the explicit stability bound used when a stiff scale is known
_STAB_MARGIN = 2.5


@dataclass
class LiouvillianAction:
    """A master-equation generator as a deterministic map rho -> drho/dt.

    ``superop`` is the dense (dim^2 x dim^2) column-stacking
    materialization, present when dim <= 64.  ``matvec`` is an
    optional fast path acting on column-stacked vectors.  ``rate_scale``
    is the characteristic damping rate used to scale residual
    tolerances; ``stiff_rate`` bounds the fastest frequency in the
    generator (0 for non-stiff models).
    """

    dim: int
    apply: Callable[[np.ndarray], np.ndarray]
    superop: np.ndarray | None = None
    matvec: Callable[[np.ndarray], np.ndarray] | None = None
    rate_scale: float = 1.0
    stiff_rate: float = 0.0
    meta: dict = field(default_factory=dict)

    def rhs_flat(self) -> Callable[[np.ndarray], np.ndarray]:
        if self.matvec is not None:
            return self.matvec
        if self.superop is not None:
            op = self.superop
            return lambda v: op @ v
        apply = self.apply
        d = self.dim
        return lambda v: apply(v.reshape((d, d), order="F")).reshape(-1, order="F")


@dataclass
class Trajectory:
    """Density matrices sampled on an ascending time grid (us)."""

    times: np.ndarray
    states: list
    metrics: dict = field(default_factory=dict)

    def final(self) -> np.ndarray:
        return self.states[-1]


@dataclass(frozen=True)
class SteadyStateResult:
    rho: np.ndarray
    elapsed: float        # model time integrated to reach the residual
    residual: float       # ||drho/dt||_F at the returned state


# ---------------------------------------------------------------------------
# Dormand-Prince 5(4)
# ---------------------------------------------------------------------------

_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_DP_E = _DP_B5 - _DP_B4


def _check_rho0(rho0: np.ndarray, dim: int) -> np.ndarray:
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (dim, dim):
        raise IntegrationError(f"initial state shape {rho0.shape}, expected ({dim}, {dim})")
    if abs(np.trace(rho0) - 1.0) > 1e-8 or np.abs(rho0 - dagger(rho0)).max() > 1e-8:
        raise IntegrationError("initial state is not a unit-trace hermitian matrix")
    return (rho0 + dagger(rho0)) / 2.0


def _resym(v: np.ndarray, dim: int) -> np.ndarray:
    r = v.reshape((dim, dim), order="F")
    return ((r + dagger(r)) / 2.0).reshape(-1, order="F")


def integrate(
    liouvillian: LiouvillianAction,
    rho0: np.ndarray,
    times,
    rel_tol: float = 1e-8,
    abs_tol: float = 1e-12,
    max_step: float | None = None,
    max_steps: int = 50_000_000,
) -> Trajectory:
    """Propagate a density matrix and sample it at the requested times.

    Adaptive Dormand-Prince 5(4) with an elementwise error weight
    ``abs_tol + rel_tol * |entry|``.  Entries smaller than ``abs_tol``
    are kept bounded rather than relatively accurate, which is what
    makes stiff detuned models affordable (see module docstring).
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 1 or np.any(np.diff(times) < 0):
        raise IntegrationError("times must be a non-empty ascending 1-d grid")
    dim = liouvillian.dim
    rho0 = _check_rho0(rho0, dim)
    rhs = liouvillian.rhs_flat()

    if max_step is None:
        max_step = _STAB_MARGIN / liouvillian.stiff_rate if liouvillian.stiff_rate > 0 else np.inf

    t = float(times[0])
    y = rho0.reshape(-1, order="F").copy()
    out = [unvec(y.copy())]
    trace0 = np.real(np.trace(rho0))

    span = max(times[-1] - times[0], 0.0)
    if span == 0.0:
        return Trajectory(times=times, states=[unvec(y.copy()) for _ in times])

    scale = max(liouvillian.rate_scale, 1e-300)
    h = min(span / 100.0, 0.1 / scale, max_step)
    h_min = max(span, 1.0 / scale) * 1e-14

    k = np.empty((7, y.size), dtype=complex)
    k[0] = rhs(y)
    states_iter = iter(range(1, times.size))
    next_i = next(states_iter, None)

    steps = 0
    just_rejected = False
    while next_i is not None:
        t_target = float(times[next_i])
        clipped = False
        if t + h >= t_target:
            h_use = t_target - t
            clipped = True
        else:
            h_use = h
        if h_use <= 0.0:
            # duplicate time point
            out.append(unvec(y.copy()))
            next_i = next(states_iter, None)
            continue

        for i in range(1, 7):
            k[i] = rhs(y + (h_use * _DP_A[i]) @ k[:i])
        y5 = y + (h_use * _DP_B5) @ k
        err_vec = (h_use * _DP_E) @ k

        sc = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y5))
        err = float(np.sqrt(np.mean((np.abs(err_vec) / sc) ** 2)))

        if err <= 1.0:
            t = t + h_use
            y = _resym(y5, dim)
            # FSAL: stage 7 was evaluated at y5; the symmetrization shift
            # is pure rounding noise, so k7 serves as the next step's k1
            k[0] = k[6]
            if clipped and abs(t - t_target) <= 1e-12 * max(1.0, abs(t_target)):
                out.append(unvec(y.copy()))
                next_i = next(states_iter, None)
            # no growth right after a rejection: prevents limit cycling
            # when the step is pinned by stability rather than accuracy
            growth = 1.0 if just_rejected else 2.0
            factor = min(growth, 0.9 * err ** -0.2) if err > 0.0 else growth
            just_rejected = False
        else:
            factor = max(0.2, 0.9 * err ** -0.2)
            just_rejected = True
        h = min(max(h * max(0.2, factor), h_min), max_step)
        if h <= h_min and err > 1.0:
            raise IntegrationError(
                f"step-size underflow at t={t:g} (err={err:g}); generator too stiff "
                "for the requested tolerances"
            )
        steps += 1
        if steps > max_steps:
            raise IntegrationError(f"exceeded {max_steps} steps before t={times[-1]:g}")

    drift = abs(np.real(np.trace(out[-1])) - trace0)
    if drift > 1e-9:
        raise IntegrationError(f"trace drifted by {drift:g} over the run")
    return Trajectory(times=times, states=out)


# ---------------------------------------------------------------------------
# steady states
# ---------------------------------------------------------------------------

def _superop_matrix(liouvillian: LiouvillianAction):
    """Dense or sparse superoperator for null-space work."""
    spm = liouvillian.meta.get("sparse_superop")
    if liouvillian.superop is not None and (spm is None or liouvillian.dim ** 2 <= 1024):
        return liouvillian.superop, False
    if spm is not None:
        return spm, True
    if liouvillian.dim > NULLSPACE_DIM_LIMIT:
        raise DimensionMismatch(
            f"dim {liouvillian.dim} > {NULLSPACE_DIM_LIMIT}: use steady_state_longtime"
        )
    # materialize column by column from apply()
    d = liouvillian.dim
    cols = []
    basis = np.zeros((d, d), dtype=complex)
    for j in range(d * d):
        basis.flat[:] = 0.0
        basis[j % d, j // d] = 1.0  # column-stacking order
        cols.append(liouvillian.apply(basis).reshape(-1, order="F"))
    return np.stack(cols, axis=1), False


_SEP_TOL = 1e-10


def steady_state_nullspace(liouvillian: LiouvillianAction) -> np.ndarray:
    """Unique trace-one state in the generator's null space.

    Requires dim <= 64.  Raises :class:`DegenerateSteadyState` if the
    null space is not one-dimensional or the zero eigenvalue is not
    separated from the rest of the spectrum by 1e-10 ||L||.
    """
    if liouvillian.dim > NULLSPACE_DIM_LIMIT:
        raise DimensionMismatch(
            f"dim {liouvillian.dim} > {NULLSPACE_DIM_LIMIT}: use steady_state_longtime"
        )
    mat, is_sparse = _superop_matrix(liouvillian)
    n2 = liouvillian.dim ** 2

    if not is_sparse and n2 <= 1024:
        w, v = scipy.linalg.eig(np.asarray(mat))
        scale = float(np.abs(w).max())
        order = np.argsort(np.abs(w))
        if np.abs(w[order[1]]) <= _SEP_TOL * scale:
            raise DegenerateSteadyState(
                "zero eigenvalue is degenerate or not separated from the spectrum"
            )
        null_vec = v[:, order[0]]
    else:
        spm = sp.csc_matrix(mat)
        scale = float(spla.norm(spm))
        v0 = np.full(n2, 1.0 / np.sqrt(n2), dtype=complex)
        # small real shift keeps the shift-invert factorization nonsingular
        w, v = spla.eigs(spm, k=2, sigma=1e-8 * scale, which="LM", v0=v0, tol=1e-12)
        order = np.argsort(np.abs(w))
        if np.abs(w[order[1]]) <= _SEP_TOL * scale:
            raise DegenerateSteadyState(
                "zero eigenvalue is degenerate or not separated from the spectrum"
            )
        null_vec = v[:, order[0]]

    rho = unvec(null_vec)
    rho = (rho + dagger(rho)) / 2.0
    tr = np.real(np.trace(rho))
    if abs(tr) < 1e-12:
        raise DegenerateSteadyState("null vector is traceless; no stationary state found")
    rho = rho / tr
    if np.abs(rho - dagger(rho)).max() > 1e-10:
        raise DegenerateSteadyState("stationary state failed the hermiticity check")
    return rho


def steady_state_longtime(
    liouvillian: LiouvillianAction,
    rho0: np.ndarray,
    tol: float = 1e-8,
    max_time: float | None = None,
    rel_tol: float | None = None,
    abs_tol: float | None = None,
) -> SteadyStateResult:
    """Relax toward the steady state until ||drho/dt||_F <= tol * rate_scale.

    The per-chunk horizon grows geometrically, so critically slow
    points (a/b -> 1) fail fast with a :class:`ConvergenceError` once
    ``max_time`` (default 1e5 / rate_scale) is exhausted.  Integration
    tolerances default to a decade below the residual target; they are
    the accuracy floor the residual can reach.
    """
    scale = max(liouvillian.rate_scale, 1e-300)
    if max_time is None:
        max_time = 1e5 / scale
    if rel_tol is None:
        rel_tol = max(1e-12, tol / 10.0)
    if abs_tol is None:
        abs_tol = max(1e-14, tol / 100.0)
    rho = _check_rho0(rho0, liouvillian.dim)
    rhs = liouvillian.rhs_flat()
    elapsed = 0.0
    chunk = 2.0 / scale
    while True:
        res = float(np.linalg.norm(rhs(rho.reshape(-1, order="F"))))
        if res <= tol * scale:
            return SteadyStateResult(rho=rho, elapsed=elapsed, residual=res)
        if elapsed >= max_time:
            raise ConvergenceError(
                f"no steady state after t={elapsed:g} (residual {res:g} > {tol * scale:g}); "
                "expect relaxation to slow as (a/b - 1)^-2 near matched drive"
            )
        chunk = min(chunk * 1.5, max_time - elapsed, 64.0 / scale)
        traj = integrate(
            liouvillian,
            rho,
            np.array([0.0, chunk]),
            rel_tol=rel_tol,
            abs_tol=abs_tol,
        )
        rho = traj.final()
        elapsed += chunk


def spectral_gap(liouvillian: LiouvillianAction) -> float:
    """Smallest |Re lambda| over the nonzero eigenvalues of the generator.

    Its inverse is the slowest relaxation time.  Requires a
    materializable superoperator; raises on a degenerate zero mode.
    """
    if liouvillian.dim > NULLSPACE_DIM_LIMIT:
        raise DimensionMismatch(
            f"dim {liouvillian.dim} > {NULLSPACE_DIM_LIMIT}: spectrum not materializable"
        )
    mat, is_sparse = _superop_matrix(liouvillian)
    if is_sparse:
        mat = np.asarray(mat.todense())
    w = np.linalg.eigvals(np.asarray(mat))
    scale = float(np.abs(w).max())
    zero = np.abs(w) <= _SEP_TOL * scale
    if int(zero.sum()) != 1:
        raise DegenerateSteadyState(
            f"expected exactly one zero eigenvalue, found {int(zero.sum())}"
        )
    return float(np.min(np.abs(w[~zero].real)))
