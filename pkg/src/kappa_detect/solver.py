"""Iterative solver for the max-min secant preservation problem.

For a set S of unit secants and a target dimension k, the problem is to find
an n-by-k matrix P with orthonormal columns maximizing min_{s in S} |P^T s|.
The optimum value (the kappa value) lies in [0, 1] and equals 1 exactly when
some k-dimensional subspace contains every secant.

The problem is non-convex, so the solver is a local scheme: at each step it
finds the currently worst-preserved secant and tilts the frame toward it,
with a diminishing step size, keeping the best iterate seen.  Restarts from
independent random frames probe different local optima.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _fast
from .errors import DegenerateSecantSetError, DimensionError, RankError
from .geometry import SecantSet

_MASK64 = (1 << 64) - 1

_ORTHO_TOL = 1e-8


def derive_seed(*parts: int) -> int:
    """Deterministically mix integers into a 64-bit seed.

    Used to give trials, dimensions, restarts, unlabeled points and runs
    their own independent RNG streams so results do not depend on
    evaluation order.
    """
    entropy = [int(p) & _MASK64 for p in parts]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class SolverConfig:
    """Step size, iteration budget and stopping rule for the solver.

    Each solve runs two phases.  An exploration phase takes constant steps
    of `step_size`, wandering across nearby balance points while recording
    the best frame seen.  A polish phase then restarts from that best frame
    with a reduced step, halving the step (and re-centering on the best
    frame) whenever `patience` consecutive iterations fail to improve the
    best kappa by `convergence_tol`; it stops once the step underflows
    `step_size * 1e-7` or the `max_iters` budget is spent.  The decay on
    stagnation pins the returned kappa down to roughly `convergence_tol`,
    which seeded reproducibility of profiles depends on.
    """

    step_size: float = 0.1
    max_iters: int = 2000
    convergence_tol: float = 1e-5
    patience: int = 30
    seed: int = 0

    def __post_init__(self):
        if self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.convergence_tol <= 0:
            raise ValueError("convergence_tol must be positive")
        if self.patience < 1:
            raise ValueError("patience must be positive")


@dataclass
class Projection:
    """An n-by-k matrix with orthonormal columns."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2:
            raise DimensionError("projection matrix must be 2-d")
        n, k = m.shape
        if not 1 <= k <= n:
            raise DimensionError(f"target dimension {k} not in [1, {n}]")
        gram = m.T @ m
        if not np.allclose(gram, np.eye(k), atol=_ORTHO_TOL):
            raise ValueError("projection columns are not orthonormal")
        self.matrix = m

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def k(self) -> int:
        return self.matrix.shape[1]


def orthonormalize(matrix: np.ndarray) -> Projection:
    """Orthonormalize columns, preserving their span.

    QR-based; signs are fixed so every output column has nonnegative dot
    product with the corresponding input column, which makes the result
    unique and reproducible.
    """
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionError("input must be a 2-d matrix")
    n, k = a.shape
    if not 1 <= k <= n:
        raise DimensionError(f"cannot orthonormalize a {n}x{k} matrix")
    q, r = np.linalg.qr(a)
    diag = np.diagonal(r)
    scale = np.abs(diag).max(initial=0.0)
    tol = max(n, k) * np.finfo(np.float64).eps * scale
    if scale == 0.0 or np.any(np.abs(diag) <= tol):
        raise RankError(f"matrix has numerical rank below {k}")
    q = q * np.where(diag < 0, -1.0, 1.0)
    return Projection(q)


def random_projection(n: int, k: int, seed: int) -> Projection:
    """Orthonormal basis of a uniformly random k-dimensional subspace of R^n.

    Deterministic for fixed (n, k, seed).
    """
    if not 1 <= k <= n:
        raise DimensionError(f"target dimension {k} not in [1, {n}]")
    rng = np.random.default_rng(seed & _MASK64)
    return orthonormalize(rng.standard_normal((n, k)))


def kappa_of(p: Projection, secants: SecantSet) -> float:
    """Length of the worst-preserved secant under p (in [0, 1])."""
    if secants.count == 0:
        raise DegenerateSecantSetError("empty secant set")
    if secants.ambient_dim != p.n:
        raise DimensionError(
            f"secants live in R^{secants.ambient_dim}, projection in R^{p.n}"
        )
    return float(np.linalg.norm(secants.vectors @ p.matrix, axis=1).min())


def _spanning_frame(directions: np.ndarray, k: int) -> np.ndarray | None:
    """If the secant directions span at most k dimensions, return an
    orthonormal n-by-k frame containing that span (kappa is then exactly 1).

    Works on the n-by-n Gram matrix so the cost is independent of the
    number of secants.
    """
    gram = directions.T @ directions
    eigvals, eigvecs = np.linalg.eigh(gram)
    eigvals = eigvals[::-1]
    eigvecs = eigvecs[:, ::-1]
    scale = max(eigvals[0], 0.0)
    tol = max(directions.shape) * np.finfo(np.float64).eps * np.sqrt(scale)
    rank = int(np.count_nonzero(np.sqrt(np.maximum(eigvals, 0.0)) > tol))
    if rank <= k:
        return np.ascontiguousarray(eigvecs[:, :k])
    return None


def best_sampled_frame(
    directions: np.ndarray,
    k: int,
    rng: np.random.Generator,
    count: int = 32,
    basis: np.ndarray | None = None,
) -> np.ndarray:
    """Draw `count` random orthonormal frames and return the one with the
    largest worst-secant projection.

    A cheap global scan that seats the iterative climb near a good basin;
    candidates are expressed in `basis` coordinates when given, so callers
    can keep the scan equivariant under rigid motions of the data.
    """
    n = directions.shape[1]
    frames = []
    for _ in range(count):
        q, r = np.linalg.qr(rng.standard_normal((n, k)))
        frames.append(q * np.where(np.diagonal(r) < 0, -1.0, 1.0))
    stacked = np.hstack(frames)
    if basis is not None:
        stacked = basis @ stacked
    proj = directions @ stacked
    sq = (proj * proj).reshape(len(directions), count, k).sum(axis=2)
    best = int(sq.min(axis=0).argmax())
    return np.ascontiguousarray(stacked[:, best * k : (best + 1) * k])


def _tilt_step(directions, p, sp, norms, alpha, rescue):
    """One solver step: tilt the frame toward the worst-preserved secant."""
    i = int(norms.argmin())  # ties resolve to the lowest index
    s_star = directions[i]
    c = sp[i]
    cn2 = float(c @ c)
    if cn2 > 0.0:
        # Rank-one tilt, then exact symmetric re-orthonormalization using
        # M^T M = I + (2a + a^2) c c^T.
        m = p + alpha * np.outer(s_star, c)
        beta = 2.0 * alpha + alpha * alpha
        gamma = (1.0 / np.sqrt(1.0 + beta * cn2) - 1.0) / cn2
        p = m + gamma * np.outer(m @ c, c)
    else:
        p = orthonormalize(p + alpha * np.outer(s_star, rescue)).matrix
    sp = directions @ p
    norms = np.sqrt(np.einsum("ij,ij->i", sp, sp))
    return p, sp, norms, float(norms.min())


def _solve_loop_numpy(directions, p0, cfg, rescue, explore_iters, collect_trace):
    p = p0
    sp = directions @ p
    norms = np.sqrt(np.einsum("ij,ij->i", sp, sp))
    best_kappa = float(norms.min())
    best_p = p
    trace = [] if collect_trace else None

    it = 0
    while it < explore_iters:
        p, sp, norms, kappa = _tilt_step(
            directions, p, sp, norms, cfg.step_size, rescue
        )
        if kappa > best_kappa:
            best_kappa = kappa
            best_p = p
        if trace is not None:
            trace.append(best_kappa)
        it += 1

    # Polish: restart from the incumbent with a reduced step, halving (and
    # re-centering on the incumbent) whenever progress stalls.
    alpha = cfg.step_size / 4.0
    alpha_floor = cfg.step_size * 1e-7
    p = best_p
    sp = directions @ p
    norms = np.sqrt(np.einsum("ij,ij->i", sp, sp))
    stall_ref = best_kappa
    stall = 0
    while it < cfg.max_iters:
        p, sp, norms, kappa = _tilt_step(directions, p, sp, norms, alpha, rescue)
        if kappa > best_kappa:
            best_kappa = kappa
            best_p = p
        if trace is not None:
            trace.append(best_kappa)
        it += 1
        if best_kappa - stall_ref >= cfg.convergence_tol:
            stall_ref = best_kappa
            stall = 0
        else:
            stall += 1
            if stall >= cfg.patience:
                alpha *= 0.5
                stall = 0
                if alpha < alpha_floor:
                    break
                p = best_p
                sp = directions @ p
                norms = np.sqrt(np.einsum("ij,ij->i", sp, sp))

    return best_p, best_kappa, (np.asarray(trace) if trace is not None else None)


def _solve_single(
    directions: np.ndarray,
    k: int,
    cfg: SolverConfig,
    seed: int,
    init: np.ndarray | None,
    collect_trace: bool,
):
    rng = np.random.default_rng(seed & _MASK64)
    if init is None:
        p = best_sampled_frame(directions, k, rng)
        explore_iters = min(100, cfg.max_iters // 4)
    else:
        # An explicit init requests local refinement: polish only.
        p = init.copy()
        explore_iters = 0
    # Pre-drawn rescue direction for the measure-zero case where the worst
    # secant is exactly orthogonal to the current frame.
    rescue = rng.standard_normal(k)
    rescue /= np.linalg.norm(rescue)
    if _fast.AVAILABLE:
        trace_buf = np.empty(cfg.max_iters if collect_trace else 0)
        best_p, best_kappa, iters = _fast.solve_kernel(
            np.ascontiguousarray(directions),
            np.ascontiguousarray(p),
            cfg.step_size,
            cfg.max_iters,
            cfg.convergence_tol,
            cfg.patience,
            rescue,
            explore_iters,
            trace_buf,
            collect_trace,
        )
        trace = trace_buf[:iters].copy() if collect_trace else None
        return best_p, float(best_kappa), trace
    return _solve_loop_numpy(directions, p, cfg, rescue, explore_iters, collect_trace)


def solve_min_secant_projection(
    secants: SecantSet,
    k: int,
    cfg: SolverConfig = SolverConfig(),
    *,
    init: Projection | None = None,
    restarts: int = 1,
    with_trace: bool = False,
):
    """Locally solve the max-min secant preservation problem at dimension k.

    Returns `(projection, kappa)`, or `(projection, kappa, trace)` with
    `with_trace=True` where `trace[i]` is the best kappa seen after
    iteration i.  The best iterate is tracked throughout, so the result is
    never worse than the starting frame.  Restart r draws its initial frame
    from the stream derive_seed(cfg.seed, r) and searches globally
    (sampled initialization plus an exploration phase); when `init` is
    given it is refined locally instead, polish only, and restarts must be
    1.  If the secant directions span at most k dimensions the exact
    optimum (kappa = 1) is returned without iterating.
    """
    if secants.count == 0:
        raise DegenerateSecantSetError("empty secant set")
    n = secants.ambient_dim
    if not 1 <= k <= n:
        raise DimensionError(f"target dimension {k} not in [1, {n}]")
    if restarts < 1:
        raise ValueError("restarts must be positive")
    if init is not None and restarts != 1:
        raise ValueError("an explicit init requires restarts=1")
    if init is not None and (init.n != n or init.k != k):
        raise DimensionError("init shape does not match (n, k)")

    directions = secants.canonical_directions

    frame = _spanning_frame(directions, k)
    if frame is not None:
        proj, kappa, trace = Projection(frame), 1.0, np.empty(0)
    else:
        init_matrix = init.matrix if init is not None else None
        best = None
        for r in range(restarts):
            seed_r = derive_seed(cfg.seed, r)
            result = _solve_single(directions, k, cfg, seed_r, init_matrix, with_trace)
            if best is None or result[1] > best[1]:
                best = result
        p, kappa, trace = best
        proj = Projection(p)

    if with_trace:
        return proj, kappa, trace
    return proj, kappa
