"""Block successive upper-bound minimization (BSUM) completion solver.

Minimizes  0.5 |P(Y - U V^T)|_F^2 + lam * sum_i c_i^p  over factor pairs,
where c_i = (|u_i|^2 + |v_i|^2)/2 and P masks to the observed set. Each
sweep minimizes a separable quadratic upper bound per factor block:

    U+ = U - grad_U * inv(V^T V + lam W),   W = diag(p c_i^(p-1)),

then the same for V using the already updated U (Gauss-Seidel order).
The masked row Gram is dominated by V^T V and the linearized concave
regularizer upper-bounds c^p, so a sweep never increases the objective.
Columns whose norm falls under a threshold are pruned after each sweep,
which keeps the p-1 < 0 exponents away from zero and makes the final
width rank-revealing. Optionally, once the iterates stagnate, a rank-one
escape step (see escape.py) appends a scaled top singular pair of the
embedded residual and iteration resumes.
"""

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import escape as _escape
from .norms import Factors, check_p, column_energies, variational_sum
from .observed import loss_value, masked_residual


@dataclass(frozen=True)
class SolverConfig:
    """Solver hyperparameters.

    lam = 0 is allowed for pure least-squares runs; the regularizer and
    its weights vanish, and rank-one escapes are skipped (the escape test
    needs lam > 0). escape_check_max bounds the number of successful
    escapes per solve and defaults to init_width.
    """

    p: float
    lam: float
    init_width: int
    prune_thres: float = 1e-5
    max_iter: int = 1000
    conv_tol: float = 1e-4
    escape_enabled: bool = True
    escape_check_max: int | None = None
    seed: int = 0

    def __post_init__(self):
        check_p(self.p)
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if self.init_width < 1:
            raise ValueError("init_width must be at least 1")
        if self.prune_thres <= 0:
            raise ValueError("prune_thres must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.conv_tol <= 0:
            raise ValueError("conv_tol must be positive")
        if self.escape_check_max is not None and self.escape_check_max < 0:
            raise ValueError("escape_check_max must be nonnegative")

    @property
    def escape_budget(self):
        if self.escape_check_max is None:
            return self.init_width
        return self.escape_check_max


class EscapeEvent(NamedTuple):
    iteration: int
    trace_index: int
    sigma: float
    tau: float


@dataclass
class SolveReport:
    final_width: int
    objective_trace: np.ndarray
    iters: int
    converged: bool
    escapes: int
    escape_events: list = field(default_factory=list)


def objective(Y, F, cfg):
    """Masked half squared loss plus lam * sum_i c_i^p."""
    return loss_value(Y, F) + cfg.lam * variational_sum(F, cfg.p)


def _weights(F, p):
    # Diagonal of W: p * c_i^(p-1). Undefined at c_i = 0, hence the
    # prune-first contract on all gradient/Hessian evaluations.
    c = column_energies(F)
    if (c == 0.0).any():
        raise ValueError("zero-energy column present; prune before this evaluation")
    return p * c ** (p - 1.0)


def grad_U(Y, F, cfg):
    """Gradient of the objective in U: -P*(residual) V + lam U W."""
    w = _weights(F, cfg.p)
    R = masked_residual(Y, F)
    G = -(R.to_csr() @ F.V)
    if cfg.lam:
        G += cfg.lam * (F.U * w)
    return G


def grad_V(Y, F, cfg):
    """Gradient of the objective in V: -P*(residual)^T U + lam V W."""
    w = _weights(F, cfg.p)
    R = masked_residual(Y, F)
    G = -(R.to_csr().T @ F.U)
    if cfg.lam:
        G += cfg.lam * (F.V * w)
    return G


def _check_conditioning(H, side):
    eigs = np.linalg.eigvalsh(H)
    if eigs[0] < 1e-12 * np.trace(H):
        raise np.linalg.LinAlgError(
            f"surrogate Hessian for {side} is numerically singular "
            "(prune degenerate columns or use lam > 0)"
        )


def surrogate_hessian_U(F, cfg):
    """d x d block Hessian of the U-surrogate: V^T V + lam W."""
    H = F.V.T @ F.V
    if cfg.lam:
        H[np.diag_indices_from(H)] += cfg.lam * _weights(F, cfg.p)
    else:
        _weights(F, cfg.p)  # enforce the no-zero-column contract
    _check_conditioning(H, "U")
    return H


def surrogate_hessian_V(F, cfg):
    """d x d block Hessian of the V-surrogate: U^T U + lam W."""
    H = F.U.T @ F.U
    if cfg.lam:
        H[np.diag_indices_from(H)] += cfg.lam * _weights(F, cfg.p)
    else:
        _weights(F, cfg.p)
    _check_conditioning(H, "V")
    return H


def bsum_step(Y, F, cfg):
    """One Gauss-Seidel sweep: surrogate-minimizing U update, then V."""
    GU = grad_U(Y, F, cfg)
    HU = surrogate_hessian_U(F, cfg)
    U2 = F.U - np.linalg.solve(HU, GU.T).T
    F1 = Factors(U2, F.V)
    GV = grad_V(Y, F1, cfg)
    HV = surrogate_hessian_V(F1, cfg)
    V2 = F.V - np.linalg.solve(HV, GV.T).T
    return Factors(U2, V2)


def prune(F, thres):
    """Drop every column with |u_i| <= thres or |v_i| <= thres.

    If that would remove everything, a single zero column is kept so the
    factor pair stays well-formed; a RuntimeWarning flags the collapse.
    """
    nu, nv = F.column_norms()
    keep = (nu > thres) & (nv > thres)
    if keep.all():
        return F
    if not keep.any():
        warnings.warn(
            "all factor columns pruned; retaining a single zero column",
            RuntimeWarning,
            stacklevel=2,
        )
        m, n = F.shape
        return Factors(np.zeros((m, 1)), np.zeros((n, 1)))
    return Factors(F.U[:, keep], F.V[:, keep])


def random_factors(Y, cfg):
    """Gaussian init with |U0 V0^T|_F matched to the data scale.

    The target is |Y on Z|_F * sqrt(m n / |Z|), an estimate of the full
    Frobenius norm of Y; i.i.d. N(0, a^2) entries with
    a = sqrt(target) / (m n d)^(1/4) give E |U0 V0^T|_F^2 = target^2.
    """
    rng = np.random.default_rng(cfg.seed)
    m, n = Y.shape
    d = cfg.init_width
    target = np.linalg.norm(Y.val) * np.sqrt(m * n / max(Y.nnz, 1))
    a = np.sqrt(target) / (m * n * d) ** 0.25
    return Factors(a * rng.standard_normal((m, d)), a * rng.standard_normal((n, d)))


def _frob_inner(Fa, Fb):
    # <Ua Va^T, Ub Vb^T> without forming the dense products.
    return float(np.sum((Fa.U.T @ Fb.U) * (Fa.V.T @ Fb.V)))


def solve(Y, cfg, F0=None):
    """Run BSUM sweeps with pruning until the reconstruction stagnates.

    Convergence fires when |X_t+1 - X_t|_F / |X_t|_F < conv_tol (the
    denominator is replaced by 1 when the iterate is the zero matrix).
    With escapes enabled, each time the test fires a rank-one escape is
    attempted; an accepted escape appends a column and iteration resumes,
    a rejected one (or an exhausted budget) terminates the solve.

    Returns (Factors, SolveReport). The report's objective trace has one
    entry for the initial point, one per sweep, and one per accepted
    escape; escape_events carries the trace index of each escape entry.
    """
    if Y.nnz == 0:
        raise ValueError("observation set is empty")
    if F0 is None:
        F = random_factors(Y, cfg)
    else:
        if F0.width != cfg.init_width:
            raise ValueError(
                f"initial width {F0.width} does not match cfg.init_width {cfg.init_width}"
            )
        if F0.shape != Y.shape:
            raise ValueError("initial factor shape does not match the data")
        F = F0
    F = prune(F, cfg.prune_thres)

    trace = [objective(Y, F, cfg)]
    events = []
    escapes = 0
    iters = 0
    converged = False
    F_prev = F
    self_prev = _frob_inner(F, F)
    for t in range(1, cfg.max_iter + 1):
        iters = t
        if column_energies(F).max() > 0.0:
            F = prune(bsum_step(Y, F, cfg), cfg.prune_thres)
        trace.append(objective(Y, F, cfg))
        self_new = _frob_inner(F, F)
        d2 = self_new + self_prev - 2.0 * _frob_inner(F, F_prev)
        den = np.sqrt(max(self_prev, 0.0))
        rel = np.sqrt(max(d2, 0.0)) / (den if den > 0.0 else 1.0)
        F_prev = F
        self_prev = self_new
        if rel < cfg.conv_tol:
            if cfg.escape_enabled and cfg.lam > 0 and escapes < cfg.escape_budget:
                F_new, dec = _escape.attempt(Y, F, cfg)
                if dec.accepted:
                    F = prune(F_new, cfg.prune_thres)
                    escapes += 1
                    trace.append(objective(Y, F, cfg))
                    events.append(EscapeEvent(t, len(trace) - 1, dec.sigma, dec.tau))
                    F_prev = F
                    self_prev = _frob_inner(F, F)
                    continue
            converged = True
            break

    report = SolveReport(
        final_width=F.width,
        objective_trace=np.asarray(trace),
        iters=iters,
        converged=converged,
        escapes=escapes,
        escape_events=events,
    )
    return F, report
