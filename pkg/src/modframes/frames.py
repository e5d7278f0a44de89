"""Operator families and frame-inequality certification.

A family {L_i : A^n -> A^{n_i}} is certified against the two-sided
inequality

    A <K*x, K*x> A*  <=  sum_i <L_i x, L_i x>  <=  B <x, x> B*

with algebra-valued bound elements A, B and target endomorphism K.

When both bounds are scalar multiples of the identity the universal
quantifier reduces exactly to two PSD inequalities between flattened
matrices (alpha^2 flat(KK*) <= S_hat and S_hat <= beta^2 I), which is how
exact mode decides.  For general algebra-valued bounds the left/right
conjugation blocks that reduction, so certification is sampled: random
unit vectors, the canonical flattened directions, and a multi-start
projected-gradient search for falsifying vectors.  A sampled non-falsified
verdict is labelled mode="sampled" and is never presented as a proof.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels, algebra
from .errors import (
    NotCoisometryError,
    NotCommutingError,
    NoInclusionError,
    ShapeMismatchError,
)
from .module import ModuleSpace, ModuleVector, module_action, norm, random_vector
from .operators import (
    ModuleOperator,
    apply,
    compose,
    douglas_check,
    op_adjoint,
    operator_norm,
    pencil_alpha_flat,
)


@dataclass
class OperatorFamily:
    """Finite indexed family of adjointable operators with a common source."""

    members: list[ModuleOperator]

    def __post_init__(self):
        if not self.members:
            raise ValueError("operator family must be non-empty")
        d = self.members[0].dim
        n = self.members[0].source_rank
        if any(m.dim != d or m.source_rank != n for m in self.members):
            raise ShapeMismatchError("family members must share dim and source rank")

    @property
    def dim(self) -> int:
        return self.members[0].dim

    @property
    def source_rank(self) -> int:
        return self.members[0].source_rank

    @property
    def target_ranks(self) -> tuple[int, ...]:
        return tuple(m.target_rank for m in self.members)

    def __len__(self) -> int:
        return len(self.members)

    def codomain(self) -> ModuleSpace:
        return ModuleSpace.direct_sum_of(self.dim, self.target_ranks)


@dataclass
class FrameBounds:
    """Bound pair (lower, upper); in scalar mode both are multiples of I."""

    lower: np.ndarray
    upper: np.ndarray
    mode: str = "algebra"

    def __post_init__(self):
        self.lower = algebra.as_element(self.lower)
        self.upper = algebra.as_element(self.upper)
        if self.lower.shape != self.upper.shape:
            raise ShapeMismatchError("bound elements must share the algebra dimension")
        if self.mode not in ("scalar", "algebra"):
            raise ValueError(f"unknown bounds mode {self.mode!r}")
        if self.mode == "scalar":
            d = self.lower.shape[0]
            for name, el in (("lower", self.lower), ("upper", self.upper)):
                s = el[0, 0]
                if (
                    s.imag != 0
                    or s.real <= 0
                    or not math.isfinite(s.real)
                    or not np.array_equal(el, s.real * np.eye(d))
                ):
                    raise ValueError(
                        f"scalar-mode {name} bound must be a finite positive multiple of I"
                    )

    @classmethod
    def scalar(cls, alpha: float, beta: float, dim: int) -> "FrameBounds":
        eye = np.eye(dim, dtype=np.complex128)
        return cls(lower=alpha * eye, upper=beta * eye, mode="scalar")

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    @property
    def alpha(self) -> float:
        if self.mode != "scalar":
            raise ValueError("alpha is only defined for scalar bounds")
        return float(self.lower[0, 0].real)

    @property
    def beta(self) -> float:
        if self.mode != "scalar":
            raise ValueError("beta is only defined for scalar bounds")
        return float(self.upper[0, 0].real)


def is_tight(bounds: FrameBounds, tol: float = 1e-12) -> bool:
    """Both bound elements coincide."""
    return algebra.opnorm(bounds.lower - bounds.upper) <= tol


def is_normalized(bounds: FrameBounds, tol: float = 1e-12) -> bool:
    """Both bound elements equal the identity."""
    eye = np.eye(bounds.dim)
    return (
        algebra.opnorm(bounds.lower - eye) <= tol and algebra.opnorm(bounds.upper - eye) <= tol
    )


@dataclass
class CertConfig:
    """Knobs for sampled certification; all CLI-exposed."""

    samples: int = 1000
    tol: float = 1e-9
    seed: int = 0
    restarts: int = 20
    iters: int = 200
    step: float = 1e-2
    mode: str = "auto"  # auto | exact | sampled


@dataclass
class FrameCertificate:
    verdict: str  # certified | falsified | inconclusive
    bounds: FrameBounds
    witness: ModuleVector | None
    min_gap_lower: float
    min_gap_upper: float
    samples_used: int
    mode: str  # exact | sampled


def analysis_operator(F: OperatorFamily) -> ModuleOperator:
    """T: x -> {L_i x}, the block concatenation into the direct sum."""
    flat = np.hstack([m.flat for m in F.members])
    return ModuleOperator(F.dim, F.source_rank, sum(F.target_ranks), flat)


def synthesis_operator(F: OperatorFamily) -> ModuleOperator:
    """T*: {x_i} -> sum_i L_i* x_i."""
    return op_adjoint(analysis_operator(F))


def frame_operator(F: OperatorFamily) -> ModuleOperator:
    """S = T*T as an endomorphism; flattened it is sum_i flat(L_i) flat(L_i)*."""
    t = analysis_operator(F)
    return compose(t, op_adjoint(t))


def _frame_gram(F: OperatorFamily) -> np.ndarray:
    """Flat of the frame operator: sum_i flat(L_i) flat(L_i)^H."""
    return frame_operator(F).flat


def _target_gram(K: ModuleOperator) -> np.ndarray:
    """Flat of KK* (the composite x -> K(K* x)): flat(K)^H flat(K)."""
    return np.conj(K.flat.T) @ K.flat


def _check_certify_shapes(F: OperatorFamily, K: ModuleOperator, bounds: FrameBounds) -> None:
    if K.dim != F.dim or not K.is_endomorphism() or K.source_rank != F.source_rank:
        raise ShapeMismatchError("target operator must be an endomorphism of the family's source")
    if bounds.dim != F.dim:
        raise ShapeMismatchError("bound elements must live in the family's algebra")
    for name, el in (("lower", bounds.lower), ("upper", bounds.upper)):
        if not algebra.is_strictly_nonzero(el):
            raise ValueError(f"{name} bound is not strictly nonzero (not safely invertible)")


def _canonical_samples(dim: int, rank: int) -> np.ndarray:
    """One rank-one probe per flattened direction: X_k = e_{k mod d} e_k^H."""
    nd = rank * dim
    out = np.zeros((nd, dim, nd), dtype=np.complex128)
    for k in range(nd):
        out[k, k % dim, k] = 1.0
    return out


def _sample_array(F: OperatorFamily, cfg: CertConfig, rng: np.random.Generator) -> np.ndarray:
    d, n = F.dim, F.source_rank
    draws = [random_vector(d, n, rng).flat for _ in range(cfg.samples)]
    rand = np.stack(draws) if draws else np.zeros((0, d, n * d), dtype=np.complex128)
    return np.concatenate([rand, _canonical_samples(d, n)], axis=0)


def sample_vectors(dim: int, rank: int, count: int, seed: int) -> list[ModuleVector]:
    """Shared sampling scheme: ``count`` random unit vectors followed by the
    canonical flattened directions, reproducible from the seed."""
    rng = np.random.default_rng(seed)
    vecs = [random_vector(dim, rank, rng) for _ in range(count)]
    vecs.extend(ModuleVector(dim, rank, x) for x in _canonical_samples(dim, rank))
    return vecs


def certify(
    F: OperatorFamily,
    K: ModuleOperator,
    bounds: FrameBounds,
    cfg: CertConfig | None = None,
) -> FrameCertificate:
    """Certify or falsify the two-sided frame inequality for (F, K, bounds).

    Exact mode (scalar bounds only) decides via flattened PSD inequalities;
    margins are the smallest eigenvalues of the two gap matrices.  Sampled
    mode evaluates the algebra-valued gaps on random unit vectors, canonical
    directions, and gradient-descent falsification candidates; it returns a
    witness whenever some gap eigenvalue drops below -tol.
    """
    cfg = cfg or CertConfig()
    _check_certify_shapes(F, K, bounds)
    if cfg.mode not in ("auto", "exact", "sampled"):
        raise ValueError(f"unknown certification mode {cfg.mode!r}")
    mode = cfg.mode
    if mode == "auto":
        mode = "exact" if bounds.mode == "scalar" else "sampled"
    if mode == "exact" and bounds.mode != "scalar":
        raise ValueError("exact certification requires scalar bounds")

    s_hat = _frame_gram(F)
    m_hat = _target_gram(K)
    d, n = F.dim, F.source_rank
    nd = n * d

    if mode == "exact":
        alpha, beta = bounds.alpha, bounds.beta
        lower_mat = s_hat - alpha**2 * m_hat
        upper_mat = beta**2 * np.eye(nd) - s_hat
        wl, vl = np.linalg.eigh(0.5 * (lower_mat + np.conj(lower_mat.T)))
        wu, vu = np.linalg.eigh(0.5 * (upper_mat + np.conj(upper_mat.T)))
        gap_lower = float(wl[0])
        gap_upper = float(wu[0])
        witness = None
        verdict = "certified"
        if min(gap_lower, gap_upper) < -cfg.tol:
            verdict = "falsified"
            vec = vl[:, 0] if gap_lower <= gap_upper else vu[:, 0]
            flat = np.zeros((d, nd), dtype=np.complex128)
            flat[0, :] = np.conj(vec)
            witness = ModuleVector(d, n, flat)
        return FrameCertificate(
            verdict=verdict,
            bounds=bounds,
            witness=witness,
            min_gap_lower=gap_lower,
            min_gap_upper=gap_upper,
            samples_used=0,
            mode="exact",
        )

    rng = np.random.default_rng(cfg.seed)
    samples = _sample_array(F, cfg, rng)
    a_low = np.ascontiguousarray(bounds.lower)
    b_up = np.ascontiguousarray(bounds.upper)
    lower_eigs, upper_eigs = _kernels.gap_eigs(samples, s_hat, m_hat, a_low, b_up)

    min_lower = float(np.min(lower_eigs))
    min_upper = float(np.min(upper_eigs))
    wit_lower = samples[int(np.argmin(lower_eigs))]
    wit_upper = samples[int(np.argmin(upper_eigs))]

    eye_d = np.eye(d, dtype=np.complex128)
    eye_nd = np.eye(nd, dtype=np.complex128)
    for _ in range(cfg.restarts):
        x0 = random_vector(d, n, rng, unit=False).flat
        f_lo, x_lo = _kernels.minimize_gap(
            x0, s_hat, m_hat, eye_d, a_low, cfg.iters, cfg.step, cfg.tol
        )
        if f_lo < min_lower:
            min_lower, wit_lower = float(f_lo), x_lo
        f_up, x_up = _kernels.minimize_gap(
            x0, eye_nd, s_hat, b_up, eye_d, cfg.iters, cfg.step, cfg.tol
        )
        if f_up < min_upper:
            min_upper, wit_upper = float(f_up), x_up

    witness = None
    verdict = "certified"
    if min(min_lower, min_upper) < -cfg.tol:
        verdict = "falsified"
        wit = wit_lower if min_lower <= min_upper else wit_upper
        witness = ModuleVector(d, n, np.array(wit))
    return FrameCertificate(
        verdict=verdict,
        bounds=bounds,
        witness=witness,
        min_gap_lower=min_lower,
        min_gap_upper=min_upper,
        samples_used=samples.shape[0],
        mode="sampled",
    )


def gap_matrices(
    F: OperatorFamily, K: ModuleOperator, bounds: FrameBounds, x: ModuleVector
) -> tuple[np.ndarray, np.ndarray]:
    """The algebra-valued lower/upper gaps at a single vector.

    Used to re-validate falsification witnesses independently of the
    batched kernels.
    """
    s_hat = _frame_gram(F)
    m_hat = _target_gram(K)
    xs = x.flat @ s_hat @ np.conj(x.flat.T)
    xm = x.flat @ m_hat @ np.conj(x.flat.T)
    xx = x.flat @ np.conj(x.flat.T)
    a, b = bounds.lower, bounds.upper
    g_lo = xs - a @ xm @ np.conj(a.T)
    g_up = b @ xx @ np.conj(b.T) - xs
    return g_lo, g_up


def optimal_scalar_bounds(F: OperatorFamily, K: ModuleOperator) -> tuple[float, float]:
    """Extremal scalars (alpha, beta) making exact certification pass.

    alpha^2 is the pencil extremum of flat(KK*) against the flattened frame
    operator (inf when K vanishes); beta^2 is the frame operator's norm.
    """
    s_hat = _frame_gram(F)
    m_hat = _target_gram(K)
    alpha_sq = pencil_alpha_flat(m_hat, s_hat)
    alpha = math.inf if math.isinf(alpha_sq) else math.sqrt(max(alpha_sq, 0.0))
    beta = math.sqrt(max(float(np.linalg.eigvalsh(0.5 * (s_hat + np.conj(s_hat.T)))[-1]), 0.0))
    return alpha, beta


@dataclass
class NormBoundReport:
    """Worst margins of the scalar-norm sandwich over a sample set."""

    worst_lower_margin: float
    worst_upper_margin: float
    worst_lower_index: int
    worst_upper_index: int
    samples_used: int


def norm_bound_check(
    F: OperatorFamily,
    K: ModuleOperator,
    bounds: FrameBounds,
    samples: list[ModuleVector],
) -> NormBoundReport:
    """Evaluate ||A K* f||^2 <= ||sum_i <L_i f, L_i f>|| <= ||B f||^2 per sample.

    This is the necessary scalar-norm condition of the frame inequality;
    margins below zero disprove the corresponding bound.
    """
    if not samples:
        raise ValueError("norm_bound_check needs at least one sample")
    s_hat = _frame_gram(F)
    k_adj = op_adjoint(K)
    worst_lo, worst_up = math.inf, math.inf
    idx_lo = idx_up = 0
    for i, f in enumerate(samples):
        mid = float(np.linalg.norm(f.flat @ s_hat @ np.conj(f.flat.T), 2))
        left_vec = module_action(bounds.lower, apply(k_adj, f))
        left = norm(left_vec) ** 2
        right = norm(module_action(bounds.upper, f)) ** 2
        lo = mid - left
        up = right - mid
        if lo < worst_lo:
            worst_lo, idx_lo = lo, i
        if up < worst_up:
            worst_up, idx_up = up, i
    return NormBoundReport(
        worst_lower_margin=worst_lo,
        worst_upper_margin=worst_up,
        worst_lower_index=idx_lo,
        worst_upper_index=idx_up,
        samples_used=len(samples),
    )


def transform_coisometry(
    F: OperatorFamily, K: ModuleOperator, U: ModuleOperator, tol: float = 1e-9
) -> OperatorFamily:
    """Family {L_i U*} for a co-isometry U commuting with K.

    The transform preserves the frame inequality with the same bounds, since
    <K* U* f, K* U* f> = <U* K* f, U* K* f> = <K* f, K* f>.
    """
    if U.dim != F.dim or not U.is_endomorphism() or U.source_rank != F.source_rank:
        raise ShapeMismatchError("U must be an endomorphism of the family's source")
    eye = np.eye(U.source_rank * U.dim)
    # UU* = id: the composite x -> U(U* x) flattens to flat(U)^H flat(U).
    if float(np.linalg.norm(np.conj(U.flat.T) @ U.flat - eye, 2)) > tol:
        raise NotCoisometryError("U U* differs from the identity beyond tolerance")
    comm = float(np.linalg.norm(U.flat @ K.flat - K.flat @ U.flat, 2))
    if comm > tol * (1.0 + operator_norm(K) * operator_norm(U)):
        raise NotCommutingError(f"KU - UK has norm {comm:.3e}")
    u_adj = op_adjoint(U)
    return OperatorFamily([compose(u_adj, m) for m in F.members])


@dataclass
class PrecomposedFrame:
    """Result of the precompose transform: family {L_i (L*)^p}, the shifted
    target L^p K, and the rescaled bounds (A, B ||L||^p)."""

    family: OperatorFamily
    target: ModuleOperator
    bounds: FrameBounds


def transform_precompose(
    F: OperatorFamily,
    K: ModuleOperator,
    L: ModuleOperator,
    bounds: FrameBounds,
    power: int = 1,
) -> PrecomposedFrame:
    """Precompose every member with (L*)^power; the result is a frame for
    the target L^power K with upper bound scaled by ||L||^power."""
    if L.dim != F.dim or not L.is_endomorphism() or L.source_rank != F.source_rank:
        raise ShapeMismatchError("L must be an endomorphism of the family's source")
    if power < 1:
        raise ValueError("power must be a positive integer")
    l_adj_pow = np.linalg.matrix_power(np.conj(L.flat.T), power)
    members = [
        ModuleOperator(m.dim, m.source_rank, m.target_rank, l_adj_pow @ m.flat)
        for m in F.members
    ]
    target_flat = K.flat @ np.linalg.matrix_power(L.flat, power)
    target = ModuleOperator(K.dim, K.source_rank, K.target_rank, target_flat)
    scale = operator_norm(L) ** power
    new_bounds = FrameBounds(
        lower=bounds.lower.copy(), upper=bounds.upper * scale, mode=bounds.mode
    )
    return PrecomposedFrame(family=OperatorFamily(members), target=target, bounds=new_bounds)


def range_transfer_check(
    F: OperatorFamily,
    K: ModuleOperator,
    L: ModuleOperator,
    bounds: FrameBounds,
    cfg: CertConfig | None = None,
) -> FrameCertificate:
    """Re-certify a K-frame as an L-frame when range(L) is inside range(K).

    The majorization constant lambda with LL* <= lambda^2 KK* converts the
    lower bound: A <K*f, K*f> A* >= (A/lambda) <L*f, L*f> (A/lambda)*, so the
    family is certified against L with lower bound A/lambda.  A vanishing
    lambda (L = 0) makes the lower inequality vacuous and the original bound
    is kept.
    """
    report = douglas_check(L, K)
    if not report.range_included:
        raise NoInclusionError("range(L) is not contained in range(K)")
    lam = report.lambda_min or 0.0
    if lam > 0.0:
        new_lower = bounds.lower / lam
    else:
        new_lower = bounds.lower.copy()
    new_bounds = FrameBounds(lower=new_lower, upper=bounds.upper.copy(), mode=bounds.mode)
    return certify(F, L, new_bounds, cfg)
