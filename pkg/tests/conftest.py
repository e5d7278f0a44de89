"""Shared fixtures and independent oracles used across the test suite."""

import numpy as np
import pytest

from modframes import ModuleOperator, OperatorFamily, random_operator


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_family(d: int, n: int, count: int, rng: np.random.Generator) -> OperatorFamily:
    """Family with random target ranks whose frame operator is full rank."""
    ranks = [int(rng.integers(1, n + 1)) for _ in range(count)]
    while sum(ranks) < n:
        ranks[int(rng.integers(0, count))] += 1
    return OperatorFamily([random_operator(d, n, r, rng) for r in ranks])


def random_psd(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    k = rank if rank is not None else dim
    a = (rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))) / np.sqrt(2)
    return a @ np.conj(a.T)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))[None, :]


def pencil_alpha_bisect(p: np.ndarray, s: np.ndarray, tol: float = 1e-12) -> float:
    """Independent oracle for the pencil extremum: bisection on the
    feasibility predicate lambda_min(s - a*p) >= -slack."""
    p = 0.5 * (p + np.conj(p.T))
    s = 0.5 * (s + np.conj(s.T))
    slack = 1e-11 * (1.0 + np.linalg.norm(s, 2))
    if np.linalg.norm(p, 2) <= 1e-12:
        return float("inf")

    def feasible(a: float) -> bool:
        return np.linalg.eigvalsh(s - a * p)[0] >= -slack

    if not feasible(0.0):
        return 0.0
    hi = 1.0
    for _ in range(200):
        if not feasible(hi):
            break
        hi *= 2.0
    else:
        return float("inf")
    lo = 0.0
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def direct_gap_eigs(family: OperatorFamily, K: ModuleOperator, a, b, x) -> tuple[float, float]:
    """Gap eigenvalues computed blockwise from member inner products,
    independently of the gram-matrix shortcut used by the library."""
    from modframes import apply, inner_product, op_adjoint

    quad = sum(
        inner_product(apply(m, x), apply(m, x)) for m in family.members
    )
    kx = apply(op_adjoint(K), x)
    lower = quad - np.asarray(a) @ inner_product(kx, kx) @ np.conj(np.asarray(a).T)
    upper = np.asarray(b) @ inner_product(x, x) @ np.conj(np.asarray(b).T) - quad
    lo = np.linalg.eigvalsh(0.5 * (lower + np.conj(lower.T)))[0]
    up = np.linalg.eigvalsh(0.5 * (upper + np.conj(upper.T)))[0]
    return float(lo), float(up)
