"""Numerical certificates for the optimizer's properties, bundled into one report."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import eig
from .bounds import lower_bound_uniform, upper_bound_center, within_sandwich
from .errors import ContractError
from .grid import Convention, GridSpec, group_order, isometry_group, permutation_indices
from .kernel import make_operator, quadratic_form
from .maxprinciple import verify_decay
from .optimizer import OptimizerResult, el_check, solve_optimizer

SYMMETRY_TOL = 1e-8
GAP_MARGIN = 1e-8
UNIQUENESS_TOL = 1e-8
EMBED_TOL = 1e-9


@dataclass(frozen=True)
class SymmetryReport:
    grid: GridSpec
    group_order: int
    max_deviation: float
    tolerance: float = SYMMETRY_TOL

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


def check_symmetry(opt: OptimizerResult, tol: float = SYMMETRY_TOL) -> SymmetryReport:
    """Largest |a_phi(r) - a_r| over the full isometry group."""
    a = opt.vector
    group = isometry_group(opt.grid)
    worst = max(float(np.max(np.abs(a[permutation_indices(phi, opt.grid)] - a))) for phi in group)
    return SymmetryReport(opt.grid, len(group), worst, tol)


@dataclass(frozen=True)
class GapReport:
    grid: GridSpec
    spectral: eig.SpectralReport
    degenerate: bool

    @property
    def gap_ratio(self) -> float:
        return self.spectral.gap_ratio

    @property
    def passed(self) -> bool:
        if self.degenerate:
            return True
        return self.spectral.converged and self.gap_ratio < 1.0 - GAP_MARGIN


def check_gap(g: GridSpec, tol: float = 1e-10, max_iter: int = eig.DEFAULT_MAX_ITER, seed: int = 0) -> GapReport:
    """Strict separation of the top two eigenvalues of C = A^2.

    The two-point grid is the one exception: A is the exchange matrix and
    C is the identity, so it is flagged rather than failed.
    """
    op = make_operator(g)
    perron = eig.power_iteration(op, g.num_points, tol=tol, max_iter=max_iter)
    if not perron.converged:
        raise ContractError(f"Perron pair for {g} did not converge")
    spec = eig.spectral_report(op, perron, tol=tol, max_iter=max_iter, seed=seed)
    return GapReport(g, spec, degenerate=g.num_points == 2)


def random_positive_start(L: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).uniform(0.05, 1.0, L)


def check_uniqueness(g: GridSpec, tol: float = 1e-10, seed: int = 0) -> float:
    """l-inf distance between optimizers from the uniform and a random positive start."""
    op = make_operator(g)
    first = solve_optimizer(g, tol, op=op, with_gap=False)
    start = random_positive_start(g.num_points, seed)
    second = solve_optimizer(g, tol, op=op, with_gap=False, start=start)
    return float(np.max(np.abs(first.vector - second.vector)))


def _mixed_sign(rng: np.random.Generator, L: int) -> np.ndarray:
    v = rng.standard_normal(L)
    if (v > 0).all() or (v < 0).all():
        v[rng.integers(L)] *= -1.0
    return v / np.linalg.norm(v)


@dataclass(frozen=True)
class SignLemmaReport:
    samples: int
    min_gain: float  # min over samples of J(|a|, |b|) - J(a, b)
    min_gain_diag: float  # same with b = a
    max_sign_pair_gap: float  # max |J(-a, -b) - J(a, b)|
    degenerate: bool = False

    @property
    def passed(self) -> bool:
        # on two points, a = (1, -1), b = (-1, 1) attains lambda, so only a = b is strict
        pair_ok = self.degenerate or self.min_gain > 0
        return pair_ok and self.min_gain_diag > 0 and self.max_sign_pair_gap <= 1e-12


def check_sign_lemma(g: GridSpec, samples: int = 100, seed: int = 0) -> SignLemmaReport:
    if samples < 1 or g.num_points < 2:
        raise ContractError("need samples >= 1 and at least two grid points")
    op = make_operator(g)
    rng = np.random.default_rng(seed)
    gains, diag, pair = [], [], []
    for _ in range(samples):
        a = _mixed_sign(rng, g.num_points)
        b = _mixed_sign(rng, g.num_points)
        j = quadratic_form(op, a, b)
        gains.append(quadratic_form(op, np.abs(a), np.abs(b)) - j)
        diag.append(quadratic_form(op, np.abs(a), np.abs(a)) - quadratic_form(op, a, a))
        pair.append(abs(quadratic_form(op, -a, -b) - j))
    return SignLemmaReport(samples, min(gains), min(diag), max(pair), degenerate=g.num_points == 2)


def embed(vector: np.ndarray, small: GridSpec, big: GridSpec) -> np.ndarray:
    """Zero-pad a unit-grid vector into a larger unit grid (corner-aligned)."""
    out = np.zeros(big.shape)
    out[tuple(slice(0, small.span) for _ in range(small.dimension))] = vector.reshape(small.shape)
    return out.ravel()


@dataclass(frozen=True)
class MonotoneReport:
    dimension: int
    Ns: list[int]
    lams: list[float]
    embed_errors: list[float]  # |J_{N+1}(pad xi_N) - lambda_N|
    embed_excess: list[float]  # J_{N+1}(pad xi_N) - lambda_{N+1}, must be <= 0

    @property
    def passed(self) -> bool:
        increasing = all(b > a for a, b in zip(self.lams, self.lams[1:]))
        return (
            increasing
            and all(e <= EMBED_TOL for e in self.embed_errors)
            and all(x <= EMBED_TOL for x in self.embed_excess)
        )


def check_monotone_lambda(n: int, N_max: int, tol: float = 1e-10) -> MonotoneReport:
    if N_max < 3:
        raise ContractError("N_max must be at least 3")
    Ns = list(range(2, N_max + 1))
    opts = [solve_optimizer(GridSpec(n, N), tol, with_gap=False) for N in Ns]
    errors, excess = [], []
    for lo, hi in zip(opts, opts[1:]):
        padded = embed(lo.vector, lo.grid, hi.grid)
        val = quadratic_form(make_operator(hi.grid), padded, padded)
        errors.append(abs(val - lo.lam))
        excess.append(val - hi.lam)
    return MonotoneReport(n, Ns, [o.lam for o in opts], errors, excess)


@dataclass
class Entry:
    id: str
    passed: bool
    metrics: dict[str, Any]
    tolerance: dict[str, float]
    wall_time: float
    note: str = ""


@dataclass
class CertificationReport:
    n: int
    N: int
    tol: float
    seed: int
    entries: list[Entry] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)


def _run(entries: list[Entry], id_: str, fn: Callable[[], tuple[bool, dict, dict, str]]) -> None:
    t0 = time.perf_counter()
    try:
        ok, metrics, tolerance, note = fn()
    except Exception as exc:  # recorded, never aborts the suite
        ok, metrics, tolerance, note = False, {}, {}, f"{type(exc).__name__}: {exc}"
    entries.append(Entry(id_, bool(ok), metrics, tolerance, time.perf_counter() - t0, note))


def certify_all(n: int, N: int, tol: float = 1e-10, seed: int = 0, samples: int = 100) -> CertificationReport:
    """Run every certificate on the unit grid (n, N) and the centred grid (n, N)."""
    g = GridSpec(n, N)
    report = CertificationReport(n, N, tol, seed)
    entries = report.entries
    state: dict[str, OptimizerResult] = {}

    def optimizer_entry():
        opt = solve_optimizer(g, tol)
        state["opt"] = opt
        r1, _ = el_check(opt)
        equality = quadratic_form(make_operator(g), opt.vector, opt.vector)
        rel = abs(equality - opt.lam) / opt.lam
        ok = r1 <= tol * max(opt.lam, 1.0) and opt.min_entry > 0 and rel <= 1e-9
        metrics = {
            "lambda": opt.lam,
            "el_residual": r1,
            "min_entry": opt.min_entry,
            "equality_rel_error": rel,
            "iterations": opt.iterations,
        }
        return ok, metrics, {"el_residual": tol, "equality_rel_error": 1e-9}, ""

    def symmetry_entry():
        # the uniform start is itself symmetric, so use an asymmetric one
        opt = solve_optimizer(g, tol, with_gap=False, start=random_positive_start(g.num_points, seed))
        rep = check_symmetry(opt)
        return rep.passed, {"group_order": rep.group_order, "max_deviation": rep.max_deviation}, {
            "max_deviation": rep.tolerance
        }, ""

    def gap_entry():
        rep = check_gap(g, tol, seed=seed)
        note = "known degenerate L=2: C = A^2 is the identity" if rep.degenerate else ""
        metrics = {
            "mu_L": rep.spectral.mu_L,
            "mu_L_minus_1": rep.spectral.mu_L_minus_1,
            "gap_ratio": rep.gap_ratio,
            "degenerate": rep.degenerate,
        }
        return rep.passed, metrics, {"gap_margin": GAP_MARGIN}, note

    def uniqueness_entry():
        dist = check_uniqueness(g, tol, seed)
        return dist <= UNIQUENESS_TOL, {"multistart_linf": dist}, {"multistart_linf": UNIQUENESS_TOL}, ""

    def sign_entry():
        rep = check_sign_lemma(g, samples, seed)
        metrics = {
            "samples": rep.samples,
            "min_gain": rep.min_gain,
            "min_gain_diag": rep.min_gain_diag,
            "max_sign_pair_gap": rep.max_sign_pair_gap,
            "degenerate": rep.degenerate,
        }
        note = "known degenerate L=2: mixed-sign pairs attain lambda" if rep.degenerate else ""
        return rep.passed, metrics, {"max_sign_pair_gap": 1e-12}, note

    def bounds_entry():
        lam = state["opt"].lam
        lower, upper = lower_bound_uniform(g), upper_bound_center(g)
        margin = 1e-9 if N >= 3 else 0.0
        ok = lower + margin <= lam <= upper - margin if N >= 3 else within_sandwich(lower, lam, upper)
        return ok, {"lower": lower, "lambda": lam, "upper": upper}, {"strict_margin": margin}, ""

    def monotone_entry():
        rep = check_monotone_lambda(n, max(N, 3), tol)
        metrics = {
            "N": rep.Ns,
            "lambda": rep.lams,
            "max_embed_error": max(rep.embed_errors),
            "max_embed_excess": max(rep.embed_excess),
        }
        return rep.passed, metrics, {"embed": EMBED_TOL}, ""

    def decay_entry():
        opt = solve_optimizer(GridSpec(n, N, Convention.CENTERED), min(tol, 1e-12), with_gap=False)
        rep = verify_decay(opt)
        metrics = {
            "axes": [
                {
                    "axis": ax.axis,
                    "min_d": ax.min_d,
                    "min_direct": ax.min_direct,
                    "min_F": ax.min_F,
                    "opnorm_A": ax.opnorm_A,
                    "residual": ax.residual,
                    "pass": ax.passed,
                }
                for ax in rep.axes
            ]
        }
        return rep.passed, metrics, {"min_d": -1e-10, "residual": 1e-8}, ""

    for id_, fn in [
        ("optimizer", optimizer_entry),
        ("symmetry", symmetry_entry),
        ("gap", gap_entry),
        ("uniqueness", uniqueness_entry),
        ("sign_lemma", sign_entry),
        ("bounds", bounds_entry),
        ("monotone", monotone_entry),
        ("decay", decay_entry),
    ]:
        _run(entries, id_, fn)
    return report
