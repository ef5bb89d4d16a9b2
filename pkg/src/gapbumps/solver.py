"""Critical-point search and linking-geometry estimators.

The search itself is damped Newton on the gradient in energy coefficients,
seeded by a localized ansatz on the positive subspace. The linking
quantities (sphere level on the positive sphere, bounded max over the
negative cone plus a ray) are estimated separately; they bracket the
energy of the solutions Newton finds but are not used to drive it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from .functional import Nonlinearity, a_gradient, a_hessian, a_value_and_gradient
from .operator import PeriodicPotential, SpectralDecomposition, orbit_shifts
from .torus import GridField, TorusDomain, translate


class NoConvergence(RuntimeError):
    """Newton ran out of iterations or the line search stalled."""


class TrivialCollapse(RuntimeError):
    """The iterate shrank into the basin of u = 0."""


@dataclass(frozen=True)
class SolverOptions:
    newton_tol: float = 1e-10
    max_iters: int = 200
    backtrack: float = 0.5
    sufficient_decrease: float = 1e-4
    tikhonov: float = 1e-8
    tikhonov_cap: float = 1e-2
    deflation_radius: float = 0.5
    collapse_norm: float = 1e-3

    def __post_init__(self) -> None:
        for name in (
            "newton_tol",
            "backtrack",
            "sufficient_decrease",
            "tikhonov",
            "tikhonov_cap",
            "deflation_radius",
            "collapse_norm",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.max_iters <= 0:
            raise ValueError("max_iters must be positive")
        if not self.backtrack < 1:
            raise ValueError("backtrack factor must lie in (0, 1)")


@dataclass(frozen=True)
class SolutionRecord:
    """A converged critical point plus the diagnostics tests key on.

    negative_hessian_count counts eigenvalues below -tau*scale of the
    Hessian at the solution and kernel_dim_estimate those within
    tau*scale of zero, tau = 1e-4; the same relative threshold the
    reduction uses, so the two views agree.
    """

    field: GridField
    energy: float
    residual: float
    norm_k: float
    negative_hessian_count: int
    kernel_dim_estimate: int
    iterations: int
    residual_history: tuple[float, ...]
    domain_fingerprint: dict
    potential_fingerprint: dict
    nonlinearity_fingerprint: dict

    def to_dict(self) -> dict:
        return {
            "energy": self.energy,
            "residual": self.residual,
            "norm_k": self.norm_k,
            "negative_hessian_count": self.negative_hessian_count,
            "kernel_dim_estimate": self.kernel_dim_estimate,
            "iterations": self.iterations,
            "residual_history": list(self.residual_history),
            "domain": self.domain_fingerprint,
            "potential": self.potential_fingerprint,
            "nonlinearity": self.nonlinearity_fingerprint,
            "values": [float(v) for v in self.field.flat],
        }


def _fingerprints(
    S: SpectralDecomposition, nl: Nonlinearity
) -> tuple[dict, dict, dict]:
    d = S.domain
    dom = {"dim": d.dim, "cells": d.cells, "samples_per_cell": d.samples_per_cell}
    return dom, S.potential.to_dict(), nl.to_dict()


def initial_ansatz(
    center: Sequence[float],
    width: float,
    amplitude: float,
    domain: TorusDomain,
    S: SpectralDecomposition,
) -> GridField:
    """Gaussian bump at `center`, projected onto the positive subspace.

    Distances wrap around the torus (minimum image), so the bump is
    periodic and centering near the edge behaves the same as centering
    at 0.
    """
    if width <= 0:
        raise ValueError("width must be positive")
    if len(center) != domain.dim:
        raise ValueError("center has wrong dimension")
    k = float(domain.cells)
    sq = np.zeros(domain.shape)
    for axis, c in enumerate(center):
        x = domain.axis_coords()
        d = x - float(c)
        d -= k * np.round(d / k)
        shape = [1] * domain.dim
        shape[axis] = domain.points_per_axis
        sq = sq + (d.reshape(shape)) ** 2
    bump = amplitude * np.exp(-sq / (2.0 * width**2))
    a = S.a_from_values(bump)
    a[: S.j] = 0.0
    return S.field_from_a(a)


def _newton_direction(
    H: NDArray[np.float64],
    g: NDArray[np.float64],
    signs: NDArray[np.float64],
    opts: SolverOptions,
) -> NDArray[np.float64]:
    # Ridge mu*diag(sign lambda) pushes Hessian eigenvalues away from zero
    # on both sides instead of shifting the whole spectrum.
    mu = opts.tikhonov
    while mu <= opts.tikhonov_cap:
        try:
            d = scipy.linalg.solve(H + mu * np.diag(signs), -g, assume_a="sym")
        except scipy.linalg.LinAlgError:
            d = None
        if d is not None and np.all(np.isfinite(d)):
            return d
        mu *= 10.0
    return -(H @ g)  # steepest descent on the merit 0.5|g|^2


_KERNEL_TAU = 1e-4


def _hessian_counts(H: NDArray[np.float64]) -> tuple[int, int]:
    mu = scipy.linalg.eigvalsh(H)
    scale = float(np.abs(mu).max())
    near = np.abs(mu) < _KERNEL_TAU * scale
    negative = (mu < 0) & ~near
    return int(negative.sum()), int(near.sum())


def find_critical_point(
    init: GridField,
    S: SpectralDecomposition,
    nl: Nonlinearity,
    opts: SolverOptions = SolverOptions(),
) -> SolutionRecord:
    """Damped Newton for grad J = 0 from `init`.

    The step solves (H + mu*diag(sign lambda)) d = -g densely; the line
    search backtracks on the merit 0.5*|g|^2 and falls back to steepest
    descent for that merit whenever the Newton direction is not a
    descent direction. Iterates sliding under ``opts.collapse_norm``
    abort with TrivialCollapse: u = 0 is a critical point, just not one
    worth returning.
    """
    S.require_gap()
    a = S.a_from_field(init)
    history: list[float] = []
    for iteration in range(opts.max_iters):
        g = a_gradient(S, nl, a)
        r = float(np.linalg.norm(g))
        history.append(r)
        if float(np.linalg.norm(a)) < opts.collapse_norm:
            raise TrivialCollapse(
                f"iterate norm fell below {opts.collapse_norm:g} at step {iteration}"
            )
        if r <= opts.newton_tol:
            return _make_record(a, S, nl, iteration, history)
        H = a_hessian(S, nl, a)
        d = _newton_direction(H, g, S.signs, opts)
        merit_grad = H @ g
        slope = float(merit_grad @ d)
        if slope >= 0:
            d = -merit_grad
            slope = -float(merit_grad @ merit_grad)
        phi0 = 0.5 * r * r
        step = 1.0
        accepted = False
        for _ in range(60):
            g_trial = a_gradient(S, nl, a + step * d)
            if 0.5 * float(g_trial @ g_trial) <= phi0 + opts.sufficient_decrease * step * slope:
                accepted = True
                break
            step *= opts.backtrack
        if not accepted:
            raise NoConvergence(
                f"line search stalled at residual {r:.3e} (step {iteration})"
            )
        a = a + step * d
    raise NoConvergence(f"no convergence in {opts.max_iters} iterations")


def _make_record(
    a: NDArray[np.float64],
    S: SpectralDecomposition,
    nl: Nonlinearity,
    iterations: int,
    history: list[float],
) -> SolutionRecord:
    J, g = a_value_and_gradient(S, nl, a)
    neg, near = _hessian_counts(a_hessian(S, nl, a))
    dom_fp, pot_fp, nl_fp = _fingerprints(S, nl)
    return SolutionRecord(
        field=S.field_from_a(a),
        energy=float(J),
        residual=float(np.linalg.norm(g)),
        norm_k=float(np.linalg.norm(a)),
        negative_hessian_count=neg,
        kernel_dim_estimate=near,
        iterations=iterations,
        residual_history=tuple(history),
        domain_fingerprint=dom_fp,
        potential_fingerprint=pot_fp,
        nonlinearity_fingerprint=nl_fp,
    )


def validate_solution(
    rec: SolutionRecord,
    S: SpectralDecomposition,
    nl: Nonlinearity,
    thresholds: tuple[float, float],
    residual_tol: float = 1e-10,
    rng: np.random.Generator | None = None,
) -> dict[str, tuple[bool, float]]:
    """Post-hoc checks on a record: size, level, residual, symmetry.

    thresholds = (norm floor, energy floor), both measured fixtures.
    Returns {check: (passed, measured)}; the residual is recomputed from
    the stored field rather than trusted from the record.
    """
    eps1, eps2 = thresholds
    rng = rng if rng is not None else np.random.default_rng(0)
    a = S.a_from_field(rec.field)
    J, g = a_value_and_gradient(S, nl, a)
    checks: dict[str, tuple[bool, float]] = {}
    norm_k = float(np.linalg.norm(a))
    checks["norm_floor"] = (norm_k >= eps1, norm_k)
    checks["energy_floor"] = (float(J) >= eps2, float(J))
    res = float(np.linalg.norm(g))
    checks["residual"] = (res <= residual_tol, res)
    k = rec.field.domain.cells
    worst = 0.0
    for _ in range(3):
        b = tuple(int(s) for s in rng.integers(0, k, size=rec.field.domain.dim))
        Jb = a_value_and_gradient(S, nl, S.a_from_field(translate(rec.field, b)))[0]
        worst = max(worst, abs(float(Jb) - float(J)))
    tol = 1e-12 * max(1.0, abs(float(J)))
    checks["translation_invariance"] = (worst <= tol, worst)
    return checks


def sphere_level(
    S: SpectralDecomposition,
    nl: Nonlinearity,
    r: float,
    samples: int = 64,
    rng: np.random.Generator | None = None,
    descent_iters: int = 400,
) -> float:
    """Estimate inf of J over the radius-r sphere in the positive subspace.

    Random sampling picks a starting point; projected gradient descent
    then slides along the sphere (step, renormalize) with backtracking.
    The result is an upper estimate of the infimum, which is the safe
    side for the lower bound of the linking sandwich.
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    S.require_gap()
    rng = rng if rng is not None else np.random.default_rng(0)
    n = S.num_modes
    j = S.j

    def value(a: NDArray[np.float64]) -> float:
        return a_value_and_gradient(S, nl, a)[0]

    best: NDArray[np.float64] | None = None
    best_J = np.inf
    for _ in range(max(1, samples)):
        z = np.zeros(n)
        z[j:] = rng.standard_normal(n - j) / (1.0 + np.abs(S.eigenvalues[j:]))
        z *= r / np.linalg.norm(z)
        Jz = value(z)
        if Jz < best_J:
            best_J, best = Jz, z
    assert best is not None
    a = best
    step = 0.5
    Ja = best_J
    for _ in range(descent_iters):
        g = a_gradient(S, nl, a)
        g[:j] = 0.0
        tangent = g - (g @ a) / (r * r) * a
        tnorm = float(np.linalg.norm(tangent))
        if tnorm <= 1e-12 * max(1.0, abs(Ja)):
            break
        moved = False
        while step > 1e-14:
            trial = a - step * tangent
            trial *= r / np.linalg.norm(trial)
            Jt = value(trial)
            if Jt < Ja - 1e-12 * abs(Ja):
                a, Ja = trial, Jt
                moved = True
                step = min(step * 2.0, 1.0)
                break
            step *= 0.5
        if not moved:
            break
    return float(Ja)


class LinkingBound(NamedTuple):
    value: float
    boundary_sup: float


def linking_upper_bound(
    S: SpectralDecomposition,
    nl: Nonlinearity,
    z_k: GridField,
    rho: float,
    samples: int = 32,
    rng: np.random.Generator | None = None,
    ascent_iters: int = 400,
) -> LinkingBound:
    """Max of J over {y + t*z_k : y negative-subspace, t >= 0, norm <= rho}.

    Projected gradient ascent from several starts (random interior
    points plus a scan along the ray t*z_k). Also reports the sup of J
    over the boundary of that half-ball; the geometry is usable once
    that sup sits at essentially zero.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    S.require_gap()
    rng = rng if rng is not None else np.random.default_rng(0)
    za = S.a_from_field(z_k)
    zn = float(np.linalg.norm(za))
    if abs(zn - 1.0) > 1e-8:
        raise ValueError("z_k must have unit energy norm")
    if float(np.linalg.norm(za[: S.j])) > 1e-8:
        raise ValueError("z_k must lie in the positive subspace")
    j = S.j
    n = S.num_modes

    def embed(y: NDArray[np.float64], t: float) -> NDArray[np.float64]:
        a = np.zeros(n)
        a[:j] = y
        return a + t * za

    def value(y: NDArray[np.float64], t: float) -> float:
        return a_value_and_gradient(S, nl, embed(y, t))[0]

    def grad(y: NDArray[np.float64], t: float) -> tuple[NDArray[np.float64], float]:
        g = a_gradient(S, nl, embed(y, t))
        return g[:j].copy(), float(g @ za)

    def clip(y: NDArray[np.float64], t: float) -> tuple[NDArray[np.float64], float]:
        t = max(t, 0.0)
        norm = np.hypot(np.linalg.norm(y), t)
        if norm > rho:
            y = y * (rho / norm)
            t = t * (rho / norm)
        return y, t

    starts: list[tuple[NDArray[np.float64], float]] = []
    for t in np.linspace(0.05 * rho, 0.95 * rho, 12):
        starts.append((np.zeros(j), float(t)))
    for _ in range(max(0, samples)):
        y = rng.standard_normal(j)
        t = abs(rng.standard_normal())
        norm = np.hypot(np.linalg.norm(y), t)
        scale = rho * rng.uniform(0.0, 0.95) / max(norm, 1e-30)
        starts.append((y * scale, t * scale))
    starts.sort(key=lambda yt: -value(*yt))

    best_val = -np.inf
    for y, t in starts[:4]:
        step = 0.5
        Jc = value(y, t)
        for _ in range(ascent_iters):
            gy, gt = grad(y, t)
            gnorm = np.hypot(np.linalg.norm(gy), gt)
            if gnorm <= 1e-12 * max(1.0, abs(Jc)):
                break
            moved = False
            while step > 1e-14:
                ty, tt = clip(y + step * gy, t + step * gt)
                Jt = value(ty, tt)
                if Jt > Jc + 1e-14 * abs(Jc):
                    y, t, Jc = ty, tt, Jt
                    moved = True
                    step = min(step * 2.0, 1.0)
                    break
                step *= 0.5
            if not moved:
                break
        best_val = max(best_val, Jc)

    boundary = _boundary_sup(S, nl, za, rho, samples, rng, value)
    return LinkingBound(float(best_val), float(boundary))


def _boundary_sup(S, nl, za, rho, samples, rng, value) -> float:
    # Two faces: the t=0 slab (J <= 0 there, sup 0 at the origin) and the
    # radius-rho sphere cap with t >= 0. Sample both, then tangential
    # ascent on the cap from the best sample.
    j = S.j
    sup = value(np.zeros(j), 0.0)  # origin, exactly J(0) = 0
    best_y, best_t, best_J = None, 0.0, -np.inf
    for _ in range(max(4, samples)):
        y = rng.standard_normal(j)
        t = abs(rng.standard_normal())
        norm = np.hypot(np.linalg.norm(y), t)
        y, t = y * (rho / norm), t * (rho / norm)
        Jc = value(y, t)
        sup = max(sup, Jc)
        if Jc > best_J:
            best_y, best_t, best_J = y, t, Jc
        # rim of the t=0 slab belongs to both faces
        sup = max(sup, value(y / np.linalg.norm(y) * rho, 0.0))
    y, t, Jc = best_y, best_t, best_J
    step = 0.25
    for _ in range(200):
        g = a_gradient(S, nl, np.concatenate([y, np.zeros(S.num_modes - j)]) + t * za)
        gy, gt = g[:j], float(g @ za)
        radial = np.concatenate([y, [t]]) / rho
        full = np.concatenate([gy, [gt]])
        tang = full - (full @ radial) * radial
        if np.linalg.norm(tang) <= 1e-12:
            break
        moved = False
        while step > 1e-14:
            cand = np.concatenate([y, [t]]) + step * tang
            cand[-1] = max(cand[-1], 0.0)
            cand *= rho / np.linalg.norm(cand)
            Jt = value(cand[:j], float(cand[-1]))
            if Jt > Jc + 1e-14 * abs(Jc):
                y, t, Jc = cand[:j], float(cand[-1]), Jt
                moved = True
                step = min(step * 2.0, 0.5)
                break
            step *= 0.5
        if not moved:
            break
    return max(sup, Jc)


def orbit_distance(
    u: GridField,
    v: GridField,
    S: SpectralDecomposition,
) -> tuple[float, tuple[int, ...]]:
    """Distance in the energy norm between u and the translation orbit of v.

    Tries every integer shift; ties resolve to the lexicographically
    smallest shift so the answer is deterministic.
    """
    au = S.a_from_field(u)
    best = np.inf
    best_shift: tuple[int, ...] = (0,) * u.domain.dim
    for b in orbit_shifts(u.domain):
        d = float(np.linalg.norm(au - S.a_from_field(translate(v, b))))
        if d < best - 1e-15:
            best, best_shift = d, b
    return best, best_shift


def same_orbit(
    u: GridField, v: GridField, S: SpectralDecomposition, radius: float
) -> bool:
    return orbit_distance(u, v, S)[0] <= radius


def deflated_search(
    known: list[SolutionRecord],
    tries: int,
    S: SpectralDecomposition,
    nl: Nonlinearity,
    opts: SolverOptions = SolverOptions(),
    rng: np.random.Generator | None = None,
) -> list[SolutionRecord]:
    """Hunt for solutions geometrically distinct from `known`.

    Randomized Gaussian ansatz per try (center, width, amplitude, sign);
    converged results within deflation_radius of any known or newly
    found orbit are discarded. Failures of individual tries are normal
    and silent; the caller sees only the survivors.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    domain = S.domain
    k = float(domain.cells)
    found: list[SolutionRecord] = []
    pool = list(known)
    for _ in range(max(0, tries)):
        center = rng.uniform(-k / 2, k / 2, size=domain.dim)
        width = rng.uniform(0.3, 0.9)
        # below ~|a| = 10 in energy norm every start here drains into u = 0
        amplitude = rng.uniform(4.0, 16.0) * (1.0 if rng.uniform() < 0.5 else -1.0)
        init = initial_ansatz(center, width, amplitude, domain, S)
        try:
            rec = find_critical_point(init, S, nl, opts)
        except (NoConvergence, TrivialCollapse):
            continue
        if rec.norm_k < opts.collapse_norm:
            continue
        if any(
            same_orbit(rec.field, other.field, S, opts.deflation_radius)
            for other in pool
        ):
            continue
        found.append(rec)
        pool.append(rec)
    return found
