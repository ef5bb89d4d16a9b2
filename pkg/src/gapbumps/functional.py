"""The indefinite energy J, its gradient and Hessian in the gap metric.

J(u) = 1/2 ||T u||_k^2 - 1/2 ||P u||_k^2 - int F(x, u) with the power
nonlinearity f(x,t) = h(x) |t|^(p-2) t. Everything is expressed through the
eigencoefficients of the operator decomposition: in the weighted a-basis
the quadratic part is diag(sign lambda) and the gradient is the plain
Euclidean representative, so Newton systems downstream are dense symmetric
solves with no mass matrix.

Nonlinear terms are collocated on the grid by default. The `dealias` flag
evaluates them on a zero-padded fine grid instead (factor 3/2 by default;
the cubic terms of p=4 need factor >= 3 for exact quadrature, which the
degenerate translation fixture uses so its symmetry survives discretely).
The padded evaluation and its adjoint are an exact transpose pair, so the
finite-difference identities hold at machine accuracy either way.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .operator import PeriodicPotential, SpectralDecomposition
from .torus import GridField

__all__ = [
    "Nonlinearity",
    "evaluate_J",
    "gradient",
    "hessvec",
    "hessian_matrix",
    "interaction_defect",
]


@dataclass(frozen=True)
class Nonlinearity:
    """The data (h, p, q, gamma) of f(x,t) = h(x) |t|^(p-2) t.

    q and gamma are growth/coercivity exponents carried along for the
    hypothesis checks (2 < q <= p, gamma > 2; gamma = p makes the
    coercivity inequality an identity). p >= 3 keeps f' locally Lipschitz
    at t = 0, which Newton relies on.
    """

    p: float = 4.0
    q: float = 3.0
    gamma: float = 4.0
    weight: PeriodicPotential | None = None
    dealias: bool = False
    dealias_factor: float = 1.5

    def __post_init__(self) -> None:
        if self.p < 3.0:
            raise ValueError(f"p must be >= 3 (got {self.p}) so f' stays Lipschitz at 0")
        if not (2.0 < self.q <= self.p):
            raise ValueError(f"q must satisfy 2 < q <= p, got q={self.q}, p={self.p}")
        if self.gamma <= 2.0:
            raise ValueError(f"gamma must exceed 2, got {self.gamma}")
        if self.dealias and self.dealias_factor < 1.0:
            raise ValueError("dealias_factor must be >= 1")
        if self.weight is not None:
            probe = self.weight.profile(np.linspace(0.0, 1.0, 257)) - self.weight.shift
            if probe.min() < 0.0:
                raise ValueError("weight h must be nonnegative")

    def f(self, t: NDArray, h) -> NDArray:
        return h * np.abs(t) ** (self.p - 2.0) * t

    def F(self, t: NDArray, h) -> NDArray:
        return h * np.abs(t) ** self.p / self.p

    def fprime(self, t: NDArray, h) -> NDArray:
        return (self.p - 1.0) * h * np.abs(t) ** (self.p - 2.0)

    def weight_values(self, domain) -> NDArray[np.float64] | float:
        if self.weight is None:
            return 1.0
        return self.weight.evaluate(domain)

    def to_dict(self) -> dict:
        d: dict = {"p": self.p, "q": self.q, "gamma": self.gamma}
        if self.weight is not None:
            d["h"] = self.weight.to_dict()
        if self.dealias:
            d["dealias"] = True
            d["dealias_factor"] = self.dealias_factor
        return d


# -- padded (dealiased) evaluation ----------------------------------------------


def _fine_size(n: int, factor: float) -> int:
    nf = int(np.ceil(n * factor))
    return nf + (nf % 2)


def _pad_axis(spec: NDArray[np.complex128], axis: int, nf: int) -> NDArray:
    """Zero-pad one axis of an fftshift-ed spectrum, splitting the Nyquist mode."""
    n = spec.shape[axis]
    shape = list(spec.shape)
    shape[axis] = nf
    out = np.zeros(shape, dtype=complex)
    cf = nf // 2

    def sl(arr, lo, hi):
        index = [slice(None)] * arr.ndim
        index[axis] = slice(lo, hi)
        return tuple(index)

    out[sl(out, cf - n // 2 + 1, cf + n // 2)] = spec[sl(spec, 1, n)]
    nyq = spec[sl(spec, 0, 1)] * 0.5
    out[sl(out, cf - n // 2, cf - n // 2 + 1)] = nyq
    out[sl(out, cf + n // 2, cf + n // 2 + 1)] += nyq
    return out


def _crop_axis(spec: NDArray[np.complex128], axis: int, n: int) -> NDArray:
    """Adjoint of _pad_axis on an fftshift-ed spectrum."""
    nf = spec.shape[axis]
    shape = list(spec.shape)
    shape[axis] = n
    out = np.zeros(shape, dtype=complex)
    cf = nf // 2

    def sl(arr, lo, hi):
        index = [slice(None)] * arr.ndim
        index[axis] = slice(lo, hi)
        return tuple(index)

    out[sl(out, 1, n)] = spec[sl(spec, cf - n // 2 + 1, cf + n // 2)]
    out[sl(out, 0, 1)] = 0.5 * (
        spec[sl(spec, cf - n // 2, cf - n // 2 + 1)]
        + spec[sl(spec, cf + n // 2, cf + n // 2 + 1)]
    )
    return out


def _upsample(values: NDArray[np.float64], nf: int) -> NDArray[np.float64]:
    spec = np.fft.fftshift(np.fft.fftn(values))
    for ax in range(values.ndim):
        spec = _pad_axis(spec, ax, nf)
    scale = (nf / values.shape[0]) ** values.ndim
    return np.fft.ifftn(np.fft.ifftshift(spec)).real * scale

def _upsample_adjoint(fine: NDArray[np.float64], n: int) -> NDArray[np.float64]:
    spec = np.fft.fftshift(np.fft.fftn(fine))
    for ax in range(fine.ndim):
        spec = _crop_axis(spec, ax, n)
    return np.fft.ifftn(np.fft.ifftshift(spec)).real


def _dealias_cache(S: SpectralDecomposition, nl: Nonlinearity) -> dict:
    """Per-decomposition cache of fine-grid data for padded evaluation."""
    store = getattr(S, "_dealias_store", None)
    if store is None:
        store = {}
        object.__setattr__(S, "_dealias_store", store)
    key = (nl.dealias_factor, nl.weight)
    if key not in store:
        dom = S.domain
        n = dom.points_per_axis
        nf = _fine_size(n, nl.dealias_factor)
        if nl.weight is None:
            hfine: NDArray | float = 1.0
        else:
            coords = -0.5 * dom.cells + dom.cells * np.arange(nf) / nf
            mesh = np.meshgrid(*([coords] * dom.dim), indexing="ij")
            hf = np.zeros(mesh[0].shape)
            axes = nl.weight.axes if nl.weight.axes is not None else range(dom.dim)
            for ax, x in enumerate(mesh):
                if ax in axes:
                    hf = hf + nl.weight.profile(x)
            hfine = hf - nl.weight.shift
        store[key] = {
            "nf": nf,
            "hfine": hfine,
            "quad_weight": dom.volume / nf**dom.dim,
            "fine_fields": None,  # lazily built matrix of upsampled eigenfields
        }
    return store[key]


def _nl_env(S: SpectralDecomposition, nl: Nonlinearity, values: NDArray):
    """Evaluation environment: (samples of u, weight there, quadrature weight, cache)."""
    if not nl.dealias:
        hcoarse = nl.weight_values(S.domain)
        return values, hcoarse, S.domain.spacing**S.domain.dim, None
    cache = _dealias_cache(S, nl)
    return _upsample(values, cache["nf"]), cache["hfine"], cache["quad_weight"], cache


def _nl_integral_and_force(S, nl, values):
    """int F(x, u) and the gradient d/du of it against plain grid values."""
    samples, h, qw, cache = _nl_env(S, nl, values)
    Fint = qw * float(np.sum(nl.F(samples, h)))
    force = nl.f(samples, h)
    if cache is None:
        fterm = qw * force
    else:
        fterm = qw * _upsample_adjoint(force, S.domain.points_per_axis)
    return Fint, fterm


# -- weighted-coordinate calculus (used by solvers) ------------------------------


def a_value_and_gradient(
    S: SpectralDecomposition, nl: Nonlinearity, a: NDArray[np.float64]
) -> tuple[float, NDArray[np.float64]]:
    """J and its (.,.)_k-gradient at the point with weighted coordinates a."""
    values = S.values_from_a(a)
    Fint, fterm = _nl_integral_and_force(S, nl, values)
    J = 0.5 * float(np.dot(S.signs * a, a)) - Fint
    g = S.signs * a - (S.eigenfields.T @ fterm.reshape(-1)) / S.weights
    return J, g

def a_gradient(S, nl, a: NDArray[np.float64]) -> NDArray[np.float64]:
    return a_value_and_gradient(S, nl, a)[1]


def a_hessian(
    S: SpectralDecomposition, nl: Nonlinearity, a: NDArray[np.float64]
) -> NDArray[np.float64]:
    """Dense symmetric Hessian of J in the weighted coordinates."""
    values = S.values_from_a(a)
    samples, h, qw, cache = _nl_env(S, nl, values)
    fp = qw * nl.fprime(samples, h)
    if cache is None:
        basis = S.eigenfields
        W = basis.T @ (basis * fp.reshape(-1)[:, None])
    else:
        fine_fields = cache["fine_fields"]
        if fine_fields is None:
            n = S.num_modes
            nf_total = samples.size
            fine_fields = np.empty((nf_total, n))
            for i in range(n):
                col = S.eigenfields[:, i].reshape(S.domain.shape)
                fine_fields[:, i] = _upsample(col, cache["nf"]).reshape(-1)
            cache["fine_fields"] = fine_fields
        W = fine_fields.T @ (fine_fields * fp.reshape(-1)[:, None])
    A = np.diag(S.signs) - W / np.outer(S.weights, S.weights)
    return 0.5 * (A + A.T)


def a_hessvec(
    S: SpectralDecomposition, nl: Nonlinearity, a: NDArray, v: NDArray
) -> NDArray[np.float64]:
    """Hessian-vector product in weighted coordinates, no dense assembly."""
    values = S.values_from_a(a)
    vvalues = S.values_from_a(v)
    samples, h, qw, cache = _nl_env(S, nl, values)
    if cache is None:
        prod = qw * nl.fprime(samples, h) * vvalues
    else:
        vfine = _upsample(vvalues, cache["nf"])
        prod = qw * _upsample_adjoint(
            nl.fprime(samples, h) * vfine, S.domain.points_per_axis
        )
    return S.signs * v - (S.eigenfields.T @ prod.reshape(-1)) / S.weights


# -- public field-level operations ------------------------------------------------


def evaluate_J(u: GridField, S: SpectralDecomposition, nl: Nonlinearity) -> float:
    """J(u) = 1/2 ||T u||_k^2 - 1/2 ||P u||_k^2 - int F(x, u)."""
    S.require_gap()
    a = S.a_from_field(u)
    values = S.values_from_a(a)
    Fint, _ = _nl_integral_and_force(S, nl, values)
    return 0.5 * float(np.dot(S.signs * a, a)) - Fint


def gradient(u: GridField, S: SpectralDecomposition, nl: Nonlinearity) -> GridField:
    """Riesz representative of dJ(u) in (.,.)_k, returned as a field."""
    S.require_gap()
    g = a_gradient(S, nl, S.a_from_field(u))
    return S.field_from_a(g)


def hessvec(
    u: GridField, v: GridField, S: SpectralDecomposition, nl: Nonlinearity
) -> GridField:
    """Second derivative of J at u applied to v, in the (.,.)_k metric."""
    S.require_gap()
    hv = a_hessvec(S, nl, S.a_from_field(u), S.a_from_field(v))
    return S.field_from_a(hv)


def hessian_matrix(
    u: GridField, S: SpectralDecomposition, nl: Nonlinearity
) -> NDArray[np.float64]:
    S.require_gap()
    return a_hessian(S, nl, S.a_from_field(u))


def residual_norm(u: GridField, S: SpectralDecomposition, nl: Nonlinearity) -> float:
    """||grad J(u)||_k, the convergence measure used everywhere."""
    return float(np.linalg.norm(a_gradient(S, nl, S.a_from_field(u))))


def interaction_defect(
    u_list: list[GridField],
    phi: GridField,
    psi: GridField,
    nl: Nonlinearity,
) -> float:
    """int |f'(x, sum u_i) - sum f'(x, u_i)| |phi| |psi| dx.

    Measures how far f' is from additive over the superposition; decays to
    zero as the summands separate. Plain collocation quadrature: the
    integrand's absolute values leave the trigonometric space anyway.
    """
    if not u_list:
        raise ValueError("need at least one summand")
    dom = u_list[0].domain
    for u in u_list[1:]:
        if not u.domain.compatible(dom):
            raise ValueError("summands live on incompatible domains")
    h = nl.weight_values(dom)
    total = np.zeros(dom.shape)
    split = np.zeros(dom.shape)
    for u in u_list:
        total = total + u.values
        split = split + nl.fprime(u.values, h)
    defect = np.abs(nl.fprime(total, h) - split) * np.abs(phi.values) * np.abs(psi.values)
    return float(dom.spacing**dom.dim * defect.sum())
