"""Pointwise exterior-differential-system analysis of the induced ideal.

The ideal is generated in degree p by the module of forms whose common
zero set on the Grassmannian is the critical variety.  This module computes
polar spaces along a flag, Cartan characters, the codimension of the space
of integral p-planes (as the rank of the linearized constraint), and the
Hodge-dual comparison.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .critical import (
    FormModule,
    OrientedPlane,
    annihilator_check,
    phi_module,
    qr_fix,
)
from .exterior import AltForm, hodge_star, wedge
from .grassmann import SearchParams, comass_search

__all__ = [
    "FlagReport",
    "polar_space",
    "integral_element_codim",
    "cartan_test",
    "hodge_dual_ideal_check",
]

INTEGRAL_TOL = 1e-6
JACOBIAN_CUTOFF = 1e-4
KERNEL_CUTOFF = 1e-6


@dataclass
class FlagReport:
    flag_dims: list
    polar_codims: list  # c_1 .. c_{p-1}
    cartan_bound: int
    actual_codim: int
    involutive_at_flag: bool
    bound_max_over_orders: Optional[int] = None

    def to_json(self):
        return {
            "flag_dims": self.flag_dims,
            "polar_codims": self.polar_codims,
            "cartan_bound": self.cartan_bound,
            "actual_codim": self.actual_codim,
            "involutive_at_flag": self.involutive_at_flag,
            "bound_max_over_orders": self.bound_max_over_orders,
        }


def _kernel(mat, cutoff=KERNEL_CUTOFF):
    """Orthonormal basis of the kernel of mat (columns of the output)."""
    mat = np.atleast_2d(mat)
    u, s, vt = np.linalg.svd(mat)
    if s.size and s[0] > 0:
        rank = int(np.sum(s > cutoff * s[0]))
    else:
        rank = 0
    return vt[rank:].T


def polar_space(e, module):
    """Polar space of a k-dim integral element of the ideal generated by module.

    Returns an orthonormal basis (columns).  Below degree p-1 the relevant
    graded piece of the ideal vanishes, so the polar space is everything.
    """
    frame = getattr(e, "frame", e)
    frame = np.asarray(frame, dtype=float)
    n, k = frame.shape
    p = module.degree
    if k > p:
        raise ValueError(f"flag dimension {k} exceeds the generator degree {p}")
    if k < p - 1:
        return np.eye(n)
    if k == p - 1:
        if module.rank == 0:
            return np.eye(n)
        frames = np.zeros((n, n, p))
        for j in range(n):
            frames[j, :, :-1] = frame
            frames[j, j, -1] = 1.0
        rows = module.values_on(frames)  # (rank, n)
        return _kernel(rows)
    # k == p: use the degree p+1 piece, spanned by generator ^ covector
    span = []
    for gamma in module.basis:
        for j in range(1, n + 1):
            span.append(wedge(gamma, AltForm.basis(n, j)))
    ideal_next = FormModule.from_spanning(n, p + 1, span)
    if ideal_next.rank == 0:
        return np.eye(n)
    frames = np.zeros((n, n, p + 1))
    for j in range(n):
        frames[j, :, :-1] = frame
        frames[j, j, -1] = 1.0
    rows = ideal_next.values_on(frames)
    return _kernel(rows)


def integral_element_codim(xi, module, fd_check=True, fd_step=1e-6):
    """Codimension of the variety of integral p-planes at xi.

    The constraint map sends a tangent perturbation of the plane to the
    module values on the perturbed plane; the codimension is the rank of its
    linearization, computed exactly and cross-checked by finite differences.
    """
    resid = annihilator_check(xi, module)
    if resid > INTEGRAL_TOL:
        raise ValueError(f"plane is not an integral element (residual {resid:.3e})")
    n, p = xi.n, xi.p
    k = n - p
    if module.rank == 0 or k == 0:
        return 0
    nn = xi.normal_frame()
    frames = np.broadcast_to(xi.frame, (k * p, n, p)).copy()
    for a in range(p):
        for s in range(k):
            frames[a * k + s, :, a] = nn[:, s]
    jac = module.values_on(frames)  # exact linearization, (rank, k*p)
    rank = _rank(jac, JACOBIAN_CUTOFF)
    if fd_check:
        fd = np.zeros_like(jac)
        for a in range(p):
            for s in range(k):
                plus = xi.frame.copy()
                plus[:, a] += fd_step * nn[:, s]
                minus = xi.frame.copy()
                minus[:, a] -= fd_step * nn[:, s]
                qp, _ = qr_fix(plus)
                qm, _ = qr_fix(minus)
                vp = module.values_on(qp[None])[:, 0]
                vm = module.values_on(qm[None])[:, 0]
                fd[:, a * k + s] = (vp - vm) / (2.0 * fd_step)
        if _rank(fd, JACOBIAN_CUTOFF) != rank:
            warnings.warn(
                "finite-difference and exact linearization ranks disagree; "
                "the integral variety may be singular here",
                RuntimeWarning,
            )
    return rank


def _rank(mat, cutoff):
    s = np.linalg.svd(mat, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > cutoff * s[0]))


def cartan_test(xi, module, random_orders=50, seed=0):
    """Cartan's test at the flag built from the frame columns in order."""
    n, p = xi.n, xi.p
    codims = _flag_codims(xi.frame, module)
    bound = int(sum(codims))
    actual = integral_element_codim(xi, module)
    bound_max = None
    if random_orders:
        rng = np.random.default_rng(seed)
        bound_max = bound
        for _ in range(random_orders):
            perm = rng.permutation(p)
            bound_max = max(bound_max, int(sum(_flag_codims(xi.frame[:, perm], module))))
    return FlagReport(
        flag_dims=list(range(1, p)),
        polar_codims=codims,
        cartan_bound=bound,
        actual_codim=actual,
        involutive_at_flag=bool(actual == bound),
        bound_max_over_orders=bound_max,
    )


def _flag_codims(frame, module):
    n = frame.shape[0]
    p = frame.shape[1]
    codims = []
    for a in range(1, p):
        h = polar_space(frame[:, :a], module)
        codims.append(n - h.shape[1])
    return codims


def hodge_dual_ideal_check(phi, xi=None, params=None):
    """Codimensions at a critical plane for phi and at its perp for *phi.

    The two are equal; both integers are returned so callers can assert it.
    """
    if params is None:
        params = SearchParams()
    module = phi_module(phi)
    if xi is None:
        _, xi = comass_search(phi, params=params, module=module)
    dual = hodge_star(phi)
    module_dual = phi_module(dual)
    xi_perp = OrientedPlane(xi.normal_frame())
    codim_p = integral_element_codim(xi, module)
    codim_dual = integral_element_codim(xi_perp, module_dual)
    return codim_p, codim_dual
