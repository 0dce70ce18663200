"""Criticality of oriented p-planes for a constant-coefficient p-form.

Three equivalent tests are implemented: the first-cousin coefficients
(residual_cousin), vanishing of the induced module of forms
(residual_module), and closure under the associated alternating vector
product (residual_rho).  The module is the image of o(n) acting on the
form; its annihilator on the Grassmannian is exactly the critical set.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .exterior import (
    AltForm,
    SkewMap,
    batch_eval_dense,
    canonical_indices,
    evaluate,
    so_action,
)

__all__ = [
    "OrientedPlane",
    "FormModule",
    "CriticalityReport",
    "SffElement",
    "p_map",
    "phi_module",
    "stabilizer_dim",
    "stabilizer_kernel",
    "is_critical",
    "annihilator_check",
    "rho_product",
    "rho_closed",
    "sff_space",
    "qr_fix",
    "subspace_distance",
]

DEFAULT_TOL = 1e-8
RANK_TOL = 1e-9


def qr_fix(m):
    """Reduced QR with the deterministic sign convention diag(R) >= 0."""
    q, r = np.linalg.qr(np.asarray(m, dtype=float))
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return q * d, r * d[:, None]


class OrientedPlane:
    """An oriented p-plane in R^n, stored as an n x p orthonormal frame."""

    __slots__ = ("n", "p", "frame", "_completion")

    def __init__(self, frame, tol=1e-10, orthonormalize=False):
        f = np.array(frame, dtype=float)
        if f.ndim != 2:
            raise ValueError("frame must be a 2-d array of columns")
        n, p = f.shape
        if p > n:
            raise ValueError(f"p={p} exceeds n={n}")
        gram = f.T @ f
        if not np.allclose(gram, np.eye(p), atol=tol):
            if orthonormalize:
                f, _ = qr_fix(f)
            else:
                raise ValueError("frame columns are not orthonormal")
        self.n, self.p = n, p
        self.frame = f
        self._completion = None

    def reversed(self):
        """The oppositely oriented plane (first column negated)."""
        f = self.frame.copy()
        f[:, 0] = -f[:, 0]
        return OrientedPlane(f)

    def completion(self):
        """Deterministic completion to an n x n orthonormal frame.

        The first p columns are the plane's own frame.
        """
        if self._completion is None:
            q, _ = qr_fix(np.hstack([self.frame, np.eye(self.n)]))
            q = q[:, : self.n]
            q[:, : self.p] = self.frame
            self._completion = q
        return self._completion

    def normal_frame(self):
        """Orthonormal basis of the orthogonal complement, n x (n-p)."""
        return self.completion()[:, self.p :]

    def rotated(self, g):
        """Image plane under an orthogonal map g (columns g @ frame)."""
        return OrientedPlane(np.asarray(g) @ self.frame)

    @classmethod
    def spanning(cls, *vectors):
        """Oriented span of the given vectors, orthonormalized in order."""
        f = np.column_stack([np.asarray(v, dtype=float) for v in vectors])
        q, _ = qr_fix(f)
        return cls(q)

    def to_json(self):
        return {"n": self.n, "p": self.p, "columns": self.frame.T.tolist()}

    @classmethod
    def from_json(cls, obj, tol=1e-6):
        if isinstance(obj, str):
            obj = json.loads(obj)
        cols = np.array(obj["columns"], dtype=float).T
        return cls(cols, tol=tol, orthonormalize=True)

    def __repr__(self):
        return f"OrientedPlane(n={self.n}, p={self.p})"


class FormModule:
    """A subspace of degree-p forms, stored as an orthonormal basis list."""

    def __init__(self, n, degree, basis):
        self.n = n
        self.degree = degree
        self.basis = list(basis)
        self.rank = len(self.basis)
        self._idx0 = np.array(canonical_indices(n, degree), dtype=np.intp) - 1
        self._coeff_mat = (
            np.vstack([b.dense() for b in self.basis])
            if self.basis
            else np.zeros((0, len(self._idx0)))
        )

    @classmethod
    def from_spanning(cls, n, degree, forms, tol=RANK_TOL):
        """Orthonormalize a spanning list, discarding the numerical null space."""
        if not forms:
            return cls(n, degree, [])
        mat = np.vstack([f.dense() for f in forms])
        u, s, vt = np.linalg.svd(mat, full_matrices=False)
        if s.size and s[0] > 0:
            rank = int(np.sum(s > tol * s[0]))
        else:
            rank = 0
        basis = [AltForm.from_dense(n, degree, vt[i]) for i in range(rank)]
        return cls(n, degree, basis)

    def dense_matrix(self):
        """Orthonormal basis as rows over the canonical index ordering."""
        return self._coeff_mat

    def values_on(self, frames):
        """Evaluate every basis form on a stack of frames, shape (rank, m)."""
        frames = np.asarray(frames, dtype=float)
        if frames.ndim == 2:
            frames = frames[None]
        return batch_eval_dense(self._coeff_mat, self._idx0, frames)

    def contains(self, form, tol=1e-9):
        v = form.dense()
        resid = v - self._coeff_mat.T @ (self._coeff_mat @ v)
        return float(np.linalg.norm(resid)) <= tol * max(1.0, np.linalg.norm(v))

    def __len__(self):
        return self.rank

    def __repr__(self):
        return f"FormModule(n={self.n}, degree={self.degree}, rank={self.rank})"


def subspace_distance(m1, m2):
    """Spectral-norm distance between the orthogonal projectors of two modules."""
    if m1.n != m2.n or m1.degree != m2.degree:
        raise ValueError("modules live in different form spaces")
    b1, b2 = m1.dense_matrix(), m2.dense_matrix()
    p1 = b1.T @ b1
    p2 = b2.T @ b2
    return float(np.linalg.norm(p1 - p2, 2))


@dataclass
class CriticalityReport:
    residual_cousin: float
    residual_module: float
    residual_rho: float
    value: float
    is_critical: bool
    tol: float = DEFAULT_TOL

    def to_json(self):
        return {
            "residual_cousin": self.residual_cousin,
            "residual_module": self.residual_module,
            "residual_rho": self.residual_rho,
            "value": self.value,
            "is_critical": self.is_critical,
        }


@dataclass
class SffElement:
    """Symmetric second-fundamental-form coefficients h[s, a, b].

    s indexes the normal directions (0-based offset from p), a, b the
    tangent slots; h is symmetric in (a, b) by storage.
    """

    h: np.ndarray  # shape (n - p, p, p)

    def trace_residual(self):
        return float(np.max(np.abs(np.trace(self.h, axis1=1, axis2=2))))


# -- the map P and the module Phi ------------------------------------------


def p_map(theta, phi):
    """The map o(n) -> degree-p forms, theta -> theta.phi."""
    return so_action(theta, phi)


def _elementary_generators(n):
    return [SkewMap.rotation_generator(n, i, j) for i, j in itertools.combinations(range(1, n + 1), 2)]


def phi_module(phi, tol=RANK_TOL):
    """Orthonormal basis of the image of o(n) acting on phi."""
    forms = [so_action(g, phi) for g in _elementary_generators(phi.n)]
    return FormModule.from_spanning(phi.n, phi.p, forms, tol=tol)


def stabilizer_dim(phi, tol=RANK_TOL):
    """Dimension of the stabilizer algebra of phi inside o(n)."""
    n = phi.n
    return n * (n - 1) // 2 - phi_module(phi, tol=tol).rank


def stabilizer_kernel(phi, tol=RANK_TOL):
    """Orthonormal basis of the stabilizer algebra, as a list of SkewMap."""
    n = phi.n
    gens = _elementary_generators(n)
    mat = np.vstack([so_action(g, phi).dense() for g in gens])
    u, s, vt = np.linalg.svd(mat)
    if s.size and s[0] > 0:
        rank = int(np.sum(s > tol * s[0]))
    else:
        rank = 0
    null = u[:, rank:] if rank < len(gens) else np.zeros((len(gens), 0))
    # u columns past the rank span the left null space: combinations of
    # generators mapped to zero by P
    out = []
    pairs = list(itertools.combinations(range(n), 2))
    for k in range(null.shape[1]):
        m = np.zeros((n, n))
        for (i, j), c in zip(pairs, null[:, k]):
            m[i, j] += c
            m[j, i] -= c
        out.append(SkewMap(m))
    return out


# -- criticality tests ------------------------------------------------------


def cousin_matrix(phi, xi):
    """First-cousin coefficients G[s, a] = phi(e_1, .., v_s at slot a, .., e_p)."""
    n, p = xi.n, xi.p
    if phi.p != p:
        raise ValueError(f"degree {phi.p} form against a {p}-plane")
    nn = xi.normal_frame()
    k = n - p
    if k == 0 or p == 0:
        return np.zeros((k, p))
    frames = np.broadcast_to(xi.frame, (k * p, n, p)).copy()
    for a in range(p):
        for s in range(k):
            frames[a * k + s, :, a] = nn[:, s]
    idx0, c = phi._compact()
    if idx0.shape[0] == 0:
        return np.zeros((k, p))
    vals = batch_eval_dense(c[None, :], idx0, frames)[0]
    return vals.reshape(p, k).T


def annihilator_check(xi, module):
    """max |gamma(xi)| over the module basis; ~0 iff xi is critical."""
    if module.rank == 0:
        return 0.0
    if module.degree != xi.p:
        raise ValueError("module degree does not match plane dimension")
    vals = module.values_on(xi.frame)
    return float(np.max(np.abs(vals)))


def rho_product(phi, vectors):
    """The alternating (p-1)-fold vector product dual to phi.

    Component k is phi(eps_k, v_2, .., v_p) for the standard basis eps_k.
    """
    vs = [np.asarray(v, dtype=float) for v in vectors]
    if len(vs) != phi.p - 1:
        raise ValueError(f"expected {phi.p - 1} vectors, got {len(vs)}")
    n = phi.n
    frames = np.zeros((n, n, phi.p))
    rest = np.column_stack(vs) if vs else np.zeros((n, 0))
    for k in range(n):
        frames[k, k, 0] = 1.0
        frames[k, :, 1:] = rest
    idx0, c = phi._compact()
    if idx0.shape[0] == 0:
        return np.zeros(n)
    return batch_eval_dense(c[None, :], idx0, frames)[0]


def _rho_offplane_residual(xi, phi):
    """Max normal component of rho over all (p-1)-subsets of the frame."""
    p = xi.p
    nn = xi.normal_frame()
    worst = 0.0
    for drop in range(p):
        cols = [xi.frame[:, a] for a in range(p) if a != drop]
        r = rho_product(phi, cols)
        if nn.shape[1]:
            worst = max(worst, float(np.max(np.abs(nn.T @ r))))
    return worst


def rho_closed(xi, phi, tol=DEFAULT_TOL):
    """True iff the plane is closed under rho (equivalently, critical)."""
    resid = _rho_offplane_residual(xi, phi)
    if resid >= tol:
        return False
    value = evaluate(phi, xi)
    if abs(value) > tol:
        # on a critical plane, rho of the trailing frame vectors recovers
        # value * e_1
        r = rho_product(phi, [xi.frame[:, a] for a in range(1, xi.p)])
        if np.max(np.abs(r - value * xi.frame[:, 0])) >= max(tol, 10 * tol * abs(value)):
            return False
    return True


def is_critical(xi, phi, tol=DEFAULT_TOL, module=None):
    """Full three-residual criticality report for a plane."""
    g = cousin_matrix(phi, xi)
    residual_cousin = float(np.max(np.abs(g))) if g.size else 0.0
    if module is None:
        module = phi_module(phi)
    residual_module = annihilator_check(xi, module)
    residual_rho = _rho_offplane_residual(xi, phi)
    value = evaluate(phi, xi)
    return CriticalityReport(
        residual_cousin=residual_cousin,
        residual_module=residual_module,
        residual_rho=residual_rho,
        value=value,
        is_critical=bool(residual_cousin < tol),
        tol=tol,
    )


# -- second fundamental form constraints ------------------------------------


def _adapted_values(phi, xi):
    """Critical value and the double-replacement coefficients in the adapted frame.

    Returns (phi_o, T) with T[a, b, s, t] the coefficient obtained from the
    leading component by replacing tangent slot a with normal direction s and
    slot b with normal direction t.
    """
    n, p = xi.n, xi.p
    k = n - p
    comp = xi.completion()
    phi_o = float(phi.apply(comp[:, :p]))
    frames = []
    for a in range(p):
        for b in range(p):
            for s in range(k):
                for t in range(k):
                    f = comp[:, :p].copy()
                    f[:, a] = comp[:, p + s]
                    f[:, b] = comp[:, p + t]
                    frames.append(f)
    idx0, c = phi._compact()
    if idx0.shape[0]:
        vals = batch_eval_dense(c[None, :], idx0, np.array(frames))[0]
    else:
        vals = np.zeros(len(frames))
    T = vals.reshape(p, p, k, k)
    # slots coincide: the replacement coefficient is zero by convention
    for a in range(p):
        T[a, a, :, :] = 0.0
    return phi_o, np.transpose(T, (0, 1, 2, 3))


def sff_space(xi, phi, tol=DEFAULT_TOL, rank_tol=RANK_TOL):
    """Solution space of the adapted-frame constraint on second fundamental forms.

    Solves phi_o * h[s, a, c] = sum_{b, t} T[a, b, s, t] * h[t, b, c] over
    symmetric h, returning (basis, all_trace_free).
    """
    report = is_critical(xi, phi, tol=tol)
    if not report.is_critical:
        raise ValueError(
            f"plane is not critical (residual {report.residual_cousin:.3e})"
        )
    n, p = xi.n, xi.p
    k = n - p
    if k == 0:
        return [], False
    phi_o, T = _adapted_values(phi, xi)
    # unknowns: h[t, b, c] with b <= c
    unknowns = [(t, b, c) for t in range(k) for b in range(p) for c in range(b, p)]
    col = {u: i for i, u in enumerate(unknowns)}
    rows = []
    for s in range(k):
        for a in range(p):
            for c in range(p):
                row = np.zeros(len(unknowns))
                row[col[(s, min(a, c), max(a, c))]] += phi_o
                for b in range(p):
                    for t in range(k):
                        row[col[(t, min(b, c), max(b, c))]] -= T[a, b, s, t]
                rows.append(row)
    mat = np.vstack(rows)
    u, sv, vt = np.linalg.svd(mat)
    if sv.size and sv[0] > 0:
        rank = int(np.sum(sv > rank_tol * sv[0]))
    else:
        rank = 0
    null = vt[rank:]
    basis = []
    for vec in null:
        h = np.zeros((k, p, p))
        for (t, b, c), i in col.items():
            h[t, b, c] = vec[i]
            h[t, c, b] = vec[i]
        basis.append(SffElement(h=h))
    all_trace_free = bool(basis) and all(e.trace_residual() < 1e-10 for e in basis)
    return basis, all_trace_free
