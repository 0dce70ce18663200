"""Sparse exterior algebra over R^n with the standard orthonormal metric.

Forms are stored as maps from strictly increasing 1-based multi-indices to
real coefficients.  The coefficient of a permuted tuple is sign * stored
coefficient; repeated indices give 0.  Orientation is fixed once and for
all by declaring e^1 ^ ... ^ e^n the positive volume form.
"""

from __future__ import annotations

import itertools
import json
import re

import numpy as np

__all__ = [
    "AltForm",
    "SkewMap",
    "wedge",
    "hodge_star",
    "interior",
    "evaluate",
    "so_action",
    "form_inner",
    "canonical_indices",
    "batch_eval_dense",
    "parse_form",
    "format_form",
]

DEFAULT_TOL = 1e-9


def sort_index(idx):
    """Sort a multi-index tuple, returning (sign, sorted tuple).

    sign is the parity of the sorting permutation, or 0 on repeats.
    """
    lst = list(idx)
    sign = 1
    for i in range(1, len(lst)):
        j = i
        while j > 0 and lst[j - 1] > lst[j]:
            lst[j - 1], lst[j] = lst[j], lst[j - 1]
            sign = -sign
            j -= 1
    for a, b in zip(lst, lst[1:]):
        if a == b:
            return 0, tuple(lst)
    return sign, tuple(lst)


def canonical_indices(n, p):
    """All strictly increasing 1-based multi-indices of length p in {1..n}."""
    return list(itertools.combinations(range(1, n + 1), p))


class AltForm:
    """A degree-p alternating form on R^n, stored sparsely.

    coeffs maps strictly increasing 1-based index tuples to floats.
    Instances are treated as immutable; all operations return new forms.
    """

    __slots__ = ("n", "p", "coeffs", "_cache")

    def __init__(self, n, p, coeffs=None):
        if n < 0 or p < 0 or p > n:
            raise ValueError(f"invalid degree p={p} for dimension n={n}")
        self.n = int(n)
        self.p = int(p)
        clean = {}
        if coeffs:
            for idx, c in coeffs.items():
                idx = tuple(int(i) for i in idx)
                if len(idx) != p:
                    raise ValueError(f"index {idx} has length != {p}")
                if any(i < 1 or i > n for i in idx):
                    raise ValueError(f"index {idx} out of range 1..{n}")
                if any(a >= b for a, b in zip(idx, idx[1:])):
                    raise ValueError(f"index {idx} is not strictly increasing")
                c = float(c)
                if c != 0.0:
                    clean[idx] = clean.get(idx, 0.0) + c
        self.coeffs = clean
        self._cache = {}

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, n, p):
        return cls(n, p)

    @classmethod
    def basis(cls, n, *idx):
        """The basis form e^{i1} ^ ... ^ e^{ip} (indices 1-based, increasing)."""
        return cls(n, len(idx), {tuple(idx): 1.0})

    @classmethod
    def constant(cls, n, value=1.0):
        return cls(n, 0, {(): value})

    @classmethod
    def volume(cls, n):
        return cls(n, n, {tuple(range(1, n + 1)): 1.0})

    @classmethod
    def from_terms(cls, n, p, terms):
        """Build from (index, coefficient) pairs; indices may be unsorted."""
        coeffs = {}
        for idx, c in terms:
            sign, key = sort_index(idx)
            if sign == 0:
                continue
            coeffs[key] = coeffs.get(key, 0.0) + sign * c
        return cls(n, p, coeffs)

    @classmethod
    def from_dense(cls, n, p, vec, tol=0.0):
        idxs = canonical_indices(n, p)
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (len(idxs),):
            raise ValueError("dense vector has wrong length")
        return cls(n, p, {I: v for I, v in zip(idxs, vec) if abs(v) > tol})

    # -- coefficient access ------------------------------------------------

    def coefficient(self, idx):
        """Coefficient of an arbitrary index tuple, with the sign rule."""
        sign, key = sort_index(idx)
        if sign == 0:
            return 0.0
        return sign * self.coeffs.get(key, 0.0)

    def dense(self):
        """Coefficient vector over canonical_indices(n, p)."""
        return np.array(
            [self.coeffs.get(I, 0.0) for I in canonical_indices(self.n, self.p)]
        )

    def _compact(self):
        """(0-based index array of shape (t, p), coefficient array of shape (t,))."""
        cached = self._cache.get("compact")
        if cached is None:
            items = sorted(self.coeffs.items())
            idx = np.array([I for I, _ in items], dtype=np.intp).reshape(-1, self.p)
            c = np.array([v for _, v in items])
            cached = (idx - 1, c)
            self._cache["compact"] = cached
        return cached

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        self._check_match(other)
        coeffs = dict(self.coeffs)
        for idx, c in other.coeffs.items():
            coeffs[idx] = coeffs.get(idx, 0.0) + c
        return AltForm(self.n, self.p, coeffs)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __neg__(self):
        return (-1.0) * self

    def __mul__(self, scalar):
        scalar = float(scalar)
        return AltForm(self.n, self.p, {I: scalar * c for I, c in self.coeffs.items()})

    __rmul__ = __mul__

    def prune(self, tol=DEFAULT_TOL):
        return AltForm(self.n, self.p, {I: c for I, c in self.coeffs.items() if abs(c) > tol})

    def norm(self):
        return float(np.sqrt(sum(c * c for c in self.coeffs.values())))

    def approx_eq(self, other, tol=DEFAULT_TOL):
        if self.n != other.n or self.p != other.p:
            return False
        return (self - other).norm() <= tol

    def _check_match(self, other):
        if self.n != other.n:
            raise ValueError(f"dimension mismatch: {self.n} != {other.n}")
        if self.p != other.p:
            raise ValueError(f"degree mismatch: {self.p} != {other.p}")

    # -- evaluation --------------------------------------------------------

    def apply(self, vectors):
        """Evaluate on p vectors, given as an n x p array of columns."""
        m = np.asarray(vectors, dtype=float)
        if m.ndim != 2 or m.shape != (self.n, self.p):
            raise ValueError(f"expected an {self.n} x {self.p} array of columns")
        if self.p == 0:
            return float(self.coeffs.get((), 0.0))
        if not self.coeffs:
            return 0.0
        idx, c = self._compact()
        return float(np.linalg.det(m[idx, :]) @ c)

    def __repr__(self):
        return f"AltForm(n={self.n}, p={self.p}, {format_form(self)!r})"


class SkewMap:
    """An element of o(n), stored as a full skew-symmetric n x n array."""

    __slots__ = ("n", "entries")

    def __init__(self, entries):
        m = np.asarray(entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("SkewMap requires a square array")
        if not np.allclose(m, -m.T, atol=1e-12):
            raise ValueError("SkewMap requires a skew-symmetric array")
        self.n = m.shape[0]
        self.entries = 0.5 * (m - m.T)

    @classmethod
    def rotation_generator(cls, n, i, j):
        """The generator e_i (x) e^j - e_j (x) e^i (1-based), mapping e_j -> e_i."""
        m = np.zeros((n, n))
        m[i - 1, j - 1] = 1.0
        m[j - 1, i - 1] = -1.0
        return cls(m)

    def __repr__(self):
        return f"SkewMap(n={self.n})"


def _as_skew_matrix(theta):
    if isinstance(theta, SkewMap):
        return theta.entries
    m = np.asarray(theta, dtype=float)
    if not np.allclose(m, -m.T, atol=1e-10):
        raise ValueError("expected a skew-symmetric matrix")
    return m


# -- operations ------------------------------------------------------------


def wedge(a, b):
    """Exterior product of two forms on the same R^n."""
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} != {b.n}")
    p, q = a.p, b.p
    if p + q > a.n:
        return AltForm.zero(a.n, a.n)
    coeffs = {}
    for I, ca in a.coeffs.items():
        for J, cb in b.coeffs.items():
            sign, key = sort_index(I + J)
            if sign == 0:
                continue
            coeffs[key] = coeffs.get(key, 0.0) + sign * ca * cb
    return AltForm(a.n, p + q, coeffs)


def hodge_star(a):
    """Hodge star with respect to the standard metric and orientation."""
    n, p = a.n, a.p
    full = tuple(range(1, n + 1))
    coeffs = {}
    for I, c in a.coeffs.items():
        comp = tuple(i for i in full if i not in I)
        sign, _ = sort_index(I + comp)
        coeffs[comp] = sign * c
    if p == 0:
        # constant c -> c * vol
        coeffs = {full: a.coeffs.get((), 0.0)}
    return AltForm(n, n - p, coeffs)


def interior(v, a):
    """Interior product v -| a; (v -| a)(w2..wp) = a(v, w2, .., wp)."""
    v = np.asarray(v, dtype=float)
    if v.shape != (a.n,):
        raise ValueError(f"vector has wrong dimension (expected {a.n})")
    if a.p == 0:
        raise ValueError("interior product of a degree-0 form is undefined")
    coeffs = {}
    for I, c in a.coeffs.items():
        for pos, i in enumerate(I):
            vi = v[i - 1]
            if vi == 0.0:
                continue
            key = I[:pos] + I[pos + 1 :]
            coeffs[key] = coeffs.get(key, 0.0) + ((-1.0) ** pos) * c * vi
    return AltForm(a.n, a.p - 1, coeffs)


def evaluate(a, xi):
    """Evaluate a p-form on an oriented p-plane (or a raw n x p frame)."""
    frame = getattr(xi, "frame", xi)
    frame = np.asarray(frame, dtype=float)
    if frame.shape[1] != a.p:
        raise ValueError(f"degree {a.p} form evaluated on a {frame.shape[1]}-plane")
    return a.apply(frame)


def so_action(theta, a):
    """Action of theta in o(n) on a form: (theta.a)(v1..vp) = sum_i a(.., theta v_i, ..)."""
    m = _as_skew_matrix(theta)
    if m.shape[0] != a.n:
        raise ValueError(f"dimension mismatch: {m.shape[0]} != {a.n}")
    coeffs = {}
    # scatter: replacing index I[pos] of a stored term by j contributes
    # sign * c * theta[I[pos], j] to the coefficient of the sorted tuple.
    for I, c in a.coeffs.items():
        iset = set(I)
        for pos, i in enumerate(I):
            row = m[i - 1, :]
            for j in range(1, a.n + 1):
                t = row[j - 1]
                if t == 0.0 or j == i:
                    continue
                if j in iset:
                    continue
                sign, key = sort_index(I[:pos] + (j,) + I[pos + 1 :])
                coeffs[key] = coeffs.get(key, 0.0) + sign * c * t
    return AltForm(a.n, a.p, coeffs)


def form_inner(a, b):
    """Inner product on degree-p forms induced by the orthonormal metric."""
    a._check_match(b)
    return float(sum(c * b.coeffs.get(I, 0.0) for I, c in a.coeffs.items()))


def batch_eval_dense(coeff_mat, idx0, frames):
    """Evaluate many forms on many frames at once.

    coeff_mat: (k, t) dense coefficients over the canonical index list.
    idx0: (t, p) 0-based canonical index array.
    frames: (m, n, p) stack of frames.
    Returns a (k, m) array of values.
    """
    frames = np.asarray(frames, dtype=float)
    if idx0.shape[0] == 0:
        return np.zeros((coeff_mat.shape[0], frames.shape[0]))
    if idx0.shape[1] == 0:
        return np.repeat(coeff_mat, frames.shape[0], axis=1)
    sub = frames[:, idx0, :]  # (m, t, p, p)
    dets = np.linalg.det(sub)  # (m, t)
    return coeff_mat @ dets.T


# -- parsing / formatting ---------------------------------------------------

_TERM_RE = re.compile(r"^(?:(\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)\*)?e(\d+)$")


def parse_form(text, n=None):
    """Parse the text literal format, e.g. 'e123 + e145 - 2.0*e167'.

    Indices are single digits (so n <= 9).  Tuples must be strictly
    increasing.  If n is omitted it is inferred as the largest index used.
    """
    text = text.strip()
    if not text:
        raise ValueError("empty form literal")
    # normalize leading sign, then split on +/- separators
    tokens = re.split(r"\s*([+-])\s*", text)
    if tokens[0] == "":
        tokens = tokens[1:]
    else:
        tokens = ["+"] + tokens
    if len(tokens) % 2 != 0:
        raise ValueError(f"malformed form literal: {text!r}")
    terms = []
    for sgn, body in zip(tokens[::2], tokens[1::2]):
        m = _TERM_RE.match(body.strip())
        if not m:
            raise ValueError(f"malformed term {body!r}")
        coeff = float(m.group(1)) if m.group(1) else 1.0
        idx = tuple(int(ch) for ch in m.group(2))
        if any(a >= b for a, b in zip(idx, idx[1:])):
            raise ValueError(f"index tuple in {body!r} is not strictly increasing")
        terms.append((idx, coeff if sgn == "+" else -coeff))
    degrees = {len(i) for i, _ in terms}
    if len(degrees) != 1:
        raise ValueError("mixed degrees in form literal")
    p = degrees.pop()
    max_idx = max(max(i) for i, _ in terms)
    if n is None:
        n = max_idx
    elif max_idx > n:
        raise ValueError(f"index {max_idx} exceeds n={n}")
    return AltForm.from_terms(n, p, terms)


def format_form(a, tol=0.0):
    """Inverse of parse_form (n <= 9 only)."""
    if a.n > 9:
        raise ValueError("text literals support n <= 9 only")
    parts = []
    for I, c in sorted(a.coeffs.items()):
        if abs(c) <= tol:
            continue
        body = "e" + "".join(str(i) for i in I)
        mag = abs(c)
        term = body if mag == 1.0 else f"{mag:.17g}*{body}"
        if not parts:
            parts.append(term if c > 0 else f"-{term}")
        else:
            parts.append(("+ " if c > 0 else "- ") + term)
    return " ".join(parts) if parts else "0"


def form_to_json(a):
    return {
        "n": a.n,
        "p": a.p,
        "terms": [{"idx": list(I), "c": c} for I, c in sorted(a.coeffs.items())],
    }


def form_from_json(obj):
    if isinstance(obj, str):
        obj = json.loads(obj)
    n, p = int(obj["n"]), int(obj["p"])
    coeffs = {}
    for term in obj.get("terms", []):
        idx = tuple(int(i) for i in term["idx"])
        if any(a >= b for a, b in zip(idx, idx[1:])):
            raise ValueError(f"index tuple {idx} is not strictly increasing")
        coeffs[idx] = coeffs.get(idx, 0.0) + float(term["c"])
    return AltForm(n, p, coeffs)
