import itertools

import numpy as np
import pytest

from calibkit import AltForm, canonical_indices


def random_form(rng, n, p, density=0.5):
    """Random sparse p-form on R^n with coefficients in [-1, 1]."""
    coeffs = {}
    for idx in canonical_indices(n, p):
        if rng.random() < density:
            coeffs[idx] = float(rng.uniform(-1.0, 1.0))
    if not coeffs and p <= n:
        idx = tuple(sorted(rng.choice(np.arange(1, n + 1), size=p, replace=False)))
        coeffs[idx] = 1.0
    return AltForm(n, p, coeffs)


def brute_eval(form, vectors):
    """Permutation-expansion evaluation, independent of the determinant path.

    form(v_1..v_p) = sum_I c_I sum_{s in S_p} sgn(s) prod_k v_{s(k)}[I_k].
    """
    m = np.asarray(vectors, dtype=float)
    p = form.p
    if p == 0:
        return form.coeffs.get((), 0.0)
    total = 0.0
    for idx, c in form.coeffs.items():
        for perm in itertools.permutations(range(p)):
            sgn = perm_sign(perm)
            prod = 1.0
            for k, col in enumerate(perm):
                prod *= m[idx[k] - 1, col]
            total += c * sgn * prod
    return total


def perm_sign(perm):
    sgn = 1
    for i, j in itertools.combinations(range(len(perm)), 2):
        if perm[i] > perm[j]:
            sgn = -sgn
    return sgn


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
