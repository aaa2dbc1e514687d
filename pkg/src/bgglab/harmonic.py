"""Compact-group structure on a GT basis: strings, the long Weyl element,
eta vectors, phase operators, and isotypic projections.

The su(2) triple (X1, Y1, H1) acts along "s1-strings": a string collects all
patterns sharing a second row (a, b), graded by the bottom entry.  The second
su(2) triple is not GT-adapted; its structure is reached by conjugating with
a lift of the longest Weyl element,

    w_rho = w1 * w2 * w1 * D,    w_i = exp((pi/2)(X_i - Y_i)),  D = diag(-1,1,-1),

which sends xi-vectors to the "eta basis" (s2-adapted).  The factorization is
checked against the defining representation the first time it is used; a
mismatch aborts, since every downstream sign convention hangs off it.
"""

from __future__ import annotations

import math
from collections import namedtuple

import numpy as np
import scipy.linalg

from .gtcore import CapacityError, Irrep

__all__ = [
    "PhaseOp",
    "S1String",
    "eta_basis",
    "eta_weight",
    "k2_isotypic_projection",
    "phase",
    "phase_of_generator",
    "pi_d",
    "pi_w1",
    "pi_w2",
    "s1_strings",
    "verify_weyl_factorization",
    "weyl_element",
]

# dense matrix exponentials are only attempted below this dimension
_DENSE_LIMIT = 2500

S1String = namedtuple("S1String", ["second_row", "delta", "positions"])
S1String.__doc__ = """One s1-string: patterns sharing a second row.

``positions`` are basis indices ordered by the bottom entry ascending, i.e.
H1-eigenvalue running -delta, -delta+2, ..., +delta.
"""


def s1_strings(rep: Irrep) -> list[S1String]:
    """Partition the GT basis into s1-strings (second-row classes)."""
    groups: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for pos, (_, _, _, a, b, c) in enumerate(rep.patterns):
        groups.setdefault((a, b), []).append((c, pos))
    out = []
    for (a, b) in sorted(groups, reverse=True):
        members = sorted(groups[(a, b)])
        out.append(S1String((a, b), a - b, [pos for _, pos in members]))
    return out


# ---------------------------------------------------------------------------
# the long Weyl element
# ---------------------------------------------------------------------------


def pi_w1(rep: Irrep) -> np.ndarray:
    """exp((pi/2)(X1-Y1)) in the normalized basis: a signed permutation.

    On a string of highest weight delta, the closed-form sl2 rotation sends
    the H1-eigenvector at eigenvalue h to the one at -h with sign
    (-1)^((delta+h)/2), i.e. pattern (a,b,c) -> (a,b,a+b-c) with sign
    (-1)^(c-b).
    """
    mat = np.zeros((rep.dim, rep.dim))
    for col, (_, _, _, a, b, c) in enumerate(rep.patterns):
        row = rep.index[(*rep.label, a, b, a + b - c)]
        mat[row, col] = -1.0 if (c - b) % 2 else 1.0
    return mat


def pi_d(rep: Irrep) -> np.ndarray:
    """diag(-1,1,-1) acting on a weight-(w1,w2,w3) vector by (-1)^(w1+w3)."""
    signs = [(-1.0 if (w[0] + w[2]) % 2 else 1.0) for w in rep.weights]
    return np.diag(signs)


def pi_w2(rep: Irrep) -> np.ndarray:
    """exp((pi/2)(X2-Y2)) in the normalized basis, by dense exponential."""
    if rep.dim > _DENSE_LIMIT:
        raise CapacityError(
            f"dense Weyl factor needs dim <= {_DENSE_LIMIT}, got {rep.dim}; "
            "use the slice routines for large zero-weight families"
        )
    x2 = rep.normalized("X2")
    return scipy.linalg.expm((math.pi / 2) * (x2 - x2.T))


def verify_weyl_factorization() -> float:
    """Max-abs error of w1*w2*w1*D against the 3x3 antidiagonal(-1,-1,-1)."""
    rep = Irrep((1, 0, 0))
    got = pi_w1(rep) @ pi_w2(rep) @ pi_w1(rep) @ pi_d(rep)
    target = np.zeros((3, 3))
    target[0, 2] = target[1, 1] = target[2, 0] = -1.0
    return float(np.max(np.abs(got - target)))


_gate_passed = False


def _check_gate() -> None:
    global _gate_passed
    if _gate_passed:
        return
    err = verify_weyl_factorization()
    if err > 1e-12:
        raise RuntimeError(
            f"long-Weyl factorization failed in the defining representation "
            f"(max error {err:.3e}); refusing to build eta vectors"
        )
    _gate_passed = True


def weyl_element(rep: Irrep) -> np.ndarray:
    """pi(w_rho) as an orthogonal matrix in the normalized basis."""
    _check_gate()
    w1 = pi_w1(rep)
    return w1 @ pi_w2(rep) @ w1 @ pi_d(rep)


def eta_weight(pattern) -> tuple[int, int, int]:
    """gl-weight of eta_Lambda: the reversal of the weight of xi_Lambda."""
    from .gtcore import weight_of

    w1, w2, w3 = weight_of(pattern)
    return (w3, w2, w1)


def eta_basis(rep: Irrep) -> np.ndarray:
    """Columns eta_Lambda = pi(w_rho) xi_Lambda in normalized coordinates.

    Column norms equal the xi norms (w_rho is unitary), so the Gram matrix
    of this basis is diag(normsq).
    """
    from .gtcore import _sqrt_fraction

    w = weyl_element(rep)
    scale = np.array([_sqrt_fraction(q) for q in rep.normsq])
    return w * scale[np.newaxis, :]


# ---------------------------------------------------------------------------
# phase operators
# ---------------------------------------------------------------------------


class PhaseOp:
    """Phase Ph(T) = T(T*T)^(-1/2), zero on ker T.

    ``mat`` is the dense matrix, ``shift`` the weight step of T, ``warnings``
    any ill-separated-spectrum notes collected during the SVD sweep.
    """

    __slots__ = ("mat", "shift", "warnings", "kernel")

    def __init__(self, mat, shift, warnings, kernel):
        self.mat = mat
        self.shift = shift
        self.warnings = tuple(warnings)
        self.kernel = kernel  # columns spanning the recorded kernel

    def __matmul__(self, other):
        return self.mat @ (other.mat if isinstance(other, PhaseOp) else other)

    def __rmatmul__(self, other):
        return other @ self.mat


def _infer_shift(mat, weights):
    shift = None
    for r, c in zip(*np.nonzero(np.abs(mat) > 1e-12)):
        d = tuple(np.subtract(weights[r], weights[c]))
        if shift is None:
            shift = d
        elif shift != d:
            raise ValueError(f"operator is not weight-graded: shifts {shift} and {d}")
    return shift


def phase(mat: np.ndarray, weights) -> PhaseOp:
    """Blockwise (per weight space) phase of a weight-graded operator.

    Singular values below max(1e-9 * sigma_max, 1e-12) count as kernel;
    values within 1e-7 of that cutoff trigger a warning entry.
    """
    n = mat.shape[0]
    shift = _infer_shift(mat, weights)
    out = np.zeros_like(mat)
    kernel_cols = []
    warnings: list[str] = []
    if shift is None:
        return PhaseOp(out, None, warnings, np.eye(n))

    spaces: dict[tuple, list[int]] = {}
    for i, w in enumerate(weights):
        spaces.setdefault(tuple(w), []).append(i)

    blocks = []
    sigma_max = 0.0
    for w, cols in spaces.items():
        target = tuple(np.add(w, shift))
        rows = spaces.get(target)
        if rows is None:
            kernel_cols.extend(cols)  # image weight space empty: block is zero
            continue
        sub = mat[np.ix_(rows, cols)]
        u, s, vt = np.linalg.svd(sub, full_matrices=False)
        sigma_max = max(sigma_max, s[0] if s.size else 0.0)
        blocks.append((w, rows, cols, u, s, vt))

    cutoff = max(1e-9 * sigma_max, 1e-12)
    for w, rows, cols, u, s, vt in blocks:
        close = np.abs(s - cutoff) < 1e-7
        if close.any():
            warnings.append(
                f"weight {w}: {int(close.sum())} singular value(s) within "
                f"1e-7 of the kernel cutoff {cutoff:.3e}"
            )
        keep = s > cutoff
        out[np.ix_(rows, cols)] = u[:, keep] @ vt[keep]
        for v in vt[~keep]:
            col = np.zeros(n)
            col[cols] = v
            kernel_cols.append(col)

    kernel_cols = [
        (c if isinstance(c, np.ndarray) else _unit(n, c)) for c in kernel_cols
    ]
    kernel = np.array(kernel_cols).T if kernel_cols else np.zeros((n, 0))
    return PhaseOp(out, shift, warnings, kernel)


def _unit(n, i):
    e = np.zeros(n)
    e[i] = 1.0
    return e


def phase_of_generator(rep: Irrep, name: str) -> PhaseOp:
    return phase(rep.normalized(name), rep.weights)


# ---------------------------------------------------------------------------
# K2-isotypic projections (through the eta basis)
# ---------------------------------------------------------------------------


def k2_isotypic_projection(rep: Irrep, weight, delta: int) -> np.ndarray:
    """Orthogonal projection, inside the given weight space, onto the span of
    eta vectors of s2-type ``delta`` (second-row width of their pattern)."""
    weight = tuple(weight)
    w = weyl_element(rep)
    idx = [i for i, wt in enumerate(rep.weights) if wt == weight]
    cols = [
        i
        for i, p in enumerate(rep.patterns)
        if p[3] - p[4] == delta and eta_weight(p) == weight
    ]
    proj = np.zeros((rep.dim, rep.dim))
    if not cols or not idx:
        return proj
    u = np.zeros((rep.dim, len(cols)))
    u[idx] = w[np.ix_(idx, cols)]  # eta columns, numerical spill clipped
    proj = u @ u.T
    return proj
