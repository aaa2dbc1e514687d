"""Overlap coefficients between the xi and eta bases of V^(m,0,-m).

The self-dual irreps V^(m,0,-m) carry two distinguished orthogonal bases of
their zero-weight space: the GT vectors xi_{m,j} (s1-adapted, second row
(j,-j)) and their long-Weyl images eta_{m,k} (s2-adapted).  The normalized
overlap coefficients

    a_{m,j,k} = (-1)^j conj(omega_m) <xi_{m,j}, eta_{m,k}> / (m!^2 (2m+1)!)

satisfy a three-term recurrence in k, are approximated by Legendre values
b_{m,j,k} = P_k(2(j/(m+1))^2 - 1)/(m+1) to order (m+1)^-2, and control the
pairing of Ph(X1) y_{m,0} against the s2-side vectors y'_{m,k}.

Everything here works inside single lambda11-slices of the pattern set: a
slice is invariant under the su(2) triple (X2, Y2, H2), its normalized action
is assembled from closed-form norm ratios (no factorials), and the long-Weyl
conjugation reduces to a slice exponential sandwiched between exact signed
permutations.  That keeps the direct "oracle" path in reach up to m = 60 and
the recurrence path essentially unbounded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
import scipy.linalg
import scipy.sparse
from scipy.sparse.linalg import expm_multiply

from .gtcore import CapacityError, _sqrt_fraction, _terms_X2, normsq_ratio

__all__ = [
    "ORACLE_MAX_M",
    "OverlapTable",
    "approx_error_scan",
    "legendre_b",
    "overlaps_oracle",
    "overlaps_recurrence",
    "pairing_limit",
    "phase_pairing",
    "tail_mass",
    "telescoping_partial",
]

ORACLE_MAX_M = 60

# slices up to this dimension use a dense matrix exponential; larger ones use
# sparse expm_multiply on just the needed columns
_DENSE_SLICE_LIMIT = 1400


# ---------------------------------------------------------------------------
# lambda11-slices of V^(m,0,-m)
# ---------------------------------------------------------------------------


def _slice_index(m: int, c: int):
    """Second rows (a, b) compatible with bottom entry c, descending order."""
    pairs = [
        (a, b)
        for a in range(m, max(c, 0) - 1, -1)
        for b in range(min(c, 0), -m - 1, -1)
    ]
    return pairs, {p: i for i, p in enumerate(pairs)}


def _x2hat_slice(m: int, c: int) -> scipy.sparse.csr_matrix:
    """Normalized X2 restricted to the lambda11 = c slice."""
    pairs, index = _slice_index(m, c)
    rows, cols, vals = [], [], []
    for col, (a, b) in enumerate(pairs):
        p = (m, 0, -m, a, b, c)
        for q, coeff in _terms_X2(p):
            rows.append(index[(q[3], q[4])])
            cols.append(col)
            vals.append(float(coeff) * _sqrt_fraction(normsq_ratio(p, q)))
    n = len(pairs)
    return scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))


def _w2_slice_columns(m: int, c: int, cols: list[int]) -> np.ndarray:
    """Columns of exp((pi/2)(X2-Y2)) on the slice, as a dense (n, len(cols))."""
    x2 = _x2hat_slice(m, c)
    k = (math.pi / 2) * (x2 - x2.T)
    n = k.shape[0]
    if n <= _DENSE_SLICE_LIMIT:
        return scipy.linalg.expm(k.toarray())[:, cols]
    rhs = np.zeros((n, len(cols)))
    for i, col in enumerate(cols):
        rhs[col, i] = 1.0
    return expm_multiply(k.tocsc(), rhs)


# ---------------------------------------------------------------------------
# overlap tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OverlapTable:
    """a_{m,j,k} values for one m, j = 0..m rows, k = 0..kmax columns."""

    m: int
    table: np.ndarray
    source: str  # "oracle" | "recurrence"
    omega_m: float | None = None

    @property
    def kmax(self) -> int:
        return self.table.shape[1] - 1

    def a(self, j: int, k: int) -> float:
        if 0 <= j <= self.m and 0 <= k <= self.kmax:
            return float(self.table[j, k])
        return 0.0


@lru_cache(maxsize=32)
def _zero_weight_block(m: int) -> tuple[np.ndarray, float]:
    """exp-matrix entries E[j,k] on the zero-weight positions of slice 0,
    together with the extracted eta phase omega_m."""
    pairs, index = _slice_index(m, 0)
    zpos = [index[(j, -j)] for j in range(m + 1)]
    ecols = _w2_slice_columns(m, 0, zpos)
    spill = ecols.copy()
    spill[zpos, :] = 0.0
    worst = float(np.max(np.abs(spill))) if spill.size else 0.0
    if worst > 1e-9:
        raise RuntimeError(
            f"slice exponential leaked {worst:.3e} outside the zero-weight "
            "space; eta vectors would be corrupted"
        )
    block = ecols[zpos, :]
    j = np.arange(m + 1)
    omegas = (m + 1) * block[:, 0] / np.sqrt(2 * j + 1)
    omega = float(omegas[0])
    if np.max(np.abs(omegas - omega)) > 1e-6 or abs(abs(omega) - 1.0) > 1e-6:
        raise RuntimeError(f"eta_{{{m},0}} expansion phase is inconsistent")
    return block, omega


def overlaps_oracle(m: int) -> OverlapTable:
    """Direct a_{m,j,k} table from the long-Weyl conjugation on slice 0.

    Inner products are assembled from norm ratios only.  Capacity-limited to
    m <= 60; beyond that use :func:`overlaps_recurrence`.
    """
    if m > ORACLE_MAX_M:
        raise CapacityError(
            f"oracle path is limited to m <= {ORACLE_MAX_M}; "
            "use overlaps_recurrence for larger m"
        )
    block, omega = _zero_weight_block(m)
    j = np.arange(m + 1)
    k = np.arange(m + 1)
    signs = np.where(k % 2 == 0, 1.0, -1.0)
    table = block * signs[np.newaxis, :] / omega
    table /= np.sqrt(np.outer(2 * j + 1, 2 * k + 1))
    return OverlapTable(m, table, "oracle", omega)


def overlaps_recurrence(m: int, kmax: int, exact: bool | None = None) -> OverlapTable:
    """March the three-term recurrence upward in k from a_{m,j,0} = 1/(m+1).

    The k = 0 instance has no k-1 term; the march stops at k = m, where the
    k+1 coefficient (k+1)((m+1)^2-(k+1)^2) vanishes and the table is complete.

    Forward marching in doubles is stable only while k stays well below m
    (beyond that the recurrence's second solution takes over and the march
    loses all accuracy near k = m).  When ``kmax`` exceeds m/3 the march is
    done in exact rationals instead -- the coefficients are integers, so this
    is both cheap and lossless -- and rounded on emission.
    """
    if kmax > m:
        raise ValueError(f"kmax={kmax} exceeds m={m}: table ends at k=m")
    if exact is None:
        exact = kmax > m // 3
    n2 = (m + 1) ** 2
    table = np.empty((m + 1, kmax + 1))
    if exact:
        for j in range(m + 1):
            jj = 2 * j * (j + 1)
            row = [Fraction(1, m + 1)]
            for k in range(kmax):
                mid = (2 * k + 1) * (n2 - (k * k + k + 1) - jj) * row[k]
                if k > 0:
                    mid += k * (n2 - k * k) * row[k - 1]
                row.append(-mid / ((k + 1) * (n2 - (k + 1) ** 2)))
            table[j] = [float(x) for x in row]
    else:
        j = np.arange(m + 1, dtype=float)
        jj = 2 * j * (j + 1)
        table[:, 0] = 1.0 / (m + 1)
        for k in range(kmax):
            mid = (2 * k + 1) * (n2 - (k * k + k + 1) - jj) * table[:, k]
            if k > 0:
                mid = mid + k * (n2 - k * k) * table[:, k - 1]
            table[:, k + 1] = -mid / ((k + 1) * (n2 - (k + 1) ** 2))
    return OverlapTable(m, table, "recurrence")


# ---------------------------------------------------------------------------
# Legendre comparison
# ---------------------------------------------------------------------------


def _legendre_rows(x: np.ndarray, kmax: int) -> np.ndarray:
    """P_0..P_kmax at the points x via (k+1)P_{k+1} = (2k+1)xP_k - kP_{k-1}."""
    out = np.empty((len(x), kmax + 1))
    out[:, 0] = 1.0
    if kmax >= 1:
        out[:, 1] = x
    for k in range(1, kmax):
        out[:, k + 1] = ((2 * k + 1) * x * out[:, k] - k * out[:, k - 1]) / (k + 1)
    return out


def legendre_b(m: int, j: int, k: int) -> float:
    """b_{m,j,k} = P_k(2(j/(m+1))^2 - 1) / (m+1)."""
    if not (0 <= j <= m and 0 <= k <= m):
        raise ValueError("need 0 <= j, k <= m")
    x = np.array([2.0 * (j / (m + 1)) ** 2 - 1.0])
    return float(_legendre_rows(x, k)[0, k] / (m + 1))


def _b_table(m: int, kmax: int) -> np.ndarray:
    j = np.arange(m + 1, dtype=float)
    x = 2.0 * (j / (m + 1)) ** 2 - 1.0
    return _legendre_rows(x, kmax) / (m + 1)


def approx_error_scan(mmax: int, kmax: int) -> np.ndarray:
    """Fitted constants C_hat(k) = max over m <= mmax and j of (m+1)^2 |a-b|."""
    if kmax > 8:
        raise ValueError("scan is intended for kmax <= 8")
    c_hat = np.zeros(kmax + 1)
    for m in range(1, mmax + 1):
        kk = min(kmax, m)
        a = overlaps_recurrence(m, kk).table
        b = _b_table(m, kk)
        err = (m + 1) ** 2 * np.max(np.abs(a - b), axis=0)
        c_hat[: kk + 1] = np.maximum(c_hat[: kk + 1], err)
    return c_hat


# ---------------------------------------------------------------------------
# phase pairings and the tail estimate
# ---------------------------------------------------------------------------


def pairing_limit(k: int) -> float:
    """Large-m limit of the pairing: sqrt(2k) (1/(2k-1) - 1/(2k+1))."""
    return math.sqrt(2 * k) * (1.0 / (2 * k - 1) - 1.0 / (2 * k + 1))


@lru_cache(maxsize=32)
def _eta0_zero_weight(m: int) -> np.ndarray:
    """Slice-0 exponential column through xi_{m,0}, read at (j,-j) positions."""
    block, _ = _zero_weight_block(m)
    return block[:, 0]


@lru_cache(maxsize=256)
def _eta_prime_overlap_column(m: int, k: int) -> np.ndarray:
    """Slice -1 exponential column through xi'_{m,k}, read at (j,-j), j>=1."""
    pairs, index = _slice_index(m, -1)
    col = _w2_slice_columns(m, -1, [index[(k - 1, -k)]]).ravel()
    return np.array([col[index[(j, -j)]] for j in range(1, m + 1)])


def phase_pairing(m: int, k: int, method: str = "sum", table: OverlapTable | None = None) -> float:
    """|<Ph(X1) y_{m,0}, y'_{m,k}>| by direct matrices or the overlap sum.

    The summed form is sqrt(2k(1-k^2/(m+1)^2)) |sum_j (j+1/2)/sqrt(j(j+1))
    (a_{m,j,k-1} + a_{m,j,k})| with the j=0 term taken as zero (Ph(X1) kills
    the width-0 string).
    """
    if not 1 <= k <= m:
        raise ValueError(f"need 1 <= k <= m, got k={k}, m={m}")
    if method == "direct":
        if m > ORACLE_MAX_M:
            raise CapacityError(f"direct pairing is limited to m <= {ORACLE_MAX_M}")
        d = _eta0_zero_weight(m)[1:]
        return float(abs(np.dot(d, _eta_prime_overlap_column(m, k))))
    if method != "sum":
        raise ValueError(f"unknown method {method!r}")
    if table is None or table.kmax < k:
        table = overlaps_recurrence(m, k)
    j = np.arange(1, m + 1, dtype=float)
    weights = (j + 0.5) / np.sqrt(j * (j + 1))
    s = np.dot(weights, table.table[1:, k - 1] + table.table[1:, k])
    return float(math.sqrt(2 * k * (1.0 - k * k / (m + 1) ** 2)) * abs(s))


def tail_mass(m: int, l: int, table: OverlapTable | None = None) -> float:
    """1 - sum_{k=1}^{l} phase_pairing(m,k)^2 (K2-type content beyond level l)."""
    if l > m:
        raise ValueError(f"need l <= m, got l={l}, m={m}")
    if table is None or table.kmax < l:
        table = overlaps_recurrence(m, l)
    return 1.0 - sum(phase_pairing(m, k, "sum", table) ** 2 for k in range(1, l + 1))


def telescoping_partial(l: int) -> Fraction:
    """sum_{k=1}^{l} 2k (1/(2k-1) - 1/(2k+1))^2, exactly."""
    total = Fraction(0)
    for k in range(1, l + 1):
        total += 2 * k * (Fraction(1, 2 * k - 1) - Fraction(1, 2 * k + 1)) ** 2
    return total
