"""Infinitesimal principal-series action of split-Cartan elements on K-types.

A matrix unit [eta; xi] with xi in the (-mu)-weight space of an irrep pi is
mapped by the action of A in the split Cartan to a matrix unit of the
non-irreducible representation pi (x) g*, built from the vector

    Xi(xi) = rho(H_i) xi (x) H_i* + rho(H_i') xi (x) H_i'*
             + sum over roots a of sign(a) pi(X_a) xi (x) X_a*.

Splitting back into irreducible blocks via explicit tensor embeddings turns
this into finite matrices, one block per component of pi (x) g*, with a
sqrt(dim pi / dim pi') factor from the unitary normalization of matrix units.
The module assembles those blocks, scans their K_1-type band structure
(tridiagonal, with linearly growing outer bands), and measures the residual
of the simple-reflection intertwiners (Ph X_i)^n against the assembled
action.
"""

from __future__ import annotations

import functools
import math
from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from .gtcore import _ALIASES, GENERATOR_NAMES, CapacityError, Irrep
from .harmonic import phase_of_generator
from .tensorprod import TensorDecomposition, decompose_by_characters, tensor_decompose

__all__ = [
    "RHO",
    "CoadjointRep",
    "PrincipalBlock",
    "PrincipalTarget",
    "ScanRow",
    "XiVector",
    "band_norm",
    "coadjoint",
    "intertwiner_residual",
    "reflect_weight",
    "rho_scalars",
    "scan_labels",
    "tridiag_scan",
    "umu_a_matrix",
    "xi_map",
]

#: Half-sum of the restricted roots (each root counted twice), as a gl-weight.
RHO = (2, 0, -2)

_SLOTS = ("X1", "X2", "Xr", "Y1", "Y2", "Yr", "H", "Hp")

_XI_SIGN = {"X1": 1.0, "X2": 1.0, "Xr": 1.0, "Y1": -1.0, "Y2": -1.0, "Yr": -1.0}

_XI_GENERATOR = {
    "X1": "X1",
    "X2": "X2",
    "Xr": "Xr",
    "Y1": "X1s",
    "Y2": "X2s",
    "Yr": "Yr",
}


def _e(i: int, j: int) -> np.ndarray:
    m = np.zeros((3, 3))
    m[i, j] = 1.0
    return m


# Orthonormal frame of sl(3) under <P, Q> = tr(P* Q); the root vectors are
# elementary matrices and the Cartan part is spanned by H1/sqrt2, H1'/sqrt6.
_FRAME = (
    _e(0, 1),
    _e(1, 2),
    _e(0, 2),
    _e(1, 0),
    _e(2, 1),
    _e(2, 0),
    np.diag([1.0, -1.0, 0.0]) / math.sqrt(2),
    np.diag([1.0, 1.0, -2.0]) / math.sqrt(6),
)

_GEN3 = {
    "X1": _e(0, 1),
    "X2": _e(1, 2),
    "Xr": _e(0, 2),
    "X1s": _e(1, 0),
    "X2s": _e(2, 1),
    "Yr": _e(2, 0),
    "H1": np.diag([1.0, -1.0, 0.0]),
    "H2": np.diag([0.0, 1.0, -1.0]),
    "H1p": np.diag([1.0, 1.0, -2.0]),
    "H2p": np.diag([-2.0, 1.0, 1.0]),
}

_H_PAIR = {
    1: (_GEN3["H1"], _GEN3["H1p"]),
    2: (_GEN3["H2"], _GEN3["H2p"]),
}


def rho_scalars(i: int) -> tuple[int, int]:
    """(rho(H_i), rho(H_i')) for the chosen Cartan pair."""
    h, hp = _H_PAIR[i]
    return (
        int(round(sum(RHO[k] * h[k, k] for k in range(3)))),
        int(round(sum(RHO[k] * hp[k, k] for k in range(3)))),
    )


def _h_dual_rows(i: int) -> tuple[np.ndarray, np.ndarray]:
    """Coordinates of the dual functionals (H_i*, H_i'*) in the last two
    slots of the orthonormal dual frame."""
    h, hp = _H_PAIR[i]
    m = np.array(
        [
            [np.trace(_FRAME[6].T @ h), np.trace(_FRAME[6].T @ hp)],
            [np.trace(_FRAME[7].T @ h), np.trace(_FRAME[7].T @ hp)],
        ]
    )
    minv = np.linalg.inv(m)
    return minv[0], minv[1]


class CoadjointRep:
    """g* in the frame dual to the orthonormal matrix basis of sl(3).

    Generators act by -ad(.)^T, which is real in this frame, and lowering
    matrices are exact transposes of raising ones, so the representation is
    duck-compatible with the GT irreps for tensor decompositions.  Its label
    records the abstract isomorphism class.
    """

    label = (1, 0, -1)

    def __init__(self):
        self.dim = 8
        roots = {
            "X1": (1, -1, 0),
            "X2": (0, 1, -1),
            "Xr": (1, 0, -1),
            "Y1": (-1, 1, 0),
            "Y2": (0, -1, 1),
            "Yr": (-1, 0, 1),
        }
        # a dual functional carries minus the weight of its basis vector
        self.weights = [
            tuple(-r for r in roots[s]) if s in roots else (0, 0, 0) for s in _SLOTS
        ]
        self._mats: dict[str, np.ndarray] = {}
        for name in GENERATOR_NAMES:
            g = _GEN3[name]
            ad = np.array(
                [
                    [np.trace(u.T @ (g @ v - v @ g)) for v in _FRAME]
                    for u in _FRAME
                ]
            )
            self._mats[name] = -ad.T

    def normalized(self, name: str) -> np.ndarray:
        return self._mats[_ALIASES.get(name, name)]

    def weight_spaces(self) -> dict[tuple[int, int, int], list[int]]:
        spaces: dict[tuple[int, int, int], list[int]] = {}
        for s, w in enumerate(self.weights):
            spaces.setdefault(w, []).append(s)
        return spaces

    def __repr__(self) -> str:
        return "CoadjointRep (dim 8)"


@functools.lru_cache(maxsize=1)
def coadjoint() -> CoadjointRep:
    return CoadjointRep()


@functools.lru_cache(maxsize=None)
def _irrep(label) -> Irrep:
    return Irrep(label)


@functools.lru_cache(maxsize=None)
def _decomposition(label) -> TensorDecomposition:
    return tensor_decompose(_irrep(label), coadjoint())


# ---------------------------------------------------------------------------
# the Xi vector
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class XiVector:
    """Element of V^pi (x) g* as eight coordinate vectors in V^pi.

    Keys follow the dual basis of the split for the stored ``i``: the root
    slots X1/X2/Xr/Y1/Y2/Yr and the Cartan slots H (for H_i*) and Hp (for
    H_i'*).
    """

    label: tuple[int, int, int]
    i: int
    coords: dict[str, np.ndarray]

    def tensor_coordinates(self) -> np.ndarray:
        """Flat coordinates in the orthonormal frame of V^pi (x) g*
        (index p * 8 + s)."""
        dim = self.coords["H"].shape[0]
        out = np.zeros((dim, 8))
        for s, slot in enumerate(_SLOTS[:6]):
            out[:, s] = self.coords[slot]
        hrow, hprow = _h_dual_rows(self.i)
        out[:, 6] = hrow[0] * self.coords["H"] + hprow[0] * self.coords["Hp"]
        out[:, 7] = hrow[1] * self.coords["H"] + hprow[1] * self.coords["Hp"]
        return out.reshape(-1)


def xi_map(rep: Irrep, xi, i: int = 1, mu=None) -> XiVector:
    """Xi(xi) for a (-mu)-weight vector xi, split along the (H_i, H_i') pair.

    The Cartan coordinates are rho-multiples of xi itself; each root slot
    holds sign(a) pi(X_a) xi.  Raises ValueError if xi is not a weight
    vector, or does not sit in the (-mu)-weight space when mu is given.
    """
    if i not in (1, 2):
        raise ValueError(f"split index must be 1 or 2, got {i!r}")
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (rep.dim,):
        raise ValueError(f"expected a vector of length {rep.dim}, got shape {xi.shape}")
    support = np.flatnonzero(np.abs(xi) > 1e-12 * max(1.0, np.max(np.abs(xi))))
    if support.size == 0:
        raise ValueError("xi is the zero vector")
    found = {rep.weights[k] for k in support}
    if len(found) != 1:
        raise ValueError(f"xi is not a weight vector (weights {sorted(found)})")
    if mu is not None:
        w = found.pop()
        if tuple(int(x) for x in mu) != tuple(-c for c in w):
            raise ValueError(f"xi has weight {w}, not -mu for mu={tuple(mu)}")
    rh, rhp = rho_scalars(i)
    coords = {"H": float(rh) * xi, "Hp": float(rhp) * xi}
    for slot in _SLOTS[:6]:
        coords[slot] = _XI_SIGN[slot] * (rep.normalized(_XI_GENERATOR[slot]) @ xi)
    return XiVector(rep.label, i, coords)


def _xi_sigma_matrix(rep: Irrep, cols, i: int, slots=None) -> np.ndarray:
    """Matrix of xi -> Xi(xi) from the given basis positions into the
    orthonormal frame of V^pi (x) g*; ``slots`` optionally restricts the
    formula to a subset of dual-basis slots (band-structure diagnostics)."""
    keep = set(_SLOTS if slots is None else slots)
    unknown = keep - set(_SLOTS)
    if unknown:
        raise ValueError(f"unknown Xi slots {sorted(unknown)}")
    w = len(cols)
    out = np.zeros((rep.dim, 8, w))
    for s, slot in enumerate(_SLOTS[:6]):
        if slot in keep:
            out[:, s, :] = _XI_SIGN[slot] * rep.normalized(_XI_GENERATOR[slot])[:, cols]
    rh, rhp = rho_scalars(i)
    hrow, hprow = _h_dual_rows(i)
    eye_cols = np.eye(rep.dim)[:, cols]
    hvec = np.zeros(2)
    if "H" in keep:
        hvec += rh * hrow
    if "Hp" in keep:
        hvec += rhp * hprow
    out[:, 6, :] = hvec[0] * eye_cols
    out[:, 7, :] = hvec[1] * eye_cols
    return out.reshape(rep.dim * 8, w)


# ---------------------------------------------------------------------------
# U_mu(A) blocks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PrincipalTarget:
    label: tuple[int, int, int]
    positions: tuple[int, ...]  # (-mu)-weight positions in the target irrep
    matrix: np.ndarray  # (dim' * len(positions)) x (dim * len(source positions))


@dataclass(frozen=True)
class PrincipalBlock:
    source: tuple[int, int, int]
    mu: tuple[int, int, int]
    i: int
    a_coords: tuple[float, float]
    source_positions: tuple[int, ...]
    targets: tuple[PrincipalTarget, ...]
    decomposition: TensorDecomposition

    def target(self, label) -> PrincipalTarget | None:
        label = tuple(label)
        for t in self.targets:
            if t.label == label:
                return t
        return None


def _a_frame_coords(a_coords) -> np.ndarray:
    """Orthonormal-frame coordinates of A = c1 H1 + c2 H2."""
    c1, c2 = (float(x) for x in a_coords)
    a3 = c1 * _GEN3["H1"] + c2 * _GEN3["H2"]
    return np.array([np.trace(u.T @ a3) for u in _FRAME])


def umu_a_matrix(
    rep,
    mu,
    i: int = 1,
    a_coords=(1.0, 0.0),
    decomposition: TensorDecomposition | None = None,
    slots=None,
) -> PrincipalBlock:
    """Blocks of the action of A = c1 H1 + c2 H2 out of the (-mu)-block of pi.

    Per component pi' of pi (x) g* (copies summed), the block is
    sqrt(dim pi / dim pi') L (x) R with L the left-leg contraction of the
    embedding against A and R the embedded Xi map restricted to the
    (-mu)-weight rows.  Rows landing outside that weight space are checked
    to vanish.  ``slots`` restricts the Xi formula (diagnostics); the split
    index ``i`` does not change the result beyond roundoff.
    """
    if not isinstance(rep, Irrep):
        rep = _irrep(tuple(int(x) for x in rep))
    mu = tuple(int(x) for x in mu)
    w_src = tuple(-m for m in mu)
    cols = rep.weight_spaces().get(w_src)
    if not cols:
        raise ValueError(f"-mu = {w_src} is not a weight of {rep.label}")
    dec = decomposition if decomposition is not None else _decomposition(rep.label)
    xi_sigma = _xi_sigma_matrix(rep, cols, i, slots=slots)
    a_vec = _a_frame_coords(a_coords)
    left_in = np.kron(np.eye(rep.dim), a_vec.reshape(8, 1))
    scale = max(1.0, float(np.max(np.abs(xi_sigma))))
    targets = []
    for comp in dec.components:
        tgt_rep = _irrep(comp.label)
        rows = tgt_rep.weight_spaces().get(w_src, [])
        ratio = math.sqrt(rep.dim / tgt_rep.dim)
        block = None
        for emb in comp.embeddings:
            r_full = emb.T @ xi_sigma
            off = np.delete(r_full, rows, axis=0) if rows else r_full
            if off.size and np.max(np.abs(off)) > 1e-9 * scale:
                raise RuntimeError(
                    f"Xi image spills outside the {w_src}-weight space of "
                    f"{comp.label} (max {np.max(np.abs(off)):.3e})"
                )
            if not rows:
                continue
            term = ratio * np.kron(emb.T @ left_in, r_full[rows])
            block = term if block is None else block + term
        if block is not None:
            targets.append(PrincipalTarget(comp.label, tuple(rows), block))
    return PrincipalBlock(
        rep.label,
        mu,
        i,
        tuple(float(x) for x in a_coords),
        tuple(cols),
        tuple(targets),
        dec,
    )


# ---------------------------------------------------------------------------
# tridiagonality in K_1-types
# ---------------------------------------------------------------------------

ScanRow = namedtuple("ScanRow", ["label", "l", "m", "norm"])


def _delta_by_position(rep: Irrep) -> np.ndarray:
    """s1-type (string width a - b) of each basis position."""
    return np.array([p[3] - p[4] for p in rep.patterns])


def band_norm(block: PrincipalBlock, l: int, m: int) -> float:
    """Operator norm of p_m U_mu(A) p_l for right-leg s1-types l, m."""
    src_rep = _irrep(block.source)
    delta_src = _delta_by_position(src_rep)[list(block.source_positions)]
    csel = np.flatnonzero(delta_src == l)
    if csel.size == 0:
        return 0.0
    pieces = []
    for t in block.targets:
        tgt_rep = _irrep(t.label)
        delta_tgt = _delta_by_position(tgt_rep)[list(t.positions)]
        rsel = np.flatnonzero(delta_tgt == m)
        if rsel.size == 0:
            continue
        d_t, w_t = tgt_rep.dim, len(t.positions)
        d_s, w_s = src_rep.dim, len(block.source_positions)
        cube = t.matrix.reshape(d_t, w_t, d_s, w_s)
        sub = cube[:, rsel][:, :, :, csel]
        pieces.append(sub.reshape(d_t * rsel.size, d_s * csel.size))
    if not pieces:
        return 0.0
    return float(np.linalg.norm(np.vstack(pieces), 2))


def scan_labels(mu, max_span: int) -> list[tuple[int, int, int]]:
    """Dominant gl-labels of span <= max_span whose weights can contain -mu
    (matching coordinate sum)."""
    mu = tuple(int(x) for x in mu)
    total = -sum(mu)
    labels = set()
    for m1 in range(math.ceil(total / 3), (total + 2 * max_span) // 3 + 1):
        for m3 in range(m1 - max_span, m1 + 1):
            m2 = total - m1 - m3
            if m3 <= m2 <= m1:
                labels.add((m1, m2, m3))
    return sorted(labels)


def tridiag_scan(mu, max_span: int, a_coords=(1.0, 0.0)) -> list[ScanRow]:
    """Band norms ||p_m U_mu(A) p_l|| over all irreps of span <= max_span.

    One row per irrep and per pair of occurring right-leg s1-types; pairs
    with |m - l| odd cannot occur (all positions of a weight space share the
    s1-weight parity), bands beyond |m - l| = 2 come out numerically zero,
    and the outer bands grow at most linearly in l.
    """
    rows = []
    w_src = tuple(-int(m) for m in mu)
    for label in scan_labels(mu, max_span):
        rep = _irrep(label)
        if w_src not in rep.weight_spaces():
            continue
        block = umu_a_matrix(rep, mu, a_coords=a_coords)
        delta_src = _delta_by_position(rep)[list(block.source_positions)]
        targets_delta = set()
        for t in block.targets:
            d = _delta_by_position(_irrep(t.label))[list(t.positions)]
            targets_delta.update(int(x) for x in d)
        for l in sorted(set(int(x) for x in delta_src)):
            for m in sorted(targets_delta):
                rows.append(ScanRow(label, l, m, band_norm(block, l, m)))
    return rows


# ---------------------------------------------------------------------------
# simple-reflection intertwiners
# ---------------------------------------------------------------------------


def reflect_weight(mu, i: int) -> tuple[int, int, int]:
    """Simple Weyl reflection of a gl-weight (swap of adjacent entries)."""
    m = tuple(int(x) for x in mu)
    if i == 1:
        return (m[1], m[0], m[2])
    if i == 2:
        return (m[0], m[2], m[1])
    raise ValueError(f"reflection index must be 1 or 2, got {i!r}")


def _mu_i(mu, i: int) -> int:
    return mu[0] - mu[1] if i == 1 else mu[1] - mu[2]


@functools.lru_cache(maxsize=None)
def _phase_power(label, i: int, n: int) -> np.ndarray:
    rep = _irrep(label)
    if n == 0:
        return np.eye(rep.dim)
    ph = phase_of_generator(rep, "X1" if i == 1 else "X2")
    return np.linalg.matrix_power(ph.mat, n)


def _phase_block(label, i, n, src, dst, control) -> np.ndarray:
    mat = _phase_power(label, i, n)[np.ix_(list(dst), list(src))]
    if control is None:
        return mat
    if label not in control["blocks"]:
        u, s, vt = np.linalg.svd(mat)
        k = int(np.sum(s > 1e-9))
        g = control["rng"].standard_normal((k, k))
        q, r = np.linalg.qr(g)
        q = q * np.sign(np.diag(r))
        control["blocks"][label] = u[:, :k] @ q @ vt[:k]
    return control["blocks"][label]


def interior_labels(mu, max_span: int) -> list[tuple[int, int, int]]:
    """Truncation members all of whose tensor components stay inside."""
    trunc = set(scan_labels(mu, max_span))
    out = []
    for label in sorted(trunc):
        comps = decompose_by_characters(label, coadjoint().label)
        if all(c in trunc for c in comps):
            out.append(label)
    return out


def intertwiner_residual(
    mu,
    n: int | None = None,
    i: int = 1,
    max_span: int = 6,
    a_coords=(1.0, 0.0),
    control_rng=None,
) -> float:
    """Max deviation of (Ph X_i)^n from intertwining U_mu with U_mu'.

    mu' is the simple reflection of mu, with mu - mu' = n alpha_i and
    n = mu(H_i) >= 0.  The maximum runs over interior K-types of the span
    truncation: those whose tensor components against g* all stay inside.
    ``control_rng`` swaps the phase blocks for random partial isometries of
    the same support (a negative control; the residual becomes order one).
    """
    mu = tuple(int(x) for x in mu)
    mu_i = _mu_i(mu, i)
    if n is None:
        n = mu_i
    if n != mu_i:
        raise ValueError(f"n = {n} does not match mu(H_{i}) = {mu_i}")
    if n < 0:
        raise ValueError("use the reflected weight as mu so that mu(H_i) >= 0")
    interior = interior_labels(mu, max_span)
    if not interior:
        raise CapacityError(
            f"truncation span {max_span} has an empty interior for mu = {mu}"
        )
    mup = reflect_weight(mu, i)
    w_mu = tuple(-x for x in mu)
    w_mup = tuple(-x for x in mup)
    control = None if control_rng is None else {"rng": control_rng, "blocks": {}}
    worst = 0.0
    for label in interior:
        rep = _irrep(label)
        spaces = rep.weight_spaces()
        if w_mu not in spaces:
            continue
        blk = umu_a_matrix(rep, mu, a_coords=a_coords)
        blkp = umu_a_matrix(rep, mup, a_coords=a_coords)
        p_src = _phase_block(
            label, i, n, blk.source_positions, blkp.source_positions, control
        )
        labels = sorted(
            {t.label for t in blk.targets} | {t.label for t in blkp.targets},
            reverse=True,
        )
        diffs = []
        for tlabel in labels:
            tgt_rep = _irrep(tlabel)
            rows_mu = tgt_rep.weight_spaces().get(w_mu, [])
            rows_mup = tgt_rep.weight_spaces().get(w_mup, [])
            if not rows_mup:
                continue
            t = blk.target(tlabel)
            tp = blkp.target(tlabel)
            shape = (
                tgt_rep.dim * len(rows_mup),
                rep.dim * len(blk.source_positions),
            )
            side1 = np.zeros(shape)
            if t is not None and rows_mu:
                p_t = _phase_block(tlabel, i, n, rows_mu, rows_mup, control)
                side1 = np.kron(np.eye(tgt_rep.dim), p_t) @ t.matrix
            side2 = np.zeros(shape)
            if tp is not None:
                side2 = tp.matrix @ np.kron(np.eye(rep.dim), p_src)
            diffs.append(side1 - side2)
        if diffs:
            worst = max(worst, float(np.linalg.norm(np.vstack(diffs), 2)))
    return worst
