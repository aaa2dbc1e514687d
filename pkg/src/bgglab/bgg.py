"""Weyl graph, shifted action, and per-K-type normalized BGG operators.

The six Weyl elements of sl(3) act on gl-weight triples by coordinate
permutation; the shifted action w * lam = w(lam + rho) - rho (rho the Weyl
vector) places the operators: an edge w -- w' labeled by a simple root alpha_i
carries the phase power (Ph X_i)^n with n determined by
w*lam - w'*lam = n alpha_i, and the two rho-labeled edges are composed
through the middle column of the graph.  Per K-type these are honest finite
matrices between weight blocks, and the compactness facts they feed become
finite checks: the defect B*B - 1 is minus a projection onto short strings,
the hexagon of the two paths from 1 to the long element commutes on jointly
high types, the split-Cartan commutator decays on high strings, and the
alternating sum of shifted weight multiplicities is the index.
"""

from __future__ import annotations

import functools
from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from .gtcore import CapacityError, Irrep, check_label, weight_of
from .harmonic import eta_weight, k2_isotypic_projection, phase_of_generator
from .principal import interior_labels, umu_a_matrix

__all__ = [
    "WEYL_EDGES",
    "WEYL_ELEMENTS",
    "WEYL_LENGTH",
    "DefectReport",
    "EdgeBlock",
    "WeylEdge",
    "alternating_multiplicity",
    "bgg_block",
    "bgg_defect",
    "bgg_edge_power",
    "braid_residual",
    "edge_label",
    "f_g_covariance_residual",
    "hexagon_residual",
    "shifted_action",
    "weyl_apply",
]

#: Weyl vector (half-sum of the positive roots) as a gl-weight triple.
_WEYL_VECTOR = (1, 0, -1)

_SIMPLE_ROOT = {1: (1, -1, 0), 2: (0, 1, -1)}

# Coordinate permutations: w sends a triple v to (v[p0], v[p1], v[p2]).
WEYL_ELEMENTS = {
    "1": (0, 1, 2),
    "s1": (1, 0, 2),
    "s2": (0, 2, 1),
    "s1s2": (2, 0, 1),
    "s2s1": (1, 2, 0),
    "wr": (2, 1, 0),
}

WEYL_LENGTH = {"1": 0, "s1": 1, "s2": 1, "s1s2": 2, "s2s1": 2, "wr": 3}

WeylEdge = namedtuple("WeylEdge", ["w", "wp", "label"])

WEYL_EDGES = (
    WeylEdge("1", "s1", "a1"),
    WeylEdge("1", "s2", "a2"),
    WeylEdge("s1", "s1s2", "rho"),
    WeylEdge("s1", "s2s1", "a2"),
    WeylEdge("s2", "s2s1", "rho"),
    WeylEdge("s2", "s1s2", "a1"),
    WeylEdge("s1s2", "wr", "a2"),
    WeylEdge("s2s1", "wr", "a1"),
)

# The composed rho-edges, spelled as vertex paths through the graph.
_RHO_PATH = {
    ("s1", "s1s2"): ("s1", "1", "s2", "s1s2"),
    ("s2", "s2s1"): ("s2", "1", "s1", "s2s1"),
}


def weyl_apply(w: str, v) -> tuple[int, int, int]:
    perm = WEYL_ELEMENTS[w]
    v = tuple(v)
    return (v[perm[0]], v[perm[1]], v[perm[2]])


def shifted_action(w: str, lam) -> tuple[int, int, int]:
    """w * lam = w(lam + rho) - rho on gl-weight triples."""
    lam = tuple(int(x) for x in lam)
    shifted = tuple(a + b for a, b in zip(lam, _WEYL_VECTOR))
    moved = weyl_apply(w, shifted)
    return tuple(a - b for a, b in zip(moved, _WEYL_VECTOR))


def edge_label(w: str, wp: str) -> str | None:
    """Label of the graph edge between two Weyl elements (either order)."""
    for e in WEYL_EDGES:
        if {e.w, e.wp} == {w, wp}:
            return e.label
    return None


def bgg_edge_power(lam, edge) -> tuple[int, int, str]:
    """(i, n, direction) for a simple edge: w*lam - w'*lam = n alpha_i.

    Direction is "X" for n >= 0 (phase powers of the raising generator) and
    "Y" otherwise; reversing the edge flips it.  rho-labeled edges have no
    single power and must be composed through the middle column.
    """
    w, wp = edge
    label = edge_label(w, wp)
    if label is None:
        raise ValueError(f"({w}, {wp}) is not an edge of the Weyl graph")
    if label == "rho":
        raise ValueError(
            f"edge ({w}, {wp}) is not simple; compose it through the middle column"
        )
    i = 1 if label == "a1" else 2
    diff = tuple(
        a - b for a, b in zip(shifted_action(w, lam), shifted_action(wp, lam))
    )
    root = _SIMPLE_ROOT[i]
    n = diff[0] if i == 1 else diff[1]
    if tuple(n * r for r in root) != diff:
        raise ValueError(f"difference {diff} is not a multiple of alpha_{i}")
    return i, n, ("X" if n >= 0 else "Y")


@functools.lru_cache(maxsize=None)
def _irrep(label) -> Irrep:
    return Irrep(label)


@functools.lru_cache(maxsize=None)
def _phase_power(label, i: int, n: int) -> np.ndarray:
    rep = _irrep(label)
    if n == 0:
        return np.eye(rep.dim)
    ph = phase_of_generator(rep, "X1" if i == 1 else "X2")
    return np.linalg.matrix_power(ph.mat, n)


@dataclass(frozen=True)
class EdgeBlock:
    w: str
    wp: str
    source_weight: tuple[int, int, int]
    target_weight: tuple[int, int, int]
    source_positions: tuple[int, ...]
    target_positions: tuple[int, ...]
    matrix: np.ndarray


def bgg_block(lam, edge, rep) -> EdgeBlock:
    """Normalized BGG operator of an edge on the K-type rep.

    For a simple edge this is the phase power restricted from the
    (-w*lam)-weight block to the (-w'*lam)-weight block; rho-labeled edges
    are products of the three simple blocks along the defining path.  Empty
    weight blocks give (possibly zero-dimensional) zero operators.
    """
    lam = check_label(lam)
    if not isinstance(rep, Irrep):
        rep = _irrep(tuple(int(x) for x in rep))
    w, wp = edge
    label = edge_label(w, wp)
    if label is None:
        raise ValueError(f"({w}, {wp}) is not an edge of the Weyl graph")
    spaces = rep.weight_spaces()
    nu_src = tuple(-x for x in shifted_action(w, lam))
    nu_tgt = tuple(-x for x in shifted_action(wp, lam))
    cols = tuple(spaces.get(nu_src, ()))
    rows = tuple(spaces.get(nu_tgt, ()))
    if label == "rho":
        path = _RHO_PATH.get((w, wp))
        if path is not None:
            mats = [
                bgg_block(lam, (a, b), rep).matrix
                for a, b in zip(path, path[1:])
            ]
            mat = functools.reduce(lambda acc, m: m @ acc, mats)
        else:
            mat = bgg_block(lam, (wp, w), rep).matrix.T
    else:
        i, n, direction = bgg_edge_power(lam, edge)
        power = _phase_power(rep.label, i, abs(n))
        mat = (power if direction == "X" else power.T)[np.ix_(rows, cols)]
    return EdgeBlock(w, wp, nu_src, nu_tgt, cols, rows, mat)


# ---------------------------------------------------------------------------
# defects and the hexagon
# ---------------------------------------------------------------------------

DefectReport = namedtuple(
    "DefectReport", ["matrix", "threshold", "string_norms", "support"]
)


def _string_types(rep: Irrep, weight, i: int) -> list[int]:
    if i == 1:
        return sorted(
            {p[3] - p[4] for p in rep.patterns if weight_of(p) == weight}
        )
    return sorted({p[3] - p[4] for p in rep.patterns if eta_weight(p) == weight})


def _string_projection(rep: Irrep, weight, positions, i: int, delta: int) -> np.ndarray:
    """Projection, inside the listed weight-space positions, onto the
    s_i-strings of exactly the given highest weight delta."""
    positions = list(positions)
    if i == 1:
        flags = [float(rep.patterns[k][3] - rep.patterns[k][4] == delta) for k in positions]
        return np.diag(flags)
    full = k2_isotypic_projection(rep, weight, delta)
    return full[np.ix_(positions, positions)]


def bgg_defect(lam, edge, rep) -> DefectReport:
    """B_back B_forward - 1 on the source block of a simple edge.

    The report carries the per-string norms of the defect and the support
    delta values; the contract is that the defect is minus a projection
    supported on strings with delta < 2|n| + |(w*lam)(H_i)|.
    """
    lam = check_label(lam)
    if not isinstance(rep, Irrep):
        rep = _irrep(tuple(int(x) for x in rep))
    w, wp = edge
    i, n, _ = bgg_edge_power(lam, edge)
    fwd = bgg_block(lam, (w, wp), rep)
    back = bgg_block(lam, (wp, w), rep)
    d = back.matrix @ fwd.matrix - np.eye(len(fwd.source_positions))
    ws = shifted_action(w, lam)
    pairing = ws[0] - ws[1] if i == 1 else ws[1] - ws[2]
    threshold = 2 * abs(n) + abs(pairing)
    norms = {}
    for delta in _string_types(rep, fwd.source_weight, i):
        proj = _string_projection(rep, fwd.source_weight, fwd.source_positions, i, delta)
        norms[delta] = float(np.linalg.norm(d @ proj, 2)) if proj.size else 0.0
    support = tuple(sorted(k for k, v in norms.items() if v > 1e-9))
    return DefectReport(d, threshold, norms, support)


def _joint_high_frame(rep: Irrep, weight, positions, min_delta: int):
    """Orthonormal basis of the vectors in a weight block whose s1-type and
    s2-type are both >= min_delta, or None when that subspace is empty."""
    p1 = sum(
        _string_projection(rep, weight, positions, 1, d)
        for d in _string_types(rep, weight, 1)
        if d >= min_delta
    )
    p2 = sum(
        _string_projection(rep, weight, positions, 2, d)
        for d in _string_types(rep, weight, 2)
        if d >= min_delta
    )
    if np.isscalar(p1) or np.isscalar(p2):
        return None
    vals, vecs = np.linalg.eigh(p1 @ p2 @ p1)
    joint = vecs[:, vals > 1 - 1e-9]
    return joint if joint.shape[1] else None


def _path_product(lam, path, rep) -> tuple[EdgeBlock, EdgeBlock, np.ndarray]:
    blocks = [bgg_block(lam, (a, b), rep) for a, b in zip(path, path[1:])]
    out = blocks[0].matrix
    for blk in blocks[1:]:
        out = blk.matrix @ out
    return blocks[0], blocks[-1], out


def hexagon_residual(lam, rep, min_delta: int) -> float:
    """Two-sided jointly-high compression of the difference between the two
    path composites from 1 to the long element.

    The two operator sums whose closure absorbs the difference are built from
    string-finite pieces, so the compression decays as min_delta grows; at
    finite truncation it is a decay diagnostic, not an exact zero.  Returns
    0.0 when either jointly-high subspace is empty.
    """
    lam = check_label(lam)
    if not isinstance(rep, Irrep):
        rep = _irrep(tuple(int(x) for x in rep))
    first, last, top = _path_product(lam, ("1", "s1", "s1s2", "wr"), rep)
    _, _, bot = _path_product(lam, ("1", "s2", "s2s1", "wr"), rep)
    if not first.source_positions or not last.target_positions:
        return 0.0
    src = _joint_high_frame(rep, first.source_weight, first.source_positions, min_delta)
    tgt = _joint_high_frame(rep, last.target_weight, last.target_positions, min_delta)
    if src is None or tgt is None:
        return 0.0
    return float(np.linalg.norm(tgt.T @ (top - bot) @ src, 2))


def braid_residual(mu, rep, min_delta: int = 0) -> float:
    """Agreement of the two reduced-word composites of unitary intertwiner
    blocks out of the (-mu)-column, for dominant mu.

    Each factor is the phase power (Ph X_i)^n with n the pairing of the
    running weight with H_i; the two words land in the same column and agree
    exactly (the composites are blocks of the same unitary), which is the
    mechanism behind hexagon commutativity one rho-shift below.  min_delta
    optionally compresses both sides to jointly-high s1/s2-types.
    """
    mu = check_label(mu)
    if not isinstance(rep, Irrep):
        rep = _irrep(tuple(int(x) for x in rep))
    spaces = rep.weight_spaces()

    def word(seq):
        cur = mu
        out = np.eye(rep.dim)
        for i in seq:
            n = cur[0] - cur[1] if i == 1 else cur[1] - cur[2]
            out = _phase_power(rep.label, i, n) @ out
            cur = weyl_apply("s1" if i == 1 else "s2", cur)
        return out

    diff = word((1, 2, 1)) - word((2, 1, 2))
    src_w = tuple(-x for x in mu)
    tgt_w = tuple(-x for x in weyl_apply("wr", mu))
    cols = tuple(spaces.get(src_w, ()))
    rows = tuple(spaces.get(tgt_w, ()))
    if not cols or not rows:
        return 0.0
    diff = diff[np.ix_(rows, cols)]
    if min_delta > 0:
        src = _joint_high_frame(rep, src_w, cols, min_delta)
        tgt = _joint_high_frame(rep, tgt_w, rows, min_delta)
        if src is None or tgt is None:
            return 0.0
        diff = tgt.T @ diff @ src
    return float(np.linalg.norm(diff, 2))


# ---------------------------------------------------------------------------
# the index identity
# ---------------------------------------------------------------------------


def alternating_multiplicity(lam, pi_label) -> int:
    """Sum over the Weyl group of (-1)^l(w) m_pi(w * lam), exact.

    Equals 1 when pi is the irrep with highest weight lam and 0 for every
    other K-type.
    """
    lam = check_label(lam)
    mults = _irrep(tuple(int(x) for x in pi_label)).weight_multiplicities()
    return sum(
        (-1) ** WEYL_LENGTH[w] * mults.get(shifted_action(w, lam), 0)
        for w in WEYL_ELEMENTS
    )


# ---------------------------------------------------------------------------
# covariance of the edges under the split Cartan
# ---------------------------------------------------------------------------


def f_g_covariance_residual(
    lam, edge, threshold: int, max_span: int = 6, a_coords=(1.0, 0.0)
) -> float:
    """Norm of U(A) B - B U(A) compressed to source strings >= threshold.

    B is the block operator of a simple edge; the two U's act at the two
    shifted weights.  The maximum runs over interior K-types of the span
    truncation; the residual decays as the threshold grows (the commutator
    lives on short strings), while threshold 0 sees the full defect.
    """
    lam = check_label(lam)
    w, wp = edge
    i, n, _ = bgg_edge_power(lam, edge)
    mu_src = shifted_action(w, lam)
    mu_tgt = shifted_action(wp, lam)
    nu_src = tuple(-x for x in mu_src)
    nu_tgt = tuple(-x for x in mu_tgt)
    interior = interior_labels(mu_src, max_span)
    if not interior:
        raise CapacityError(
            f"truncation span {max_span} has an empty interior for mu = {mu_src}"
        )
    worst = 0.0
    for label in interior:
        rep = _irrep(label)
        spaces = rep.weight_spaces()
        if nu_src not in spaces:
            continue
        blk_src = umu_a_matrix(rep, mu_src, a_coords=a_coords)
        blk_tgt = (
            umu_a_matrix(rep, mu_tgt, a_coords=a_coords)
            if nu_tgt in spaces
            else None
        )
        b_here = bgg_block(lam, edge, rep)
        labels = {t.label for t in blk_src.targets}
        if blk_tgt is not None:
            labels |= {t.label for t in blk_tgt.targets}
        diffs = []
        for tlabel in sorted(labels, reverse=True):
            tgt_rep = _irrep(tlabel)
            rows_tgt = tgt_rep.weight_spaces().get(nu_tgt, [])
            if not rows_tgt:
                continue
            shape = (
                tgt_rep.dim * len(rows_tgt),
                rep.dim * len(blk_src.source_positions),
            )
            side1 = np.zeros(shape)
            if blk_tgt is not None:
                t = blk_tgt.target(tlabel)
                if t is not None:
                    side1 = t.matrix @ np.kron(np.eye(rep.dim), b_here.matrix)
            side2 = np.zeros(shape)
            t = blk_src.target(tlabel)
            if t is not None:
                b_tgt = bgg_block(lam, edge, tgt_rep)
                side2 = np.kron(np.eye(tgt_rep.dim), b_tgt.matrix) @ t.matrix
            diffs.append(side1 - side2)
        if not diffs:
            continue
        proj = sum(
            _string_projection(rep, nu_src, blk_src.source_positions, i, d)
            for d in _string_types(rep, nu_src, i)
            if d >= threshold
        )
        if np.isscalar(proj):
            continue
        compressed = np.vstack(diffs) @ np.kron(np.eye(rep.dim), proj)
        worst = max(worst, float(np.linalg.norm(compressed, 2)))
    return worst
