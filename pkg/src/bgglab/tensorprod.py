"""Tensor products of gl(3) irreps: isotypic decomposition with explicit
isometric embeddings.

Factors may be GT irreps or any duck-typed unitary representation exposing
``dim``, ``weights`` (gl-weight triple per basis index) and ``normalized(name)``
(orthonormal-basis generator matrices).  Components are always GT irreps.

The decomposition is numerical: highest-weight vectors are joint null vectors
of the raising operators inside a candidate weight space of the tensor, and
each copy is fleshed out by applying lowering monomials level-by-level.  The
embedding of a copy is automatically isometric (the highest-weight vector is
a unit vector, and an intertwiner from an irrep scales norms uniformly), and
distinct copies land in mutually orthogonal subspaces.

``decompose_by_characters`` peels weight multiplicities in exact integer
arithmetic and serves as an independent oracle for labels/multiplicities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .gtcore import Irrep

__all__ = [
    "DegenerateDecompositionError",
    "TensorComponent",
    "TensorDecomposition",
    "decompose_by_characters",
    "dual_label",
    "tensor_decompose",
]

_RANK_CUTOFF = 1e-6

_ROOTS = {"X1s": (-1, 1, 0), "X2s": (0, -1, 1)}


class DegenerateDecompositionError(RuntimeError):
    """Raised when a rank decision sits too close to the singular-value cutoff."""


def dual_label(label) -> tuple[int, int, int]:
    m1, m2, m3 = label
    return (-m3, -m2, -m1)


# ---------------------------------------------------------------------------
# exact character arithmetic (oracle and fast multiplicity queries)
# ---------------------------------------------------------------------------


def decompose_by_characters(a_label, b_label) -> dict[tuple[int, int, int], int]:
    """Component multiplicities of a (x) b by exact weight-multiset peeling."""
    wa = Irrep(a_label).weight_multiplicities()
    wb = Irrep(b_label).weight_multiplicities()
    conv: dict[tuple[int, int, int], int] = {}
    for w1, n1 in wa.items():
        for w2, n2 in wb.items():
            w = (w1[0] + w2[0], w1[1] + w2[1], w1[2] + w2[2])
            conv[w] = conv.get(w, 0) + n1 * n2
    out: dict[tuple[int, int, int], int] = {}
    while conv:
        top = max(conv)  # lex-max of an S3-symmetric multiset is dominant
        mult = conv[top]
        if mult < 0 or not (top[0] >= top[1] >= top[2]):
            raise RuntimeError(f"character peeling failed at weight {top}")
        out[top] = mult
        for w, n in Irrep(top).weight_multiplicities().items():
            left = conv[w] - mult * n
            if left:
                conv[w] = left
            else:
                del conv[w]
    return out


# ---------------------------------------------------------------------------
# numerical decomposition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TensorComponent:
    label: tuple[int, int, int]
    multiplicity: int
    embeddings: tuple[np.ndarray, ...]  # one isometry per copy, into the tensor

    @property
    def embedding(self) -> np.ndarray:
        if self.multiplicity != 1:
            raise ValueError("component has several copies; use .embeddings")
        return self.embeddings[0]


@dataclass(frozen=True)
class TensorDecomposition:
    factors: tuple
    components: tuple[TensorComponent, ...]

    def component(self, label) -> TensorComponent | None:
        label = tuple(label)
        for comp in self.components:
            if comp.label == label:
                return comp
        return None

    def labels(self) -> list[tuple[int, int, int]]:
        return [c.label for c in self.components]


def _tensor_op(a, b, name: str) -> np.ndarray:
    return np.kron(a.normalized(name), np.eye(b.dim)) + np.kron(
        np.eye(a.dim), b.normalized(name)
    )


def _null_space(mat: np.ndarray, cutoff: float = _RANK_CUTOFF) -> np.ndarray:
    """Orthonormal null basis with a guarded rank decision.

    Singular values are required to stay clear of the cutoff (two decades on
    either side); anything in between means the weight space cannot be split
    reliably and the decomposition aborts.
    """
    if mat.shape[0] == 0:
        return np.eye(mat.shape[1])
    _, s, vh = np.linalg.svd(mat)
    near = (s > cutoff * 1e-2) & (s < cutoff * 1e2)
    if near.any():
        raise DegenerateDecompositionError(
            f"singular values {s[near]} sit within two decades of the rank "
            f"cutoff {cutoff:g}"
        )
    rank = int(np.sum(s > cutoff))
    basis = vh[rank:].T
    return _fix_signs(basis)


def _fix_signs(basis: np.ndarray) -> np.ndarray:
    out = basis.copy()
    for c in range(out.shape[1]):
        col = out[:, c]
        nz = np.flatnonzero(np.abs(col) > 1e-8)
        if nz.size and col[nz[0]] < 0:
            out[:, c] = -col
    return out


def _highest_weight_vectors(a, b, spaces, x1, x2):
    """Joint null vectors of the raising action per dominant tensor weight."""
    found = {}
    for weight in sorted(spaces, reverse=True):
        if not (weight[0] >= weight[1] >= weight[2]):
            continue
        cols = spaces[weight]
        blocks = []
        up1 = (weight[0] + 1, weight[1] - 1, weight[2])
        up2 = (weight[0], weight[1] + 1, weight[2] - 1)
        for mat, target in ((x1, up1), (x2, up2)):
            rows = spaces.get(target)
            if rows is not None:
                blocks.append(mat[np.ix_(rows, cols)])
        stacked = np.vstack(blocks) if blocks else np.zeros((0, len(cols)))
        null = _null_space(stacked)
        if null.shape[1]:
            vecs = np.zeros((x1.shape[0], null.shape[1]))
            vecs[cols] = null
            found[weight] = vecs
    return found


def _grow_component(comp: Irrep, hw_vec: np.ndarray, lowering: dict[str, np.ndarray]):
    """Embedding V^comp -> tensor generated from one highest-weight vector.

    Works level-by-level down the weight lattice: at each weight a spanning
    set of lowering monomials is selected on the component side (QR with
    pivoting against the exactly-known multiplicity) and the same monomials
    applied to the tensor side define the embedding block.
    """
    spaces = comp.weight_spaces()
    dim_t = hw_vec.shape[0]
    emb = np.zeros((dim_t, comp.dim))
    buckets: dict[tuple, list[tuple[np.ndarray, np.ndarray]]] = {
        comp.label: [(_unit(comp.dim, 0), hw_vec)]
    }
    comp_lower = {name: comp.normalized(name) for name in _ROOTS}
    for weight in sorted(spaces, reverse=True):
        pairs = buckets.pop(weight, [])
        positions = spaces[weight]
        k = len(positions)
        cmat = np.column_stack([cv[positions] for cv, _ in pairs])
        if cmat.shape[1] < k:
            raise RuntimeError(f"lowering failed to reach weight {weight}")
        _, _, piv = scipy.linalg.qr(cmat, pivoting=True)
        sel = sorted(piv[:k])
        vmat = cmat[:, sel]
        tmat = np.column_stack([pairs[i][1] for i in sel])
        emb[:, positions] = np.linalg.solve(vmat.T, tmat.T).T
        for i in sel:
            cv, tv = pairs[i]
            for name, root in _ROOTS.items():
                child = comp_lower[name] @ cv
                if np.max(np.abs(child)) < 1e-11 * max(1.0, np.max(np.abs(cv))):
                    continue
                target = (weight[0] + root[0], weight[1] + root[1], weight[2] + root[2])
                buckets.setdefault(target, []).append((child, lowering[name] @ tv))
    return emb


def _unit(n, i):
    e = np.zeros(n)
    e[i] = 1.0
    return e


def tensor_decompose(a, b) -> TensorDecomposition:
    """Isotypic decomposition of a (x) b with explicit embeddings.

    Components are ordered by label descending; copies within a component
    follow the orthonormal order of the highest-weight null basis.
    """
    weights = [
        (wa[0] + wb[0], wa[1] + wb[1], wa[2] + wb[2])
        for wa in a.weights
        for wb in b.weights
    ]
    spaces: dict[tuple, list[int]] = {}
    for t, w in enumerate(weights):
        spaces.setdefault(w, []).append(t)
    x1 = _tensor_op(a, b, "X1")
    x2 = _tensor_op(a, b, "X2")
    lowering = {"X1s": x1.T, "X2s": x2.T}
    components = []
    for weight, vecs in sorted(
        _highest_weight_vectors(a, b, spaces, x1, x2).items(), reverse=True
    ):
        comp = Irrep(weight)
        embeddings = tuple(
            _grow_component(comp, vecs[:, r], lowering) for r in range(vecs.shape[1])
        )
        components.append(TensorComponent(weight, vecs.shape[1], embeddings))
    return TensorDecomposition((a.label, b.label), tuple(components))
