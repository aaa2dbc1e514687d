"""Exact Gelfand-Tsetlin calculus for irreducible representations of gl(3).

An irrep is labelled by a dominant integral triple ``(m1, m2, m3)`` with
``m1 >= m2 >= m3``.  Its canonical basis is indexed by Gelfand-Tsetlin
patterns

::

        m1      m2      m3
            a       b
                c

subject to the interleaving conditions ``m1 >= a >= m2 >= b >= m3`` and
``a >= c >= b``.  Everything structural (generator matrices in the
unnormalized pattern basis, squared norms) is computed in exact rational
arithmetic; floating point enters only when an operator is converted to the
orthonormal basis.

Conventions, all pinned by tests:

* ``X1 = E12``, ``X2 = E23`` (raising), ``X1s = E21``, ``X2s = E32``
  (lowering = adjoints), ``Xr = [X1, X2] = E13``, ``Yr = E31``.
* ``H1 = diag(1,-1,0)``, ``H2 = diag(0,1,-1)``, ``H1p = diag(1,1,-2)``,
  ``H2p = diag(-2,1,1)``.
* The gl(3)-weight of a pattern is the triple of consecutive row-sum
  differences ``(s1 - s0, s2 - s1, s3 - s2)`` with ``s0 = 0``.
* Basis order: patterns sorted by ``(a, b, c)`` descending, so the highest
  weight vector always comes first.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from math import factorial
from pathlib import Path

import numpy as np

__all__ = [
    "CapacityError",
    "InvalidLabelError",
    "Irrep",
    "RationalOp",
    "commutator",
    "enumerate_patterns",
    "norm_sq",
    "sl_class",
    "weight_of",
    "weyl_dim",
]

GENERATOR_NAMES = ("X1", "X2", "X1s", "X2s", "H1", "H2", "H1p", "H2p", "Xr", "Yr")

# Accepted spellings for the starred / primed generators.
_ALIASES = {
    "X1*": "X1s",
    "X2*": "X2s",
    "H1'": "H1p",
    "H2'": "H2p",
    "Y1": "X1s",
    "Y2": "X2s",
}

_CACHE_VERSION = 1


class InvalidLabelError(ValueError):
    """Raised for a highest-weight label that is not dominant integral."""


class CapacityError(RuntimeError):
    """Raised when a request exceeds the configured exact-computation budget."""


# ---------------------------------------------------------------------------
# patterns
# ---------------------------------------------------------------------------

Pattern = tuple[int, int, int, int, int, int]  # (m1, m2, m3, a, b, c)


def check_label(label) -> tuple[int, int, int]:
    m1, m2, m3 = (int(x) for x in label)
    if not (m1 >= m2 >= m3):
        raise InvalidLabelError(f"label {label!r} is not dominant (need m1 >= m2 >= m3)")
    return (m1, m2, m3)


def weyl_dim(label) -> int:
    """Dimension of the irrep with highest weight ``label``."""
    m1, m2, m3 = check_label(label)
    p, q = m1 - m2, m2 - m3
    return (p + 1) * (q + 1) * (p + q + 2) // 2


def enumerate_patterns(label) -> list[Pattern]:
    """All GT patterns for ``label``, sorted by (a, b, c) descending."""
    m1, m2, m3 = check_label(label)
    pats = [
        (m1, m2, m3, a, b, c)
        for a in range(m1, m2 - 1, -1)
        for b in range(m2, m3 - 1, -1)
        for c in range(a, b - 1, -1)
    ]
    return pats


def weight_of(pattern: Pattern) -> tuple[int, int, int]:
    """gl(3)-weight of a pattern: consecutive differences of the row sums."""
    m1, m2, m3, a, b, c = pattern
    s1, s2, s3 = c, a + b, m1 + m2 + m3
    return (s1, s2 - s1, s3 - s2)


def _lvals(pattern: Pattern):
    """Shifted entries l_{k,j} = lambda_{k,j} - j + 1, row by row."""
    m1, m2, m3, a, b, c = pattern
    return (m1, m2 - 1, m3 - 2), (a, b - 1), (c,)


def norm_sq(pattern: Pattern) -> Fraction:
    """Squared norm of the unnormalized pattern vector (exact).

    Product over rows k = 2, 3 of
    ``prod_{i<=j<k} (l_{k,i} - l_{k-1,j})! / (l_{k-1,i} - l_{k-1,j})!``
    times
    ``prod_{i<j<=k} (l_{k,i} - l_{k,j} - 1)! / (l_{k-1,i} - l_{k,j} - 1)!``.
    """
    (l31, l32, l33), (l21, l22), (l11,) = _lvals(pattern)
    num = (
        factorial(l21 - l11)
        * factorial(l21 - l22 - 1)
        * factorial(l31 - l21)
        * factorial(l31 - l22)
        * factorial(l32 - l22)
        * factorial(l31 - l32 - 1)
        * factorial(l31 - l33 - 1)
        * factorial(l32 - l33 - 1)
    )
    den = (
        factorial(l11 - l22 - 1)
        * factorial(l21 - l22)
        * factorial(l21 - l32 - 1)
        * factorial(l21 - l33 - 1)
        * factorial(l22 - l33 - 1)
    )
    return Fraction(num, den)


# ---------------------------------------------------------------------------
# sparse exact operators
# ---------------------------------------------------------------------------


class RationalOp:
    """Sparse matrix over Q, stored as {(row, col): Fraction} with no zeros."""

    __slots__ = ("shape", "entries")

    def __init__(self, shape: tuple[int, int], entries: dict | None = None):
        self.shape = shape
        self.entries = {k: v for k, v in (entries or {}).items() if v != 0}

    @classmethod
    def zero(cls, shape) -> "RationalOp":
        return cls(shape)

    @classmethod
    def identity(cls, n: int) -> "RationalOp":
        return cls((n, n), {(i, i): Fraction(1) for i in range(n)})

    @classmethod
    def diagonal(cls, diag) -> "RationalOp":
        n = len(diag)
        return cls((n, n), {(i, i): Fraction(d) for i, d in enumerate(diag)})

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RationalOp)
            and self.shape == other.shape
            and self.entries == other.entries
        )

    def __add__(self, other: "RationalOp") -> "RationalOp":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, Fraction(0)) + v
        return RationalOp(self.shape, out)

    def __sub__(self, other: "RationalOp") -> "RationalOp":
        return self + (-other)

    def __neg__(self) -> "RationalOp":
        return RationalOp(self.shape, {k: -v for k, v in self.entries.items()})

    def scale(self, s) -> "RationalOp":
        s = Fraction(s)
        return RationalOp(self.shape, {k: s * v for k, v in self.entries.items()})

    def __matmul__(self, other: "RationalOp") -> "RationalOp":
        if self.shape[1] != other.shape[0]:
            raise ValueError("shape mismatch")
        by_row: dict[int, list[tuple[int, Fraction]]] = {}
        for (i, j), v in other.entries.items():
            by_row.setdefault(i, []).append((j, v))
        out: dict[tuple[int, int], Fraction] = {}
        for (i, k), u in self.entries.items():
            for j, v in by_row.get(k, ()):
                key = (i, j)
                out[key] = out.get(key, Fraction(0)) + u * v
        return RationalOp((self.shape[0], other.shape[1]), out)

    def apply(self, vec: dict) -> dict:
        """Apply to a {index: Fraction} column vector."""
        out: dict[int, Fraction] = {}
        for (i, j), v in self.entries.items():
            if j in vec:
                out[i] = out.get(i, Fraction(0)) + v * vec[j]
        return {i: v for i, v in out.items() if v != 0}

    def adjoint(self, dom_normsq, cod_normsq) -> "RationalOp":
        """Adjoint wrt the inner products with the given squared norms.

        For T: V_dom -> V_cod in unnormalized bases, the (c, r) entry of T*
        is ``T[r, c] * cod_normsq[r] / dom_normsq[c]``.
        """
        rows, cols = self.shape
        out = {
            (c, r): v * cod_normsq[r] / dom_normsq[c]
            for (r, c), v in self.entries.items()
        }
        return RationalOp((cols, rows), out)

    def to_dense(self) -> np.ndarray:
        mat = np.zeros(self.shape)
        for (i, j), v in self.entries.items():
            mat[i, j] = float(v)
        return mat

    def is_zero(self) -> bool:
        return not self.entries

    def __repr__(self) -> str:
        return f"RationalOp(shape={self.shape}, nnz={len(self.entries)})"


def commutator(x: RationalOp, y: RationalOp) -> RationalOp:
    return x @ y - y @ x


def _sqrt_fraction(q: Fraction) -> float:
    """sqrt of a nonnegative rational; exact when it is a perfect square."""
    num, den = q.numerator, q.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return rn / rd
    try:
        return math.sqrt(num / den)
    except OverflowError:
        return math.exp(0.5 * (math.log(num) - math.log(den)))


# ---------------------------------------------------------------------------
# the irrep itself
# ---------------------------------------------------------------------------

# Raising/lowering moves on the free pattern entries (a, b, c).  Each entry
# maps a pattern to a list of (target_pattern, exact coefficient).  Terms
# whose target violates interleaving are dropped: the pattern vector at an
# invalid pattern is zero.  (For X1/X1s the coefficient itself vanishes at
# string ends; for X2/X2s the interleaving check genuinely prunes terms.)


def _terms_X1(p: Pattern):
    m1, m2, m3, a, b, c = p
    if c + 1 <= a:
        coeff = Fraction(-(c - a) * (c - b + 1))
        yield (m1, m2, m3, a, b, c + 1), coeff


def _terms_X1s(p: Pattern):
    m1, m2, m3, a, b, c = p
    if c - 1 >= b:
        yield (m1, m2, m3, a, b, c - 1), Fraction(1)


def _terms_X2(p: Pattern):
    m1, m2, m3, a, b, c = p
    if a + 1 <= m1:
        coeff = Fraction(-(a - m1) * (a - m2 + 1) * (a - m3 + 2), a - b + 1)
        yield (m1, m2, m3, a + 1, b, c), coeff
    if b + 1 <= m2 and b + 1 <= c:
        coeff = Fraction(-(b - 1 - m1) * (b - m2) * (b - m3 + 1), b - a - 1)
        yield (m1, m2, m3, a, b + 1, c), coeff


def _terms_X2s(p: Pattern):
    m1, m2, m3, a, b, c = p
    if a - 1 >= m2 and a - 1 >= c:
        yield (m1, m2, m3, a - 1, b, c), Fraction(a - c, a - b + 1)
    if b - 1 >= m3:
        yield (m1, m2, m3, a, b - 1, c), Fraction(b - 1 - c, b - a - 1)


_RAISING_LOWERING = {"X1": _terms_X1, "X1s": _terms_X1s, "X2": _terms_X2, "X2s": _terms_X2s}

# Cartan eigenvalues as linear functionals of the gl-weight.
_CARTAN = {
    "H1": (1, -1, 0),
    "H2": (0, 1, -1),
    "H1p": (1, 1, -2),
    "H2p": (-2, 1, 1),
}


class Irrep:
    """A gl(3) irrep realized on its Gelfand-Tsetlin basis.

    Generator matrices act on the *unnormalized* basis and are exact
    (`RationalOp`); :meth:`normalized` converts to the orthonormal basis as
    float64.  Instances are cheap to construct for small labels; use the JSON
    cache helpers for repeated large builds.
    """

    def __init__(self, label):
        self.label = check_label(label)
        self.patterns = enumerate_patterns(self.label)
        self.dim = len(self.patterns)
        self.index = {p: i for i, p in enumerate(self.patterns)}
        self.weights = [weight_of(p) for p in self.patterns]
        self.normsq = [norm_sq(p) for p in self.patterns]
        self._ops: dict[str, RationalOp] = {}
        self._dense: dict[str, np.ndarray] = {}

    def __repr__(self) -> str:
        return f"Irrep{self.label} (dim {self.dim})"

    def span(self) -> int:
        return self.label[0] - self.label[2]

    # -- operators ---------------------------------------------------------

    def op(self, name: str) -> RationalOp:
        """Exact generator matrix in the unnormalized pattern basis."""
        name = _ALIASES.get(name, name)
        if name not in GENERATOR_NAMES:
            raise KeyError(f"unknown generator {name!r}")
        if name not in self._ops:
            self._ops[name] = self._build_op(name)
        return self._ops[name]

    def _build_op(self, name: str) -> RationalOp:
        if name in _CARTAN:
            coeffs = _CARTAN[name]
            diag = [sum(c * w for c, w in zip(coeffs, wt)) for wt in self.weights]
            return RationalOp.diagonal(diag)
        if name == "Xr":
            return commutator(self.op("X1"), self.op("X2"))
        if name == "Yr":
            return commutator(self.op("X2s"), self.op("X1s"))
        terms = _RAISING_LOWERING[name]
        entries: dict[tuple[int, int], Fraction] = {}
        for col, p in enumerate(self.patterns):
            for target, coeff in terms(p):
                entries[(self.index[target], col)] = coeff
        return RationalOp((self.dim, self.dim), entries)

    def adjoint_op(self, name: str) -> RationalOp:
        """Exact adjoint of ``op(name)`` wrt the pattern inner product."""
        return self.op(name).adjoint(self.normsq, self.normsq)

    # Lowering generators are materialized as literal transposes of their
    # raising partners: adjointness holds exactly at the rational level, and
    # evaluating one float path keeps it bitwise in the orthonormal basis too.
    _TRANSPOSE_OF = {"X1s": "X1", "X2s": "X2", "Yr": "Xr"}

    def normalized(self, name: str) -> np.ndarray:
        """Generator as a dense float64 matrix in the orthonormal basis."""
        name = _ALIASES.get(name, name)
        if name not in self._dense:
            partner = self._TRANSPOSE_OF.get(name)
            if partner is not None:
                mat = np.ascontiguousarray(self.normalized(partner).T)
            else:
                raw = self.op(name)
                mat = np.zeros((self.dim, self.dim))
                for (r, c), v in raw.entries.items():
                    mat[r, c] = float(v) * _sqrt_fraction(self.normsq[r] / self.normsq[c])
            self._dense[name] = mat
        return self._dense[name]

    # -- weight bookkeeping --------------------------------------------------

    def weight_spaces(self) -> dict[tuple[int, int, int], list[int]]:
        """Positions of each gl-weight, in basis order."""
        spaces: dict[tuple[int, int, int], list[int]] = {}
        for i, w in enumerate(self.weights):
            spaces.setdefault(w, []).append(i)
        return spaces

    def weight_multiplicities(self) -> dict[tuple[int, int, int], int]:
        return {w: len(ix) for w, ix in self.weight_spaces().items()}


def normsq_ratio(p_from: Pattern, p_to: Pattern) -> Fraction:
    """norm_sq(p_to)/norm_sq(p_from) for patterns one unit apart (closed form).

    Both patterns must be valid, share the top row, and differ by +-1 in
    exactly one of the free entries.  No factorials are materialized, so this
    stays cheap for arbitrarily large labels.
    """
    if p_from[:3] != p_to[:3]:
        raise ValueError("patterns belong to different irreps")
    m1, m2, m3, a, b, c = p_from
    diff = tuple(x - y for x, y in zip(p_to[3:], p_from[3:]))
    if diff == (1, 0, 0):
        return Fraction(
            (a + 1 - c) * (a - b + 1),
            (m1 - a) * (a - b + 2) * (a - m2 + 1) * (a - m3 + 2),
        )
    if diff == (0, 1, 0):
        return Fraction(
            (c - b) * (a - b + 1),
            (a - b) * (m1 - b + 1) * (m2 - b) * (b - m3 + 1),
        )
    if diff == (0, 0, 1):
        return Fraction(1, (a - c) * (c - b + 1))
    if sum(map(abs, diff)) == 1:
        return 1 / normsq_ratio(p_to, p_from)
    raise ValueError(f"patterns are not adjacent: {p_from} -> {p_to}")


def sl_class(weight) -> tuple[int, int, int]:
    """Canonical representative of a gl-weight modulo multiples of (1,1,1)."""
    w1, w2, w3 = weight
    return (w1 - w3, w2 - w3, 0)


# ---------------------------------------------------------------------------
# JSON cache
# ---------------------------------------------------------------------------


def _frac_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}" if q.denominator != 1 else str(q.numerator)


def _parse_frac(s: str) -> Fraction:
    return Fraction(s)


_CACHED_GENERATORS = ("X1", "X1s", "X2", "X2s")


def cache_path(cache_dir, label) -> Path:
    m1, m2, m3 = check_label(label)
    return Path(cache_dir) / f"rep_{m1}_{m2}_{m3}.json"


def to_cache_dict(rep: Irrep) -> dict:
    gens = {}
    for name in _CACHED_GENERATORS:
        op = rep.op(name)
        gens[name] = [
            [r, c, _frac_str(v)] for (r, c), v in sorted(op.entries.items())
        ]
    return {
        "version": _CACHE_VERSION,
        "label": list(rep.label),
        "patterns": [list(p) for p in rep.patterns],
        "normsq": [_frac_str(q) for q in rep.normsq],
        "generators": gens,
    }


def from_cache_dict(data: dict) -> Irrep:
    if data.get("version") != _CACHE_VERSION:
        raise ValueError(f"unsupported cache version {data.get('version')!r}")
    rep = Irrep(tuple(data["label"]))
    patterns = [tuple(p) for p in data["patterns"]]
    if patterns != rep.patterns:
        raise ValueError("cache pattern list does not match enumeration")
    stored = [_parse_frac(s) for s in data["normsq"]]
    if stored != rep.normsq:
        raise ValueError("cache norms do not match")
    for name, triples in data["generators"].items():
        entries = {(int(r), int(c)): _parse_frac(v) for r, c, v in triples}
        rep._ops[name] = RationalOp((rep.dim, rep.dim), entries)
    return rep


def save_cache(rep: Irrep, cache_dir) -> Path:
    path = cache_path(cache_dir, rep.label)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_cache_dict(rep), separators=(",", ":")))
    return path


def load_cache(label, cache_dir) -> Irrep | None:
    path = cache_path(cache_dir, label)
    if not path.exists():
        return None
    return from_cache_dict(json.loads(path.read_text()))


def get_irrep(label, cache_dir=None) -> Irrep:
    """Build an irrep, using/creating the JSON cache when a dir is given."""
    if cache_dir is not None:
        cached = load_cache(label, cache_dir)
        if cached is not None:
            return cached
    rep = Irrep(label)
    if cache_dir is not None:
        save_cache(rep, cache_dir)
    return rep
