"""Max-plus arithmetic, tropical segments, metrics and barycenters.

Scalars are plain Python numbers (``Fraction``/``int`` for exact work,
``float`` for log-scaled numeric data) together with the distinguished
bottom element :data:`BOTTOM` standing for minus infinity.  Points are
immutable :class:`TropPoint` tuples; a point never mixes exact and float
entries.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np


@functools.total_ordering
class _Bottom:
    """Tropical zero: absorbing for multiplication, neutral for max."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "BOTTOM"

    def __str__(self):
        return "-inf"

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return other is not self

    def __hash__(self):
        return hash("tropical-bottom")

    def __reduce__(self):
        return (_Bottom, ())


BOTTOM = _Bottom()

Scalar = Union[Fraction, int, float, _Bottom]


def is_bottom(a) -> bool:
    return a is BOTTOM


def as_scalar(a) -> Scalar:
    """Normalise user input: ints become Fractions, ``-inf`` becomes BOTTOM."""
    if a is BOTTOM:
        return a
    if isinstance(a, bool):
        raise TypeError("booleans are not tropical scalars")
    if isinstance(a, int):
        return Fraction(a)
    if isinstance(a, Fraction):
        return a
    if isinstance(a, float):
        if math.isnan(a) or a == math.inf:
            raise ValueError(f"{a!r} is not an element of the tropical semifield")
        if a == -math.inf:
            return BOTTOM
        return a
    if isinstance(a, str):
        if a.strip() in ("-inf", "-∞"):
            return BOTTOM
        return Fraction(a)
    raise TypeError(f"unsupported tropical scalar {a!r}")


def trop_add(a: Scalar, b: Scalar) -> Scalar:
    """Tropical sum, ``max(a, b)``."""
    if a is BOTTOM:
        return b
    if b is BOTTOM:
        return a
    return a if a >= b else b


def trop_mul(a: Scalar, b: Scalar) -> Scalar:
    """Tropical product, ``a + b`` with BOTTOM absorbing."""
    if a is BOTTOM or b is BOTTOM:
        return BOTTOM
    return a + b


def trop_inv(a: Scalar) -> Scalar:
    if a is BOTTOM:
        raise ZeroDivisionError("BOTTOM has no tropical inverse")
    return -a


def trop_sum(values: Iterable[Scalar]) -> Scalar:
    return functools.reduce(trop_add, values, BOTTOM)


def _is_exact(a) -> bool:
    return isinstance(a, Fraction)


@dataclass(frozen=True)
class TropPoint:
    """A point of the tropical affine space, ordered componentwise."""

    entries: tuple

    def __init__(self, entries: Iterable):
        vals = tuple(as_scalar(e) for e in entries)
        if not vals:
            raise ValueError("a tropical point needs at least one coordinate")
        finite = [v for v in vals if v is not BOTTOM]
        kinds = {_is_exact(v) for v in finite}
        if len(kinds) > 1:
            raise TypeError("exact and float entries cannot be mixed in one point")
        object.__setattr__(self, "entries", vals)

    @property
    def dim(self) -> int:
        return len(self.entries)

    @property
    def exact(self) -> bool:
        return all(v is BOTTOM or _is_exact(v) for v in self.entries)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __le__(self, other: "TropPoint") -> bool:
        _check_dims(self, other)
        return all(a <= b for a, b in zip(self.entries, other.entries))

    def __ge__(self, other: "TropPoint") -> bool:
        return other <= self

    def support(self) -> frozenset:
        return frozenset(i for i, v in enumerate(self.entries) if v is not BOTTOM)

    def oplus(self, other: "TropPoint") -> "TropPoint":
        _check_dims(self, other)
        return TropPoint(trop_add(a, b) for a, b in zip(self.entries, other.entries))

    def shift(self, lam: Scalar) -> "TropPoint":
        """Tropical scalar multiple ``lam ⊙ self``."""
        return TropPoint(trop_mul(lam, a) for a in self.entries)

    def project(self, indices: Sequence[int]) -> "TropPoint":
        return TropPoint(self.entries[i] for i in indices)

    def to_floats(self) -> np.ndarray:
        return np.array([-math.inf if v is BOTTOM else float(v) for v in self.entries])

    def __str__(self):
        return "(" + ", ".join(str(v) for v in self.entries) + ")"


def _check_dims(u: TropPoint, v: TropPoint) -> None:
    if u.dim != v.dim:
        raise ValueError(f"dimension mismatch: {u.dim} vs {v.dim}")


def direction_set(vec: Sequence) -> frozenset | None:
    """Return K if ``vec`` is a positive multiple of the indicator e^K, else None.

    The zero vector maps to the empty set.
    """
    nonzero = [(i, v) for i, v in enumerate(vec) if v != 0]
    if not nonzero:
        return frozenset()
    first = nonzero[0][1]
    if first <= 0 or any(v != first for _, v in nonzero):
        return None
    return frozenset(i for i, _ in nonzero)


def indicator(K: Iterable[int], dim: int) -> tuple:
    """The 0/1 vector e^K of length ``dim``."""
    members = set(K)
    if any(not 0 <= k < dim for k in members):
        raise ValueError("index outside the ambient dimension")
    return tuple(Fraction(1) if i in members else Fraction(0) for i in range(dim))


@dataclass(frozen=True)
class PolygonalPath:
    """Ordered breakpoints of a polygonal curve; consecutive points differ."""

    breakpoints: tuple

    def __init__(self, breakpoints: Iterable[TropPoint]):
        pts = tuple(p if isinstance(p, TropPoint) else TropPoint(p) for p in breakpoints)
        if not pts:
            raise ValueError("a path needs at least one breakpoint")
        for p in pts[1:]:
            _check_dims(pts[0], p)
        for a, b in zip(pts, pts[1:]):
            if a == b:
                raise ValueError("consecutive breakpoints must be distinct")
        object.__setattr__(self, "breakpoints", pts)

    @property
    def dim(self) -> int:
        return self.breakpoints[0].dim

    @property
    def start(self) -> TropPoint:
        return self.breakpoints[0]

    @property
    def end(self) -> TropPoint:
        return self.breakpoints[-1]

    def __len__(self):
        return len(self.breakpoints)

    def directions(self) -> list[tuple]:
        """Difference vectors of consecutive breakpoints.

        Coordinates that are BOTTOM at both ends contribute 0.
        """
        out = []
        for a, b in zip(self.breakpoints, self.breakpoints[1:]):
            d = []
            for x, y in zip(a, b):
                if x is BOTTOM and y is BOTTOM:
                    d.append(0)
                elif x is BOTTOM or y is BOTTOM:
                    raise ValueError("piece joins a finite and an infinite coordinate")
                else:
                    d.append(y - x)
            out.append(tuple(d))
        return out

    def direction_sets(self) -> list[frozenset | None]:
        return [direction_set(d) for d in self.directions()]


def _merge_collinear(points: list[TropPoint]) -> list[TropPoint]:
    dedup: list[TropPoint] = []
    for p in points:
        if not dedup or dedup[-1] != p:
            dedup.append(p)
    if len(dedup) < 3:
        return dedup
    out = [dedup[0]]
    for cur, nxt in zip(dedup[1:], dedup[2:]):
        prev = out[-1]
        d1 = [_sub(b, a) for a, b in zip(prev, cur)]
        d2 = [_sub(b, a) for a, b in zip(cur, nxt)]
        if not _parallel(d1, d2):
            out.append(cur)
    out.append(dedup[-1])
    return out


def _sub(b, a):
    if a is BOTTOM and b is BOTTOM:
        return 0
    return b - a


def _parallel(d1, d2) -> bool:
    # same direction and orientation
    ratio = None
    for a, b in zip(d1, d2):
        if (a == 0) != (b == 0):
            return False
        if a == 0:
            continue
        q = b / a
        if q <= 0:
            return False
        if ratio is None:
            ratio = q
        elif q != ratio:
            return False
    return True


def trop_segment(u: TropPoint, v: TropPoint) -> PolygonalPath:
    """The tropical segment ``{λ⊙u ⊕ μ⊙v : λ ⊕ μ = 0}`` oriented from u to v.

    Coordinates that are BOTTOM in both endpoints stay BOTTOM.  A coordinate
    that is finite in exactly one endpoint would produce an unbounded piece
    and is rejected.
    """
    _check_dims(u, v)
    for a, b in zip(u, v):
        if (a is BOTTOM) != (b is BOTTOM):
            raise ValueError("tropical segment with unbounded pieces (mixed support)")
    gaps = [a - b for a, b in zip(u, v) if a is not BOTTOM]

    def point(lam, mu):
        return TropPoint(
            trop_add(trop_mul(lam, a), trop_mul(mu, b)) for a, b in zip(u, v)
        )

    finite = [a for a in u if a is not BOTTOM]
    zero = finite[0] * 0 if finite else Fraction(0)
    pts = [u]
    # μ rises from -inf to 0 with λ = 0: coordinate i starts moving at μ = u_i - v_i
    for c in sorted({g for g in gaps if g < 0}):
        pts.append(point(zero, c))
    pts.append(point(zero, zero))
    # λ falls from 0 to -inf with μ = 0
    for c in sorted({-g for g in gaps if g > 0}, reverse=True):
        pts.append(point(c, zero))
    pts.append(v)
    return PolygonalPath(_merge_collinear(pts))


def funk_distance(x: TropPoint, y: TropPoint):
    """One-sided gap ``max(0, max_k (y_k - x_k))``; ``inf`` unless supp(x) ⊇ supp(y)."""
    _check_dims(x, y)
    best = 0
    for a, b in zip(x, y):
        if b is BOTTOM:
            continue
        if a is BOTTOM:
            return math.inf
        d = b - a
        if d > best:
            best = d
    return best


def hilbert_distance(x: TropPoint, y: TropPoint):
    return funk_distance(x, y) + funk_distance(y, x)


def dinf_distance(x: TropPoint, y: TropPoint):
    return max(funk_distance(x, y), funk_distance(y, x))


_METRICS = {"d_inf": dinf_distance, "d_H": hilbert_distance}


def _piece_min_distance(q: np.ndarray, a: np.ndarray, d: np.ndarray, metric: str) -> np.ndarray:
    """Exact minimum over s in [0,1] of metric(q_p, a + s d) for each row q_p of ``q``.

    Both metrics are maxima (or sums of maxima) of the affine functions
    ``±(q_i - a_i - s d_i)`` and 0, hence convex and piecewise linear in s;
    the minimum sits at s in {0, 1} or at a crossing of two of those lines.
    """
    q = np.atleast_2d(q)
    c0 = q - a[None, :]
    slopes = np.concatenate([-d, d, [0.0]])
    icpts = np.concatenate([c0, -c0, np.zeros((q.shape[0], 1))], axis=1)
    ds = slopes[:, None] - slopes[None, :]
    di = icpts[:, None, :] - icpts[:, :, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = di / ds[None, :, :]
    cross = cross.reshape(q.shape[0], -1)
    cross = np.where(np.isfinite(cross) & (cross > 0) & (cross < 1), cross, 0.0)
    cand = np.concatenate([cross, np.ones((q.shape[0], 1))], axis=1)
    pts = a[None, None, :] + cand[:, :, None] * d[None, None, :]
    diff = pts - q[:, None, :]
    up = np.maximum(0.0, diff.max(axis=2))
    down = np.maximum(0.0, (-diff).max(axis=2))
    vals = np.maximum(up, down) if metric == "d_inf" else up + down
    return vals.min(axis=1)


def directed_hausdorff(sample: Sequence[TropPoint], target: PolygonalPath,
                       metric: str = "d_inf") -> float:
    """``sup_{x in sample} inf_{y in target} metric(x, y)`` with target a polyline.

    Computed in double precision.  Coordinates that are BOTTOM throughout the
    target and in a sample point are ignored; any other support mismatch
    gives ``inf``.
    """
    if metric not in _METRICS:
        raise ValueError(f"metric must be one of {sorted(_METRICS)}")
    sample = list(sample)
    if not sample:
        raise ValueError("empty sample")
    dim = target.dim
    tsupp = target.start.support()
    for p in target.breakpoints:
        if p.support() != tsupp:
            raise ValueError("target path must have constant support")
    keep = sorted(tsupp)
    for x in sample:
        if x.dim != dim:
            raise ValueError("dimension mismatch between sample and target")
        if x.support() != tsupp:
            return math.inf
    if not keep:
        return 0.0
    bps = np.array([[float(p[i]) for i in keep] for p in target.breakpoints])
    Q = np.array([[float(x[i]) for i in keep] for x in sample])
    if len(bps) == 1:
        best = _piece_min_distance(Q, bps[0], np.zeros(len(keep)), metric)
    else:
        best = np.min([_piece_min_distance(Q, a, b - a, metric)
                       for a, b in zip(bps, bps[1:])], axis=0)
    return float(best.max())


def pointwise_barycenter(points: Iterable[TropPoint]) -> TropPoint:
    """Componentwise tropical sum (max) of a nonempty finite set of points."""
    pts = list(points)
    if not pts:
        raise ValueError("barycenter of an empty set")
    return functools.reduce(TropPoint.oplus, pts)


@dataclass(frozen=True, order=True)
class Angle:
    """An angle stored exactly as an integer number of right angles."""

    right_angles: int = 0

    def __add__(self, other: "Angle") -> "Angle":
        return Angle(self.right_angles + other.right_angles)

    def __float__(self):
        return self.right_angles * math.pi / 2

    def __str__(self):
        return f"{self.right_angles}*pi/2"


RIGHT_ANGLE = Angle(1)
ZERO_ANGLE = Angle(0)


def _argmax(p: TropPoint) -> tuple[Scalar, frozenset]:
    top = trop_sum(p)
    return top, frozenset(i for i, v in enumerate(p) if v == top)


def weak_tropical_angle(U: TropPoint, V: TropPoint, W: TropPoint) -> Angle:
    """Right angle iff max U < max V < max W and argmax V, argmax W are disjoint."""
    _check_dims(U, V)
    _check_dims(V, W)
    mu, _ = _argmax(U)
    mv, av = _argmax(V)
    mw, aw = _argmax(W)
    if mu < mv < mw and not (av & aw):
        return RIGHT_ANGLE
    return ZERO_ANGLE


def gamma_count(direction_sets: Sequence[frozenset]) -> int:
    """Fewest tropical segments whose concatenation is a monotone polyline.

    ``direction_sets`` lists the sets K_i of the pieces e^{K_i} in order.  A run
    of pieces is a single tropical segment exactly when its sets form a
    strictly increasing chain; chains stay chains under taking sub-runs, so
    cutting greedily at every non-nested transition is optimal.
    """
    sets = list(direction_sets)
    if not sets:
        raise ValueError("no pieces")
    for k in sets:
        if k is None:
            raise ValueError("non-monotone piece (direction is not an indicator vector)")
        if not k:
            raise ValueError("zero-length piece")
    count = 1
    for prev, cur in zip(sets, sets[1:]):
        if prev == cur:
            raise ValueError("consecutive pieces must have distinct directions")
        if not prev < cur:
            count += 1
    return count


def is_tropical_segment(points: Sequence[TropPoint]) -> bool:
    """Whether the polyline through ``points`` coincides with trop_segment of its ends."""
    path = _merge_collinear(list(points))
    if len(path) == 1:
        return True
    seg = trop_segment(path[0], path[-1])
    return list(seg.breakpoints) == path


def brute_force_gamma(points: Sequence[TropPoint]) -> int:
    """Minimum segment cover by dynamic programming over breakpoint pairs.

    Independent from :func:`gamma_count`: every sub-polyline is compared
    against the tropical segment between its endpoints.
    """
    pts = list(points)
    n = len(pts)
    best = [0] + [math.inf] * (n - 1)
    for j in range(1, n):
        for i in range(j):
            if best[i] + 1 < best[j] and is_tropical_segment(pts[i:j + 1]):
                best[j] = best[i] + 1
    return int(best[-1])

