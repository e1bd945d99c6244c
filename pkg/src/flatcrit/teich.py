"""Shortest saddle connection along the Teichmueller geodesic and the
ergodicity criteria built from it.

Under g_t a saddle connection with holonomy (x, y) has squared length
f(t) = x^2 e^{-2t} + y^2 e^{2t}.  The systole proxy delta'_t is the lower
envelope of these functions, which is computed window by window from a
provably sufficient set of connections and integrated in closed form.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .saddle import _enumerate_tri, _shortest_in_view
from .surface import TranslationSurface
from .triangulation import Triangulation

__all__ = [
    "SystoleEnvelope",
    "ThicknessProfile",
    "systole_envelope",
    "criterion_integral",
    "cheung_eskin_C",
    "log_law_stat",
    "masur_smillie_check",
    "thm12_criterion",
    "growth_verdict",
    "thm12_growth",
    "envelope_to_csv",
    "read_profile_csv",
    "MASUR_SMILLIE_GATE",
]

MASUR_SMILLIE_GATE = math.sqrt(2 / math.pi)
WINDOW = 0.5


def _f(X, Y, t):
    return X * math.exp(-2 * t) + Y * math.exp(2 * t)


@dataclass(frozen=True)
class EnvelopePiece:
    t_a: float
    t_b: float
    holonomy: tuple
    const: float | None = None  # synthetic envelopes only

    @property
    def XY(self):
        if self.const is not None:
            return None
        x, y = float(self.holonomy[0]), float(self.holonomy[1])
        return x * x, y * y

    def value2(self, t):
        if self.const is not None:
            return self.const**2
        X, Y = self.XY
        return _f(X, Y, t)


@dataclass(frozen=True)
class SystoleEnvelope:
    T: float
    pieces: tuple
    start: float = 0.0

    def __post_init__(self):
        if not self.pieces:
            raise ValueError("empty envelope")
        if abs(self.pieces[0].t_a - self.start) > 1e-12 or abs(self.pieces[-1].t_b - self.T) > 1e-12:
            raise ValueError("pieces do not cover the horizon")
        for a, b in zip(self.pieces, self.pieces[1:]):
            if abs(a.t_b - b.t_a) > 1e-12:
                raise ValueError("pieces overlap or leave a gap")

    @classmethod
    def constant(cls, value: float, T: float) -> "SystoleEnvelope":
        """Synthetic envelope identically equal to ``value`` on [0, T]."""
        return cls(float(T), (EnvelopePiece(0.0, float(T), (), float(value)),))

    def _piece(self, t):
        ps = self.pieces
        lo, hi = 0, len(ps) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if ps[mid].t_b < t:
                lo = mid + 1
            else:
                hi = mid
        return ps[lo]

    def delta2(self, t: float) -> float:
        return self._piece(t).value2(t)

    def delta(self, t: float) -> float:
        return math.sqrt(self.delta2(t))

    def d_prime(self, t: float) -> float:
        return -0.5 * math.log(self.delta2(t)) + 0.0  # no -0.0

    @property
    def breakpoints(self):
        return [p.t_a for p in self.pieces[1:]]

    def min_value(self) -> float:
        """Smallest delta'_t on [start, T] (closed form per piece)."""
        best = math.inf
        for p in self.pieces:
            best = min(best, math.sqrt(_piece_min2(p)))
        return best


def _piece_min2(p) -> float:
    if p.XY is None:
        return p.value2(p.t_a)
    X, Y = p.XY
    cands = [p.t_a, p.t_b]
    if X > 0 and Y > 0:
        ts = 0.25 * math.log(X / Y)
        if p.t_a < ts < p.t_b:
            cands.append(ts)
    return min(_f(X, Y, t) for t in cands)


# -- envelope construction -----------------------------------------------------

class _Frame:
    """Float coordinates of holonomies after turning ``direction`` to the
    positive horizontal.

    The turn is the exact similarity [[p, q], [-q, p]] followed by division
    by |(p, q)| in floating point, so both components keep full relative
    precision even when one of them is tiny.
    """

    def __init__(self, s: TranslationSurface, direction=None):
        if direction is None:
            self.surface, self.scale = s, 1.0
        else:
            from .cylinders import _exact_direction, _turned

            p, q = _exact_direction(direction, s.is_exact)
            self.surface = _turned(s, p, q)
            self.scale = math.sqrt(float(p * p + q * q))

    def __call__(self, h):
        x, y = float(h[0]) / self.scale, float(h[1]) / self.scale
        if x < 0 or (x == 0 and y < 0):
            # f depends on the holonomy up to sign
            x, y = -x, -y
        return (x + 0.0, y + 0.0)


def _cand_key(h):
    x, y = h
    return (math.hypot(x, y), abs(x), x, y)


def _lower_envelope(cands: list, ta: float, tb: float):
    """Kinetic sweep over candidate holonomies on [ta, tb].

    Returns [(t0, t1, holonomy)].  Ties go to the smaller derivative, then
    to the shorter (then more vertical) holonomy.
    """
    XY = [(h[0] ** 2, h[1] ** 2) for h in cands]
    keys = [_cand_key(h) for h in cands]

    def slope(i, t):
        X, Y = XY[i]
        return -2 * X * math.exp(-2 * t) + 2 * Y * math.exp(2 * t)

    def pick(idx, t):
        vals = [_f(*XY[i], t) for i in idx]
        m = min(vals)
        tied = [i for i, v in zip(idx, vals) if v <= m * (1 + 1e-13)]
        return min(tied, key=lambda i: (slope(i, t), keys[i]))

    out = []
    t = ta
    cur = pick(range(len(cands)), t)
    while True:
        Xi, Yi = XY[cur]
        best_t, best = math.inf, []
        for j, (Xj, Yj) in enumerate(XY):
            if j == cur or not (Xj > Xi and Yj < Yi):
                continue
            ts = 0.25 * math.log((Xj - Xi) / (Yi - Yj))
            if ts <= t + 1e-15:
                continue
            if ts < best_t - 1e-15:
                best_t, best = ts, [j]
            elif abs(ts - best_t) <= 1e-15:
                best.append(j)
        if best_t >= tb:
            out.append((t, tb, cands[cur]))
            return out
        out.append((t, best_t, cands[cur]))
        t = best_t
        cur = pick(best + [cur], t)


def _env_max2(pieces) -> float:
    best = 0.0
    for t0, t1, h in pieces:
        X, Y = float(h[0]) ** 2, float(h[1]) ** 2
        best = max(best, _f(X, Y, t0), _f(X, Y, t1))  # f is convex: max at an end
    return best


def _view(t):
    return (math.exp(-t), 0.0, 0.0, math.exp(t))


def _window_candidates(tri, frame, ta, tb, seeds):
    """Enumeration radius (turned coordinates) that captures every holonomy
    which can be shortest somewhere on [ta, tb]."""
    view = _view(ta)
    tri.make_delaunay(view)
    cands = set(seeds)
    for t in (ta, 0.5 * (ta + tb), tb):
        if cands:
            # any known holonomy bounds the shortest one from above
            seed = min(math.sqrt(_f(x * x, y * y, t)) for x, y in cands) * frame.scale * (1 + 1e-9)
        else:
            seed = 0.5 * tri.max_circumradius(_view(t))
        _, sc = _shortest_in_view(tri, _view(t), seed)
        cands.add(frame(sc.holonomy))
    pieces = _lower_envelope(sorted(cands, key=_cand_key), ta, tb)
    M2 = _env_max2(pieces)
    # f_v(t) >= e^{-2(t - ta)} f_v(ta), so a minimiser has view length <= M e^{w}
    L = math.sqrt(M2) * math.exp(tb - ta) * frame.scale * (1 + 1e-9)
    return L, view


def _collect(tri, frame, L, view):
    return {frame(sc.holonomy) for sc in _enumerate_tri(tri, L, view)}


def systole_envelope(s: TranslationSurface, T: float, *, direction=None, certify: bool = True) -> SystoleEnvelope:
    """Exact lower envelope of the saddle-connection lengths on [0, T].

    With ``direction`` (an exact vector) the envelope is that of ``s``
    rotated so that ``direction`` is horizontal; this keeps full precision
    where an approximate rotation would not.  On each window the
    enumeration radius is derived from the current envelope maximum; with
    ``certify`` the window is recomputed with twice the radius and must
    not change.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    if s.boundary:
        raise ValueError("marked boundary: envelope would be incomplete")
    frame = _Frame(s, direction)
    tri = Triangulation(frame.surface)
    pieces: list = []
    seeds: set = set()
    nwin = max(1, math.ceil(T / WINDOW - 1e-12))
    edges = np.linspace(0.0, T, nwin + 1)
    for ta, tb in zip(edges[:-1], edges[1:]):
        ta, tb = float(ta), float(tb)
        L, view = _window_candidates(tri, frame, ta, tb, seeds)
        cands = sorted(_collect(tri, frame, L, view) | seeds, key=_cand_key)
        win = _lower_envelope(cands, ta, tb)
        if certify:
            big = sorted(_collect(tri, frame, 2 * L, view) | set(cands), key=_cand_key)
            win2 = _lower_envelope(big, ta, tb)
            if not _same_pieces(win, win2):
                raise RuntimeError(f"envelope not stable under radius doubling on [{ta}, {tb}]")
        seeds = {h for _, _, h in win}
        for t0, t1, h in win:
            if pieces and _close(pieces[-1].holonomy, h):
                pieces[-1] = EnvelopePiece(pieces[-1].t_a, t1, pieces[-1].holonomy)
            else:
                pieces.append(EnvelopePiece(t0, t1, h))
    return SystoleEnvelope(float(T), tuple(pieces))


def _close(h, k, rel=1e-12) -> bool:
    return all(abs(a - b) <= rel * max(abs(a), abs(b), 1e-300) for a, b in zip(h, k))


def _same_pieces(a, b) -> bool:
    if len(a) != len(b):
        return False
    for (s0, s1, h), (u0, u1, k) in zip(a, b):
        if abs(s0 - u0) > 1e-12 or abs(s1 - u1) > 1e-12 or not _close(h, k):
            return False
    return True


# -- criteria -----------------------------------------------------------------------

def _piece_integral(p, t0, t1) -> float:
    if p.XY is None:
        return p.value2(t0) * (t1 - t0)
    X, Y = p.XY
    # int X e^{-2t} + Y e^{2t} = X (e^{-2 t0} - e^{-2 t1}) / 2 + Y (e^{2 t1} - e^{2 t0}) / 2
    return 0.5 * X * math.exp(-2 * t0) * -math.expm1(-2 * (t1 - t0)) + 0.5 * Y * math.exp(2 * t0) * math.expm1(
        2 * (t1 - t0)
    )


def criterion_integral(env: SystoleEnvelope, upto: float | None = None) -> float:
    """Closed-form integral of delta'_t^2 over [start, upto] (default T)."""
    end = env.T if upto is None else min(upto, env.T)
    total = 0.0
    for p in env.pieces:
        if p.t_a >= end:
            break
        total += _piece_integral(p, p.t_a, min(p.t_b, end))
    return total


def _sup_on_pieces(env, t0, func):
    """sup of func(piece, t) over [t0, T] and the time where it sits."""
    best, where = -math.inf, t0
    for p in env.pieces:
        a, b = max(p.t_a, t0), p.t_b
        if b < t0 or a > b:
            continue
        cands = [a, b]
        if b - a > 1e-12:
            r = minimize_scalar(lambda t: -func(p, t), bounds=(a, b), method="bounded", options={"xatol": 1e-12})
            cands.append(float(r.x))
        for t in cands:
            v = func(p, t)
            if v > best:
                best, where = v, t
    return best, where


def cheung_eskin_C(env: SystoleEnvelope, t0: float):
    """(C, bounded) with C = sup over [t0, T] of d'(t) - 1/2 log t.

    ``bounded`` is false when the supremum sits at the horizon T, which is
    the signature of unbounded growth.
    """
    if t0 < 1:
        raise ValueError("t0 must be >= 1")
    if env.T < t0:
        raise ValueError("horizon shorter than t0")

    def h(p, t):
        return -0.5 * math.log(p.value2(t)) - 0.5 * math.log(t)

    C, where = _sup_on_pieces(env, t0, h)
    return C, bool(math.isfinite(C) and where < env.T - 1e-9)


def log_law_stat(env: SystoleEnvelope, t0: float) -> float:
    """sup over [t0, T] of d'(t) / log t."""
    if t0 <= 1:
        raise ValueError("t0 must be > 1")

    def h(p, t):
        return -0.5 * math.log(p.value2(t)) / math.log(t)

    val, _ = _sup_on_pieces(env, t0, h)
    return 0.0 if val == 0 else val


def masur_smillie_check(samples: Sequence, K0: float | None = None):
    """(K, violations): K = max D * delta over samples with D above the
    applicability gate sqrt(2/pi); violations counts gated samples with
    D * delta > K0."""
    samples = list(samples)
    if not samples:
        raise ValueError("no samples")
    for d, D in samples:
        if not (d > 0 and D > 0):
            raise ValueError("samples must be positive")
    gated = [d * D for d, D in samples if D > MASUR_SMILLIE_GATE]
    if not gated:
        raise ValueError("gate not met")
    K = max(gated)
    violations = 0 if K0 is None else sum(1 for v in gated if v > K0)
    return K, violations


@dataclass(frozen=True)
class ThicknessProfile:
    """Sampled thick-part data: eps(t), component count, summed component
    diameters and the separating systole delta_t."""

    t: np.ndarray
    eps: np.ndarray
    C: np.ndarray
    sum_D: np.ndarray
    delta: np.ndarray

    def __post_init__(self):
        arrs = [np.asarray(a, dtype=float) for a in (self.t, self.eps, self.C, self.sum_D, self.delta)]
        n = len(arrs[0])
        if n < 2 or any(len(a) != n for a in arrs):
            raise ValueError("profile columns must have equal length >= 2")
        if np.any(np.diff(arrs[0]) <= 0):
            raise ValueError("grid must be strictly increasing")
        if any(np.any(a <= 0) for a in arrs[1:]):
            raise ValueError("profile entries must be positive")
        if np.any(arrs[2] != np.round(arrs[2])):
            raise ValueError("component counts must be integers")
        for name, a in zip(("t", "eps", "C", "sum_D", "delta"), arrs):
            object.__setattr__(self, name, a)

    @classmethod
    def from_components(cls, t, eps, diameters, delta):
        """Build from per-sample lists of component diameters."""
        C = [len(ds) for ds in diameters]
        return cls(t, eps, C, [sum(ds) for ds in diameters], delta)

    @classmethod
    def from_functions(cls, grid, eps, C, sum_D, delta):
        grid = np.asarray(grid, dtype=float)

        def ev(f):
            return np.array([f(t) for t in grid]) if callable(f) else np.full(len(grid), float(f))

        return cls(grid, ev(eps), ev(C), ev(sum_D), ev(delta))


def thm12_criterion(profile: ThicknessProfile) -> float:
    """Trapezoid integral of g(t)^{-2}, g = eps^{-2} sum D + (C - 1) / delta."""
    g = profile.sum_D / profile.eps**2 + (profile.C - 1) / profile.delta
    return float(np.trapezoid(g**-2.0, profile.t))


def growth_verdict(horizons, values, rel_tol: float = 1e-3) -> str:
    """'converging' if the last doubling of the horizon adds less than
    ``rel_tol`` of the value, else 'growing'.  Never a divergence claim."""
    horizons = list(horizons)
    values = list(values)
    if len(values) < 2:
        raise ValueError("need at least two horizons")
    inc = values[-1] - values[-2]
    return "converging" if inc <= rel_tol * max(abs(values[-1]), 1e-300) else "growing"


def thm12_growth(profile: ThicknessProfile, rel_tol: float = 1e-3):
    """Integral at the full horizon and at half of it, plus the verdict."""
    T = profile.t[-1]
    half = profile.t <= profile.t[0] + 0.5 * (T - profile.t[0])
    sub = ThicknessProfile(profile.t[half], profile.eps[half], profile.C[half], profile.sum_D[half], profile.delta[half])
    vals = [thm12_criterion(sub), thm12_criterion(profile)]
    return vals[-1], growth_verdict([sub.t[-1], T], vals, rel_tol)


# -- CSV -------------------------------------------------------------------------

def envelope_to_csv(env: SystoleEnvelope, grid=None, step: float = 0.1) -> str:
    """Rows on a regular grid of the given step plus every breakpoint."""
    if grid is None:
        n = max(1, int(math.ceil((env.T - env.start) / step - 1e-9)))
        regular = [env.start + (env.T - env.start) * k / n for k in range(n + 1)]
        grid = sorted({*regular, *[p.t_a for p in env.pieces]})
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["t", "delta_prime", "d_prime", "integral_to_t"])
    for t in grid:
        w.writerow([repr(float(t)), repr(env.delta(t)), repr(env.d_prime(t)), repr(criterion_integral(env, t))])
    return out.getvalue()


def read_profile_csv(text: str) -> ThicknessProfile:
    rows = list(csv.DictReader(io.StringIO(text)))
    need = ["t", "eps", "C", "sumD", "delta"]
    if not rows or any(k not in rows[0] for k in need):
        raise ValueError("profile CSV needs columns " + ",".join(need))
    cols = {k: [float(r[k]) for r in rows] for k in need}
    return ThicknessProfile(cols["t"], cols["eps"], cols["C"], cols["sumD"], cols["delta"])
