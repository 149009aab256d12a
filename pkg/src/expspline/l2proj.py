"""Weighted least squares projection onto exponential hat functions.

The Gram matrix of a hat basis in the inner product <f, g> = int f g exp(pt)
is tridiagonal, and every entry has a closed form in fundamental functions,
so assembly needs no quadrature at all.  Row-sum dominance of that matrix is
controlled by the T function of each interval; together with the S function
it yields a certified upper bound for the projection operator norm in the sup
norm, which is the quantity the fourth order error certificate consumes.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .expcore import (
    fundamental_eval,
    weighted_cross_integral,
    weighted_square_integrals,
)
from .hatbasis import SplineOrder2, _phi_ratio, sum_hats
from .quadrature import integrate

_TINY_H = 1e-100


class DominanceError(RuntimeError):
    """Row dominance of the Gram matrix failed, so no norm bound exists.

    Carries the offending interval index and the T value that reached 1.
    """

    def __init__(self, interval, t_value):
        self.interval = interval
        self.t_value = t_value
        super().__init__(
            f"no diagonal dominance: interval {interval} has |T| = "
            f"{t_value:.6g} >= 1")


def inner_product_p(f, g, p, a, b, breakpoints=()):
    """Weighted inner product int_a^b f(t) g(t) exp(p t) dt by adaptive
    quadrature; f and g must accept arrays."""

    def integrand(ts):
        return f(ts) * g(ts) * np.exp(p * ts)

    val, _ = integrate(integrand, a, b, breakpoints=breakpoints)
    return val


@dataclass
class GramSystem:
    """Tridiagonal normal equations of a hat basis.

    sub[i] couples knots i and i+1 below the diagonal, sup[i] above; both
    equal here since the form is symmetric, but they are kept separate so the
    solver handles either convention.
    """
    n: int
    diag: np.ndarray = field(repr=False)
    sub: np.ndarray = field(repr=False)
    sup: np.ndarray = field(repr=False)
    rhs: np.ndarray = field(repr=False)
    p: float = 0.0


def gram_assemble(basis, p):
    """Closed form Gram matrix of the hats in the exp(p t) weighted product.

    Per interval the squared flanks land on the two adjacent diagonal
    entries and the cross integral on the off-diagonals; all three come from
    fundamental function identities evaluated at the interval length.
    """
    p = float(p)
    knots = basis.knots
    n = basis.n
    diag = np.zeros(n)
    sub = np.zeros(n - 1)
    sup = np.zeros(n - 1)
    for j in range(n - 1):
        lam0, lam1 = basis.pairs[j]
        h = knots[j + 1] - knots[j]
        w0 = math.exp(p * knots[j])
        phi_h = fundamental_eval((lam0, lam1), h)
        phi_mh = fundamental_eval((lam0, lam1), -h)
        i_left, i_right, _, _ = weighted_square_integrals(lam0, lam1, p, h)
        cross = w0 * weighted_cross_integral(lam0, lam1, p, h) \
            / (phi_h * phi_mh)
        diag[j] += w0 * i_right / (phi_mh * phi_mh)
        diag[j + 1] += w0 * i_left / (phi_h * phi_h)
        sub[j] = cross
        sup[j] = cross
    return GramSystem(n=n, diag=diag, sub=sub, sup=sup, rhs=np.zeros(n), p=p)


def tfunc(lam0, lam1, p, h):
    """Dominance ratio T of an interval of length h.

    T(h) is the ratio of the weighted cross integral of the two hats to the
    squared rising flank, written entirely in fundamental functions.  T -> 1/2
    as h -> 0 for every pair, and |T| < 1 on both half-meshes is exactly
    row dominance of the Gram matrix.
    """
    if not all(map(math.isfinite, (lam0, lam1, p, h))):
        raise ValueError("tfunc arguments must be finite")
    if abs(h) < _TINY_H:
        return 0.5
    num = fundamental_eval((lam0, lam1, -p - lam0, -p - lam1), h)
    den = fundamental_eval((lam0 - lam1, lam1 - lam0, 0.0, -p - lam0 - lam1),
                           h)
    return 0.5 * num / den


def sfunc(lam0, lam1, p, h):
    """Companion ratio S of an interval: first moment of a flank against its
    square.  S -> 3/2 as h -> 0; for the polynomial pair with p = 0 it is 3/2
    identically, which is returned as the exact constant."""
    if not all(map(math.isfinite, (lam0, lam1, p, h))):
        raise ValueError("sfunc arguments must be finite")
    if lam0 == 0.0 and lam1 == 0.0 and p == 0.0:
        return 1.5
    if abs(h) < _TINY_H:
        return 1.5
    num = fundamental_eval((-lam0, -lam1), h) \
        * fundamental_eval((lam0, lam1, -p), h)
    den = fundamental_eval((lam0 - lam1, lam1 - lam0, 0.0, -p - lam0 - lam1),
                           h)
    return 0.5 * num / den


def abcd_quadrature(lam0, lam1, p, h):
    """Quadrature route to the four flank ratios on an interval of length h.

    Returns (A, B, C, D) where A and B are the cross-to-square ratios of the
    rising and falling flanks and C and D the first-moment-to-square ratios.
    These must equal T(h), T(-h), S(h), S(-h); the identity is what the tests
    pin down, so this function deliberately shares nothing with tfunc/sfunc
    beyond the pair function itself.
    """
    if not h > 0.0:
        raise ValueError("h must be positive")
    pair = (lam0, lam1)
    phi = lambda ts: fundamental_eval(pair, ts)
    w = lambda ts: np.exp(p * ts)
    phi_h = fundamental_eval(pair, h)
    phi_mh = fundamental_eval(pair, -h)
    j_cross = integrate(lambda ts: phi(ts - h) * phi(ts) * w(ts), 0.0, h)[0]
    j_rise = integrate(lambda ts: phi(ts) ** 2 * w(ts), 0.0, h)[0]
    j_fall = integrate(lambda ts: phi(ts - h) ** 2 * w(ts), 0.0, h)[0]
    j_lin_rise = integrate(lambda ts: phi(ts) * w(ts), 0.0, h)[0]
    j_lin_fall = integrate(lambda ts: phi(ts - h) * w(ts), 0.0, h)[0]
    a_val = j_cross * phi_h / (j_rise * phi_mh)
    b_val = j_cross * phi_mh / (j_fall * phi_h)
    c_val = j_lin_rise * phi_h / j_rise
    d_val = j_lin_fall * phi_mh / j_fall
    return a_val, b_val, c_val, d_val


def dominance_factor(gram):
    """Largest row ratio (|sub| + |sup|)/diag with zero boundary couplings."""
    diag = np.asarray(gram.diag, dtype=float)
    if np.any(diag <= 0.0):
        raise ValueError("Gram diagonal must be positive")
    n = gram.n
    off = np.zeros(n)
    off[:-1] += np.abs(gram.sup)
    off[1:] += np.abs(gram.sub)
    return float(np.max(off / diag))


def tridiag_solve(gram):
    """Solve the tridiagonal system, checking the residual.

    The plain Thomas sweep is used first; if a pivot degenerates or the
    residual exceeds 1e-12 * ||rhs||, the LAPACK banded solver with partial
    pivoting takes over.  Failure of both raises LinAlgError.
    """
    n = gram.n
    diag = np.asarray(gram.diag, dtype=float)
    sub = np.asarray(gram.sub, dtype=float)
    sup = np.asarray(gram.sup, dtype=float)
    rhs = np.asarray(gram.rhs, dtype=float)
    if diag.shape != (n,) or rhs.shape != (n,) or sub.shape != (n - 1,) \
            or sup.shape != (n - 1,):
        raise ValueError("inconsistent system shapes")

    def residual_ok(x):
        r = diag * x
        if n > 1:
            r[:-1] += sup * x[1:]
            r[1:] += sub * x[:-1]
        r -= rhs
        scale = np.max(np.abs(rhs))
        return np.max(np.abs(r)) <= 1e-12 * max(scale, 1e-300)

    x = _thomas(diag, sub, sup, rhs)
    if x is not None and residual_ok(x):
        return x
    ab = np.zeros((3, n))
    ab[0, 1:] = sup
    ab[1, :] = diag
    ab[2, :-1] = sub
    try:
        x = scipy.linalg.solve_banded((1, 1), ab, rhs)
    except np.linalg.LinAlgError:
        raise
    except scipy.linalg.LinAlgError:
        raise
    if not np.all(np.isfinite(x)) or not residual_ok(x):
        raise np.linalg.LinAlgError(
            "tridiagonal solve failed the residual check")
    return x


def _thomas(diag, sub, sup, rhs):
    """Forward elimination and back substitution without pivoting; returns
    None when a pivot collapses."""
    n = diag.size
    c = np.zeros(n - 1) if n > 1 else np.zeros(0)
    d = np.zeros(n)
    piv = diag[0]
    if piv == 0.0 or not math.isfinite(piv):
        return None
    if n > 1:
        c[0] = sup[0] / piv
    d[0] = rhs[0] / piv
    for i in range(1, n):
        piv = diag[i] - sub[i - 1] * c[i - 1]
        if piv == 0.0 or not math.isfinite(piv):
            return None
        if i < n - 1:
            c[i] = sup[i] / piv
        d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / piv
    x = np.empty(n)
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def _lebesgue_sup(basis):
    """sup over the domain of sum |H_j|, by doubling scans until stable."""
    knots = np.array(basis.knots)
    per = 512
    prev = -math.inf
    while True:
        grids = [np.linspace(knots[i], knots[i + 1], per, endpoint=False)
                 for i in range(len(knots) - 1)]
        ts = np.concatenate(grids + [knots[-1:]])
        cur = float(np.max(sum_hats(basis, ts)))
        if abs(cur - prev) <= 1e-6 * max(1.0, abs(cur)) or per >= 8192:
            return max(cur, prev)
        prev = cur
        per *= 2


def operator_norm_bound(basis, p):
    """Certified sup-norm bound for the weighted projection onto the hats.

    Three closed-form tiers cover the classical cases with p = 0: all
    polynomial pairs give 3, all symmetric pairs give 4, and pairs straddling
    zero give an explicit rational expression.  Everything else goes through
    the per-interval T and S ratios; if some |T| reaches 1 the Gram matrix
    has no dominance margin and DominanceError reports the interval.
    """
    p = float(p)
    pairs = basis.pairs
    if p == 0.0:
        if all(l0 == 0.0 and l1 == 0.0 for l0, l1 in pairs):
            return 3.0
        if all(l1 == -l0 for l0, l1 in pairs):
            return 4.0
        if all(l0 < 0.0 < l1 for l0, l1 in pairs):
            worst = max(
                max((2.0 * l1 - 4.0 * l0) / (-3.0 * l0),
                    (4.0 * l1 - 2.0 * l0) / (3.0 * l1))
                for l0, l1 in pairs)
            return 2.0 * worst
    lengths = basis.partition.lengths
    c_factor = 0.0
    s_factor = 0.0
    for j, ((lam0, lam1), h) in enumerate(zip(pairs, lengths)):
        t_here = max(abs(tfunc(lam0, lam1, p, h)),
                     abs(tfunc(lam0, lam1, p, -h)))
        if t_here >= 1.0:
            raise DominanceError(j, t_here)
        c_factor = max(c_factor, t_here)
        s_factor = max(s_factor, abs(sfunc(lam0, lam1, p, h)),
                       abs(sfunc(lam0, lam1, p, -h)))
    return _lebesgue_sup(basis) * s_factor / (1.0 - c_factor)


def operator_norm_bound_rowratio(basis, p):
    """Sharper variant taking row ratios straight from the assembled Gram
    matrix: sup sum|H| * max_i (int |H_i| w / int H_i^2 w) / (1 - c)."""
    gram = gram_assemble(basis, p)
    c_factor = dominance_factor(gram)
    if c_factor >= 1.0:
        worst = int(np.argmax(
            np.abs(np.concatenate([gram.sub, [0.0]]))
            + np.abs(np.concatenate([[0.0], gram.sup]))))
        raise DominanceError(worst, c_factor)
    knots = basis.knots
    lin = np.zeros(basis.n)
    for j in range(basis.n - 1):
        lam0, lam1 = basis.pairs[j]
        h = knots[j + 1] - knots[j]
        w0 = math.exp(p * knots[j])
        phi_h = fundamental_eval((lam0, lam1), h)
        phi_mh = fundamental_eval((lam0, lam1), -h)
        _, _, i_lin_left, i_lin_right = weighted_square_integrals(
            lam0, lam1, p, h)
        lin[j] += w0 * i_lin_right / phi_mh
        lin[j + 1] += w0 * i_lin_left / phi_h
    ratio = float(np.max(lin / gram.diag))
    return _lebesgue_sup(basis) * ratio / (1.0 - c_factor)


@dataclass
class ProjectionResult:
    """Best approximation coefficients with the dominance and norm data."""
    coeffs: np.ndarray = field(repr=False)
    c: float = 0.0
    norm_bound: float = math.inf

    basis: object = None
    p: float = 0.0

    @property
    def spline(self):
        return SplineOrder2(self.basis, self.coeffs)


def project(basis, g, p):
    """Weighted best approximation of g from the hat span.

    g must accept arrays.  The load vector comes from adaptive quadrature
    flank by flank, the solve from the closed-form Gram matrix.  When the
    basis admits no dominance-based norm bound the projection is still
    returned, with norm_bound set to inf.
    """
    p = float(p)
    gram = gram_assemble(basis, p)
    knots = basis.knots
    rhs = np.zeros(basis.n)
    for j in range(basis.n - 1):
        lam0, lam1 = basis.pairs[j]
        a, b = knots[j], knots[j + 1]
        h = b - a

        def falling(ts):
            return _phi_ratio(lam0, lam1, ts - b, -h)

        def rising(ts):
            return _phi_ratio(lam0, lam1, ts - a, h)

        weight = lambda ts: np.exp(p * ts)
        rhs[j] += integrate(
            lambda ts: falling(ts) * g(ts) * weight(ts), a, b)[0]
        rhs[j + 1] += integrate(
            lambda ts: rising(ts) * g(ts) * weight(ts), a, b)[0]
    gram.rhs = rhs
    coeffs = tridiag_solve(gram)
    c_factor = dominance_factor(gram)
    try:
        norm_bound = operator_norm_bound(basis, p)
    except DominanceError:
        norm_bound = math.inf
    return ProjectionResult(coeffs=coeffs, c=c_factor, norm_bound=norm_bound,
                            basis=basis, p=p)


def lemma_constant(a, b):
    """Constant of the two-parameter comparison inequality used by the
    fourth order analysis; requires a < 0.

    The value is the largest of four rational expressions in (a, b); it is
    1/2 whenever the other three stay below 1/2, and grows once b drops far
    below zero.
    """
    a = float(a)
    b = float(b)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("arguments must be finite")
    if a >= 0.0:
        raise ValueError(f"need a < 0, got a = {a}")
    e1 = 0.5
    e2 = (2.0 - a - b) / (2.0 * (2.0 - a))
    e3 = (2.0 * a * a + (2.0 * a - 1.0) * b + 2.0 - 3.0 * a) \
        / (2.0 * (1.0 - 2.0 * a) * (2.0 - a))
    e4 = (1.0 - b) / (2.0 * (1.0 - 2.0 * a))
    return max(e1, e2, e3, e4)
