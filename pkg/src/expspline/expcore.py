"""Fundamental functions of exponential splines.

For a vector of real frequencies Lambda = (lambda_0, ..., lambda_N) the
fundamental function Phi_Lambda(t) is the divided difference of z -> exp(z*t)
over the nodes lambda_0..lambda_N.  It spans, together with its translates,
the kernel of the operator L = (d/dt - lambda_0) ... (d/dt - lambda_N) and
plays the role that truncated powers t^N/N! play for polynomial splines.

Numerically Phi is evaluated through the bidiagonal (Opitz) matrix

    Z = diag(lambda_0..lambda_N) + superdiag(1, ..., 1),

whose exponential exp(t*Z) carries the divided differences of exp(.*t) in its
corner entries.  All entries are positive for t > 0, so the evaluation is free
of subtractive cancellation, and repeated frequencies need no special casing.
Frequencies are mean-centred first and the removed exp factor is restored at
the end, which keeps the matrix norm small.
"""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .quadrature import integrate

_EXP_ARG_MAX = 705.0

_CLUSTER_TOL = 1e-8


def as_frequency_vector(freqs):
    """Validate a frequency sequence and return it as a tuple of floats."""
    try:
        fr = tuple(float(x) for x in freqs)
    except TypeError:
        fr = (float(freqs),)
    if len(fr) == 0:
        raise ValueError("frequency vector must contain at least one entry")
    if not all(math.isfinite(x) for x in fr):
        raise ValueError(f"frequencies must be finite, got {fr}")
    return fr


def _sinhc(u):
    """sinh(u)/u, even and positive, accurate near zero."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < 1e-4
    usm = np.where(small, u, 0.0)
    ubig = np.where(small, 1.0, u)
    series = 1.0 + usm * usm / 6.0 * (1.0 + usm * usm / 20.0)
    with np.errstate(over="ignore"):
        direct = np.sinh(ubig) / ubig
    return np.where(small, series, direct)


def _log_sinhc(u):
    """log(sinh|u|/|u|), overflow-free for large |u|."""
    u = np.abs(np.asarray(u, dtype=float))
    out = np.empty_like(u)
    small = u < 1e-4
    mid = (~small) & (u < 350.0)
    big = u >= 350.0
    out[small] = np.log1p(u[small] ** 2 / 6.0)
    out[mid] = np.log(np.sinh(u[mid]) / u[mid])
    ub = u[big]
    out[big] = ub + np.log1p(-np.exp(-2.0 * ub)) - np.log(2.0 * ub)
    return out


def _phi_pair(lam0, lam1, t):
    """Phi over two frequencies: t * exp(s*t) * sinhc(d*t) with 2s=l0+l1."""
    t = np.asarray(t, dtype=float)
    s = 0.5 * (lam0 + lam1)
    d = 0.5 * (lam1 - lam0)
    a = s * t
    u = d * t
    with np.errstate(over="ignore", invalid="ignore"):
        direct = t * np.exp(a) * _sinhc(u)
    bad = ~np.isfinite(direct)
    if np.any(bad):
        # redo the overflowing entries in log space
        tb = t[bad]
        logmag = np.log(np.abs(tb)) + a[bad] + _log_sinhc(u[bad])
        if np.any(logmag > _EXP_ARG_MAX):
            raise OverflowError(
                f"fundamental function for ({lam0}, {lam1}) overflows at "
                f"|t| up to {np.max(np.abs(tb)):g}")
        direct[bad] = np.sign(tb) * np.exp(logmag)
    return direct


def _phi_corner_batch(fr, ts):
    """Corner entries of exp(t*Z) for centred frequencies, t > 0 entrywise."""
    k = len(fr)
    lam = np.array(fr, dtype=float)
    m = lam.mean()
    mu = lam - m
    # positivity of the divided difference gives the Hermite-Genocchi bound
    # Phi_mu(t) <= t^(k-1)/(k-1)! * exp(mu_max * t)
    logt = np.log(ts)
    bound = (m + mu.max()) * ts + (k - 1) * np.maximum(logt, 0.0)
    if np.any(bound > _EXP_ARG_MAX):
        raise OverflowError(
            f"fundamental function for {fr} overflows at t up to "
            f"{ts.max():g}")
    batch = ts[:, None, None] * (np.diag(mu) + np.diag(np.ones(k - 1), 1))
    corners = expm(batch)[:, 0, -1]
    if not np.all(np.isfinite(corners)):
        raise OverflowError(
            f"matrix exponential overflowed for frequencies {fr}")
    shift = m * ts
    out = np.empty_like(ts)
    direct = np.abs(shift) <= 690.0
    out[direct] = np.exp(shift[direct]) * corners[direct]
    rest = ~direct
    if np.any(rest):
        with np.errstate(divide="ignore"):
            logc = np.where(corners[rest] > 0.0,
                            np.log(np.maximum(corners[rest], 1e-308)),
                            -np.inf)
        logv = shift[rest] + logc
        vals = np.zeros(rest.sum())
        ok = logv > -745.0
        if np.any(logv > _EXP_ARG_MAX):
            raise OverflowError(
                f"fundamental function for {fr} overflows at t up to "
                f"{ts.max():g}")
        vals[ok] = np.exp(logv[ok])
        out[rest] = vals
    return out


def _phi_many(fr, ts):
    """Phi over the canonical frequency tuple fr at an array of times."""
    k = len(fr)
    if k == 1:
        arg = fr[0] * ts
        if np.any(arg > _EXP_ARG_MAX):
            raise OverflowError(
                f"exp({fr[0]}*t) overflows at t up to {ts.max():g}")
        return np.exp(arg)
    if k == 2:
        return _phi_pair(fr[0], fr[1], ts)
    out = np.zeros_like(ts)
    pos = ts > 0.0
    neg = ts < 0.0
    if np.any(pos):
        out[pos] = _phi_corner_batch(fr, ts[pos])
    if np.any(neg):
        reflected = tuple(sorted(-x for x in fr))
        out[neg] = (-1.0) ** (k - 1) * _phi_corner_batch(reflected, -ts[neg])
    return out


def fundamental_eval(freqs, t):
    """Evaluate Phi_Lambda(t), the divided difference of exp(.*t) over Lambda.

    Accepts scalar or array t.  Phi(0) is 1 for a single frequency and 0
    otherwise; Phi(t) > 0 for t > 0.  Raises OverflowError when the result
    exceeds the double range and ValueError on non-finite input.
    """
    fr = tuple(sorted(as_frequency_vector(freqs)))
    t_arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t_arr)):
        raise ValueError("t must be finite")
    scalar = t_arr.ndim == 0
    flat = np.atleast_1d(t_arr).astype(float).ravel()
    out = _phi_many(fr, flat.copy())
    zero = flat == 0.0
    if np.any(zero):
        out[zero] = 1.0 if len(fr) == 1 else 0.0
    out = out.reshape(np.atleast_1d(t_arr).shape)
    return float(out[0]) if scalar else out.reshape(t_arr.shape)


def fundamental_derivative(freqs, t, order):
    """Derivative of Phi_Lambda of the given order.

    Repeated use of the lowering identity Phi'_(l0..lk) = lk*Phi_(l0..lk)
    + Phi_(l0..l(k-1)) turns the derivative into an exact combination of
    fundamental functions over prefixes of Lambda, so no finite differences
    are involved.  order=0 returns the function itself.
    """
    if order < 0 or order != int(order):
        raise ValueError("order must be a nonnegative integer")
    fr = tuple(sorted(as_frequency_vector(freqs)))
    k = len(fr)
    coeff = np.zeros(k)
    coeff[k - 1] = 1.0
    lam = np.array(fr)
    for _ in range(int(order)):
        nxt = coeff * lam
        nxt[:-1] += coeff[1:]
        coeff = nxt
    t_arr = np.asarray(t, dtype=float)
    scalar = t_arr.ndim == 0
    acc = np.zeros_like(np.atleast_1d(t_arr), dtype=float)
    for j in range(k):
        if coeff[j] != 0.0:
            acc += coeff[j] * np.atleast_1d(fundamental_eval(fr[:j + 1], t_arr))
    return float(acc[0]) if scalar else acc.reshape(t_arr.shape)


def integrate_fundamental(freqs, h):
    """Integral of Phi_Lambda from 0 to h, equal to Phi over Lambda with an
    appended zero frequency evaluated at h."""
    fr = as_frequency_vector(freqs)
    return fundamental_eval(fr + (0.0,), h)


@dataclass(frozen=True)
class TransformRule:
    """Frequency transform together with its exact pointwise consequence.

    The rule states fundamental_eval(freqs, t) equals
    factor(t) * fundamental_eval(original, arg_scale * t).
    """
    freqs: tuple
    arg_scale: float
    factor: Callable
    description: str


def transform(freqs, kind, value=None):
    """Return the transformed frequency vector and its scalar rule.

    kind "shift" adds value to every frequency and multiplies Phi by
    exp(value*t); "reflect" negates the frequencies, flips the argument and
    scales by (-1)^N; "scale" multiplies frequencies by value, scales the
    argument by value and divides by value^N.
    """
    fr = as_frequency_vector(freqs)
    n_deg = len(fr) - 1
    if kind == "shift":
        if value is None:
            raise ValueError("shift requires a value")
        p = float(value)
        return TransformRule(
            freqs=tuple(x + p for x in fr),
            arg_scale=1.0,
            factor=lambda t, p=p: np.exp(p * np.asarray(t, dtype=float)),
            description=f"shift by {p}")
    if kind == "reflect":
        sign = (-1.0) ** n_deg
        return TransformRule(
            freqs=tuple(-x for x in fr),
            arg_scale=-1.0,
            factor=lambda t, s=sign: np.full_like(
                np.asarray(t, dtype=float), s, dtype=float),
            description="reflect")
    if kind == "scale":
        if value is None or value == 0.0:
            raise ValueError("scale requires a nonzero value")
        c = float(value)
        fac = c ** (-n_deg)
        return TransformRule(
            freqs=tuple(c * x for x in fr),
            arg_scale=c,
            factor=lambda t, f=fac: np.full_like(
                np.asarray(t, dtype=float), f, dtype=float),
            description=f"scale by {c}")
    raise ValueError(f"unknown transform kind {kind!r}")


def operator_apply(freqs, derivs):
    """Apply L = prod (d/dt - lambda_i) given tabulated derivatives.

    derivs must hold F, F', ..., F^(N+1) evaluated at common points (scalars
    or arrays).  The monic characteristic polynomial of the frequencies
    supplies the combination coefficients.
    """
    fr = as_frequency_vector(freqs)
    k = len(fr)
    if len(derivs) != k + 1:
        raise ValueError(
            f"need {k + 1} derivative slots for {k} frequencies, "
            f"got {len(derivs)}")
    coeffs = np.poly(np.array(fr))
    acc = np.asarray(derivs[k], dtype=float).copy()
    for i in range(1, k + 1):
        acc = acc + coeffs[i] * np.asarray(derivs[k - i], dtype=float)
    return float(acc) if acc.ndim == 0 else acc


def weighted_cross_integral(lam0, lam1, p, h):
    """Exact value of the cross product integral

        int_0^h Phi(t-h) Phi(t) exp(p*t) dt

    for the two-frequency Phi of (lam0, lam1).  The value is negative for
    h > 0, since Phi(t-h) < 0 < Phi(t) inside the interval, and equals minus
    the fundamental function over (p+lam0, p+lam1, -lam0, -lam1) at h.
    """
    if h == 0.0:
        return 0.0
    return -fundamental_eval((p + lam0, p + lam1, -lam0, -lam1), h)


def weighted_square_integrals(lam0, lam1, p, h):
    """Weighted squares and first moments of the two hat flanks on [0, h].

    Returns (I_left, I_right, I_lin_left, I_lin_right) where, writing phi for
    the two-frequency fundamental function,

        I_left      = int_0^h phi(t)^2   exp(p*t) dt
        I_right     = int_0^h phi(t-h)^2 exp(p*t) dt
        I_lin_left  = int_0^h phi(t)     exp(p*t) dt
        I_lin_right = int_0^h phi(t-h)   exp(p*t) dt
    """
    if h == 0.0:
        return 0.0, 0.0, 0.0, 0.0
    i_left = 2.0 * math.exp(p * h) * fundamental_eval(
        (2.0 * lam0, 2.0 * lam1, lam0 + lam1, -p), h)
    i_right = 2.0 * fundamental_eval(
        (-2.0 * lam0, -2.0 * lam1, -lam0 - lam1, p), h)
    i_lin_left = fundamental_eval((p + lam0, p + lam1, 0.0), h)
    i_lin_right = -fundamental_eval((-lam0, -lam1, p), h)
    return i_left, i_right, i_lin_left, i_lin_right


def convolution_check(freqs_a, freqs_b, y):
    """Compare int_0^y Phi_A(t) Phi_B(y-t) dt against Phi over the merged
    frequency vector, returning (quadrature_value, closed_form_value)."""
    fa = as_frequency_vector(freqs_a)
    fb = as_frequency_vector(freqs_b)
    if not y > 0.0:
        raise ValueError("y must be positive")

    def integrand(ts):
        return fundamental_eval(fa, ts) * fundamental_eval(fb, y - ts)

    lhs, _ = integrate(integrand, 0.0, y)
    rhs = fundamental_eval(fa + fb, y)
    return lhs, rhs


@dataclass
class ExpPolynomial:
    """Finite combination sum c * t^s * exp(mu*t).

    terms maps (mu, s) to the coefficient c.  The representation is closed
    under differentiation and addition, which is all the spline pieces need.
    """
    terms: dict = field(default_factory=dict)

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        scalar = t_arr.ndim == 0
        ts = np.atleast_1d(t_arr).astype(float)
        acc = np.zeros_like(ts)
        for (mu, s), c in self.terms.items():
            term = c * np.exp(mu * ts)
            if s:
                term = term * ts ** s
            acc += term
        return float(acc[0]) if scalar else acc.reshape(t_arr.shape)

    def derivative(self):
        """Exact derivative as a new ExpPolynomial."""
        out = {}
        for (mu, s), c in self.terms.items():
            if mu != 0.0:
                out[(mu, s)] = out.get((mu, s), 0.0) + c * mu
            if s >= 1:
                out[(mu, s - 1)] = out.get((mu, s - 1), 0.0) + c * s
        return ExpPolynomial(_prune(out))

    def scaled(self, c):
        return ExpPolynomial(_prune(
            {key: c * val for key, val in self.terms.items()}))

    def __add__(self, other):
        out = dict(self.terms)
        for key, val in other.terms.items():
            out[key] = out.get(key, 0.0) + val
        return ExpPolynomial(_prune(out))


def _prune(terms):
    return {key: val for key, val in terms.items() if val != 0.0}


def fundamental_expoly(freqs, cluster_tol=_CLUSTER_TOL):
    """Symbolic form of Phi_Lambda as an ExpPolynomial.

    Frequencies closer than cluster_tol (scaled by the frequency magnitude)
    are merged into a single node of higher multiplicity; the coefficients
    then come from confluent partial fractions of 1/prod(z - mu_i)^(m_i),
    expanded by truncated power series arithmetic.
    """
    fr = sorted(as_frequency_vector(freqs))
    scale = max(1.0, max(abs(x) for x in fr))
    tol = cluster_tol * scale
    clusters = []
    for x in fr:
        if clusters and x - clusters[-1][-1] <= tol:
            clusters[-1].append(x)
        else:
            clusters.append([x])
    centers = [sum(c) / len(c) for c in clusters]
    mults = [len(c) for c in clusters]

    terms = {}
    for i, (mu_i, m_i) in enumerate(zip(centers, mults)):
        series = np.zeros(m_i)
        series[0] = 1.0
        for j, (mu_j, m_j) in enumerate(zip(centers, mults)):
            if j == i:
                continue
            d = mu_i - mu_j
            # coefficients of (d + w)^(-m_j) around w = 0
            fac = np.empty(m_i)
            fac[0] = d ** (-m_j)
            for l in range(1, m_i):
                fac[l] = fac[l - 1] * (-(m_j + l - 1)) / (l * d)
            series = np.convolve(series, fac)[:m_i]
        for kk in range(m_i):
            s_pow = m_i - 1 - kk
            c = series[kk] / math.factorial(s_pow)
            if c != 0.0:
                key = (mu_i, s_pow)
                terms[key] = terms.get(key, 0.0) + c
    return ExpPolynomial(terms)


def count_sign_changes(poly, a, b, samples=2048):
    """Count strict sign alternations of an ExpPolynomial on a uniform grid.

    Samples below 1e-12 of the grid maximum are treated as zero and skipped,
    so tangencies do not register as double changes.
    """
    if not b > a:
        raise ValueError("need a < b")
    if samples < 2:
        raise ValueError("need at least two samples")
    ts = np.linspace(a, b, int(samples))
    vals = poly(ts)
    scale = np.max(np.abs(vals))
    if scale == 0.0:
        return 0
    signs = np.sign(vals)
    signs[np.abs(vals) <= 1e-12 * scale] = 0
    live = signs[signs != 0]
    if live.size < 2:
        return 0
    return int(np.count_nonzero(live[1:] != live[:-1]))
