"""End-to-end verification: analytic test functions, dense-grid error
measurement against certificates, convergence studies, deterministic report
emission, and the acceptance checklist.

Everything here stays on the consumer side of the library API: errors are
measured by sampling, certificates come from the bound constructors, and the
two must agree (empirical below certified) for a run to pass.
"""

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errbound2 import (
    M_constant,
    green_eval,
    interp2_error_bound,
    mstar,
    omega_eval,
)
from .expcore import convolution_check, operator_apply
from .hatbasis import (
    Partition,
    build_hat_basis,
    hat_eval,
    interpolate2,
    sum_hats,
)
from .l2proj import (
    dominance_factor,
    gram_assemble,
    operator_norm_bound,
    tfunc,
    sfunc,
)
from .spline4 import (
    build_interpolant4,
    error_bound4,
    quad_frequency_set,
    resolve_weight,
    residual_orthogonality,
)


class ConfigError(ValueError):
    """Invalid configuration or usage; maps to CLI exit code 1."""


@dataclass(frozen=True)
class TestFunction:
    """Named function with closed-form derivatives through order four."""
    name: str
    evaluators: tuple = field(repr=False)
    default_domain: tuple = (0.0, 1.0)

    def __call__(self, ts):
        return self.evaluators[0](np.asarray(ts, dtype=float))

    def derivatives(self, ts, count=5):
        ts = np.asarray(ts, dtype=float)
        return [ev(ts) for ev in self.evaluators[:count]]


def _monomial(k):
    evs = []
    for r in range(5):
        if r > k:
            evs.append(lambda ts: np.zeros_like(ts))
        else:
            c = float(math.factorial(k) // math.factorial(k - r))
            e = k - r
            evs.append(lambda ts, c=c, e=e: c * ts ** e)
    return TestFunction(name=f"t{k}", evaluators=tuple(evs),
                        default_domain=(0.0, 1.0))


def _runge_evaluators():
    def d(ts):
        return 1.0 + 25.0 * ts ** 2
    return (
        lambda ts: 1.0 / d(ts),
        lambda ts: -50.0 * ts / d(ts) ** 2,
        lambda ts: 50.0 * (75.0 * ts ** 2 - 1.0) / d(ts) ** 3,
        lambda ts: 15000.0 * ts * (1.0 - 25.0 * ts ** 2) / d(ts) ** 4,
        lambda ts: 15000.0 * (1.0 - 250.0 * ts ** 2 + 3125.0 * ts ** 4)
        / d(ts) ** 5,
    )


def _gauss_evaluators():
    def g(ts):
        return np.exp(-ts ** 2)
    return (
        g,
        lambda ts: -2.0 * ts * g(ts),
        lambda ts: (4.0 * ts ** 2 - 2.0) * g(ts),
        lambda ts: (12.0 * ts - 8.0 * ts ** 3) * g(ts),
        lambda ts: (16.0 * ts ** 4 - 48.0 * ts ** 2 + 12.0) * g(ts),
    )


def _build_catalog():
    cat = {
        "sin": TestFunction("sin", (np.sin, np.cos,
                                    lambda ts: -np.sin(ts),
                                    lambda ts: -np.cos(ts), np.sin),
                            (0.0, math.pi)),
        "cos": TestFunction("cos", (np.cos, lambda ts: -np.sin(ts),
                                    lambda ts: -np.cos(ts), np.sin, np.cos),
                            (0.0, math.pi)),
        "exp": TestFunction("exp", (np.exp,) * 5, (0.0, 1.0)),
        "runge": TestFunction("runge", _runge_evaluators(), (-1.0, 1.0)),
        "gauss": TestFunction("gauss", _gauss_evaluators(), (-2.0, 2.0)),
    }
    for k in range(7):
        cat[f"t{k}"] = _monomial(k)
        cat[f"t^{k}"] = cat[f"t{k}"]
    return cat


CATALOG = _build_catalog()


def get_test_function(name):
    try:
        return CATALOG[name]
    except KeyError:
        raise ConfigError(
            f"unknown test function {name!r}; available: "
            + ", ".join(sorted(k for k in CATALOG if "^" not in k)))


def max_abs_L(tf, partition, freq_sets):
    """sup of |L F| over the domain, L being the per-interval operator.

    Dense per-interval scans double from 2048 points until the maximum is
    stable to 1e-6 relative, since the certificates need the true supremum.
    """
    part = partition if isinstance(partition, Partition) \
        else Partition(tuple(np.asarray(partition, dtype=float)))
    knots = part.knots
    freq_sets = list(freq_sets)
    if len(freq_sets) != part.n - 1:
        raise ValueError(f"need {part.n - 1} frequency sets")
    worst = 0.0
    for j, freqs in enumerate(freq_sets):
        count = len(freqs) + 1
        per = 2048
        prev = -math.inf
        while True:
            ts = np.linspace(knots[j], knots[j + 1], per)
            cur = float(np.max(np.abs(
                operator_apply(freqs, tf.derivatives(ts, count)))))
            if abs(cur - prev) <= 1e-6 * max(cur, 1e-300) or per >= 2 ** 16:
                worst = max(worst, cur, prev)
                break
            prev = cur
            per *= 2
    return worst


def error_grid(partition, uniform=10 ** 4, cheb_per_interval=64):
    """Measurement grid: uniform points, every knot, and Chebyshev points in
    each interval so boundary-layer maxima at stiff frequencies are seen."""
    part = partition if isinstance(partition, Partition) \
        else Partition(tuple(np.asarray(partition, dtype=float)))
    knots = np.array(part.knots)
    pieces = [np.linspace(knots[0], knots[-1], uniform), knots]
    angles = (2.0 * np.arange(cheb_per_interval) + 1.0) \
        * math.pi / (2.0 * cheb_per_interval)
    offsets = np.cos(angles)
    for j in range(len(knots) - 1):
        mid = 0.5 * (knots[j] + knots[j + 1])
        half = 0.5 * (knots[j + 1] - knots[j])
        pieces.append(mid + half * offsets)
    return np.unique(np.concatenate(pieces))


def measure_error(reference, candidate, partition):
    """Dense-grid sup of |reference - candidate|."""
    grid = error_grid(partition)
    return float(np.max(np.abs(np.asarray(reference(grid), dtype=float)
                               - np.asarray(candidate(grid), dtype=float))))


@dataclass
class VerifyReport:
    """Per-level verification rows plus the overall flag; passes only when
    every measured error sits below its certificate."""
    config: dict
    rows: list
    passed: bool


def _normalize_config(cfg):
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    known = {"domain", "knots", "n", "frequencies", "p", "order", "function",
             "clamp"}
    extra = set(cfg) - known
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")

    order = cfg.get("order")
    if order not in (2, 4):
        raise ConfigError("order must be 2 or 4")

    func = cfg.get("function")
    samples = None
    tf = None
    if isinstance(func, str):
        tf = get_test_function(func)
    elif isinstance(func, dict) and set(func) == {"samples"}:
        samples = np.asarray(func["samples"], dtype=float)
        if samples.ndim != 1 or samples.size < 2 \
                or not np.all(np.isfinite(samples)):
            raise ConfigError("samples must be a flat list of finite values")
    else:
        raise ConfigError('function must be a catalog name or {"samples": '
                          '[...]}')

    if "knots" in cfg and "n" in cfg:
        raise ConfigError("give knots or n, not both")
    domain = cfg.get("domain")
    if domain is None and tf is not None:
        domain = tf.default_domain
    if "knots" in cfg:
        knots = np.asarray(cfg["knots"], dtype=float)
        if knots.ndim != 1 or knots.size < 2:
            raise ConfigError("knots must be a list of at least two reals")
        try:
            Partition(tuple(knots))
        except ValueError as exc:
            raise ConfigError(str(exc))
        if "domain" in cfg and (abs(domain[0] - knots[0]) > 1e-12
                                or abs(domain[1] - knots[-1]) > 1e-12):
            raise ConfigError("domain does not match the explicit knots")
        levels = [knots]
    else:
        if domain is None:
            raise ConfigError("domain is required when n is given without a "
                              "catalog function")
        a, b = float(domain[0]), float(domain[1])
        if not (math.isfinite(a) and math.isfinite(b) and a < b):
            raise ConfigError("domain must be [a, b] with a < b")
        ns = cfg.get("n")
        if ns is None:
            raise ConfigError("give knots or n")
        ns = [ns] if np.isscalar(ns) else list(ns)
        for n in ns:
            if n != int(n) or int(n) < 2:
                raise ConfigError(f"grid size must be an integer >= 2: {n}")
        levels = [np.linspace(a, b, int(n)) for n in ns]

    if samples is not None:
        if len(levels) != 1:
            raise ConfigError("samples require a single grid level")
        if samples.size != levels[0].size:
            raise ConfigError(
                f"got {samples.size} samples for {levels[0].size} knots")

    freq = cfg.get("frequencies")
    if not isinstance(freq, dict) or len(freq) != 1 \
            or next(iter(freq)) not in ("xi", "pairs", "quads"):
        raise ConfigError('frequencies must be {"xi": ...} or {"pairs": ...}'
                          ' or {"quads": ...}')
    fkind, fval = next(iter(freq.items()))
    if fkind == "quads" and order != 4:
        raise ConfigError("quads require order 4")
    if fkind == "pairs" and order != 2:
        raise ConfigError("pairs require order 2")

    p = cfg.get("p")
    if p is not None:
        p = float(p)
        if not math.isfinite(p):
            raise ConfigError("p must be finite")
    elif order == 2:
        p = 0.0

    clamp = cfg.get("clamp", "exact")
    if order == 4:
        if clamp == "exact":
            if tf is None:
                raise ConfigError('clamp "exact" needs a catalog function')
        else:
            clamp = [float(clamp[0]), float(clamp[1])]
            if not all(map(math.isfinite, clamp)):
                raise ConfigError("clamp derivatives must be finite")

    return {"order": order, "tf": tf, "samples": samples, "levels": levels,
            "fkind": fkind, "fval": fval, "p": p, "clamp": clamp,
            "echo": dict(cfg)}


def _pairs_for(fkind, fval, m):
    if fkind == "xi":
        xs = np.atleast_1d(np.asarray(fval, dtype=float))
        if xs.size == 1:
            xs = np.repeat(xs, m)
        if xs.size != m:
            raise ConfigError(f"need {m} xi values, got {xs.size}")
        return [(-abs(float(x)), abs(float(x))) for x in xs]
    pairs = list(fval)
    if len(pairs) == 2 and np.isscalar(pairs[0]):
        pairs = [pairs] * m
    if len(pairs) == 1:
        pairs = pairs * m
    if len(pairs) != m:
        raise ConfigError(f"need {m} pairs, got {len(pairs)}")
    return [tuple(float(x) for x in pr) for pr in pairs]


def _quads_for(fkind, fval, m, p):
    try:
        if fkind == "xi":
            qset = quad_frequency_set(m, xi=fval, p=p)
        else:
            quads = list(fval)
            if len(quads) == 1:
                quads = quads * m
            qset = quad_frequency_set(m, quads=quads, p=p)
        resolve_weight(qset)
        return qset
    except ValueError as exc:
        raise ConfigError(str(exc))


def _verify_row_order2(norm, knots):
    part = Partition(tuple(knots))
    m = part.n - 1
    pairs = _pairs_for(norm["fkind"], norm["fval"], m)
    basis = build_hat_basis(part, pairs)
    p = norm["p"]
    tf = norm["tf"]
    values = tf(np.array(knots)) if tf is not None else norm["samples"]
    spline = interpolate2(basis, values)
    gram = gram_assemble(basis, p)
    row = {"n": part.n, "delta": part.mesh,
           "c_factor": dominance_factor(gram),
           "norm_bound": operator_norm_bound(basis, p),
           "M2_max": None, "M0_max": None,
           "bound": None, "ratio": None, "passed": True}
    if tf is None:
        row["empirical_error"] = None
        return row, spline
    empirical = measure_error(tf, spline, part)
    ml = np.array([max_abs_L(tf, Partition((knots[j], knots[j + 1])),
                             [pairs[j]]) for j in range(m)])
    bound = interp2_error_bound(basis, ml)
    row["empirical_error"] = empirical
    row["bound"] = bound
    row["M0_max"] = max(M_constant(pr[0], pr[1], knots[j], knots[j + 1]).value
                        for j, pr in enumerate(pairs))
    row["ratio"] = empirical / bound if bound > 0.0 else None
    row["passed"] = bool(empirical <= bound)
    return row, spline


def _verify_row_order4(norm, knots):
    part = Partition(tuple(knots))
    m = part.n - 1
    qset = _quads_for(norm["fkind"], norm["fval"], m, norm["p"])
    tf = norm["tf"]
    if tf is not None:
        values = tf(np.array(knots))
        if norm["clamp"] == "exact":
            dl = float(tf.evaluators[1](np.array(knots[0])))
            dr = float(tf.evaluators[1](np.array(knots[-1])))
        else:
            dl, dr = norm["clamp"]
    else:
        values = norm["samples"]
        if norm["clamp"] == "exact":
            raise ConfigError('clamp "exact" needs a catalog function')
        dl, dr = norm["clamp"]
    spline = build_interpolant4(part, qset, values, dl, dr)
    p_res, canon = resolve_weight(qset)
    hat_pairs = [q[:2] for q in canon]
    basis = build_hat_basis(part, hat_pairs)
    gram = gram_assemble(basis, p_res)
    row = {"n": part.n, "delta": part.mesh,
           "c_factor": dominance_factor(gram),
           "empirical_error": None, "bound": None, "ratio": None,
           "passed": True}
    if tf is None:
        cert = error_bound4(part, qset, norm["p"], 0.0)
        row["norm_bound"] = cert.norm_bound
        row["M2_max"] = cert.m2_max
        row["M0_max"] = cert.m0_max
        return row, spline
    empirical = measure_error(tf, spline, part)
    ml = max_abs_L(tf, part, list(qset.quads))
    cert = error_bound4(part, qset, norm["p"], ml)
    row.update({"empirical_error": empirical, "bound": cert.bound,
                "norm_bound": cert.norm_bound, "M2_max": cert.m2_max,
                "M0_max": cert.m0_max,
                "ratio": empirical / cert.bound if cert.bound > 0.0 else None,
                "passed": bool(empirical <= cert.bound)})
    return row, spline


def run_verify(config):
    """Build the configured interpolants, measure dense-grid errors, and
    compare them with their certificates level by level."""
    norm = _normalize_config(config)
    rows = []
    for knots in norm["levels"]:
        if norm["order"] == 2:
            row, _ = _verify_row_order2(norm, knots)
        else:
            row, _ = _verify_row_order4(norm, knots)
        rows.append(row)
    return VerifyReport(config=norm["echo"], rows=rows,
                        passed=all(r["passed"] for r in rows))


def build_configured_spline(config):
    """The interpolant of the single-level configuration, for evaluation
    exports; returns (spline, partition, order)."""
    norm = _normalize_config(config)
    if len(norm["levels"]) != 1:
        raise ConfigError("evaluation exports need a single grid level")
    knots = norm["levels"][0]
    if norm["order"] == 2:
        _, spline = _verify_row_order2(norm, knots)
    else:
        _, spline = _verify_row_order4(norm, knots)
    return spline, Partition(tuple(knots)), norm["order"]


@dataclass
class ConvergenceStudy:
    """Log-log slope of error against mesh width over the grid levels."""
    rows: list
    slope: float
    kernel: bool
    order: int
    expected: tuple

    @property
    def within_expected(self):
        if self.kernel or self.slope is None:
            return None
        return self.expected[0] <= self.slope <= self.expected[1]


def convergence_study(config):
    """Measure the empirical convergence rate across at least three levels.

    Functions reproduced to rounding (kernel elements) are flagged instead
    of fitted, since their errors carry no rate information.
    """
    norm = _normalize_config(config)
    if norm["tf"] is None:
        raise ConfigError("a convergence study needs a catalog function")
    if len(norm["levels"]) < 3:
        raise ConfigError("a convergence study needs at least 3 grid levels")
    report = run_verify(config)
    errs = np.array([r["empirical_error"] for r in report.rows])
    deltas = np.array([r["delta"] for r in report.rows])
    grid = error_grid(Partition(tuple(norm["levels"][0])))
    scale = float(np.max(np.abs(norm["tf"](grid))))
    expected = (3.7, 4.3) if norm["order"] == 4 else (1.8, 2.2)
    if np.all(errs < 1e-12 * max(scale, 1e-300)):
        return ConvergenceStudy(rows=report.rows, slope=None, kernel=True,
                                order=norm["order"], expected=expected)
    slope = float(np.polyfit(np.log(deltas), np.log(errs), 1)[0])
    return ConvergenceStudy(rows=report.rows, slope=slope, kernel=False,
                            order=norm["order"], expected=expected)


CSV_COLUMNS = ("n", "delta", "empirical_error", "bound", "ratio",
               "norm_bound", "M0_max", "M2_max", "c_factor")


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return "%.12g" % float(value)


def render_csv(rows):
    """Fixed-format CSV for the verification rows; byte deterministic."""
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(col)) for col in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def render_json(report):
    doc = {"config": _jsonable(report.config),
           "rows": _jsonable(report.rows),
           "passed": bool(report.passed)}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def emit(report, fmt, outdir, stem="verify"):
    """Write the report under outdir in the requested format and return the
    path; identical reports produce identical bytes."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        payload = render_csv(report.rows)
        path = outdir / f"{stem}.csv"
    elif fmt == "json":
        payload = render_json(report)
        path = outdir / f"{stem}.json"
    else:
        raise ConfigError(f"unknown format {fmt!r}")
    path.write_bytes(payload.encode("ascii"))
    return path


@dataclass
class CriterionResult:
    index: int
    title: str
    passed: bool
    detail: str

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.index:2d} {self.title}: {self.detail}"


def _criterion_convolution():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        ka = int(rng.integers(1, 7))
        kb = int(rng.integers(1, 8 - ka + 1))
        fa = tuple(rng.uniform(-5.0, 5.0, size=ka))
        fb = tuple(rng.uniform(-5.0, 5.0, size=kb))
        y = float(rng.uniform(0.05, 2.0))
        lhs, rhs = convolution_check(fa, fb, y)
        worst = max(worst, abs(lhs - rhs) / (1.0 + abs(rhs)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-8 and elapsed < 10.0
    return ok, f"max scaled deviation {worst:.3e} (limit 1e-08), " \
               f"{elapsed:.2f}s over 50 random pairs"


def _criterion_gram():
    from .quadrature import integrate
    worst = 0.0
    for xi in (0.0, 0.1, 1.0, 10.0):
        for h in (0.1, 1.0, 2.0):
            for p in (0.0, 1.0):
                basis = build_hat_basis((0.0, h), [(-xi, xi)])
                g = gram_assemble(basis, p)
                for (i, j), closed in (((0, 0), g.diag[0]),
                                       ((1, 1), g.diag[1]),
                                       ((0, 1), g.sub[0])):
                    direct, _ = integrate(
                        lambda ts: hat_eval(basis, i, ts)
                        * hat_eval(basis, j, ts) * np.exp(p * ts),
                        0.0, h, abs_tol=1e-30, rel_tol=1e-12)
                    worst = max(worst, abs(closed - direct)
                                / max(abs(direct), 1e-300))
    h = 0.37
    basis = build_hat_basis(np.arange(6) * h, [(0.0, 0.0)] * 5)
    g = gram_assemble(basis, 0.0)
    poly_dev = max(
        float(np.max(np.abs(g.diag[1:-1] - 2 * h / 3))) / (2 * h / 3),
        float(np.max(np.abs(g.sub - h / 6))) / (h / 6),
        abs(g.diag[0] - h / 3) / (h / 3), abs(g.diag[-1] - h / 3) / (h / 3))
    ok = worst <= 1e-9 and poly_dev <= 1e-12
    return ok, f"closed vs quadrature {worst:.3e} (limit 1e-09), " \
               f"polynomial thirds dev {poly_dev:.3e} (limit 1e-12)"


def _criterion_symmetric_m():
    worst = 0.0
    span = 0.7
    for x in (0.01, 0.5, 2.0, 10.0):
        xi = x / span
        got = M_constant(-xi, xi, 0.0, span).value
        want = span ** 2 * mstar(x)
        worst = max(worst, abs(got - want) / want)
    rng = np.random.default_rng(314)
    cap_ok = True
    for _ in range(100):
        xi = float(rng.uniform(0.0, 12.0))
        length = float(rng.uniform(0.05, 3.0))
        val = M_constant(-xi, xi, 0.0, length).value
        cap_ok = cap_ok and val <= length ** 2 / 8.0 * (1.0 + 1e-12)
    ok = worst <= 1e-10 and cap_ok
    return ok, f"max relative gap {worst:.3e} (limit 1e-10), " \
               f"eighth-of-square cap {'held' if cap_ok else 'VIOLATED'}"


def _criterion_dominance():
    rng = np.random.default_rng(2024)
    worst_sym = 0.0
    for _ in range(100):
        xi = float(rng.uniform(0.0, 10.0))
        h = float(rng.uniform(0.05, 2.0))
        basis = build_hat_basis(np.arange(4) * h, [(-xi, xi)] * 3)
        worst_sym = max(worst_sym,
                        dominance_factor(gram_assemble(basis, 0.0)))
    mixed_ok = True
    for _ in range(100):
        l0 = float(rng.uniform(-10.0, -0.05))
        l1 = float(rng.uniform(0.05, 10.0))
        h = float(rng.uniform(0.05, 2.0))
        cap = max((2 * l1 - l0) / (2 * l1 - 4 * l0),
                  (l1 - 2 * l0) / (4 * l1 - 2 * l0))
        basis = build_hat_basis((0.0, h, 2 * h), [(l0, l1)] * 2)
        c = dominance_factor(gram_assemble(basis, 0.0))
        mixed_ok = mixed_ok and c <= cap + 1e-12 and cap < 1.0
    t_pos = tfunc(2.0, 1.0, 0.0, 1.2)
    ok = worst_sym <= 0.5 + 1e-12 and mixed_ok and t_pos > 1.0
    return ok, f"symmetric c max {worst_sym:.12f} (limit 0.5), mixed-sign " \
               f"caps {'held' if mixed_ok else 'VIOLATED'}, positive pair " \
               f"(2,1) at h=1.2 reports T = {t_pos:.6f} > 1"


def _criterion_st_bounds():
    rng = np.random.default_rng(55)
    worst_s = 0.0
    worst_t = 0.0
    for _ in range(10 ** 4):
        lam = np.sort(rng.uniform(-10.0, 10.0, size=2))
        t = float(rng.uniform(-10.0, 10.0))
        worst_s = max(worst_s, sfunc(float(lam[0]), float(lam[1]), 0.0, t))
        xi = float(rng.uniform(0.0, 10.0))
        worst_t = max(worst_t, tfunc(-xi, xi, 0.0, t))
    exact = all(sfunc(0.0, 0.0, 0.0, h) == 1.5
                for h in np.linspace(-20.0, 20.0, 401))
    ok = worst_s <= 2.0 * (1.0 + 1e-11) and worst_t <= 0.5 * (1.0 + 1e-11) \
        and exact
    return ok, f"S max {worst_s:.13f} (limit 2, evaluation roundoff " \
               f"1e-11 rel), symmetric T max {worst_t:.13f} (limit 0.5), " \
               f"polynomial S identically 3/2: {exact}"


def _criterion_cubic_limit():
    start = time.perf_counter()
    config = {"function": "sin", "domain": [0.0, math.pi],
              "frequencies": {"xi": 0.0}, "n": [5, 9, 17], "order": 4}
    study = convergence_study(config)
    rows_ok = all(r["passed"] and r["ratio"] is not None and r["ratio"] < 1.0
                  for r in study.rows)
    closed_ok = all(
        r["empirical_error"] <= 5.0 / 64.0 * r["delta"] ** 4
        for r in study.rows)
    elapsed = time.perf_counter() - start
    ok = rows_ok and closed_ok and study.within_expected and elapsed < 5.0
    return ok, f"ratios {[round(r['ratio'], 4) for r in study.rows]} all " \
               f"< 1, slope {study.slope:.3f} in [3.7, 4.3], {elapsed:.2f}s"


def _criterion_xi_uniform():
    details = []
    ok = True
    for xi in (0.5, 1.0, 2.0, 5.0):
        config = {"function": "sin", "domain": [0.0, math.pi],
                  "frequencies": {"xi": xi}, "n": 9, "order": 4}
        report = run_verify(config)
        row = report.rows[0]
        lf_ok = abs(row["bound"] / row["M2_max"] / row["M0_max"]
                    / (1.0 + row["norm_bound"]) - (1 + xi ** 2) ** 2) \
            <= 1e-6 * (1 + xi ** 2) ** 2
        ok = ok and report.passed and lf_ok
        details.append(f"xi={xi:g} ratio={row['ratio']:.3g}")
    return ok, "all rows pass with max|LF| = (1+xi^2)^2; " + ", ".join(details)


def _criterion_kernel_reproduction():
    kn = np.linspace(0.0, 1.5, 6)
    s4 = build_interpolant4(kn, quad_frequency_set(5, xi=1.0), np.exp(kn),
                            1.0, math.exp(1.5))
    grid = np.linspace(0.0, 1.5, 2001)
    rel_exp = float(np.max(np.abs(s4(grid) - np.exp(grid)))) / math.exp(1.5)
    kn2 = np.linspace(0.0, 2.0, 5)
    s4b = build_interpolant4(kn2, quad_frequency_set(4, xi=0.0), kn2 ** 3,
                             0.0, 12.0)
    grid2 = np.linspace(0.0, 2.0, 2001)
    rel_cub = float(np.max(np.abs(s4b(grid2) - grid2 ** 3))) / 8.0
    basis = build_hat_basis(kn, [(-1.0, 1.0)] * 5)
    s2 = interpolate2(basis, np.exp(kn))
    knots_exact = bool(np.array_equal(s2(kn), np.exp(kn)))
    ok = rel_exp <= 1e-9 and rel_cub <= 1e-9 and knots_exact
    return ok, f"order-4 rel errors {rel_exp:.2e} (exp), {rel_cub:.2e} " \
               f"(cubic), order-2 knot values exact: {knots_exact}"


def _criterion_orthogonality():
    worst = 0.0
    for xi in (0.0, 1.0):
        for n in (5, 9):
            kn = np.linspace(0.0, math.pi, n)
            s = build_interpolant4(kn, quad_frequency_set(n - 1, xi=xi),
                                   np.sin(kn), 1.0, -1.0)
            basis = build_hat_basis(kn, [(-xi, xi)] * (n - 1))
            fd = lambda ts: (np.sin(ts), np.cos(ts), -np.sin(ts))
            worst = max(worst, residual_orthogonality(fd, s, basis, 0.0))
    ok = worst <= 1e-7
    return ok, f"max residual {worst:.3e} (limit 1e-07) over sin, " \
               "xi in {0, 1}, n in {5, 9}"


def _criterion_omega_green():
    rng = np.random.default_rng(77)
    boundary = 0.0
    positive = True
    lop_worst = 0.0
    for k in range(20):
        lam = np.sort(rng.uniform(-4.0, 4.0, size=2))
        a = float(rng.uniform(-1.0, 1.0))
        b = a + float(rng.uniform(0.3, 2.0))
        l0, l1 = float(lam[0]), float(lam[1])
        boundary = max(boundary, abs(omega_eval(l0, l1, a, b, a)),
                       abs(omega_eval(l0, l1, a, b, b)))
        ts = np.linspace(a, b, 101)[1:-1]
        vals = omega_eval(l0, l1, a, b, ts)
        positive = positive and bool(np.all(vals > 0.0))
        h = 1e-3 * (b - a)
        for t in np.linspace(a + 3 * h, b - 3 * h, 7):
            f = lambda x: omega_eval(l0, l1, a, b, x)
            d2 = (-f(t + 2 * h) + 16 * f(t + h) - 30 * f(t)
                  + 16 * f(t - h) - f(t - 2 * h)) / (12 * h * h)
            d1 = (-f(t + 2 * h) + 8 * f(t + h) - 8 * f(t - h)
                  + f(t - 2 * h)) / (12 * h)
            res = d2 - (l0 + l1) * d1 + l0 * l1 * f(t)
            lop_worst = max(lop_worst, abs(res + 1.0))
    green_ok = True
    quarter_ok = True
    for k in range(1000):
        lam = np.sort(rng.uniform(-5.0, 5.0, size=2))
        a = float(rng.uniform(-1.0, 1.0))
        b = a + float(rng.uniform(0.2, 2.0))
        l0, l1 = float(lam[0]), float(lam[1])
        t = float(rng.uniform(a + 1e-3, b - 1e-3))
        gdiag = abs(green_eval(l0, l1, a, b, t, t))
        quarter_ok = quarter_ok and (b - a) * gdiag \
            <= 0.25 * (b - a) ** 2 * (1.0 + 1e-12)
        if l0 < 0.0 < l1:
            green_ok = green_ok and omega_eval(l0, l1, a, b, t) \
                <= (b - a) * gdiag * (1.0 + 1e-12)
    ok = boundary <= 1e-12 and positive and lop_worst <= 1e-6 \
        and green_ok and quarter_ok
    return ok, f"boundary {boundary:.1e} (limit 1e-12), interior positive: " \
               f"{positive}, |L Omega + 1| max {lop_worst:.2e} (limit " \
               f"1e-06), Green bounds held: {green_ok and quarter_ok}"


def _criterion_hat_sums():
    rng = np.random.default_rng(4040)
    worst_all = 0.0
    worst_mixed = 0.0
    for _ in range(50):
        n = int(rng.integers(3, 8))
        knots = np.cumsum(np.concatenate([[0.0],
                                          rng.uniform(0.2, 1.0, size=n - 1)]))
        mixed = []
        for _ in range(n - 1):
            l0 = float(rng.uniform(-3.0, -0.1))
            l1 = float(rng.uniform(0.1, 3.0))
            mixed.append((l0, l1))
        basis = build_hat_basis(knots, mixed)
        ts = np.linspace(knots[0], knots[-1], 801)
        worst_mixed = max(worst_mixed, float(np.max(sum_hats(basis, ts))))
        shift = float(rng.uniform(0.5, 3.0))
        shifted = [(l0 + shift, l1 + shift) for l0, l1 in mixed]
        try:
            basis2 = build_hat_basis(knots, shifted)
        except ValueError:
            continue
        worst_all = max(worst_all, float(np.max(sum_hats(basis2, ts))))
    h = 0.31
    basis = build_hat_basis(np.arange(5) * h, [(0.0, 0.0)] * 4)
    ts = np.linspace(0.0, 4 * h, 1001)
    unity_dev = float(np.max(np.abs(sum_hats(basis, ts) - 1.0)))
    ok = worst_mixed <= 1.0 + 1e-12 and worst_all <= 2.0 + 1e-12 \
        and unity_dev <= 1e-14
    return ok, f"mixed-sign sum max {worst_mixed:.12f} (limit 1), overall " \
               f"max {max(worst_all, worst_mixed):.12f} (limit 2), " \
               f"polynomial unity dev {unity_dev:.1e} (limit 1e-14)"


def _criterion_derivative_bound():
    details = []
    ok = True
    for xi in (0.5, 1.0, 2.0, 5.0):
        kn = np.linspace(0.0, math.pi, 9)
        s = build_interpolant4(kn, quad_frequency_set(8, xi=xi),
                               np.sin(kn), 1.0, -1.0)
        grid = error_grid(Partition(tuple(kn)))
        measured = float(np.max(np.abs(
            (-np.sin(grid) - xi ** 2 * np.sin(grid))
            - (s(grid, order=2) - xi ** 2 * s(grid)))))
        cap = 5.0 * (1 + xi ** 2) ** 2
        ok = ok and measured <= cap
        details.append(f"xi={xi:g}: {measured:.3g} <= {cap:.3g}")
    return ok, "; ".join(details)


def acceptance_criteria():
    """Run the twelve acceptance checks and return their results."""
    checks = [
        ("convolution identity", _criterion_convolution),
        ("Gram closed forms vs quadrature", _criterion_gram),
        ("symmetric interval constant identity", _criterion_symmetric_m),
        ("Gram dominance factors", _criterion_dominance),
        ("S and T bounds", _criterion_st_bounds),
        ("order-4 bound in the cubic limit", _criterion_cubic_limit),
        ("order-4 bound uniform in frequency", _criterion_xi_uniform),
        ("kernel reproduction", _criterion_kernel_reproduction),
        ("residual orthogonality", _criterion_orthogonality),
        ("Omega and Green function properties", _criterion_omega_green),
        ("hat sum bounds", _criterion_hat_sums),
        ("second-derivative residual bound", _criterion_derivative_bound),
    ]
    results = []
    for idx, (title, fn) in enumerate(checks, start=1):
        passed, detail = fn()
        results.append(CriterionResult(index=idx, title=title,
                                       passed=bool(passed), detail=detail))
    return results
