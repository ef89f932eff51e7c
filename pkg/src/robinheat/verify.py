"""Inequality checks for the boundary-coupled heat semigroup.

Each check is a pure function of its inputs plus a seed; every report
carries the seed so runs are exactly reproducible.  Statuses follow one
convention throughout: "passed" and "failed" speak about the conclusion
under satisfied hypotheses, "hypothesis unmet" means a precondition of
the underlying estimate does not hold and nothing was claimed,
"discretization-limited" marks conclusions the mesh cannot be expected
to reproduce (sign structure under non-isotropic coefficients).
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "NashReport",
    "check_nash",
    "ContractivityReport",
    "check_ouhabaz_contractivity_criterion",
    "SupBoundReport",
    "check_sup_contraction",
    "PositivityReport",
    "check_positivity",
    "DominationReport",
    "check_domination",
    "UltracontractivityReport",
    "fit_ultracontractivity",
    "EventualPositivityReport",
    "check_eventual_positivity",
    "DualityReport",
    "check_duality",
    "EnergyReport",
    "check_energy_dissipation",
    "DecayReport",
    "check_smoothing_decay",
    "write_document",
    "write_norms_csv",
]

PLATEAU_SLOPE = 0.05
ENVELOPE_FACTOR = 1.05
MIN_FIT_POINTS = 4


# ----------------------------------------------------------------------
def _tensor_cosine_modes(mesh, count):
    """The lowest nonconstant products of axis cosines, vertex-interpolated,
    ordered by total frequency."""
    dim = mesh.dim
    orders = []
    span = 4
    for flat in range(1, (span + 1) ** dim):
        k = []
        rest = flat
        for _ in range(dim):
            k.append(rest % (span + 1))
            rest //= span + 1
        orders.append(tuple(k))
    orders.sort(key=lambda k: (sum(k), k))
    modes = []
    for k in orders[:count]:
        values = np.ones(mesh.n_vertices)
        for axis, freq in enumerate(k):
            values = values * np.cos(math.pi * freq * mesh.vertices[:, axis])
        modes.append(values)
    return modes


@dataclass
class NashReport:
    dim: int
    samples: int
    max_ratio: float
    implied_constant: float
    gradient_only_violation: bool
    status: str
    seed: int

    def as_dict(self):
        return {
            "dim": self.dim,
            "samples": self.samples,
            "max_ratio": self.max_ratio,
            "implied_constant": self.implied_constant,
            "gradient_only_violation": self.gradient_only_violation,
            "status": self.status,
            "seed": self.seed,
        }


def check_nash(mesh, system, samples=200, seed=2024,
               allow_low_dimension=False):
    """Sample the interpolation inequality

        |u|_L2^(2+4/d) <= C |u|_L1^(4/d) |u|_H1^2

    on the constant, the lowest tensor-cosine modes, and random vectors.
    The largest observed ratio is a certified lower bound for C.  The
    gradient-only variant (H1 seminorm on the right) is evaluated on the
    constant function and its failure recorded, not counted as a check
    failure.

    The estimate is used for d > 2; lower dimensions run only with
    ``allow_low_dimension`` and are labeled out-of-hypothesis.
    """
    d = mesh.dim
    if d <= 2 and not allow_low_dimension:
        raise ValueError(
            f"the sampled inequality backs the d > 2 smoothing argument; "
            f"got dim {d} (pass allow_low_dimension=True to probe anyway)")
    rng = np.random.default_rng(seed)
    vectors = [np.ones(mesh.n_vertices)]
    vectors += _tensor_cosine_modes(mesh, 10)
    while len(vectors) < samples:
        vectors.append(rng.standard_normal(mesh.n_vertices))
    exponent = 4.0 / d
    worst = 0.0
    used = 0
    for u in vectors[:samples]:
        l1 = system.l1_norm(u)
        if l1 == 0.0:
            continue
        used += 1
        l2 = system.l2_norm(u)
        h1 = system.h1_norm(u)
        worst = max(worst, l2 ** (2 + exponent) / (l1 ** exponent * h1 ** 2))
    ones = np.ones(mesh.n_vertices)
    seminorm_sq = float(ones @ system.K_id @ ones)
    gradient_only_violation = bool(
        system.l2_norm(ones) ** (2 + exponent)
        > worst * system.l1_norm(ones) ** exponent * seminorm_sq)
    status = "passed" if d > 2 else "out-of-hypothesis"
    return NashReport(
        dim=d,
        samples=used,
        max_ratio=float(worst),
        implied_constant=float(worst),
        gradient_only_violation=gradient_only_violation,
        status=status,
        seed=seed,
    )


# ----------------------------------------------------------------------
@dataclass
class ContractivityReport:
    min_value_plus: float
    min_value_minus: float
    scale: float
    samples: int
    seed: int
    status: str

    def as_dict(self):
        return {
            "min_value_plus": self.min_value_plus,
            "min_value_minus": self.min_value_minus,
            "scale": self.scale,
            "samples": self.samples,
            "seed": self.seed,
            "status": self.status,
        }


def _straddling_samples(mesh, count, rng):
    """Vertex interpolants of smooth fields scaled so the nodal values
    straddle the truncation threshold 1."""
    out = []
    for _ in range(count):
        u = np.zeros(mesh.n_vertices)
        for _ in range(3):
            amp = rng.standard_normal()
            freqs = rng.integers(0, 4, size=mesh.dim)
            phase = rng.uniform(0, math.pi, size=mesh.dim)
            mode = np.ones(mesh.n_vertices) * amp
            for axis in range(mesh.dim):
                mode *= np.cos(freqs[axis] * math.pi
                               * mesh.vertices[:, axis] + phase[axis])
            u += mode
        peak = np.abs(u).max()
        if peak == 0.0:
            u = np.ones(mesh.n_vertices)
            peak = 1.0
        out.append(u / peak * rng.uniform(1.2, 3.0))
    return out


def check_ouhabaz_contractivity_criterion(system, samples=100, seed=2024):
    """Truncation criterion behind the sup-norm contraction: with
    w = (1 ^ |u|) sign u and z = (|u| - 1)^+ sign u, the shifted form
    built with boundary operator |bar|_inf +- bar must pair w against z
    nonnegatively.  Evaluated nodally on threshold-straddling samples."""
    form_plus = system.form_with_boundary(system.spec.shifted_bar(+1))
    form_minus = system.form_with_boundary(system.spec.shifted_bar(-1))
    scale = max(float(np.linalg.norm(form_plus, 2)),
                float(np.linalg.norm(form_minus, 2)))
    rng = np.random.default_rng(seed)
    min_plus = math.inf
    min_minus = math.inf
    for u in _straddling_samples(system.mesh, samples, rng):
        w = np.clip(u, -1.0, 1.0)
        z = u - w
        min_plus = min(min_plus, float(z @ form_plus @ w))
        min_minus = min(min_minus, float(z @ form_minus @ w))
    ok = min(min_plus, min_minus) >= -1e-9 * scale
    return ContractivityReport(
        min_value_plus=float(min_plus),
        min_value_minus=float(min_minus),
        scale=scale,
        samples=samples,
        seed=seed,
        status="passed" if ok else "failed",
    )


# ----------------------------------------------------------------------
@dataclass
class SupBoundReport:
    max_sup_excess: float
    max_l1_excess: float
    status: str

    def as_dict(self):
        return {
            "max_sup_excess": self.max_sup_excess,
            "max_l1_excess": self.max_l1_excess,
            "status": self.status,
        }


def check_sup_contraction(evaluator, adjoint_evaluator, times, tol=1e-8):
    """Grid check of the sup-norm bound exp(alpha t) for the semigroup and
    the matching L1 bound for its adjoint (excess = shifted norm - 1)."""
    sup_excess = max(evaluator.norm_inf_to_inf(t) - 1.0 for t in times)
    l1_excess = max(adjoint_evaluator.norm_1_to_1(t) - 1.0 for t in times)
    ok = sup_excess <= tol and l1_excess <= tol
    return SupBoundReport(
        max_sup_excess=float(sup_excess),
        max_l1_excess=float(l1_excess),
        status="passed" if ok else "failed",
    )


# ----------------------------------------------------------------------
@dataclass
class PositivityReport:
    times: np.ndarray
    min_entries: np.ndarray
    status: str

    def as_dict(self):
        return {
            "times": self.times,
            "min_entries": self.min_entries,
            "status": self.status,
        }


def check_positivity(evaluator, times, tol=1e-9):
    """Entrywise nonnegativity of the semigroup matrix on the grid.

    Intended for the evaluator of the boundary operator |bar|_inf - bar,
    whose generator keeps the M-matrix sign pattern on isotropic meshes.
    A sign failure under a non-isotropic coefficient field is reported as
    discretization-limited: P1 elements need not preserve positivity
    there even when the continuum operator does.
    """
    times = np.asarray(times, dtype=float)
    mins = np.array([float(evaluator.matrix(t).min()) for t in times])
    if mins.min() >= -tol:
        status = "passed"
    elif not evaluator.system.field.is_isotropic:
        status = "discretization-limited"
    else:
        status = "failed"
    return PositivityReport(times=times, min_entries=mins, status=status)


# ----------------------------------------------------------------------
@dataclass
class DominationReport:
    times: np.ndarray
    max_violation: float
    form_max_violation: float
    form_scale: float
    samples: int
    seed: int
    status: str

    def as_dict(self):
        return {
            "times": self.times,
            "max_violation": self.max_violation,
            "form_max_violation": self.form_max_violation,
            "form_scale": self.form_scale,
            "samples": self.samples,
            "seed": self.seed,
            "status": self.status,
        }


def check_domination(evaluator, bar_evaluator, times, samples=50, seed=2024,
                     tol=1e-8):
    """|S(t) u| <= S_bar(t) |u| componentwise for random signed samples,
    with violations measured relative to the sup norm of u, plus the
    form-level criterion a_bar(|u|, |v|) <= a(u, v) on sign-aligned pairs.

    The comparison semigroup must be the one generated with boundary
    operator -bar: its form minorizes the original on sign-aligned pairs
    entry by entry, which is the discrete shape of the kernel bound
    |B w| <= bar w.
    """
    times = np.asarray(times, dtype=float)
    rng = np.random.default_rng(seed)
    n = len(evaluator.mass)
    draws = rng.standard_normal((samples, n))
    draws /= np.abs(draws).max(axis=1, keepdims=True)
    worst = 0.0
    for t in times:
        S = evaluator.matrix(t)
        Sbar = bar_evaluator.matrix(t)
        for u in draws:
            excess = np.abs(S @ u) - Sbar @ np.abs(u)
            worst = max(worst, float(excess.max()))
    form = evaluator.form
    form_bar = bar_evaluator.form
    form_scale = float(np.linalg.norm(form, 2))
    form_worst = -math.inf
    for _ in range(100):
        u = rng.standard_normal(n)
        v = np.abs(rng.standard_normal(n)) * np.sign(u)
        value = float(np.abs(v) @ form_bar @ np.abs(u) - v @ form @ u)
        form_worst = max(form_worst, value)
    form_worst = max(form_worst, 0.0)
    ok = worst <= tol and form_worst <= 1e-9 * form_scale
    return DominationReport(
        times=times,
        max_violation=float(worst),
        form_max_violation=float(form_worst),
        form_scale=form_scale,
        samples=samples,
        seed=seed,
        status="passed" if ok else "failed",
    )


# ----------------------------------------------------------------------
@dataclass
class UltracontractivityReport:
    times: np.ndarray
    norms: np.ndarray          # unshifted 2 -> sup norms
    alpha: float
    fitted_slope: float
    fitted_C: float
    mu: float
    window_times: np.ndarray
    envelope_ok: bool

    def as_dict(self):
        return {
            "times": self.times,
            "norms": self.norms,
            "alpha": self.alpha,
            "fitted_slope": self.fitted_slope,
            "fitted_C": self.fitted_C,
            "mu": self.mu,
            "window_times": self.window_times,
            "envelope_ok": self.envelope_ok,
        }


def fit_ultracontractivity(evaluator, alpha, times, norm="2_to_inf"):
    """Power-law fit of g(t) = exp(-alpha t) * (2 -> sup norm at t).

    The window keeps grid points the mesh can resolve (t at least the
    squared shortest edge) whose local log-log slope is away from zero
    (the long-time plateau of the constant mode is excluded at threshold
    0.05), then trims the largest times one by one until every remaining
    point lies under fitted_C * t^slope * 1.05; the fit is least squares
    in log-log coordinates.  With fewer than 4 usable points the fit is
    refused.
    """
    times = np.asarray(times, dtype=float)
    if norm == "2_to_inf":
        raw = np.array([evaluator.norm_2_to_inf(t, shifted=False)
                        for t in times])
    elif norm == "1_to_2":
        raw = np.array([evaluator.norm_1_to_2(t, shifted=False)
                        for t in times])
    else:
        raise ValueError(f"unknown norm {norm!r}")
    g = raw * np.exp(-alpha * times)
    log_t = np.log(times)
    log_g = np.log(g)
    local = np.gradient(log_g, log_t)
    resolved = evaluator.system.mesh.min_edge_length ** 2
    usable = (times >= resolved) & (np.abs(local) >= PLATEAU_SLOPE)
    idx = np.nonzero(usable)[0]
    if len(idx) < MIN_FIT_POINTS:
        raise ValueError(
            f"only {len(idx)} usable grid points after windowing; "
            f"need {MIN_FIT_POINTS}")
    envelope_ok = False
    while True:
        design = np.vstack([np.ones(len(idx)), log_t[idx]]).T
        (intercept, slope), *_ = np.linalg.lstsq(design, log_g[idx],
                                                 rcond=None)
        fitted = intercept + slope * log_t[idx]
        envelope_ok = bool(
            np.all(log_g[idx] <= fitted + math.log(ENVELOPE_FACTOR)))
        if envelope_ok or len(idx) == MIN_FIT_POINTS:
            break
        idx = idx[:-1]
    return UltracontractivityReport(
        times=times,
        norms=raw,
        alpha=float(alpha),
        fitted_slope=float(slope),
        fitted_C=float(math.exp(intercept)),
        mu=float(-4.0 * slope),
        window_times=times[idx],
        envelope_ok=envelope_ok,
    )


# ----------------------------------------------------------------------
@dataclass
class EventualPositivityReport:
    delta: float
    t0: float
    hypothesis_ok: bool
    times: np.ndarray
    ratios: np.ndarray
    samples: int
    seed: int
    status: str

    def as_dict(self):
        return {
            "delta": self.delta,
            "t0": self.t0,
            "hypothesis_ok": self.hypothesis_ok,
            "times": self.times,
            "ratios": self.ratios,
            "samples": self.samples,
            "seed": self.seed,
            "status": self.status,
        }


def check_eventual_positivity(evaluator, spec, times, samples=20, seed=2024):
    """Uniform lower bound (S(t) u)_i >= delta * integral(u) for
    nonnegative data and large times.

    Hypotheses checked discretely before any claim: the weighted boundary
    coupling must have nonnegative symmetric part and annihilate the
    constant boundary vector.  The scan uses the unshifted semigroup and
    reports the first grid time from which the worst sample ratio stays
    positive, with delta the worst ratio from there on.
    """
    times = np.asarray(times, dtype=float)
    weights = evaluator.system.boundary_weights
    Bw = weights[:, None] * spec.matrix()
    sym_min = float(np.linalg.eigvalsh(0.5 * (Bw + Bw.T)).min())
    ones_excess = float(np.abs(spec.matrix().sum(axis=1)).max())
    hypothesis_ok = sym_min >= -1e-10 and ones_excess <= 1e-10
    if not hypothesis_ok:
        return EventualPositivityReport(
            delta=math.nan, t0=math.nan, hypothesis_ok=False, times=times,
            ratios=np.full(len(times), math.nan), samples=samples, seed=seed,
            status="hypothesis unmet")
    rng = np.random.default_rng(seed)
    mesh = evaluator.system.mesh
    mass = evaluator.system.mass
    data = [np.abs(rng.standard_normal(mesh.n_vertices))
            for _ in range(max(samples - 3, 1))]
    for vertex in (0, mesh.n_vertices // 2, int(mesh.boundary_vertices[-1])):
        bump = np.zeros(mesh.n_vertices)
        bump[vertex] = 1.0
        data.append(bump)
    ratios = np.empty(len(times))
    for k, t in enumerate(times):
        S = evaluator.matrix(t, shifted=False)
        ratios[k] = min(
            float((S @ u).min() / float(mass @ u)) for u in data)
    positive = ratios > 0.0
    start = None
    for k in range(len(times)):
        if positive[k:].all():
            start = k
            break
    if start is None:
        return EventualPositivityReport(
            delta=math.nan, t0=math.nan, hypothesis_ok=True, times=times,
            ratios=ratios, samples=len(data), seed=seed, status="failed")
    return EventualPositivityReport(
        delta=float(ratios[start:].min()),
        t0=float(times[start]),
        hypothesis_ok=True,
        times=times,
        ratios=ratios,
        samples=len(data),
        seed=seed,
        status="passed",
    )


# ----------------------------------------------------------------------
@dataclass
class DualityReport:
    max_relative_difference: float
    status: str

    def as_dict(self):
        return {
            "max_relative_difference": self.max_relative_difference,
            "status": self.status,
        }


def check_duality(evaluator, adjoint_evaluator, times, tol=1e-10):
    """The 2 -> sup norm of the semigroup equals the 1 -> 2 norm of its
    adjoint at every time."""
    worst = 0.0
    for t in times:
        a = evaluator.norm_2_to_inf(t)
        b = adjoint_evaluator.norm_1_to_2(t)
        worst = max(worst, abs(a - b) / max(a, b))
    return DualityReport(
        max_relative_difference=float(worst),
        status="passed" if worst <= tol else "failed",
    )


# ----------------------------------------------------------------------
@dataclass
class EnergyReport:
    max_excess: float
    scale: float
    samples: int
    seed: int
    status: str

    def as_dict(self):
        return {
            "max_excess": self.max_excess,
            "scale": self.scale,
            "samples": self.samples,
            "seed": self.seed,
            "status": self.status,
        }


def check_energy_dissipation(adjoint_evaluator, times, samples=20, seed=2024,
                             tol=1e-6):
    """The squared L2 norm along the adjoint shifted evolution dissipates
    at least twice the squared H1 norm (centered finite difference in t
    against the instantaneous H1 energy)."""
    system = adjoint_evaluator.system
    rng = np.random.default_rng(seed)
    worst = -math.inf
    scale = 0.0
    for _ in range(samples):
        u = rng.standard_normal(system.n)
        norm_sq = system.l2_norm(u) ** 2
        scale = max(scale, norm_sq)
        for t in times:
            step = 1e-3 * t
            vm = adjoint_evaluator.apply(t - step, u)
            vp = adjoint_evaluator.apply(t + step, u)
            v = adjoint_evaluator.apply(t, u)
            derivative = (system.l2_norm(vp) ** 2
                          - system.l2_norm(vm) ** 2) / (2 * step)
            worst = max(worst, derivative + 2.0 * system.h1_norm(v) ** 2)
    ok = worst <= tol * scale
    return EnergyReport(
        max_excess=float(worst),
        scale=float(scale),
        samples=samples,
        seed=seed,
        status="passed" if ok else "failed",
    )


# ----------------------------------------------------------------------
@dataclass
class DecayReport:
    constant: float
    prefactor: float
    max_ratio: float
    times: np.ndarray
    samples: int
    seed: int
    status: str

    def as_dict(self):
        return {
            "constant": self.constant,
            "prefactor": self.prefactor,
            "max_ratio": self.max_ratio,
            "times": self.times,
            "samples": self.samples,
            "seed": self.seed,
            "status": self.status,
        }


def check_smoothing_decay(adjoint_evaluator, nash_constant, times,
                          samples=50, seed=2024):
    """Quantitative L1 -> L2 decay of the adjoint shifted semigroup:

        |S*(t) u|_L2 <= (d C / 4)^(d/4) t^(-d/4) |u|_L1

    with C the sampled interpolation constant on the same mesh.  The
    report's max_ratio is the worst observed left/right quotient."""
    system = adjoint_evaluator.system
    d = system.mesh.dim
    prefactor = (d * nash_constant / 4.0) ** (d / 4.0)
    rng = np.random.default_rng(seed)
    worst = 0.0
    times = np.asarray(times, dtype=float)
    for t in times:
        S = adjoint_evaluator.matrix(t)
        bound = prefactor * t ** (-d / 4.0)
        for _ in range(samples):
            u = rng.standard_normal(system.n)
            worst = max(worst,
                        system.l2_norm(S @ u) / (bound * system.l1_norm(u)))
    return DecayReport(
        constant=float(nash_constant),
        prefactor=float(prefactor),
        max_ratio=float(worst),
        times=times,
        samples=samples,
        seed=seed,
        status="passed" if worst <= 1.0 else "failed",
    )


# ----------------------------------------------------------------------
def _format_value(value):
    if isinstance(value, (np.ndarray, list, tuple)):
        return ",".join(f"{float(v):.17g}" for v in np.asarray(value).ravel())
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def write_document(mapping, target):
    """Serialize a report mapping as ``key: value`` lines; arrays become
    comma-separated decimals with 17 significant digits."""
    lines = [f"{key}: {_format_value(value)}" for key, value in mapping.items()]
    text = "\n".join(lines) + "\n"
    if hasattr(target, "write"):
        target.write(text)
    else:
        with open(target, "w") as fh:
            fh.write(text)
    return text


def write_norms_csv(evaluator, times, target):
    """One row per grid time with the unshifted semigroup's mixed norms
    and its smallest matrix entry."""
    lines = ["t,norm_2_to_inf,norm_1_to_2,norm_inf_to_inf,min_entry"]
    for t in times:
        row = (
            float(t),
            evaluator.norm_2_to_inf(t, shifted=False),
            evaluator.norm_1_to_2(t, shifted=False),
            evaluator.norm_inf_to_inf(t, shifted=False),
            float(evaluator.matrix(t, shifted=False).min()),
        )
        lines.append(",".join(f"{v:.17g}" for v in row))
    text = "\n".join(lines) + "\n"
    if hasattr(target, "write"):
        target.write(text)
    else:
        with open(target, "w") as fh:
            fh.write(text)
    return text
