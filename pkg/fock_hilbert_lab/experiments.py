"""
Desk-scale experiments: threshold scans, Carleson boundedness and compactness
evidence, lemma checks and the disk-model necessity scan.

Every experiment returns a ScanReport. Divergence is never claimed outright;
reports carry growth ratios between successive truncations and the checks
that are certifiable at finite size (bounds, nesting). Scan cells are plain
task dicts evaluated by module-level workers through ``scan_runner``.
"""

from __future__ import annotations

import logging
import math
from datetime import datetime, timezone
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .disk_model import apply_hhat, make_f_hat, witness_eps, xp_norm_p
from .errors import DomainError
from .families import make_f_eps, make_f_tilde, make_f_w, trunc_for_w
from .fock_space import norm
from .hilbert_ops import (
    build_truncated,
    image_norm,
    lemma_beta_bound,
    lemma_weight,
    op_norm,
    tail_norm,
    weighted_column_sums,
    weighted_row_sums,
)
from .models import (
    CheckResult,
    FockWeight,
    MeasureSpec,
    OperatorSpec,
    ScanCell,
    ScanReport,
    XpModel,
    measure_id,
)
from .numeric_config import DEFAULT_POWER_TOL, EST_TAIL_TOL, LEMMA_TAIL_TOL
from .radial_measure import (
    carleson_constant,
    lambda_transform,
    moment_decay_profile,
    vanishing_profile,
)
from .scan_runner import run_cells
from .special_fn import stirling_bound, stirling_ratio_log

logger = logging.getLogger(__name__)

DEFAULT_STIRLING_POINTS: Tuple[float, ...] = (1.0, 2.0, 5.0, 10.0, 100.0)
DEFAULT_EST_C: Tuple[float, ...] = (0.5, 1.0, 1.5, 2.0)
DEFAULT_EST_W: Tuple[float, ...] = (0.5, 0.9, 0.99, 0.995)
DEFAULT_HCHECK_N: Tuple[int, ...] = (64, 256, 1024)
HCHECK_SLACK = 1e-9


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _require_unit_interval(alpha: float, beta: float, operation: str) -> None:
    if not (-1.0 < alpha < 1.0 and -1.0 < beta < 1.0):
        raise DomainError(operation, f"need -1 < alpha, beta < 1, got alpha={alpha}, beta={beta}")


def _require_grid(values: Sequence[Any], name: str, operation: str) -> List[Any]:
    out = list(values)
    if not out:
        raise DomainError(operation, f"{name} grid must be nonempty")
    return out


def _sorted_n(values: Iterable[int], operation: str) -> List[int]:
    out = sorted({int(v) for v in values})
    if not out or out[0] < 1:
        raise DomainError(operation, "N grid must be nonempty with N >= 1")
    return out


def _with_ratios(cells: List[ScanCell]) -> List[ScanCell]:
    """Fill the ratio to the previous truncation within each (series, parameter)."""
    previous: Dict[Tuple[str, float], float] = {}
    out = []
    for cell in cells:
        key = (cell.series, cell.parameter)
        prev = previous.get(key)
        ratio = cell.value / prev if prev not in (None, 0.0) else float("nan")
        out.append(ScanCell(cell.series, cell.parameter, cell.n, cell.value, ratio))
        previous[key] = cell.value
    return out


def _nesting_check(cells: List[ScanCell], series: str, rel_tol: float = 1e-9) -> CheckResult:
    report = ScanReport(kind="", cells=tuple(cells))
    ok = report.is_monotone(series, rel_tol)
    return CheckResult(
        name=f"{series}_nondecreasing_in_N",
        ok=ok,
        value=float(ok),
        bound=1.0,
        detail="truncated norms must not decrease along N",
    )


def _growth_ratios(cells: List[ScanCell], series: str) -> Dict[str, float]:
    report = ScanReport(kind="", cells=tuple(cells))
    params = sorted({c.parameter for c in report.series(series)})
    return {f"{p:g}": report.growth_ratio(series, p) for p in params}


def _metadata(**items: Any) -> Dict[str, Any]:
    items["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return items


def _strictly_decreasing(values: Sequence[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


# ---------------------------------------------------------------------------
# Cell workers (module level so they pickle)
# ---------------------------------------------------------------------------


def _op_norm_cell(task: Dict[str, Any]) -> float:
    return op_norm(build_truncated(task["spec"], task["n"]), task["tol"])


def _witness_eps_cell(task: Dict[str, Any]) -> float:
    spec: OperatorSpec = task["spec"]
    f = make_f_eps(task["eps"], spec.source, task["n"])
    return image_norm(spec, f, task["n"])


def _witness_family_cell(task: Dict[str, Any]) -> float:
    spec: OperatorSpec = task["spec"]
    w_val = task["w"]
    trunc = task["trunc"]
    if task["family"] == "f_w":
        f = make_f_w(w_val, spec.source, trunc)
    else:
        f = make_f_tilde(w_val, spec.alpha, trunc)
    return image_norm(spec, f, trunc)


def _tail_norm_cell(task: Dict[str, Any]) -> float:
    return tail_norm(task["spec"], task["n_keep"], task["n_big"], task["tol"])


def _xp_cell(task: Dict[str, Any]) -> float:
    model: XpModel = task["model"]
    a_hat = make_f_hat(task["eps"], model, task["n"])
    return xp_norm_p(apply_hhat(a_hat, task["lam"], task["n"]), model)


# ---------------------------------------------------------------------------
# Boundedness and compactness experiments
# ---------------------------------------------------------------------------


def threshold_scan(
    theta: float,
    alpha: float,
    beta: float,
    lambda_grid: Sequence[float],
    n_grid: Sequence[int],
    tol: float = DEFAULT_POWER_TOL,
    jobs: int = 1,
) -> ScanReport:
    """op_norm of H_lambda truncations over lambda x N, plus f_eps witnesses below lambda*."""
    op = "experiments.threshold_scan"
    _require_unit_interval(alpha, beta, op)
    lambdas = [float(v) for v in _require_grid(lambda_grid, "lambda", op)]
    ns = _sorted_n(n_grid, op)
    lambda_star = 1.0 + 0.5 * (beta - alpha)

    specs = {lam: OperatorSpec.h_lambda(lam, theta, alpha, beta) for lam in lambdas}
    norm_tasks = [{"spec": specs[lam], "n": n, "tol": tol} for lam in lambdas for n in ns]
    norms = run_cells(_op_norm_cell, norm_tasks, jobs, desc="threshold op_norm")
    cells = [
        ScanCell("op_norm", t["spec"].lam, t["n"], v) for t, v in zip(norm_tasks, norms)
    ]

    witness_tasks = []
    for lam in lambdas:
        eps = 0.5 * ((beta - alpha) + 2.0 * (1.0 - lam))
        if lam < lambda_star and eps > 0:
            witness_tasks.extend({"spec": specs[lam], "eps": eps, "n": n} for n in ns)
    witness = run_cells(_witness_eps_cell, witness_tasks, jobs, desc="threshold witness")
    cells += [
        ScanCell("witness_f_eps", t["spec"].lam, t["n"], v) for t, v in zip(witness_tasks, witness)
    ]
    cells = _with_ratios(cells)

    checks = [_nesting_check(cells, "op_norm")]
    by_key = {(c.series, c.parameter, c.n): c.value for c in cells}
    for t, v in zip(witness_tasks, witness):
        lam, n = t["spec"].lam, t["n"]
        f_norm = norm(make_f_eps(t["eps"], t["spec"].source, n), t["spec"].source)
        ceiling = by_key[("op_norm", lam, n)] * f_norm
        checks.append(
            CheckResult(
                name=f"witness_below_norm(lambda={lam:g},N={n})",
                ok=v <= ceiling * (1.0 + 1e-9) + 1e-12,
                value=v,
                bound=ceiling,
            )
        )
    logger.info(
        "threshold scan: lambda*=%g over %d lambdas x %d truncations",
        lambda_star,
        len(lambdas),
        len(ns),
    )
    return ScanReport(
        kind="threshold_scan",
        cells=tuple(cells),
        checks=tuple(checks),
        metadata=_metadata(
            theta=theta,
            alpha=alpha,
            beta=beta,
            lambda_star=lambda_star,
            growth_ratios=_growth_ratios(cells, "op_norm"),
        ),
    )


def carleson_boundedness_experiment(
    m: MeasureSpec,
    theta: float,
    alpha: float,
    beta: float,
    n_grid: Sequence[int],
    w_grid: Optional[Sequence[float]] = None,
    tol: float = DEFAULT_POWER_TOL,
    jobs: int = 1,
) -> ScanReport:
    """Carleson constant at s* next to the H_mu norm growth (and optional f_w witnesses)."""
    op = "experiments.carleson_boundedness_experiment"
    _require_unit_interval(alpha, beta, op)
    ns = _sorted_n(n_grid, op)
    spec = OperatorSpec.h_mu(m, theta, alpha, beta)
    s_star = spec.s_star
    constant = carleson_constant(m, s_star)

    norm_tasks = [{"spec": spec, "n": n, "tol": tol} for n in ns]
    norms = run_cells(_op_norm_cell, norm_tasks, jobs, desc="carleson op_norm")
    cells = [ScanCell("op_norm", s_star, n, v) for n, v in zip(ns, norms)]
    cells.append(ScanCell("carleson_constant", s_star, 0, constant))

    witness_tasks = [
        {"spec": spec, "w": float(w), "trunc": trunc_for_w(float(w)), "family": "f_w"}
        for w in (w_grid or ())
    ]
    witness = run_cells(_witness_family_cell, witness_tasks, jobs, desc="carleson witness")
    cells += [
        ScanCell("witness_f_w", t["w"], t["trunc"], v) for t, v in zip(witness_tasks, witness)
    ]
    cells = _with_ratios(cells)
    return ScanReport(
        kind="carleson_boundedness",
        cells=tuple(cells),
        checks=(_nesting_check(cells, "op_norm"),),
        metadata=_metadata(
            theta=theta,
            alpha=alpha,
            beta=beta,
            s_star=s_star,
            measure=measure_id(m),
            carleson_constant=constant,
            growth_ratio=ScanReport(kind="", cells=tuple(cells)).growth_ratio("op_norm", s_star),
        ),
    )


def compactness_experiment(
    m: MeasureSpec,
    theta: float,
    alpha: float,
    beta: float,
    n_keep_grid: Sequence[int],
    w_grid: Sequence[float],
    n_big: int = 1024,
    tol: float = DEFAULT_POWER_TOL,
    jobs: int = 1,
) -> ScanReport:
    """Tail norms, f_tilde images and the vanishing profile at s*, side by side."""
    op = "experiments.compactness_experiment"
    _require_unit_interval(alpha, beta, op)
    keeps = sorted({int(k) for k in n_keep_grid})
    if any(k < 0 or k > n_big for k in keeps):
        raise DomainError(op, f"N_keep values must lie in [0, {n_big}]")
    ws = sorted(float(w) for w in w_grid)
    spec = OperatorSpec.h_mu(m, theta, alpha, beta)
    s_star = spec.s_star

    tail_tasks = [{"spec": spec, "n_keep": k, "n_big": n_big, "tol": tol} for k in keeps]
    tails = run_cells(_tail_norm_cell, tail_tasks, jobs, desc="tail_norm")
    image_tasks = [
        {"spec": spec, "w": w, "trunc": trunc_for_w(w), "family": "f_tilde"} for w in ws
    ]
    images = run_cells(_witness_family_cell, image_tasks, jobs, desc="f_tilde images")
    profile = vanishing_profile(m, s_star)

    cells = [ScanCell("tail_norm", float(k), n_big, v) for k, v in zip(keeps, tails)]
    cells += [ScanCell("f_tilde_image", t["w"], t["trunc"], v) for t, v in zip(image_tasks, images)]
    cells += [ScanCell("vanishing_profile", t, j, q) for j, (t, q) in enumerate(profile)]
    quotients = [q for _, q in profile]
    return ScanReport(
        kind="compactness",
        cells=tuple(cells),
        checks=(),
        metadata=_metadata(
            theta=theta,
            alpha=alpha,
            beta=beta,
            s_star=s_star,
            measure=measure_id(m),
            n_big=n_big,
            tail_norm_strictly_decreasing=_strictly_decreasing(tails),
            f_tilde_image_strictly_decreasing=_strictly_decreasing(images),
            profile_last=quotients[-1],
            profile_max=max(quotients),
        ),
    )


def lambda_mu_experiment(
    m: MeasureSpec,
    lam: float,
    theta: float,
    alpha: float,
    beta: float,
    n_grid: Sequence[int],
    n_keep_grid: Sequence[int] = (),
    n_big: int = 1024,
    tol: float = DEFAULT_POWER_TOL,
    jobs: int = 1,
) -> ScanReport:
    """Carleson evidence for nu = (1 - t)^(lambda - 1) mu next to the H_lambda^mu norms."""
    op = "experiments.lambda_mu_experiment"
    _require_unit_interval(alpha, beta, op)
    ns = _sorted_n(n_grid, op)
    nu = lambda_transform(m, lam)
    spec = OperatorSpec.h_lambda_mu(lam, m, theta, alpha, beta)
    s_star = spec.s_star
    constant = carleson_constant(nu, s_star)
    profile = vanishing_profile(nu, s_star)

    norm_tasks = [{"spec": spec, "n": n, "tol": tol} for n in ns]
    norms = run_cells(_op_norm_cell, norm_tasks, jobs, desc="lambda-mu op_norm")
    keeps = sorted({int(k) for k in n_keep_grid})
    tail_tasks = [{"spec": spec, "n_keep": k, "n_big": n_big, "tol": tol} for k in keeps]
    tails = run_cells(_tail_norm_cell, tail_tasks, jobs, desc="lambda-mu tail_norm")

    cells = [ScanCell("op_norm", lam, n, v) for n, v in zip(ns, norms)]
    cells += [ScanCell("tail_norm", float(k), n_big, v) for k, v in zip(keeps, tails)]
    cells += [ScanCell("vanishing_profile", t, j, q) for j, (t, q) in enumerate(profile)]
    cells.append(ScanCell("carleson_constant", s_star, 0, constant))
    cells = _with_ratios(cells)
    return ScanReport(
        kind="lambda_mu",
        cells=tuple(cells),
        checks=(_nesting_check(cells, "op_norm"),),
        metadata=_metadata(
            theta=theta,
            alpha=alpha,
            beta=beta,
            lam=lam,
            s_star=s_star,
            measure=measure_id(m),
            transformed_measure=measure_id(nu),
            carleson_constant=constant,
            growth_ratio=ScanReport(kind="", cells=tuple(cells)).growth_ratio("op_norm", lam),
            tail_norm_strictly_decreasing=_strictly_decreasing(tails),
            profile_last=profile[-1][1],
        ),
    )


# ---------------------------------------------------------------------------
# Lemma checks
# ---------------------------------------------------------------------------


def check_lemma_w_bounds(
    theta: float,
    alpha: float,
    beta: float,
    n_list: Sequence[int],
    k_list: Sequence[int],
    bound_scale: float = 1.0,
) -> ScanReport:
    """w1(n) <= B (n + theta)^-beta and w2(k) <= B (k + theta)^alpha.

    B = B((1 + beta)/2, (1 - alpha)/2). A weight passes only if value plus its
    certified remainder stays under the bound.
    """
    _require_unit_interval(alpha, beta, "experiments.check_lemma_w_bounds")
    b_const = lemma_beta_bound(alpha, beta)
    cells: List[ScanCell] = []
    checks: List[CheckResult] = []
    for which, indices, exponent in ((1, n_list, -beta), (2, k_list, alpha)):
        for index in indices:
            value, remainder = lemma_weight(theta, alpha, beta, int(index), which)
            bound = bound_scale * b_const * (index + theta) ** exponent
            cells.append(ScanCell(f"w{which}", float(index), int(index), value))
            checks.append(
                CheckResult(
                    name=f"w{which}({index})",
                    ok=value + remainder <= bound,
                    value=value,
                    bound=bound,
                    detail=f"certified remainder {remainder:.3g}",
                )
            )
            checks.append(
                CheckResult(
                    name=f"w{which}({index})_remainder",
                    ok=remainder < LEMMA_TAIL_TOL,
                    value=remainder,
                    bound=LEMMA_TAIL_TOL,
                )
            )
    return ScanReport(
        kind="lemma_w_bounds",
        cells=tuple(cells),
        checks=tuple(checks),
        metadata=_metadata(theta=theta, alpha=alpha, beta=beta, beta_constant=b_const),
    )


def _est_series(c: float, x: float) -> Tuple[float, int]:
    """sum_{n >= 1} n^(c - 1) x^n with a ratio-based tail below EST_TAIL_TOL (after scaling)."""
    scale = (1.0 - x) ** c
    total = 0.0
    start = 1
    chunk = 4096
    log_x = math.log(x)
    while True:
        n = np.arange(start, start + chunk, dtype=float)
        terms = np.exp((c - 1.0) * np.log(n) + n * log_x)
        total += float(np.sum(terms))
        last_n = n[-1]
        ratio = max(((last_n + 1.0) / last_n) ** (c - 1.0) * x, x)
        if ratio < 1.0:
            tail = float(terms[-1]) * ratio / (1.0 - ratio)
            if tail * scale <= EST_TAIL_TOL:
                return scale * total, int(last_n)
        start += chunk


def check_est(c: float, w_list: Sequence[float]) -> ScanReport:
    """R(w) = (1 - w^2)^c sum_{n >= 1} n^(c - 1) w^(2n) over w_list, with its bracket."""
    op = "experiments.check_est"
    if not c > 0:
        raise DomainError(op, f"c must be > 0, got {c}")
    ws = [float(w) for w in _require_grid(w_list, "w", op)]
    if any(not 0.0 < w < 1.0 for w in ws):
        raise DomainError(op, "w values must lie in (0, 1)")
    cells = []
    for w in ws:
        value, terms = _est_series(c, w * w)
        cells.append(ScanCell("est_ratio", w, terms, value))
    values = [cell.value for cell in cells]
    r_min, r_max = min(values), max(values)
    ok = all(math.isfinite(v) and v > 0 for v in values)
    return ScanReport(
        kind="est",
        cells=tuple(cells),
        checks=(CheckResult(name=f"est_bracket(c={c:g})", ok=ok, value=r_min, bound=r_max),),
        metadata=_metadata(c=c, r_min=r_min, r_max=r_max),
    )


def moment_lemma_check(
    m: MeasureSpec, theta: float, alpha: float, beta: float, n_max: int
) -> ScanReport:
    """mu[n] (n + 2 theta)^s* over n <= n_max: its sup and where it ends up."""
    profile = moment_decay_profile(m, theta, alpha, beta, n_max)
    values = [v for _, v in profile]
    sup = max(values)
    cells = [ScanCell("moment_decay", float(n), n, v) for n, v in profile]
    return ScanReport(
        kind="moment_lemma",
        cells=tuple(cells),
        checks=(
            CheckResult(
                name="moment_decay_finite", ok=math.isfinite(sup), value=sup, bound=math.inf
            ),
        ),
        metadata=_metadata(
            theta=theta,
            alpha=alpha,
            beta=beta,
            measure=measure_id(m),
            sup=sup,
            last=values[-1],
            last_over_sup=values[-1] / sup if sup > 0 else float("nan"),
        ),
    )


def verify_lemmas(
    theta: float,
    alpha: float,
    beta: float,
    n_list: Sequence[int] = tuple(range(65)),
    k_list: Sequence[int] = tuple(range(65)),
    est_c: Sequence[float] = DEFAULT_EST_C,
    est_w: Sequence[float] = DEFAULT_EST_W,
    hcheck_n: Sequence[int] = DEFAULT_HCHECK_N,
    stirling_points: Sequence[float] = DEFAULT_STIRLING_POINTS,
    bound_scale: float = 1.0,
    tol: float = DEFAULT_POWER_TOL,
) -> ScanReport:
    """Lemma weights, Stirling sandwich, the series estimate and the hcheck Beta ceiling."""
    lemma = check_lemma_w_bounds(theta, alpha, beta, n_list, k_list, bound_scale)
    cells = list(lemma.cells)
    checks = list(lemma.checks)

    for x in stirling_points:
        r = abs(math.expm1(stirling_ratio_log(x)))
        bound = bound_scale * stirling_bound(x)
        cells.append(ScanCell("stirling_remainder", float(x), 0, r))
        checks.append(CheckResult(name=f"stirling({x:g})", ok=r <= bound, value=r, bound=bound))

    for c in est_c:
        est = check_est(c, est_w)
        cells.extend(est.cells)
        checks.extend(est.checks)

    b_const = lemma_beta_bound(alpha, beta)
    spec = OperatorSpec.h_check(theta, alpha, beta)
    ns = sorted({int(n) for n in hcheck_n})
    for n in ns:
        T = build_truncated(spec, n)
        value = op_norm(T, tol)
        ceiling = bound_scale * b_const + HCHECK_SLACK
        cells.append(ScanCell("hcheck_op_norm", float(n), n, value))
        checks.append(
            CheckResult(name=f"hcheck_norm(N={n})", ok=value <= ceiling, value=value, bound=ceiling)
        )
    if ns:
        T = build_truncated(spec, ns[-1])
        idx = np.arange(T.dim) + theta
        ceiling = bound_scale * b_const + HCHECK_SLACK
        sums = (
            ("row", float(np.max(weighted_row_sums(T) * idx**beta))),
            ("column", float(np.max(weighted_column_sums(T) * idx ** (-alpha)))),
        )
        for label, value in sums:
            checks.append(
                CheckResult(
                    name=f"hcheck_{label}_sums(N={ns[-1]})",
                    ok=value <= ceiling,
                    value=value,
                    bound=ceiling,
                )
            )

    report = ScanReport(
        kind="verify_lemmas",
        cells=tuple(cells),
        checks=tuple(checks),
        metadata=_metadata(
            theta=theta, alpha=alpha, beta=beta, beta_constant=b_const, bound_scale=bound_scale
        ),
    )
    if not report.ok:
        logger.warning(
            "verify-lemmas: %d of %d checks violated", len(report.violations), len(checks)
        )
    return report


# ---------------------------------------------------------------------------
# Disk model
# ---------------------------------------------------------------------------


def proposition_scan(
    model: XpModel,
    lambda_grid: Sequence[float],
    n_grid: Sequence[int],
    jobs: int = 1,
) -> ScanReport:
    """Partial sums of the X_p quantity of the lambda-operator applied to the f_hat witness."""
    op = "experiments.proposition_scan"
    lambdas = [float(v) for v in _require_grid(lambda_grid, "lambda", op)]
    ns = _sorted_n(n_grid, op)
    tasks = [
        {"model": model, "lam": lam, "eps": witness_eps(model, lam), "n": n}
        for lam in lambdas
        for n in ns
    ]
    values = run_cells(_xp_cell, tasks, jobs, desc="proposition scan")
    cells = _with_ratios([ScanCell("xp_norm", t["lam"], t["n"], v) for t, v in zip(tasks, values)])
    return ScanReport(
        kind="proposition_scan",
        cells=tuple(cells),
        checks=(_nesting_check(cells, "xp_norm"),),
        metadata=_metadata(
            model=model.label,
            p=model.p,
            g_x=model.g_x,
            eps={f"{lam:g}": witness_eps(model, lam) for lam in lambdas},
            growth_ratios=_growth_ratios(cells, "xp_norm"),
        ),
    )


def norm_bracket(values: Sequence[float]) -> float:
    """Smallest C with every value in [1/C, C]."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0 or np.any(arr <= 0):
        raise DomainError("experiments.norm_bracket", "values must be positive")
    return float(max(arr.max(), 1.0 / arr.min()))


def family_norm_scan(theta: float, alpha: float, w_grid: Sequence[float], n: int) -> ScanReport:
    """Squared norms of f_w (in F^2_{theta, alpha}) and their bracket constant over w_grid."""
    weight = FockWeight(theta, alpha)
    cells = []
    for w in w_grid:
        f = make_f_w(float(w), weight, n)
        cells.append(ScanCell("f_w_norm_sq", float(w), n, norm(f, weight) ** 2))
    bracket = norm_bracket([c.value for c in cells])
    return ScanReport(
        kind="family_norms",
        cells=tuple(cells),
        metadata=_metadata(theta=theta, alpha=alpha, bracket=bracket),
    )
