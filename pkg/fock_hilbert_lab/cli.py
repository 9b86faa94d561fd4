"""
Command-line interface for the Fock-space Hilbert-operator laboratory.
"""

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from . import experiments
from .errors import (
    BoundViolation,
    ConfigError,
    FockLabError,
    NonConvergenceError,
    NumericalOverflowError,
)
from .hilbert_ops import apply, build_truncated, op_norm
from .models import (
    CoeffVec,
    MeasureSpec,
    OperatorKind,
    OperatorSpec,
    ScanCell,
    ScanReport,
    XpModel,
    measure_id,
)
from .numeric_config import DEFAULT_POWER_TOL, default_jobs
from .radial_measure import carleson_constant, measure_from_json, moment_table, vanishing_profile
from .reporting import (
    export_worksheets,
    print_summary,
    report_to_frame,
    write_csv,
    write_json,
)

PACKAGE_LOGGER = "fock_hilbert_lab"

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2
EXIT_NONCONVERGENCE = 3

COMMANDS = (
    "moments",
    "carleson",
    "opnorm",
    "apply",
    "scan-threshold",
    "scan-carleson",
    "compactness",
    "verify-lemmas",
    "hardy-scan",
    "scan-lambda-mu",
)


@dataclass
class RunConfig:
    """Everything one invocation needs; JSON config files use these field names."""

    command: str = ""
    theta: float = 1.0
    alpha: float = 0.0
    beta: float = 0.0
    lam: Optional[float] = None
    s: Optional[float] = None
    dim: Optional[int] = None
    n: Optional[int] = None
    measure: Optional[str] = None
    op: str = "hlambda"
    grid_lambda: List[float] = field(default_factory=list)
    grid_n: List[int] = field(default_factory=list)
    grid_w: List[float] = field(default_factory=list)
    grid_s: List[float] = field(default_factory=list)
    grid_keep: List[int] = field(default_factory=list)
    n_big: int = 1024
    coeffs: Optional[str] = None
    model: str = "hardy"
    p: float = 2.0
    model_alpha: Optional[float] = None
    g_x: Optional[float] = None
    out: Optional[str] = None
    format: str = "csv"
    tol: float = DEFAULT_POWER_TOL
    jobs: int = 1
    bound_scale: float = 1.0
    verbose: bool = False
    log_file: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


_FIELD_NAMES = {f.name for f in fields(RunConfig)}


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def _float_list(text: str) -> List[float]:
    try:
        return [float(tok) for tok in text.replace(" ", "").split(",") if tok]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _int_list(text: str) -> List[int]:
    try:
        return [int(tok) for tok in text.replace(" ", "").split(",") if tok]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated integers, got {text!r}"
        ) from exc


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--theta", type=float, help="Weight parameter theta > 0. Default: 1")
    common.add_argument("--alpha", type=float, help="Source exponent alpha. Default: 0")
    common.add_argument("--beta", type=float, help="Target exponent beta. Default: 0")
    common.add_argument("--lambda", dest="lam", type=float, help="Operator exponent lambda > 0")
    common.add_argument(
        "--s", type=float, help="Carleson exponent (default: 1 + (beta - alpha)/2)"
    )
    common.add_argument("--N", dest="dim", type=int, help="Truncation size")
    common.add_argument("--n", dest="n", type=int, help="Largest moment index")
    common.add_argument(
        "--measure",
        help=(
            'Measure as inline JSON (e.g. \'{"type":"power","c":1,"s":1}\') '
            "or a path to a JSON file"
        ),
    )
    common.add_argument(
        "--op",
        choices=[kind.value for kind in OperatorKind],
        help="Operator kind. Default: hlambda",
    )
    common.add_argument("--grid-lambda", type=_float_list, help="Comma-separated lambda values")
    common.add_argument(
        "--grid-N", dest="grid_n", type=_int_list, help="Comma-separated truncations"
    )
    common.add_argument("--grid-w", type=_float_list, help="Comma-separated w values in (0, 1)")
    common.add_argument("--grid-s", type=_float_list, help="Comma-separated Carleson exponents")
    common.add_argument("--grid-keep", type=_int_list, help="Comma-separated N_keep values")
    common.add_argument(
        "--N-big",
        dest="n_big",
        type=int,
        help="Large truncation for tail norms. Default: 1024",
    )
    common.add_argument("--coeffs", help="Coefficient file for apply: one 're im' pair per line")
    common.add_argument(
        "--model",
        choices=["hardy", "dirichlet", "bergman", "custom"],
        help="Disk space for hardy-scan. Default: hardy",
    )
    common.add_argument("--p", type=float, help="Exponent p > 1 of the disk space. Default: 2")
    common.add_argument("--model-alpha", type=float, help="Dirichlet/Bergman weight alpha")
    common.add_argument("--g-x", dest="g_x", type=float, help="G_X for the custom disk model")
    common.add_argument("--out", help="Output file. Default: stdout")
    common.add_argument(
        "--format", choices=["csv", "json", "xlsx"], help="Output format. Default: csv"
    )
    common.add_argument(
        "--tol", type=float, help="Power-iteration relative tolerance. Default: 1e-12"
    )
    common.add_argument(
        "--jobs",
        type=int,
        help="Parallel scan workers. Default: $FHL_DEFAULT_JOBS or 1",
    )
    common.add_argument(
        "--bound-scale",
        type=float,
        help=(
            "Multiply every certified bound by this factor "
            "(values < 1 inject violations). Default: 1"
        ),
    )
    common.add_argument("--config", help="JSON file of RunConfig defaults")
    common.add_argument("--verbose", action="store_true", default=None, help="Enable debug logging")
    common.add_argument("--log-file", help="Mirror all log output to this file")

    parser = argparse.ArgumentParser(
        prog="fock-hilbert-lab",
        description=(
            "Hilbert-type operators between weighted Fock spaces: norms, scans and lemma checks"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "moments": "Moment table mu[0..n] of a measure",
        "carleson": "Carleson constant and vanishing profile",
        "opnorm": "Largest singular value of an N x N truncation",
        "apply": "Image coefficients of a coefficient file",
        "scan-threshold": "H_lambda norms over lambda x N",
        "scan-carleson": "H_mu norms next to the Carleson constant",
        "compactness": "Tail norms, f_tilde images and vanishing profile",
        "verify-lemmas": "Lemma weights, Stirling sandwich, series estimate, hcheck ceiling",
        "hardy-scan": "Disk-model necessity scan",
        "scan-lambda-mu": "H_lambda^mu norms next to the transformed Carleson constant",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name], allow_abbrev=False)
    return parser


def _load_config_file(path: str) -> Dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError("cli.run", f"cannot read config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("cli.run", f"config file {path} must hold a JSON object")
    unknown = sorted(set(data) - _FIELD_NAMES)
    if unknown:
        raise ConfigError("cli.run", f"unknown config keys: {', '.join(unknown)}")
    return data


def parse_run_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """argv -> RunConfig; flags override --config values, which override defaults."""
    args = _build_parser().parse_args(argv)
    values: Dict[str, Any] = {}
    if args.config:
        values.update(_load_config_file(args.config))
    for name, value in vars(args).items():
        if name in _FIELD_NAMES and value is not None:
            values[name] = value
    if "jobs" not in values:
        values["jobs"] = default_jobs()
    try:
        config = RunConfig(**values)
    except TypeError as exc:
        raise ConfigError("cli.run", str(exc)) from exc
    _validate(config)
    return config


def _validate(config: RunConfig) -> None:
    if config.command not in COMMANDS:
        raise ConfigError("cli.run", f"unknown command {config.command!r}")
    if config.theta <= 0:
        raise ConfigError("cli.run", f"--theta must be > 0, got {config.theta}")
    if config.jobs < 1:
        raise ConfigError("cli.run", f"--jobs must be >= 1, got {config.jobs}")
    if config.tol <= 0:
        raise ConfigError("cli.run", f"--tol must be > 0, got {config.tol}")
    if config.bound_scale <= 0:
        raise ConfigError("cli.run", f"--bound-scale must be > 0, got {config.bound_scale}")
    if config.format not in ("csv", "json", "xlsx"):
        raise ConfigError("cli.run", f"unknown format {config.format!r}")
    if config.format == "xlsx" and not config.out:
        raise ConfigError("cli.run", "--format xlsx needs --out")


def _load_measure(config: RunConfig) -> MeasureSpec:
    if not config.measure:
        raise ConfigError("cli.run", f"{config.command} needs --measure")
    raw = config.measure.strip()
    if not raw.startswith("{"):
        path = Path(raw)
        if not path.is_file():
            raise ConfigError("cli.run", f"--measure is neither inline JSON nor a file: {raw}")
        raw = path.read_text(encoding="utf-8")
    return measure_from_json(raw)


def _load_coeffs(path_str: Optional[str]) -> CoeffVec:
    if not path_str:
        raise ConfigError("cli.run", "apply needs --coeffs")
    path = Path(path_str)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError("cli.run", f"cannot read coefficient file {path}: {exc}") from exc
    values = []
    for line_num, line in enumerate(lines, start=1):
        tokens = line.split("#", 1)[0].split()
        if not tokens:
            continue
        if len(tokens) > 2:
            raise ConfigError("cli.run", f"{path}:{line_num}: expected 're im'")
        try:
            re_part = float(tokens[0])
            im_part = float(tokens[1]) if len(tokens) == 2 else 0.0
        except ValueError as exc:
            raise ConfigError("cli.run", f"{path}:{line_num}: {exc}") from exc
        values.append(complex(re_part, im_part))
    if not values:
        raise ConfigError("cli.run", f"{path} holds no coefficients")
    return CoeffVec.from_taylor(values)


def _require(value: Any, flag: str, command: str) -> Any:
    if value is None or (isinstance(value, list) and not value):
        raise ConfigError("cli.run", f"{command} needs {flag}")
    return value


def _operator_spec(config: RunConfig) -> OperatorSpec:
    kind = OperatorKind(config.op)
    theta, alpha, beta = config.theta, config.alpha, config.beta
    if kind is OperatorKind.H_LAMBDA:
        lam = _require(config.lam, "--lambda", config.command)
        return OperatorSpec.h_lambda(lam, theta, alpha, beta)
    if kind is OperatorKind.H_CHECK:
        return OperatorSpec.h_check(theta, alpha, beta)
    if kind is OperatorKind.H_MU:
        return OperatorSpec.h_mu(_load_measure(config), theta, alpha, beta)
    return OperatorSpec.h_lambda_mu(
        _require(config.lam, "--lambda", config.command), _load_measure(config), theta, alpha, beta
    )


def _xp_model(config: RunConfig) -> XpModel:
    if config.model == "hardy":
        return XpModel.hardy(config.p)
    if config.model in ("dirichlet", "bergman"):
        model_alpha = _require(config.model_alpha, "--model-alpha", config.command)
        if config.model == "dirichlet":
            return XpModel.dirichlet(config.p, model_alpha)
        return XpModel.bergman(config.p, model_alpha)
    return XpModel.custom(_require(config.g_x, "--g-x", config.command), config.p)


# ---------------------------------------------------------------------------
# Commands: each returns (report, frame written for csv/xlsx)
# ---------------------------------------------------------------------------

CommandResult = Tuple[ScanReport, pd.DataFrame]


def _cmd_moments(config: RunConfig) -> CommandResult:
    m = _load_measure(config)
    n_max = _require(config.n, "--n", config.command)
    table = moment_table(m, max(1, n_max))
    values = table.values[: n_max + 1]
    cells = tuple(ScanCell("moment", float(i), i, float(v)) for i, v in enumerate(values))
    report = ScanReport(kind="moments", cells=cells, metadata={"measure": measure_id(m)})
    frame = pd.DataFrame({"n": np.arange(values.size), "moment": values})
    return report, frame


def _cmd_carleson(config: RunConfig) -> CommandResult:
    m = _load_measure(config)
    default_s = config.s if config.s is not None else 1.0 + 0.5 * (config.beta - config.alpha)
    s_values = config.grid_s or [default_s]
    cells: List[ScanCell] = []
    for s in s_values:
        cells.append(ScanCell("carleson_constant", s, 0, carleson_constant(m, s)))
        cells.extend(
            ScanCell(f"vanishing_profile(s={s:g})", t, j, q)
            for j, (t, q) in enumerate(vanishing_profile(m, s))
        )
    report = ScanReport(kind="carleson", cells=tuple(cells), metadata={"measure": measure_id(m)})
    return report, report_to_frame(report)


def _cmd_opnorm(config: RunConfig) -> CommandResult:
    spec = _operator_spec(config)
    dim = _require(config.dim, "--N", config.command)
    value = op_norm(build_truncated(spec, dim), config.tol)
    report = ScanReport(
        kind="opnorm", cells=(ScanCell("op_norm", 0.0, dim, value),), metadata=spec.describe()
    )
    return report, report_to_frame(report)


def _cmd_apply(config: RunConfig) -> CommandResult:
    spec = _operator_spec(config)
    f = _load_coeffs(config.coeffs)
    out_len = config.dim or f.trunc
    image = apply(spec, f, out_len).coeffs
    cells = tuple(
        ScanCell("image_abs", float(i), out_len, float(abs(b))) for i, b in enumerate(image)
    )
    report = ScanReport(kind="apply", cells=cells, metadata=spec.describe())
    frame = pd.DataFrame({"n": np.arange(out_len), "re": image.real, "im": image.imag})
    return report, frame


def _cmd_scan_threshold(config: RunConfig) -> CommandResult:
    report = experiments.threshold_scan(
        config.theta,
        config.alpha,
        config.beta,
        _require(config.grid_lambda, "--grid-lambda", config.command),
        _require(config.grid_n, "--grid-N", config.command),
        tol=config.tol,
        jobs=config.jobs,
    )
    return report, report_to_frame(report)


def _cmd_scan_carleson(config: RunConfig) -> CommandResult:
    report = experiments.carleson_boundedness_experiment(
        _load_measure(config),
        config.theta,
        config.alpha,
        config.beta,
        _require(config.grid_n, "--grid-N", config.command),
        w_grid=config.grid_w,
        tol=config.tol,
        jobs=config.jobs,
    )
    return report, report_to_frame(report)


def _cmd_compactness(config: RunConfig) -> CommandResult:
    report = experiments.compactness_experiment(
        _load_measure(config),
        config.theta,
        config.alpha,
        config.beta,
        _require(config.grid_keep, "--grid-keep", config.command),
        _require(config.grid_w, "--grid-w", config.command),
        n_big=config.n_big,
        tol=config.tol,
        jobs=config.jobs,
    )
    return report, report_to_frame(report)


def _cmd_verify_lemmas(config: RunConfig) -> CommandResult:
    kwargs: Dict[str, Any] = {"bound_scale": config.bound_scale, "tol": config.tol}
    if config.n is not None:
        kwargs["n_list"] = tuple(range(config.n + 1))
        kwargs["k_list"] = tuple(range(config.n + 1))
    if config.grid_n:
        kwargs["hcheck_n"] = tuple(config.grid_n)
    if config.grid_w:
        kwargs["est_w"] = tuple(config.grid_w)
    report = experiments.verify_lemmas(config.theta, config.alpha, config.beta, **kwargs)
    return report, report_to_frame(report)


def _cmd_hardy_scan(config: RunConfig) -> CommandResult:
    report = experiments.proposition_scan(
        _xp_model(config),
        _require(config.grid_lambda, "--grid-lambda", config.command),
        _require(config.grid_n, "--grid-N", config.command),
        jobs=config.jobs,
    )
    return report, report_to_frame(report)


def _cmd_scan_lambda_mu(config: RunConfig) -> CommandResult:
    report = experiments.lambda_mu_experiment(
        _load_measure(config),
        _require(config.lam, "--lambda", config.command),
        config.theta,
        config.alpha,
        config.beta,
        _require(config.grid_n, "--grid-N", config.command),
        n_keep_grid=config.grid_keep,
        n_big=config.n_big,
        tol=config.tol,
        jobs=config.jobs,
    )
    return report, report_to_frame(report)


_DISPATCH: Dict[str, Callable[[RunConfig], CommandResult]] = {
    "moments": _cmd_moments,
    "carleson": _cmd_carleson,
    "opnorm": _cmd_opnorm,
    "apply": _cmd_apply,
    "scan-threshold": _cmd_scan_threshold,
    "scan-carleson": _cmd_scan_carleson,
    "compactness": _cmd_compactness,
    "verify-lemmas": _cmd_verify_lemmas,
    "hardy-scan": _cmd_hardy_scan,
    "scan-lambda-mu": _cmd_scan_lambda_mu,
}


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------


def _configure_logging(verbose: bool, log_file: Optional[str]) -> None:
    # Explicit handlers with propagate=False to prevent double-printing
    _fhl_logger = logging.getLogger(PACKAGE_LOGGER)
    _fhl_logger.propagate = False
    _fhl_logger.setLevel(logging.DEBUG)
    _fhl_logger.handlers.clear()

    _stream_handler = logging.StreamHandler()
    _stream_handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    _stream_handler.setLevel(logging.DEBUG if verbose else logging.WARNING)
    _fhl_logger.addHandler(_stream_handler)

    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        _file_handler = logging.FileHandler(log_file, encoding="utf-8")
        _file_handler.setFormatter(
            logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s")
        )
        _file_handler.setLevel(logging.DEBUG)
        _fhl_logger.addHandler(_file_handler)


def _emit(config: RunConfig, report: ScanReport, frame: pd.DataFrame) -> None:
    out = Path(config.out) if config.out else None
    if config.format == "xlsx":
        export_worksheets(report, out)
    elif config.format == "json":
        write_json(report, out if out else sys.stdout, config.to_dict())
    else:
        write_csv(frame, out if out else sys.stdout)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv``, run one subcommand and return the exit status."""
    _logger = logging.getLogger(PACKAGE_LOGGER)
    try:
        config = parse_run_config(argv)
    except ConfigError as exc:
        _configure_logging(False, None)
        _logger.error("Error: %s", exc)
        return EXIT_CONFIG
    except SystemExit as exc:
        # argparse already printed usage or help
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG

    _configure_logging(config.verbose, config.log_file)
    _logger.debug("run config: %s", config.to_dict())
    try:
        report, frame = _DISPATCH[config.command](config)
        _emit(config, report, frame)
        print(print_summary(report), file=sys.stderr)
        if not report.ok:
            raise BoundViolation(config.command, f"{len(report.violations)} bound(s) violated")
    except BoundViolation as exc:
        _logger.error("Error: %s", exc)
        return EXIT_VIOLATION
    except (NonConvergenceError, NumericalOverflowError) as exc:
        _logger.error("Error: %s", exc)
        return EXIT_NONCONVERGENCE
    except (FockLabError, OSError) as exc:
        _logger.error("Error: %s", exc)
        return EXIT_CONFIG
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> None:
    """Main entry point for the CLI."""
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
