"""Command-line front end.

    propfrac eval   --op left-int --alpha 0.5 --rho 1 --kernel identity --a 0 --f 1 --grid 0.5:1.5:3
    propfrac verify --suite all
    propfrac table  specs.txt --out-dir out/

Exit codes: 0 success, 1 verification failure, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import os
import shlex
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import expr as ex
from . import kernels as K
from .fracderiv import StencilError, left_caputo, left_rl_deriv, right_caputo, right_rl_deriv
from .fracint import ConvergenceWarning, EvalTable, QuadConfig, left_integral, right_integral
from .propderiv import prop_deriv_n, prop_integral_1
from .verify import SUITES, run_suite

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
ENV_REL_TOL = "PROPFRAC_REL_TOL"

OPS = ("left-int", "right-int", "left-rl", "right-rl", "left-caputo", "right-caputo", "prop-deriv", "prop-int")
FRACTIONAL = {"left-int", "right-int", "left-rl", "right-rl", "left-caputo", "right-caputo"}
RIGHT_OPS = {"right-int", "right-rl", "right-caputo"}


class SpecError(ValueError):
    """Invalid operator specification or grid (exit code 2)."""


class NumericalFailure(RuntimeError):
    """Evaluation failed at a grid point (exit code 3)."""

    def __init__(self, t: float, message: str):
        super().__init__(f"numerical failure at t={t!r}: {message}")
        self.t = t


@dataclass(frozen=True)
class Grid:
    start: float
    end: float
    steps: int

    @classmethod
    def parse(cls, text: str) -> "Grid":
        parts = text.split(":")
        if len(parts) != 3:
            raise SpecError(f"grid must be start:end:steps, got {text!r}")
        try:
            start, end, steps = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as err:
            raise SpecError(f"bad grid {text!r}: {err}") from None
        if not (math.isfinite(start) and math.isfinite(end)):
            raise SpecError("grid endpoints must be finite")
        if steps < 1:
            raise SpecError("grid needs at least one step")
        if steps == 1 and start != end:
            raise SpecError("a one-point grid needs start == end")
        if steps > 1 and not end > start:
            raise SpecError("grid end must exceed start")
        return cls(start, end, steps)

    def points(self) -> np.ndarray:
        return np.linspace(self.start, self.end, self.steps)

    def __str__(self) -> str:
        return f"{self.start!r}:{self.end!r}:{self.steps}"


@dataclass(frozen=True)
class OperatorSpec:
    op: str
    f: str
    kernel: str = "identity"
    alpha: float | None = None
    rho: float = 1.0
    anchor: float | None = None
    n: int = 1  # iteration count for prop-deriv

    @property
    def side(self) -> str:
        return "right" if self.op in RIGHT_OPS else "left"

    def validate(self) -> tuple[ex.ExprAst, K.KernelFunction]:
        """Check parameter constraints; returns the parsed expression and kernel."""
        if self.op not in OPS:
            raise SpecError(f"unknown op {self.op!r}; choose from {', '.join(OPS)}")
        try:
            ast = ex.parse(self.f)
        except ex.ExprError as err:
            raise SpecError(f"f: {err}") from None
        try:
            kernel = K.parse_kernel(self.kernel)
        except (K.KernelError, ex.ExprError) as err:
            raise SpecError(f"kernel: {err}") from None
        if self.op == "prop-deriv":
            if not 0 <= self.rho <= 1:
                raise SpecError(f"rho must be in [0, 1] for prop-deriv, got {self.rho}")
            if not 1 <= self.n <= 4:
                raise SpecError(f"n must be in 1..4, got {self.n}")
            return ast, kernel
        if not 0 < self.rho <= 1:
            raise SpecError(f"rho must be in (0, 1], got {self.rho}")
        if self.anchor is None or not math.isfinite(self.anchor):
            raise SpecError(f"{self.op} needs a finite anchor (--{'b' if self.side == 'right' else 'a'})")
        if not kernel.contains(self.anchor, closed=True):
            raise SpecError(f"anchor {self.anchor} is outside the kernel domain {kernel.domain}")
        if self.op in FRACTIONAL:
            if self.alpha is None or not math.isfinite(self.alpha):
                raise SpecError(f"{self.op} needs --alpha")
            if self.op.endswith("-rl"):
                if self.alpha < 0:
                    raise SpecError(f"alpha must be >= 0 for RL derivatives, got {self.alpha}")
            elif not self.alpha > 0:
                raise SpecError(f"alpha must be > 0 for {self.op}, got {self.alpha}")
            if not self.op.endswith("-int") and math.floor(self.alpha) + 1 > 4:
                raise SpecError(f"alpha must be < 4 for derivatives, got {self.alpha}")
        return ast, kernel

    def check_grid(self, grid: Grid, kernel: K.KernelFunction) -> None:
        ts = grid.points()
        if self.op == "prop-deriv":
            if not kernel.contains(ts):
                raise SpecError(f"grid leaves the kernel domain {kernel.domain}")
            return
        # integrals vanish at the anchor; derivatives need room for stencils
        strict = self.op.endswith(("-rl", "-caputo"))
        if self.side == "left":
            bad = ts <= self.anchor if strict else ts < self.anchor
        else:
            bad = ts >= self.anchor if strict else ts > self.anchor
        if bad.any():
            where = "above" if self.side == "left" else "below"
            rel = "strictly " if strict else ""
            raise SpecError(f"grid must lie {rel}{where} the anchor {self.anchor} for {self.op}")
        if not kernel.contains(ts, closed=True):
            raise SpecError(f"grid leaves the kernel domain {kernel.domain}")

    def canonical(self) -> str:
        parts = [f"op={self.op}", f"f={self.f}", f"kernel={self.kernel}", f"rho={self.rho!r}"]
        if self.alpha is not None:
            parts.append(f"alpha={self.alpha!r}")
        if self.anchor is not None:
            parts.append(f"{'b' if self.side == 'right' else 'a'}={self.anchor!r}")
        if self.op == "prop-deriv":
            parts.append(f"n={self.n}")
        return " ".join(parts)


def _evaluate_point(spec: OperatorSpec, t: float, cfg: QuadConfig):
    """Returns ``(value, error_estimate, converged, failure_message)`` for one grid point."""
    ast, kernel = spec.validate()
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ConvergenceWarning)
            if spec.op == "prop-deriv":
                value, err = float(prop_deriv_n(ast, kernel, spec.rho, spec.n, t)), 0.0
            elif spec.op == "prop-int":
                value, err = prop_integral_1(ast, kernel, spec.rho, spec.anchor, t, cfg)
            else:
                fn = {
                    "left-int": left_integral, "right-int": right_integral,
                    "left-rl": left_rl_deriv, "right-rl": right_rl_deriv,
                    "left-caputo": left_caputo, "right-caputo": right_caputo,
                }[spec.op]
                value, err = fn(ast, kernel, spec.alpha, spec.rho, spec.anchor, t, cfg)
    except (ex.DomainError, K.KernelError, StencilError, ValueError, ArithmeticError) as e:
        return math.nan, math.nan, False, str(e)
    converged = not any(issubclass(w.category, ConvergenceWarning) for w in caught)
    if not (math.isfinite(value) and math.isfinite(err)):
        return value, err, False, "non-finite result"
    return float(value), float(err), converged, None


def _point_task(args):
    return _evaluate_point(*args)


def cmd_eval(spec: OperatorSpec, grid: Grid, cfg: QuadConfig | None = None, jobs: int = 1,
             strict: bool = False, warn=None) -> EvalTable:
    """Evaluate ``spec`` on ``grid``.  Raises :class:`SpecError` or :class:`NumericalFailure`.

    Every point is computed independently, so the output does not depend on ``jobs``.
    """
    cfg = cfg or QuadConfig()
    _, kernel = spec.validate()
    spec.check_grid(grid, kernel)
    ts = grid.points()
    tasks = [(spec, float(t), cfg) for t in ts]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_point_task, tasks))
    else:
        results = [_point_task(task) for task in tasks]
    values, errors = [], []
    for t, (value, err, converged, failure) in zip(ts, results):
        if failure is not None:
            raise NumericalFailure(float(t), failure)
        if not converged:
            if strict:
                raise NumericalFailure(float(t), "quadrature did not reach tolerance")
            if warn is not None:
                warn(f"warning: quadrature did not reach tolerance at t={float(t)!r}")
        values.append(value)
        errors.append(err)
    return EvalTable(ts, np.array(values), np.array(errors), meta=asdict(spec))


def cmd_verify(suite: str, scale: float = 1.0, out=None, quiet: bool = False) -> bool:
    out = out or sys.stdout
    total = failed = 0
    for res in run_suite(suite, scale):
        total += 1
        if not res.passed:
            failed += 1
        if not quiet or not res.passed:
            print(res.line(), file=out)
    print(f"{suite}: {total - failed}/{total} cases passed", file=out)
    return failed == 0


# -- spec files ---------------------------------------------------------------

TABLE_KEYS = {"op", "f", "kernel", "alpha", "rho", "a", "b", "n", "grid"}


def parse_spec_line(line: str) -> tuple[OperatorSpec, Grid] | None:
    """Parse one ``key=value`` line; returns None for blank and comment lines."""
    try:
        tokens = shlex.split(line, comments=True)
    except ValueError as err:
        raise SpecError(f"cannot tokenize: {err}") from None
    if not tokens:
        return None
    fields = {}
    for tok in tokens:
        key, sep, value = tok.partition("=")
        if not sep:
            raise SpecError(f"expected key=value, got {tok!r}")
        if key not in TABLE_KEYS:
            raise SpecError(f"unknown key {key!r}")
        if key in fields:
            raise SpecError(f"duplicate key {key!r}")
        fields[key] = value
    for required in ("op", "f", "grid"):
        if required not in fields:
            raise SpecError(f"missing {required}=")
    op = fields["op"]
    if "a" in fields and "b" in fields:
        raise SpecError("give either a= or b=, not both")
    anchor_key = "b" if op in RIGHT_OPS else "a"
    other = "a" if anchor_key == "b" else "b"
    if other in fields:
        raise SpecError(f"{op} takes {anchor_key}=, not {other}=")
    try:
        spec = OperatorSpec(
            op=op,
            f=fields["f"],
            kernel=fields.get("kernel", "identity"),
            alpha=float(fields["alpha"]) if "alpha" in fields else None,
            rho=float(fields.get("rho", "1")),
            anchor=float(fields[anchor_key]) if anchor_key in fields else None,
            n=int(fields.get("n", "1")),
        )
    except ValueError as err:
        raise SpecError(f"bad number: {err}") from None
    return spec, Grid.parse(fields["grid"])


def table_filename(spec: OperatorSpec, grid: Grid) -> str:
    digest = hashlib.sha256(f"{spec.canonical()} grid={grid}".encode()).hexdigest()
    return f"{digest[:16]}.csv"


def cmd_table(path: Path, out_dir: Path, cfg: QuadConfig, jobs: int = 1, strict: bool = False,
              out=None, err=None) -> int:
    """Evaluate every spec line of ``path``; bad lines are reported and skipped."""
    out, err = out or sys.stdout, err or sys.stderr
    code = EXIT_OK
    out_dir.mkdir(parents=True, exist_ok=True)
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        try:
            parsed = parse_spec_line(line)
            if parsed is None:
                continue
            spec, grid = parsed
            table = cmd_eval(spec, grid, cfg, jobs, strict, warn=lambda m: print(f"line {lineno}: {m}", file=err))
        except SpecError as e:
            print(f"line {lineno}: {e}", file=err)
            code = max(code, EXIT_INPUT)
            continue
        except NumericalFailure as e:
            print(f"line {lineno}: {e}", file=err)
            code = max(code, EXIT_NUMERIC)
            continue
        target = out_dir / table_filename(spec, grid)
        target.write_text(table.to_csv(), newline="")
        print(f"line {lineno}: wrote {target}", file=out)
    return code


# -- argument parsing ---------------------------------------------------------

def _default_rel_tol() -> float:
    raw = os.environ.get(ENV_REL_TOL)
    if raw is None:
        return QuadConfig.rel_tol
    try:
        return float(raw)
    except ValueError:
        raise SpecError(f"{ENV_REL_TOL}={raw!r} is not a number") from None


def _quad_args(p: argparse.ArgumentParser):
    p.add_argument("--quad-base-nodes", type=int, default=QuadConfig.base_nodes)
    p.add_argument("--quad-max-nodes", type=int, default=QuadConfig.max_nodes)
    p.add_argument("--rel-tol", type=float, default=None,
                   help=f"relative tolerance (default {QuadConfig.rel_tol}, or ${ENV_REL_TOL})")
    p.add_argument("--abs-tol", type=float, default=QuadConfig.abs_tol)
    p.add_argument("--jobs", type=int, default=1, help="worker processes; output order is unaffected")
    p.add_argument("--strict", action="store_true", help="treat non-convergence as a numerical failure")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="propfrac", description="Generalized proportional fractional operators.")
    sub = parser.add_subparsers(dest="command", required=True)

    pe = sub.add_parser("eval", help="evaluate one operator on a t-grid, CSV to stdout or --output")
    pe.add_argument("--op", required=True, choices=OPS)
    pe.add_argument("--f", required=True, help="expression in x")
    pe.add_argument("--kernel", default="identity", help="identity | log | power:MU | shifted-power:MU:A | expr:EXPR")
    pe.add_argument("--alpha", type=float)
    pe.add_argument("--rho", type=float, default=1.0)
    pe.add_argument("--a", type=float, help="left anchor (left ops, prop-int)")
    pe.add_argument("--b", type=float, help="right anchor (right ops)")
    pe.add_argument("--n", type=int, default=1, help="iteration count for prop-deriv")
    pe.add_argument("--grid", required=True, help="start:end:steps, both ends included")
    pe.add_argument("--output", type=Path)
    _quad_args(pe)

    pv = sub.add_parser("verify", help="run built-in verification suites")
    pv.add_argument("--suite", default="all", choices=[*SUITES, "all"])
    pv.add_argument("--tol-scale", type=float, default=1.0, help="multiply every tolerance by this factor")
    pv.add_argument("--quiet", action="store_true", help="print failures and the summary only")

    pt = sub.add_parser("table", help="evaluate a file of key=value spec lines, one CSV per line")
    pt.add_argument("file", type=Path)
    pt.add_argument("--out-dir", type=Path, default=Path("."))
    _quad_args(pt)
    return parser


def _config(args) -> QuadConfig:
    rel = args.rel_tol if args.rel_tol is not None else _default_rel_tol()
    try:
        return QuadConfig(args.quad_base_nodes, args.quad_max_nodes, rel, args.abs_tol)
    except ValueError as err:
        raise SpecError(str(err)) from None


def _run_eval(args) -> int:
    if args.op in RIGHT_OPS:
        if args.a is not None:
            raise SpecError(f"{args.op} takes --b, not --a")
        anchor = args.b
    else:
        if args.b is not None:
            raise SpecError(f"{args.op} takes --a, not --b")
        anchor = args.a
    spec = OperatorSpec(args.op, args.f, args.kernel, args.alpha, args.rho, anchor, args.n)
    table = cmd_eval(spec, Grid.parse(args.grid), _config(args), max(1, args.jobs), args.strict,
                     warn=lambda m: print(m, file=sys.stderr))
    text = table.to_csv()
    if args.output is None:
        sys.stdout.write(text)
    else:
        args.output.write_text(text, newline="")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "eval":
            return _run_eval(args)
        if args.command == "verify":
            return EXIT_OK if cmd_verify(args.suite, args.tol_scale, quiet=args.quiet) else EXIT_VERIFY
        if not args.file.is_file():
            raise SpecError(f"no such spec file: {args.file}")
        return cmd_table(args.file, args.out_dir, _config(args), max(1, args.jobs), args.strict)
    except SpecError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalFailure as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
