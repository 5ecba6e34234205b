"""Command line front end: family sweeps, random-polytope bound checks and small utilities.

    affinv constants --family M --n-min 100 --n-max 1000 --step 50 --out m.csv
    affinv bounds --dim 3 --trials 200 --seed 42
    affinv mvee points.csv --epsilon 1e-9
    affinv centroid F1:3 montecarlo 1000000 7
    affinv chord square 0.5,0.25 0.25,0.5

Exit status: 0 success, 1 an invariant or bound was violated (or a cached
output differs), 2 usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import re
import sys
from dataclasses import dataclass, fields
from typing import Optional, Sequence

import numpy as np

from affinv.asymmetry import SweepRecord, asymmetry_d, bound_check, family_d, square_chord_d
from affinv.bodies import (
    BodySpec,
    Product,
    ScaledStandard,
    Simplex,
    Suspension,
    convex_hull,
    family_body,
    read_points_csv,
    unit_square,
)
from affinv.centroids import (
    centroid_height_family,
    limit_constants,
    monte_carlo_centroid,
    suspension_centroid_height,
    suspension_rows,
)
from affinv.ellipsoids import mvee, mvee_with_gap
from affinv.errors import (
    DegeneracyError,
    DomainError,
    FormulaDegenerateError,
    GeometryError,
    InfeasibleError,
)

__all__ = [
    "main",
    "build_parser",
    "fit_constant",
    "fit_gap_model",
    "sweep",
    "format_sweep_csv",
    "read_sweep_csv",
    "parse_body",
    "SpecError",
    "bounds_trial",
    "run_bounds",
    "load_config",
    "RunConfig",
]

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2
SWEEP_HEADER = ["family", "n", "point1", "point2", "d", "gap"]
MAX_SWEEP_N = 2000
MAX_RETRIES = 10


class UsageError(Exception):
    pass


# fitting


def fit_gap_model(records: Sequence[SweepRecord]) -> tuple[float, float, float]:
    """Least-squares ``gap(n) = C + D/n``; returns ``(C, D, max |residual|)``."""
    if len(records) < 4:
        raise DomainError("fit needs at least 4 records")
    n = np.array([r.n for r in records], dtype=float)
    if len(np.unique(n)) < 2:
        raise DomainError("fit design is rank deficient (all n equal)")
    gap = np.array([r.gap for r in records])
    design = np.column_stack([np.ones_like(n), 1.0 / n])
    (c, d), *_ = np.linalg.lstsq(design, gap, rcond=None)
    resid = gap - design @ np.array([c, d])
    return float(c), float(d), float(np.abs(resid).max())


def fit_constant(records: Sequence[SweepRecord]) -> float:
    return fit_gap_model(records)[0]


def family_targets(family: str) -> tuple[float, float]:
    """(published constant, first-order sweep limit) for a family."""
    lc = limit_constants()
    return {
        "M": (8.0, 8.0),
        "F": (lc.C_star, lc.F_sweep_limit),
        "W": (lc.C_star_star, lc.W_sweep_limit),
    }[family]


# sweeps and their CSV form


def sweep(family: str, n_min: int, n_max: int, step: int = 1) -> list[SweepRecord]:
    family = family.upper()
    if family not in ("F", "W", "M"):
        raise DomainError(f"family must be F, W or M, got {family!r}")
    if not 6 <= n_min <= n_max <= MAX_SWEEP_N:
        raise DomainError(f"need 6 <= n_min <= n_max <= {MAX_SWEEP_N}")
    if step < 1:
        raise DomainError("step must be >= 1")
    return [family_d(family, n) for n in range(n_min, n_max + 1, step)]


def format_sweep_csv(records: Sequence[SweepRecord], family: str) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for r in records:
        writer.writerow([r.family, r.n, repr(r.point1), repr(r.point2), repr(r.d), repr(r.gap)])
    target, limit = family_targets(family)
    if len(records) >= 4 and len({r.n for r in records}) >= 2:
        c, d, resid = fit_gap_model(records)
        buf.write(f"# fit C={c!r} D={d!r} max_residual={resid!r}\n")
    else:
        buf.write("# fit unavailable (needs >= 4 records)\n")
    buf.write(f"# target={target!r}\n")
    buf.write(f"# sweep_limit={limit!r}\n")
    return buf.getvalue()


def read_sweep_csv(path) -> tuple[list[SweepRecord], dict[str, float]]:
    """Records and ``key=value`` footer entries of a sweep file."""
    records, footer = [], {}
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    body = [ln for ln in lines if not ln.startswith("#")]
    for ln in lines:
        if ln.startswith("#"):
            for key, val in re.findall(r"(\w+)=(\S+)", ln):
                footer[key] = float(val)
    reader = csv.reader(body)
    header = next(reader, None)
    if header != SWEEP_HEADER:
        raise DomainError(f"{path}: unexpected header {header!r}")
    for lineno, row in enumerate(reader, start=2):
        try:
            records.append(SweepRecord(row[0], int(row[1]), *(float(v) for v in row[2:6])))
        except (ValueError, IndexError, TypeError):
            raise DomainError(f"{path}:{lineno}: malformed record {row!r}") from None
    return records, footer


# body spec mini-language
#   spec := NAME ':' INT ['*' NUMBER] | 'susp(' spec ',' spec [',' NUMBER] ')'
#         | 'prod(' spec ',' spec ')' | 'square'

_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d*)?(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)|([A-Za-z_][A-Za-z0-9_]*)|(\S))")
_STANDARD = {"cube": math.inf, "ball": 2, "cross": 1}
_FAMILIES = ("F1", "F2", "W1", "W2", "M1", "M2")


class SpecError(ValueError):
    pass


def _tokenize(text):
    tokens, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        number, name, punct = m.groups()
        if number is not None:
            tokens.append(("num", number))
        elif name is not None:
            tokens.append(("name", name))
        elif punct in "(),:*":
            tokens.append(("punct", punct))
        else:
            raise SpecError(f"unexpected token {punct!r} in body spec {text!r}")
        pos = m.end()
    return tokens


class _SpecParser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def _peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def _next(self, kind=None, value=None):
        tok = self._peek()
        if tok[0] is None:
            raise SpecError(f"body spec {self.text!r} ends early")
        if (kind and tok[0] != kind) or (value and tok[1] != value):
            want = value or kind
            raise SpecError(f"unexpected token {tok[1]!r} in body spec {self.text!r} (expected {want})")
        self.pos += 1
        return tok[1]

    def _int(self):
        tok = self._next("num")
        if not tok.isdigit() or int(tok) < 1:
            raise SpecError(f"unexpected token {tok!r}: dimension must be a positive integer")
        return int(tok)

    def parse(self) -> BodySpec:
        body = self._spec()
        if self.pos != len(self.tokens):
            raise SpecError(f"unexpected token {self._peek()[1]!r} after complete body spec")
        return body

    def _spec(self) -> BodySpec:
        name = self._next("name")
        low = name.lower()
        if low == "square":
            return unit_square()
        if low in ("susp", "prod"):
            self._next("punct", "(")
            a = self._spec()
            self._next("punct", ",")
            b = self._spec()
            height = 1.0
            if low == "susp" and self._peek() == ("punct", ","):
                self._next()
                height = float(self._next("num"))
            self._next("punct", ")")
            try:
                return Suspension(a, b, height) if low == "susp" else Product(a, b)
            except DomainError as exc:
                raise SpecError(f"invalid {low}(...): {exc}") from None
        if name.upper() in _FAMILIES:
            self._next("punct", ":")
            return family_body(name.upper(), self._int())
        if low in _STANDARD or low == "simplex":
            self._next("punct", ":")
            n = self._int()
            scale = 1.0
            if self._peek() == ("punct", "*"):
                self._next()
                scale = float(self._next("num"))
            if low == "simplex":
                if scale != 1.0:
                    raise SpecError("simplex does not take a scale")
                return Simplex(n)
            return ScaledStandard(_STANDARD[low], scale, n)
        raise SpecError(f"unexpected token {name!r}: unknown body name")


def parse_body(text: str) -> BodySpec:
    """Parse ``F1:8``, ``ball:3*0.5``, ``susp(cube:2,ball:2)``, ``prod(a,b)`` or ``square``."""
    return _SpecParser(text).parse()


def _parse_point(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise UsageError(f"malformed point {text!r}; expected comma-separated numbers") from None


# random polytope bound check


def bounds_trial(points, epsilon: float = 1e-9) -> float:
    """``d(g, l)`` for the hull of a cloud: exact centroid, MVEE center, clipped chord."""
    return _hull_d(convex_hull(points), epsilon)


def _hull_d(hull, epsilon):
    center = mvee(hull.vertices, epsilon).center
    return asymmetry_d(hull.body, hull.centroid, center).d


def run_bounds(dim: int, trials: int, seed: int, epsilon: float = 1e-9):
    """Rows ``(trial, retries, vertices, d, bound, ok)`` for Gaussian hulls."""
    if dim not in (2, 3):
        raise DomainError("bounds runs in dimension 2 or 3")
    if trials < 1:
        raise DomainError("trials must be >= 1")
    rows = []
    for trial in range(trials):
        for retry in range(MAX_RETRIES + 1):
            rng = np.random.default_rng([seed, trial, retry])
            pts = rng.standard_normal((4 * dim, dim))
            try:
                hull = convex_hull(pts)
                d = _hull_d(hull, epsilon)
            except (DegeneracyError, GeometryError):
                continue
            break
        else:
            raise DegeneracyError(f"trial {trial}: cloud stayed degenerate after {MAX_RETRIES} retries")
        rows.append((trial, retry, len(hull.vertices), d, 1 - 2 / (dim + 1), bound_check(d, dim)))
    return rows


# configuration


@dataclass
class RunConfig:
    family: Optional[str] = None
    n_min: Optional[int] = None
    n_max: Optional[int] = None
    step: Optional[int] = None
    dim: Optional[int] = None
    trials: Optional[int] = None
    seed: Optional[int] = None
    epsilon: Optional[float] = None
    samples: Optional[int] = None
    out: Optional[str] = None
    force: Optional[bool] = None


_CONFIG_TYPES = {
    "family": str, "n_min": int, "n_max": int, "step": int, "dim": int, "trials": int,
    "seed": int, "epsilon": float, "samples": int, "out": str,
    "force": lambda v: v.strip().lower() in ("1", "true", "yes", "on"),
}
_DEFAULTS = RunConfig(step=1, dim=3, trials=100, epsilon=1e-9, samples=1_000_000, force=False)


def load_config(path) -> RunConfig:
    """Read ``key = value`` lines; ``#`` starts a comment; unknown keys are rejected."""
    cfg = RunConfig()
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONFIG_TYPES:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            setattr(cfg, key, _CONFIG_TYPES[key](value))
        except ValueError:
            raise UsageError(f"{path}:{lineno}: bad value {value!r} for {key}") from None
    return cfg


def _resolve(args) -> RunConfig:
    """Flags override the config file, which overrides defaults."""
    file_cfg = load_config(args.config) if args.config else RunConfig()
    out = RunConfig()
    for f in fields(RunConfig):
        for source in (getattr(args, f.name, None), getattr(file_cfg, f.name), getattr(_DEFAULTS, f.name)):
            if source is not None:
                setattr(out, f.name, source)
                break
    return out


# output with a compare-instead-of-overwrite cache


def _emit(text: str, path: Optional[str], force: bool) -> int:
    if path is None:
        sys.stdout.write(text)
        return EXIT_OK
    if os.path.exists(path) and not force:
        with open(path) as fh:
            cached = fh.read()
        if cached == text:
            print(f"{path}: cached result is identical", file=sys.stderr)
            return EXIT_OK
        print(f"{path}: cached result differs from this run; pass --force to overwrite", file=sys.stderr)
        return EXIT_VIOLATION
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return EXIT_OK


# commands


def cmd_constants(cfg: RunConfig) -> int:
    if cfg.family is None or cfg.n_min is None or cfg.n_max is None:
        raise UsageError("constants needs --family, --n-min and --n-max")
    family = cfg.family.upper()
    records = sweep(family, cfg.n_min, cfg.n_max, cfg.step)
    status = _emit(format_sweep_csv(records, family), cfg.out, cfg.force)
    bad = [r.n for r in records if not (r.gap > 0 and 0 <= r.d and bound_check(r.d, r.n))]
    if bad:
        print(f"bound violated at n = {bad}", file=sys.stderr)
        return EXIT_VIOLATION
    return status


def cmd_bounds(cfg: RunConfig) -> int:
    if cfg.seed is None:
        raise UsageError("bounds is randomized; --seed is required")
    rows = run_bounds(cfg.dim, cfg.trials, cfg.seed, cfg.epsilon)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["trial", "retries", "vertices", "d", "bound", "pass"])
    for trial, retry, nv, d, bound, ok in rows:
        writer.writerow([trial, retry, nv, repr(float(d)), repr(float(bound)), int(ok)])
    failures = sum(1 for row in rows if not row[-1])
    max_d = float(max(row[3] for row in rows))
    buf.write(f"# trials={len(rows)} violations={failures} max_d={max_d!r} dim={cfg.dim} seed={cfg.seed}\n")
    status = _emit(buf.getvalue(), cfg.out, cfg.force)
    if failures:
        print(f"{failures} of {len(rows)} trials violate d <= 1 - 2/(n+1)", file=sys.stderr)
        return EXIT_VIOLATION
    return status


def cmd_mvee(path: str, cfg: RunConfig) -> int:
    pts = read_points_csv(path)
    ell, gap, iterations = mvee_with_gap(pts, cfg.epsilon)
    fmt = lambda v: " ".join(f"{x:.12g}" for x in v)  # noqa: E731
    print(f"center: {fmt(ell.center)}")
    print(f"semi-axes: {fmt(ell.semi_axes)}")
    print(f"log-volume: {ell.log_volume:.12g}")
    print(f"dual gap: {gap:.3e} after {iterations} iterations")
    return EXIT_OK


_FAMILY_SPEC = re.compile(r"^\s*(F1|F2|W1|W2)\s*:\s*(\d+)\s*$", re.IGNORECASE)


def cmd_centroid(spec: str, method: str, cfg: RunConfig) -> int:
    body = parse_body(spec)
    if method == "exact":
        m = _FAMILY_SPEC.match(spec)
        if m:
            value = centroid_height_family(m.group(1).upper(), int(m.group(2)))
            print(f"exact (mixed-volume sum, family {m.group(1).upper()}): {value:.15g}")
            return EXIT_OK
        if not (isinstance(body, Suspension) and isinstance(body.bottom, ScaledStandard)
                and isinstance(body.top, ScaledStandard)):
            raise UsageError("exact centroids need a family or a suspension of scaled standard bodies")
        value = suspension_centroid_height(suspension_rows(body.bottom, body.top), body.height)
        print(f"exact (mixed-volume sum): {value:.15g}")
        return EXIT_OK
    if method != "montecarlo":
        raise UsageError(f"method must be 'exact' or 'montecarlo', got {method!r}")
    if cfg.seed is None:
        raise UsageError("montecarlo is randomized; a seed is required")
    try:
        mean, err = monte_carlo_centroid(body, cfg.samples, cfg.seed)
    except InfeasibleError as exc:
        raise UsageError(f"refusing Monte Carlo: {exc}; rejection sampling is impractical there") from None
    if isinstance(body, Suspension):
        print(f"montecarlo ({cfg.samples} samples, seed {cfg.seed}): {mean[-1]:.6f} +- {err[-1]:.6f}")
    else:
        print(f"montecarlo ({cfg.samples} samples, seed {cfg.seed}):")
        for m_, e_ in zip(mean, err):
            print(f"  {m_:.6f} +- {e_:.6f}")
    return EXIT_OK


def cmd_chord(spec: str, p1_text: str, p2_text: str) -> int:
    body = parse_body(spec)
    p1, p2 = _parse_point(p1_text), _parse_point(p2_text)
    result = asymmetry_d(body, p1, p2)
    chord = "n/a (coincident points)" if result.chord is None else f"{result.chord:.12g}"
    print(f"chord: {chord}")
    print(f"d: {result.d:.12g}")
    if spec.strip().lower() == "square" and result.chord is not None:
        try:
            print(f"corner formula d: {square_chord_d(p1[0], p1[1], p2[0], p2[1]):.12g}")
        except FormulaDegenerateError as exc:
            print(f"corner formula not applicable ({exc}); clipped value above")
    return EXIT_OK


# entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="plain-text 'key = value' file; flags override it")
    common.add_argument("--seed", type=int)
    common.add_argument("--epsilon", type=float)
    common.add_argument("--out")
    common.add_argument("--force", action="store_const", const=True,
                        help="overwrite an existing output instead of comparing")

    parser = argparse.ArgumentParser(prog="affinv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", parents=[common], help="sweep n(1 - d) for a family")
    p.add_argument("--family", type=str.upper, choices=["F", "W", "M"])
    p.add_argument("--n-min", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--step", type=int)

    p = sub.add_parser("bounds", parents=[common], help="check d(g, l) on random polytopes")
    p.add_argument("--dim", type=int, choices=[2, 3])
    p.add_argument("--trials", type=int)

    p = sub.add_parser("mvee", parents=[common], help="minimum-volume enclosing ellipsoid of a point file")
    p.add_argument("points")

    p = sub.add_parser("centroid", parents=[common], help="centroid of a body spec")
    p.add_argument("spec")
    p.add_argument("method", nargs="?", default="exact", choices=["exact", "montecarlo"])
    p.add_argument("pos_samples", nargs="?", type=int, metavar="samples")
    p.add_argument("pos_seed", nargs="?", type=int, metavar="seed")
    p.add_argument("--samples", type=int)

    p = sub.add_parser("chord", parents=[common], help="chord length and d for two points")
    p.add_argument("spec")
    p.add_argument("p1")
    p.add_argument("p2")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "pos_samples", None) is not None:
        args.samples = args.pos_samples
    if getattr(args, "pos_seed", None) is not None:
        args.seed = args.pos_seed
    try:
        cfg = _resolve(args)
        if args.command == "constants":
            return cmd_constants(cfg)
        if args.command == "bounds":
            return cmd_bounds(cfg)
        if args.command == "mvee":
            return cmd_mvee(args.points, cfg)
        if args.command == "centroid":
            return cmd_centroid(args.spec, args.method, cfg)
        return cmd_chord(args.spec, args.p1, args.p2)
    except (UsageError, SpecError, DomainError, DegeneracyError, InfeasibleError) as exc:
        print(f"affinv {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"affinv {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GeometryError as exc:
        print(f"affinv {args.command}: geometry error: {exc}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
