"""Command-line front end: ``python3 -m susylmg <command> ...``.

Commands emit tables as CSV (header on line 1) or JSON. Floats are written in
their shortest round-trip form and rows are sorted by (J, gamma, J1), so a
given configuration always produces the same bytes whatever ``--threads`` is.

Exit codes: 0 ok, 1 verification failure, 2 bad configuration, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from . import __version__
from .entanglement import (
    RANK_TOL,
    OptimizationError,
    OrderingPolicy,
    amplitude_matrix,
    bits_to_nats,
    entropy_bits,
    gaussian_estimate,
    geometric_entanglement,
    geometric_entanglement_asymptotic,
    lambda_max,
    schmidt,
)
from .hamiltonian import DimensionError, ground_state_report
from .jacobi import DEFAULT_TOL, ConvergenceError
from .specfun import Spin
from .state import CouplingParams
from .verify import DEFAULT_TOLERANCES, Scale, run_suite

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(ValueError):
    pass


@dataclass
class FigureDataset:
    figure_id: str
    columns: dict[str, list] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"ragged columns: {sorted(lengths)}")

    @classmethod
    def from_rows(cls, figure_id: str, names: list[str], rows: list[tuple], metadata: dict) -> "FigureDataset":
        cols = {name: [row[i] for row in rows] for i, name in enumerate(names)}
        if not rows:
            cols = {name: [] for name in names}
        return cls(figure_id, cols, metadata)

    @property
    def n_rows(self) -> int:
        return len(next(iter(self.columns.values()), []))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for i in range(self.n_rows):
            writer.writerow(_fmt(col[i]) for col in self.columns.values())
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {"figure_id": self.figure_id, "metadata": self.metadata, "columns": self.columns}
        return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


# -- argument parsing ---------------------------------------------------------


def _number(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"not a number: {text!r}") from None


def parse_values(text: str) -> list[Fraction]:
    """Comma list of numbers and ranges ``a..b``, ``a..b:step`` or ``a..b:*factor``.

    Ranges include both ends (within the step). Values are kept exact so that
    spins like 1/2 or 0.5 survive the round trip.
    """
    out: list[Fraction] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." not in part:
            out.append(_number(part))
            continue
        span, _, step_text = part.partition(":")
        lo, hi = (_number(x) for x in span.split("..", 1))
        if step_text.startswith("*"):
            factor = _number(step_text[1:])
            if factor <= 1 or lo <= 0:
                raise ConfigError(f"geometric range {part!r} needs factor > 1 and a positive start")
            v = lo
            while v <= hi:
                out.append(v)
                v *= factor
            continue
        step = _number(step_text) if step_text else Fraction(1)
        if step <= 0:
            raise ConfigError(f"range step must be positive in {part!r}")
        n = int((hi - lo) / step)
        out.extend(lo + i * step for i in range(n + 1))
    if not out:
        raise ConfigError(f"empty value list {text!r}")
    return out


def _spin(value: Fraction, what: str) -> Spin:
    try:
        return Spin.of(value)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{what} = {value}: {exc}") from None


def _integer_spins(values, what: str = "J") -> list[Spin]:
    spins = [_spin(v, what) for v in values]
    for s in spins:
        if not s.is_integer or s.two_j == 0:
            raise ConfigError(f"{what} = {s} must be a positive integer (even number of spins)")
    return spins


def _gammas(args) -> list[float]:
    vals = [float(g) for g in parse_values(args.gamma)]
    if any(not g >= 0 for g in vals):
        raise ConfigError("gamma must be >= 0")
    return vals


def _blocks(args, total: Spin) -> list[Spin]:
    if args.J1 is not None and args.J1_ratio is not None:
        raise ConfigError("give either --J1 or --J1-ratio, not both")
    if args.J1_ratio is not None:
        ratios = parse_values(args.J1_ratio)
        if any(not 0 < r <= 1 for r in ratios):
            raise ConfigError("J1 ratios must lie in (0, 1]")
        # nearest half-integer block, at least one spin
        two = sorted({max(1, round(r * total.two_j)) for r in ratios})
        return [Spin(t) for t in two]
    if args.J1 is None:
        raise ConfigError("--J1 or --J1-ratio is required")
    blocks = [_spin(v, "J1") for v in parse_values(args.J1)]
    for b in blocks:
        if b.two_j == 0 or b.two_j > total.two_j:
            raise ConfigError(f"J1 = {b} must satisfy 0 < J1 <= J = {total}")
    return sorted(set(blocks), key=lambda s: s.two_j)


def _metadata(args, **extra) -> dict:
    meta = {"library_version": __version__, "command": args.command}
    for key in ("J", "J1", "J1_ratio", "gamma", "gamma_J", "m", "seed", "max_J", "quick"):
        if getattr(args, key, None) is not None:
            meta[key] = getattr(args, key)
    meta.update(extra)
    return meta


def _map(fn, items, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _sort_key(J: Spin, gamma: float, j1: Spin | None = None):
    return (J.two_j, gamma, j1.two_j if j1 is not None else -1)


# -- commands -----------------------------------------------------------------


def cmd_entropy(args) -> FigureDataset:
    totals = _integer_spins(parse_values(args.J))
    gammas = _gammas(args)
    points = [(J, g, b) for J in totals for g in gammas for b in _blocks(args, J)]
    ordering = OrderingPolicy(args.ordering)

    def point(p):
        J, g, b = p
        spectrum = schmidt(amplitude_matrix(b, Spin(J.two_j - b.two_j), g), rank_tol=args.tol_rank, tol=args.tol_jacobi)
        return entropy_bits(spectrum), spectrum.rank, gaussian_estimate(spectrum, ordering).bits

    results = _map(point, points, args.threads)
    unit = "nats" if args.nats else "bits"
    conv = bits_to_nats if args.nats else (lambda x: x)
    rows = []
    for (J, g, b), (s, rank, est) in sorted(zip(points, results), key=lambda t: _sort_key(*t[0])):
        jv = float(J.value)
        rows.append((jv, float(b.value), g, g * jv, conv(s), rank, conv(math.log2(rank)), conv(est)))
    names = ["J", "J1", "gamma", "gammaJ", f"S_{unit}", "rank", f"rank_bound_{unit}", f"gaussian_estimate_{unit}"]
    if all(g == 0 for g in gammas):
        fig = "fig1"
    elif args.J1_ratio is not None:
        fig = "fig3"
    else:
        fig = "fig2"
    return FigureDataset.from_rows(fig, names, rows, _metadata(args, ordering=ordering.value, unit=unit))


def cmd_schmidt(args) -> FigureDataset:
    totals = _integer_spins(parse_values(args.J))
    points = []
    for J in totals:
        if args.gamma_J is not None:
            gammas = [float(x) / float(J.value) for x in parse_values(args.gamma_J)]
        else:
            gammas = _gammas(args)
        points += [(J, g, b) for g in gammas for b in _blocks(args, J)]

    def point(p):
        J, g, b = p
        return schmidt(amplitude_matrix(b, Spin(J.two_j - b.two_j), g), rank_tol=args.tol_rank, tol=args.tol_jacobi)

    spectra = _map(point, points, args.threads)
    rows = []
    for (J, g, b), spectrum in sorted(zip(points, spectra), key=lambda t: _sort_key(*t[0])):
        jv = float(J.value)
        keep = spectrum.lambdas[: spectrum.rank]
        for k, lam in enumerate(keep, start=1):
            rows.append((jv, float(b.value), g, g * jv, k, float(lam), float(lam * lam)))
    names = ["J", "J1", "gamma", "gammaJ", "rank_index", "lambda", "lambda_sq"]
    return FigureDataset.from_rows("fig4", names, rows, _metadata(args))


def cmd_spectrum(args) -> FigureDataset:
    totals = [_spin(v, "J") for v in parse_values(args.J)]
    gammas = _gammas(args)
    m = _number(args.m)
    for J in totals:
        if (m.denominator == 2) != (J.two_j % 2 == 1) or m.denominator > 2 or abs(m) > J.value:
            raise ConfigError(f"m = {m} is not a projection of J = {J}")
    points = [(J, g) for J in totals for g in gammas]
    reports = _map(lambda p: ground_state_report(p[0], CouplingParams(p[1], m)), points, args.threads)
    rows, checks = [], []
    for (J, g), rep in sorted(zip(points, reports), key=lambda t: _sort_key(*t[0])):
        jv = float(J.value)
        mu = CouplingParams(g, m).mu
        for level, e in enumerate(rep.eigenvalues):
            rows.append((jv, g, g * jv, float(m), mu, level, float(e)))
        checks.append(
            {
                "J": jv,
                "gamma": g,
                "ground_energy": rep.ground_energy,
                "expected_ground_energy": -mu * mu,
                "gap": rep.gap,
                "max_pairing_deviation": rep.max_pairing_deviation,
                "ground_overlap": rep.ground_overlap,
                "h_max": rep.h_max,
            }
        )
    names = ["J", "gamma", "gammaJ", "m", "mu", "level", "energy"]
    return FigureDataset.from_rows("spectrum", names, rows, _metadata(args, checks=checks))


def cmd_geometric(args) -> FigureDataset:
    totals = _integer_spins(parse_values(args.J))
    gammas = _gammas(args)
    points = [(J, g) for J in totals for g in gammas]

    def point(p):
        J, g = p
        return lambda_max(J, g), geometric_entanglement(J, g), geometric_entanglement_asymptotic(J, g)

    results = _map(point, points, args.threads)
    rows = []
    for (J, g), (lam, eg, asym) in sorted(zip(points, results), key=lambda t: _sort_key(*t[0])):
        jv = float(J.value)
        rows.append((jv, g, g * jv, lam, eg, asym))
    names = ["J", "gamma", "gammaJ", "lambda_max", "E_G", "E_G_asymptotic"]
    return FigureDataset.from_rows("fig5", names, rows, _metadata(args))


def cmd_verify(args) -> tuple[dict, bool]:
    scale = Scale.quick(args.max_J or 6) if args.quick else Scale()
    if args.max_J is not None and not args.quick:
        scale = scale.capped(args.max_J)
    if scale.max_J < 2:
        raise ConfigError("--max-J must be at least 2")
    tolerances = {}
    for key in DEFAULT_TOLERANCES:
        value = getattr(args, "tol_" + key.replace("-", "_"))
        if value is not None:
            if not value >= 0:
                raise ConfigError(f"--tol-{key} must be >= 0")
            tolerances[key] = value
    checks = run_suite(scale, tolerances, seed=args.seed)
    ok = all(c.passed for c in checks)
    report = {
        "library_version": __version__,
        "scale": scale.__dict__,
        "seed": args.seed,
        "passed": ok,
        "checks": [c.as_dict() for c in checks],
    }
    return report, ok


# -- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="susylmg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--seed", type=int, default=0)

    sweep = argparse.ArgumentParser(add_help=False)
    sweep.add_argument("--J", required=True, help="total spin(s): list or range, e.g. 100,200 or 2..512:*2")
    sweep.add_argument("--gamma", default="0", help="anisotropy values, e.g. 0,0.1,1 or 0..2:0.1")

    blocks = argparse.ArgumentParser(add_help=False)
    blocks.add_argument("--J1", help="block spins, e.g. 1..50 or 0.5")
    blocks.add_argument("--J1-ratio", dest="J1_ratio", help="block sizes as fractions of J, e.g. 0.02..0.5:0.02")
    blocks.add_argument("--tol-rank", dest="tol_rank", type=float, default=RANK_TOL)
    blocks.add_argument("--tol-jacobi", dest="tol_jacobi", type=float, default=DEFAULT_TOL)

    p = sub.add_parser("entropy", parents=[common, sweep, blocks], help="block entropy sweeps")
    p.add_argument("--ordering", choices=[o.value for o in OrderingPolicy], default=OrderingPolicy.CENTER_PEAKED.value)
    p.add_argument("--nats", action="store_true", help="report entropies in nats")

    p = sub.add_parser("schmidt", parents=[common, sweep, blocks], help="ordered Schmidt coefficients")
    p.add_argument("--gamma-J", dest="gamma_J", help="give gamma in units of 1/J instead of --gamma")

    p = sub.add_parser("spectrum", parents=[common, sweep], help="LMG spectrum at beta = alpha^2")
    p.add_argument("--m", default="0", help="level index of the seed state")

    sub.add_parser("geometric", parents=[common, sweep], help="geometric entanglement")

    p = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    p.add_argument("--max-J", dest="max_J", type=int)
    p.add_argument("--quick", action="store_true")
    for key, default in DEFAULT_TOLERANCES.items():
        p.add_argument(f"--tol-{key}", dest="tol_" + key.replace("-", "_"), type=float, help=f"default {default:g}")
    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if getattr(args, "threads", 1) < 1:
            raise ConfigError("--threads must be >= 1")
        if args.command == "verify":
            report, ok = cmd_verify(args)
            _emit(json.dumps(report, indent=1) + "\n", args.out)
            return EXIT_OK if ok else EXIT_FAILED
        handler = {
            "entropy": cmd_entropy,
            "schmidt": cmd_schmidt,
            "spectrum": cmd_spectrum,
            "geometric": cmd_geometric,
        }[args.command]
        data = handler(args)
        _emit(data.to_json() if args.format == "json" else data.to_csv(), args.out)
    except (ConfigError, DimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, OptimizationError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
