"""Command line front end.

Subcommands: ``estimate``, ``verify``, ``bartholdi``, ``dump-matrix`` and
``dump-words``. Errors map to distinct exit codes (see :mod:`rhobound.errors`);
a failed geometric verification exits with 10.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from contextlib import nullcontext
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from . import __version__, essential, suffix
from .errors import ConfigError, RhoBoundError
from .estimator import DEFAULT_MAX_ITER, DEFAULT_TOL, estimate, growth_and_eigenvector
from .surface import _check_genus, canonical_labels, cannon_matrix, modified_cannon_matrix, \
    modified_labels
from .typesystem import dump_matrix, validate

FAMILIES = ("cannon", "modified", "suffix", "essential")
GEOMETRY_FAILED = 10
# phi is evaluated on the full strip walk; keep the figure cheap
PHI_FIGURE_LIMIT = 10**4


@dataclass
class RunConfig:
    genus: int = 2
    family: str = "cannon"
    weights: Optional[tuple] = None
    threshold: Optional[float] = None
    max_length: Optional[int] = None
    tolerance: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    memory_budget: Optional[int] = suffix.DEFAULT_MEMORY_BUDGET
    output: str = "text"
    verify_geometric: bool = False
    baseline: bool = False
    precision_bits: int = 256
    labels: bool = field(default=False, repr=False)

    def check(self):
        _check_genus(self.genus)
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}")
        if self.tolerance <= 0:
            raise ConfigError("tolerance must be positive")
        if self.family in ("cannon", "modified"):
            if self.weights is not None or self.threshold is not None \
                    or self.max_length is not None:
                raise ConfigError(f"family {self.family} takes no truncation rule")
            return self
        size = 2 * self.genus if self.family == "suffix" else 2 * self.genus + 3
        if self.weights is None and self.max_length is None:
            raise ConfigError(f"family {self.family} needs --max-length or "
                              f"--weights with --threshold")
        if self.weights is not None:
            if len(self.weights) != size:
                raise ConfigError(f"family {self.family} in genus {self.genus} needs "
                                  f"{size} weights, got {len(self.weights)}")
            if self.threshold is None:
                raise ConfigError("--weights needs --threshold")
        if self.threshold is not None and self.threshold <= 0:
            raise ConfigError("threshold must be positive")
        if self.max_length is not None and self.max_length < 1:
            raise ConfigError("max-length must be >= 1")
        return self

    def rule(self):
        size = 2 * self.genus if self.family == "suffix" else 2 * self.genus + 3
        weights = self.weights if self.weights is not None else (0,) * size
        threshold = self.threshold if self.threshold is not None else 1
        length = self.max_length if self.max_length is not None else suffix.UNBOUNDED_LENGTH
        try:
            if self.family == "suffix":
                return suffix.TruncationRule(weights, threshold, length)
            return essential.EssentialRule(self.genus, weights, threshold, length)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def to_json(self):
        doc = asdict(self)
        doc.pop("labels")
        if doc["weights"] is not None:
            doc["weights"] = list(doc["weights"])
        return doc


def build_system(config: RunConfig):
    """``(system, growth data or None, words or None)`` for a checked config.

    Refined families come with their closed-form eigenvector.
    """
    g = config.genus
    if config.family == "cannon":
        return cannon_matrix(g), None, None
    if config.family == "modified":
        return modified_cannon_matrix(g), None, None
    if config.family == "suffix":
        base = cannon_matrix(g)
        labels = canonical_labels(g) if config.labels else None
        words, ts = suffix.build(base, config.rule(), memory_budget=config.memory_budget,
                                 labels=labels)
        base_gd = growth_and_eigenvector(base, config.tolerance, config.max_iter)
        return ts, suffix.closed_form_A(words, base, base_gd, ts), words
    words, ts = essential.build(g, config.rule(), memory_budget=config.memory_budget,
                                with_labels=config.labels)
    base_gd = essential.essential_growth(g, config.tolerance)
    return ts, essential.essential_A(words, g, base_gd, ts), words


def word_labels(config: RunConfig):
    if config.family == "essential":
        return modified_labels(config.genus, with_marker=True)
    if config.family == "modified":
        return modified_labels(config.genus)
    return canonical_labels(config.genus)


def run(config: RunConfig, trace=None, figures=None, dump_matrix_to=None,
        dump_words_to=None):
    """Build, estimate and optionally verify; returns ``(document, exit code)``."""
    from .geometric import verify_geometric

    config.check()
    ts, gd, words = build_system(config)
    validate(ts)
    _dump(config, ts, words, dump_matrix_to, dump_words_to)
    if gd is None:
        gd = growth_and_eigenvector(ts, config.tolerance, config.max_iter)
    points = []

    def record(it, norm):
        points.append((it, norm))
        if trace is not None:
            trace.write(f"{it},{norm!r}\n")

    want_trace = trace is not None or figures is not None
    report = estimate(ts, gd, config.tolerance, config.max_iter,
                      record if want_trace else None)
    doc = {
        "library": "rhobound",
        "version": __version__,
        "config": config.to_json(),
        "report": report.to_json(),
        "growth_residual": gd.residual,
    }
    status = 0
    if config.verify_geometric:
        geo = verify_geometric(ts, gd, report)
        doc["geometric"] = geo.to_json()
        if not geo.passed:
            status = GEOMETRY_FAILED
    if config.baseline:
        from .bartholdi import bartholdi
        doc["baseline"] = bartholdi(config.genus, config.precision_bits).to_json()
    if figures is not None:
        doc["figures"] = [str(p) for p in _figures(figures, config, ts, gd, report, points)]
    return doc, status


def _figures(directory, config, ts, gd, report, points):
    from .plotting import plot_convergence, plot_phi

    directory = Path(directory)
    stem = f"{config.family}-g{config.genus}"
    out = [plot_convergence(points, directory / f"{stem}-convergence.png",
                            title=f"{config.family}, genus {config.genus}")]
    if ts.type_count <= PHI_FIGURE_LIMIT:
        out.append(plot_phi(ts, gd, report, directory / f"{stem}-phi.png"))
    return out


_REPORT_ROWS = ("bound", "lambda", "growth", "degree", "matrix_size", "power_iterations",
                "growth_iterations", "tolerance_used", "converged", "elapsed")


def render(doc, style):
    if style == "json":
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if style == "csv":
        rep = doc["report"]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        cols = ["family", "genus", *_REPORT_ROWS]
        writer.writerow(cols)
        writer.writerow([doc["config"]["family"], doc["config"]["genus"],
                         *(_fmt(rep[k]) for k in _REPORT_ROWS)])
        return buf.getvalue()
    return _text(doc)


def _fmt(x):
    return repr(x) if isinstance(x, float) else str(x)


def _text(doc):
    cfg, rep = doc["config"], doc["report"]
    lines = [f"{cfg['family']} types, genus {cfg['genus']}"]
    width = max(map(len, _REPORT_ROWS))
    for key in _REPORT_ROWS:
        lines.append(f"  {key:<{width}}  {_fmt(rep[key])}")
    if "geometric" in doc:
        geo = doc["geometric"]
        lines.append("geometric check: " + ("pass" if geo["passed"] else "FAIL"))
        for key in ("phi_at_minimum", "bound_defect", "symmetry_defect", "convexity_defect"):
            lines.append(f"  {key:<{width}}  {_fmt(geo[key])}")
    if "baseline" in doc:
        base = doc["baseline"]
        lines.append(f"bartholdi baseline: {base['bound_digits']}  (zeta = {base['zeta']})")
    for path in doc.get("figures", []):
        lines.append(f"figure: {path}")
    return "\n".join(lines) + "\n"


def _weights(text):
    try:
        return tuple(float(x) if "." in x else int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad weight list {text!r}") from None


_UNITS = {"": 1, "k": 2**10, "m": 2**20, "g": 2**30, "t": 2**40}


def _bytes(text):
    if text.lower() in ("none", "off", "unlimited"):
        return None
    hit = re.fullmatch(r"\s*([0-9.]+)\s*([kmgt]?)(i?b)?\s*", text.lower())
    if not hit:
        raise argparse.ArgumentTypeError(f"bad memory size {text!r}")
    return int(float(hit.group(1)) * _UNITS[hit.group(2)])


def _system_args(p):
    p.add_argument("--genus", type=int, default=2)
    p.add_argument("--family", choices=FAMILIES, default="cannon")
    p.add_argument("--weights", type=_weights, help="comma-separated, one per letter")
    p.add_argument("--threshold", type=float)
    p.add_argument("--max-length", type=int)
    p.add_argument("--memory-budget", type=_bytes, default=suffix.DEFAULT_MEMORY_BUDGET,
                   help="refuse builds predicted above this size (e.g. 12G, none)")


def _estimate_args(p):
    _system_args(p)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    p.add_argument("--output", choices=("text", "json", "csv"), default="text")
    p.add_argument("--baseline", action="store_true", help="add the Bartholdi bound")
    p.add_argument("--bits", type=int, default=256, help="baseline precision")
    p.add_argument("--trace", metavar="FILE",
                   help="write iteration,norm pairs as CSV ('-' for stderr)")
    p.add_argument("--figures", metavar="DIR", help="render report figures into DIR")
    p.add_argument("--dump-matrix", metavar="FILE")
    p.add_argument("--dump-words", metavar="FILE")


def parser():
    top = argparse.ArgumentParser(prog="rhobound", description=__doc__.splitlines()[0])
    top.add_argument("--version", action="version", version=__version__)
    sub = top.add_subparsers(dest="command", required=True)
    est = sub.add_parser("estimate", help="lower bound for one type system")
    _estimate_args(est)
    est.add_argument("--verify-geometric", action="store_true")
    ver = sub.add_parser("verify", help="estimate plus the geometric cross-check")
    _estimate_args(ver)
    bart = sub.add_parser("bartholdi", help="Bartholdi's bound")
    bart.add_argument("--genus", type=int, default=2)
    bart.add_argument("--bits", type=int, default=256)
    bart.add_argument("--output", choices=("text", "json"), default="text")
    for name in ("dump-matrix", "dump-words"):
        d = sub.add_parser(name, help=f"write the {name.split('-')[1]} of a system")
        _system_args(d)
        d.add_argument("--file", default="-")
    return top


def _config(args, **extra):
    cfg = RunConfig(genus=args.genus, family=args.family, weights=args.weights,
                    threshold=args.threshold, max_length=args.max_length,
                    memory_budget=args.memory_budget, **extra)
    return cfg.check()


def _open(name):
    return nullcontext(sys.stdout) if name == "-" else open(name, "w")


def _dump(cfg, ts, words, matrix_to=None, words_to=None):
    if matrix_to:
        with _open(matrix_to) as fp:
            dump_matrix(ts, fp)
    if words_to:
        labels = word_labels(cfg)
        if words is None:
            words = [bytes([i]) for i in range(ts.type_count)]
        with _open(words_to) as fp:
            for w in words:
                fp.write(suffix.word_label(w, labels) + "\n")


def main(argv=None):
    args = parser().parse_args(argv)
    try:
        if args.command == "bartholdi":
            from .bartholdi import bartholdi
            res = bartholdi(args.genus, args.bits).to_json()
            if args.output == "json":
                sys.stdout.write(json.dumps(res, indent=2, sort_keys=True) + "\n")
            else:
                sys.stdout.write(f"genus {res['genus']}: rho >= {res['bound_digits']}\n"
                                 f"  zeta  = {res['zeta']}\n  alpha = {res['alpha']}\n")
            return 0
        if args.command in ("dump-matrix", "dump-words"):
            cfg = _config(args, labels=True)
            ts, _, words = build_system(cfg)
            if args.command == "dump-matrix":
                _dump(cfg, ts, words, matrix_to=args.file)
            else:
                _dump(cfg, ts, words, words_to=args.file)
            return 0
        cfg = _config(args, tolerance=args.tol, max_iter=args.max_iter, output=args.output,
                      verify_geometric=args.command == "verify" or args.verify_geometric,
                      baseline=args.baseline, precision_bits=args.bits,
                      labels=bool(args.dump_matrix or args.dump_words))
        trace = None
        if args.trace:
            trace = sys.stderr if args.trace == "-" else open(args.trace, "w")
            trace.write("iteration,norm\n")
        try:
            doc, status = run(cfg, trace=trace, figures=args.figures,
                              dump_matrix_to=args.dump_matrix, dump_words_to=args.dump_words)
        finally:
            if trace is not None and trace is not sys.stderr:
                trace.close()
        sys.stdout.write(render(doc, cfg.output))
        return status
    except RhoBoundError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
