"""``cyclemetrics``: every library operation as a subcommand.

Global flags (accepted before or after the subcommand): ``--seed``,
``--threads`` (falls back to ``$CYCLEMETRICS_THREADS``, then the CPU count),
``--format csv|json|text`` and ``--out``.

Exit codes: 0 on success, 1 on a usage error, 2 when a size or resource guard
refuses the request.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from . import __version__
from . import cyclestats as cs
from . import experiments as ex
from . import ffpoly, fungraph, sampler

SIG_DIGITS = 12


class UsageError(Exception):
    pass


class GuardFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --- result model ----------------------------------------------------------


@dataclass
class Result:
    """Rows of named values.  ``style="record"`` renders as ``key=value`` lines in text mode."""

    columns: list[str]
    rows: list[list[Any]]
    style: str = "table"
    raw_text: str | None = None  # preformatted text output (mapping files)
    precision: str = "sig"  # "sig": 12 significant digits; "repr": shortest round-trip


@dataclass
class RunManifest:
    subcommand: str
    parameters: dict
    seed: int
    output_path: str
    format: str

    def asdict(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "parameters": self.parameters,
            "seed": self.seed,
            "output_path": self.output_path,
            "format": self.format,
        }


def _fmt(value, precision: str = "sig") -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value) if precision == "repr" else f"{value:.{SIG_DIGITS}g}"
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (list, tuple)):
        return ",".join(_fmt(v, precision) for v in value)
    return str(value)


def _json_value(value, precision: str = "sig"):
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        return value if precision == "repr" else float(f"{value:.{SIG_DIGITS}g}")
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_json_value(v, precision) for v in value]
    return str(value)


def render(result: Result, fmt: str, manifest: RunManifest, wall: float, threads: int) -> str:
    p = result.precision
    if fmt == "json":
        doc = {
            "metadata": {
                "tool": "cyclemetrics",
                "version": __version__,
                "wall_time_s": wall,
                "threads": threads,
                "manifest": manifest.asdict(),
            },
            "columns": result.columns,
            "rows": [{c: _json_value(v, p) for c, v in zip(result.columns, row)} for row in result.rows],
        }
        return json.dumps(doc, indent=2) + "\n"
    if fmt == "csv":
        import csv

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(result.columns)
        for row in result.rows:
            w.writerow([_fmt(v, p) for v in row])
        return buf.getvalue()
    if result.raw_text is not None:
        return result.raw_text
    lines = []
    for row in result.rows:
        if result.style == "record":
            lines.append(" ".join(f"{c}={_fmt(v, p)}" for c, v in zip(result.columns, row)))
        else:
            lines.append(" ".join(_fmt(v, p) for v in row))
    return "\n".join(lines) + ("\n" if lines else "")


# --- subcommands -----------------------------------------------------------


def _guarded(fn, *args, override: str, **kw):
    try:
        return fn(*args, **kw)
    except (cs.GuardError, sampler.EnumerationGuardError, ex.ResourceGuardError) as err:
        raise GuardFailure(f"{err}; rerun with {override} to override") from None


def cmd_constants(a, ctx) -> Result:
    c = cs.constants()
    rows = [["I", c.I], ["beta0", c.beta0], ["k0", c.k0], ["quadrature_error_bound", c.quadrature_error_bound]]
    return Result(["name", "value"], rows)


def cmd_dist_z(a, ctx) -> Result:
    method = "exact-rational" if a.exact else a.method
    if not a.all and not a.m:
        raise UsageError("dist-z: give --m M (repeatable) or --all")
    dist = cs.z_distribution(a.n, a.k, method)
    ms = range(1, dist.r + 1) if a.all else a.m
    rows = [[m, dist.pmf(m)] for m in ms]
    return Result(["m", "probability"], rows)


def cmd_mode(a, ctx) -> Result:
    b = cs.mode_and_concentration(a.n, a.k)
    peak = cs.z_distribution(a.n, a.k, "exact-loggamma").mode()
    row = [a.n, a.k, b.m_sharp, b.epsilon_n, b.xi1, b.xi2, peak, b.degenerate]
    return Result(["n", "k", "m_sharp", "epsilon_n", "xi1", "xi2", "peak", "degenerate"], [row], "record")


def cmd_expected(a, ctx) -> Result:
    over = f"--max-r {a.n // a.k}"
    et = _guarded(cs.exact_expected_T, a.n, a.k, limit=a.max_r, override=over)
    eb = _guarded(cs.exact_expected_B, a.n, a.k, limit=a.max_r, override=over)
    lam = a.k - 1
    log_et = math.log(et.numerator) - math.log(et.denominator)
    log_eb = math.log(eb.numerator) - math.log(eb.denominator)
    row = [a.n, a.k, et, eb, log_et, log_eb]
    cols = ["n", "k", "E_T", "E_B", "log_E_T", "log_E_B"]
    if a.n / lam > 1:
        row += [cs.predictor_logET(a.n, lam), cs.predictor_logEB(a.n, lam)]
        cols += ["predictor_log_E_T", "predictor_log_E_B"]
    return Result(cols, [row], "record")


def cmd_m_perm(a, ctx) -> Result:
    value = _guarded(cs.exact_M, a.m, a.max_m, override=f"--max-m {a.m}")
    return Result(["m", "M_m", "M_m_float"], [[a.m, value, float(value)]], "record")


def cmd_mu_perm(a, ctx) -> Result:
    value = _guarded(cs.exact_mu, a.m, override="a smaller --m (float path ends at 100000)")
    row = [a.m, value, math.log(value)]
    cols = ["m", "mu_m", "log_mu_m"]
    if a.m <= cs.PARTITION_LIMIT:
        row.append(cs.exact_mu(a.m, exact=True))
        cols.append("mu_m_exact")
    if a.m >= 1:
        main = math.exp(2 * math.sqrt(a.m)) / (2 * math.sqrt(math.pi * math.e) * a.m**0.75)
        row.append(value / main)
        cols.append("ratio_to_asymptotic")
    return Result(cols, [row], "record")


def cmd_sample(a, ctx) -> Result:
    if a.all:
        if a.unrestricted or a.r is None:
            raise UsageError("sample --all enumerates {0,k}-mappings: give --r and --k, not --unrestricted")
        tables = list(
            _guarded(sampler.enumerate_0k_mappings, a.r, a.k, a.max_count, override=f"--max-count {sampler.count_0k_mappings(a.r, a.k)}")
        )
        k = a.k
    elif a.unrestricted:
        if a.n is None:
            raise UsageError("sample --unrestricted needs --n")
        tables = [sampler.sample_unrestricted_mapping(a.n, ctx.seed, i) for i in range(a.count)]
        k = 0
    else:
        if a.r is None:
            raise UsageError("sample needs --r (and --k), or --unrestricted --n")
        tables = [sampler.sample_0k_mapping(sampler.SamplerConfig(a.r, a.k, ctx.seed, i)) for i in range(a.count)]
        k = a.k
    buf = io.StringIO()
    fungraph.write_mappings(tables, buf, k)
    rows = [[i, t.n, k, " ".join(map(str, t.image.tolist()))] for i, t in enumerate(tables)]
    return Result(["index", "n", "k", "image"], rows, raw_text=buf.getvalue())


def _structure_row(f: fungraph.MappingTable) -> list:
    c = fungraph.cycle_structure(f)
    prof = fungraph.indegree_profile(f)
    return [f.n, c.Z, c.C, c.order_T.value, c.product_B.value, list(c.cycle_lengths), c.log_T, c.log_B, prof.coalescence]


_STRUCT_COLS = ["n", "Z", "C", "T", "B", "lengths", "log_T", "log_B", "coalescence"]


def cmd_analyze(a, ctx) -> Result:
    try:
        source = sys.stdin if a.input == "-" else a.input
        tables = list(fungraph.read_mappings(source))
    except OSError as err:
        raise UsageError(f"analyze: cannot read {a.input}: {err.strerror}") from None
    except fungraph.MappingFormatError as err:
        raise UsageError(f"analyze: {a.input}: {err}") from None
    return Result(_STRUCT_COLS, [_structure_row(t) for t in tables], "record")


def cmd_poly(a, ctx) -> Result:
    spec = ffpoly.PolySpec(a.p, a.d, a.a)
    f = ffpoly.poly_mapping(spec)
    if a.emit:
        buf = io.StringIO()
        fungraph.write_mapping(f, buf, 0)
        return Result(["n", "image"], [[f.n, " ".join(map(str, f.image.tolist()))]], raw_text=buf.getvalue())
    prof = fungraph.indegree_profile(f)
    law = ffpoly.verify_indegree_law(spec) if spec.k >= 2 else None
    profile = ";".join(f"{j}:{c}" for j, c in sorted(prof.counts.items()))
    row = [a.p, a.d, a.a, spec.k] + _structure_row(f)[1:] + [profile, "n/a" if law is None else law]
    cols = ["p", "d", "a", "k"] + _STRUCT_COLS[1:] + ["indegrees", "law_holds"]
    return Result(cols, [row], "record")


def cmd_primes(a, ctx) -> Result:
    ps = ffpoly.primes_congruent(a.start, a.k, a.count, a.residue)
    return Result(["p"], [[p] for p in ps])


def cmd_table1(a, ctx) -> Result:
    samples = None if a.samples == "p" else int(a.samples)
    recs = _guarded(
        ex.run_table1,
        a.classes,
        prime_start=a.prime_start,
        num_primes=a.num_primes,
        samples_per_prime=samples,
        seed=ctx.seed,
        threads=ctx.threads,
        work_limit=a.max_work,
        override="a larger --max-work",
    )
    if a.summary:
        summ = ex.summarize_table1(recs)
        rows = [[label, s["lambda"], s["primes"], s["R_T"], s["R_B"]] for label, s in summ.items()]
        return Result(["class", "lambda", "primes", "R_bar_T", "R_bar_B"], rows)
    rows = [
        [r.class_label, r.p, r.n, r.lam, r.samples, r.mean_log_T, r.mean_log_B, r.R_T, r.R_B, r.seed] for r in recs
    ]
    return Result(list(ex.CSV_HEADER), rows, precision="repr")


def cmd_lognormal(a, ctx) -> Result:
    rep = ex.run_lognormality(a.n, a.k, a.samples, ctx.seed, ctx.threads)
    row = [rep.n, rep.k, rep.samples, rep.ks_T, rep.ks_B, rep.mean_chi, rep.mu_n, rep.sigma_n]
    return Result(["n", "k", "samples", "ks_T", "ks_B", "mean_chi", "mu_n", "sigma_n"], [row], "record")


def cmd_first_hit(a, ctx) -> Result:
    chosen = [x is not None for x in (a.xi, a.threshold_log)]
    if all(chosen):
        raise UsageError("first-hit: give at most one of --xi and --threshold-log")
    threshold = math.log(a.xi) if a.xi is not None else a.threshold_log
    if a.xi is not None and a.xi < 1:
        raise UsageError("first-hit: --xi must be >= 1")
    cfg = ex.FirstHitConfig(a.n, a.k, a.a, threshold, a.max_draws, ctx.seed, a.statistic)
    if threshold is None:
        _guarded(cfg.resolved_threshold, override=f"--threshold-log (exact E needs r <= {cs.PARTITION_LIMIT})")
    trials = ex.first_hit_trials(cfg, a.trials, ctx.threads)
    draws = [t.draws for t in trials]
    hits = sum(t.hit for t in trials)
    mean = math.fsum(draws) / len(draws)
    var = math.fsum((d - mean) ** 2 for d in draws) / (len(draws) - 1) if len(draws) > 1 else 0.0
    row = [a.n, a.k, cfg.resolved_threshold(), a.trials, hits, mean, math.sqrt(var / len(draws))]
    return Result(["n", "k", "threshold_log", "trials", "hits", "mean_draws", "std_error"], [row], "record")


def cmd_concentration(a, ctx) -> Result:
    rep = ex.sample_concentration(a.n, a.k, a.samples, ctx.seed, ctx.threads)
    exact = cs.z_distribution(a.n, a.k, "exact-loggamma").mass_between(rep.xi1, rep.xi2)
    row = [rep.n, rep.k, rep.samples, rep.xi1, rep.xi2, rep.inside, rep.fraction, float(exact), rep.degenerate]
    return Result(["n", "k", "samples", "xi1", "xi2", "inside", "fraction", "exact_mass", "degenerate"], [row], "record")


# --- parser ----------------------------------------------------------------


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {v}")
    return v


def _add_global(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=_nonneg, default=d(0), help="master seed (default 0)")
    p.add_argument("--threads", type=_positive, default=d(None), help="worker threads (default $CYCLEMETRICS_THREADS or CPU count)")
    p.add_argument("--format", choices=("csv", "json", "text"), default=d("text"), help="output format (default text)")
    p.add_argument("--out", default=d("-"), help="output path, '-' for stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cyclemetrics", description="Cycle statistics of random {0,k}-mappings.")
    parser.add_argument("--version", action="version", version=f"cyclemetrics {__version__}")
    _add_global(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        _add_global(p, suppress=True)
        p.set_defaults(func=fn)
        return p

    def nk(p, k_default=None):
        p.add_argument("--n", type=_positive, required=True, help="number of nodes, a multiple of k")
        if k_default is None:
            p.add_argument("--k", type=int, required=True, help="restricted indegree k >= 2")
        else:
            p.add_argument("--k", type=int, default=k_default, help=f"restricted indegree k >= 2 (default {k_default})")

    add("constants", cmd_constants, "Print the constants I, beta0 and k0.")

    p = add("dist-z", cmd_dist_z, "Law of the number Z of cyclic nodes.")
    nk(p)
    p.add_argument("--m", type=_positive, action="append", help="value of Z (repeatable)")
    p.add_argument("--all", action="store_true", help="every m in 1..n/k")
    p.add_argument("--exact", action="store_true", help="exact rationals (same as --method exact-rational)")
    p.add_argument("--method", choices=("exact-rational", "exact-loggamma", "asymptotic"), default="exact-loggamma")

    p = add("mode", cmd_mode, "Mode m_# of Z and the concentration window [xi1, xi2].")
    nk(p)

    p = add("expected", cmd_expected, "Exact E[T] and E[B] for uniform {0,k}-mappings.")
    nk(p)
    p.add_argument("--max-r", type=_positive, default=cs.PARTITION_LIMIT, help=f"guard on r = n/k (default {cs.PARTITION_LIMIT})")

    p = add("m-perm", cmd_m_perm, "Expected order M_m of a random permutation of m points.")
    p.add_argument("--m", type=_positive, required=True)
    p.add_argument("--max-m", type=_positive, default=cs.PARTITION_LIMIT, help=f"guard on m (default {cs.PARTITION_LIMIT})")

    p = add("mu-perm", cmd_mu_perm, "Expected product mu_m of cycle lengths of a random permutation.")
    p.add_argument("--m", type=_nonneg, required=True)

    p = add("sample", cmd_sample, "Sample (or enumerate) mappings in the mapping text format.")
    p.add_argument("--r", type=_positive, help="image size; n = k*r")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--count", type=_positive, default=1, help="number of samples (stream indices 0..count-1)")
    p.add_argument("--unrestricted", action="store_true", help="uniform unrestricted mappings on --n nodes")
    p.add_argument("--n", type=_positive, help="node count for --unrestricted")
    p.add_argument("--all", action="store_true", help="enumerate every {0,k}-mapping instead of sampling")
    p.add_argument("--max-count", type=_positive, default=sampler.ENUMERATION_LIMIT, help="enumeration guard")

    p = add("analyze", cmd_analyze, "Cycle structure of mappings read from a file.")
    p.add_argument("--in", dest="input", required=True, help="mapping file, '-' for stdin")

    p = add("poly", cmd_poly, "Functional graph of x^d + a over F_p.")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--a", type=int, default=0)
    p.add_argument("--emit", action="store_true", help="print the mapping instead of its statistics")

    p = add("primes", cmd_primes, "Primes p > start with p = residue (mod k).")
    p.add_argument("--start", type=int, default=1000)
    p.add_argument("--k", type=_positive, required=True)
    p.add_argument("--count", type=_positive, default=10)
    p.add_argument("--residue", type=int, default=1)

    p = add("table1", cmd_table1, "Ratios R_T, R_B per class and prime.")
    p.add_argument("--classes", nargs="+", default=["unrestricted", "{0,2}", "{0,3}", "x^2+a", "x^3+a"],
                   help="e.g. unrestricted '{0,3}' 'x^2+a' 'x^4+a:3mod4'")
    p.add_argument("--prime-start", type=int, default=1000)
    p.add_argument("--num-primes", type=_positive, default=10)
    p.add_argument("--samples", default="500", help="samples per prime for mapping classes, or 'p'")
    p.add_argument("--max-work", type=_positive, default=ex.DEFAULT_WORK_LIMIT, help="guard on total node visits")
    p.add_argument("--summary", action="store_true", help="print per-class means of the ratios")

    p = add("lognormal", cmd_lognormal, "KS distances of normalised log T and log B.")
    nk(p, 2)
    p.add_argument("--samples", type=int, default=2000)

    p = add("first-hit", cmd_first_hit, "Draws until T (or B) first reaches a threshold.")
    nk(p, 2)
    p.add_argument("--xi", type=float, help="threshold on T itself")
    p.add_argument("--threshold-log", type=float, help="threshold on log T")
    p.add_argument("--a", type=float, help="exponent a in xi = E[T]^a (default log^(-1/4) n)")
    p.add_argument("--max-draws", type=_positive, default=10**6)
    p.add_argument("--trials", type=_positive, default=1)
    p.add_argument("--statistic", choices=("T", "B"), default="T")

    p = add("concentration", cmd_concentration, "Fraction of sampled Z inside [xi1, xi2].")
    nk(p, 2)
    p.add_argument("--samples", type=_positive, default=10**4)

    return parser


@dataclass
class _Context:
    seed: int
    threads: int


def _threads(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("CYCLEMETRICS_THREADS")
    if env:
        try:
            v = int(env)
        except ValueError:
            raise UsageError(f"CYCLEMETRICS_THREADS must be a positive integer, got {env!r}") from None
        if v < 1:
            raise UsageError(f"CYCLEMETRICS_THREADS must be a positive integer, got {env!r}")
        return v
    return os.cpu_count() or 1


_GLOBAL_KEYS = ("seed", "threads", "format", "out", "func", "command")


def dispatch(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("cyclemetrics: a subcommand is required (see --help)")
        ctx = _Context(args.seed, _threads(args.threads))
        if ctx.seed >= 2**64:
            raise UsageError("--seed must be below 2^64")
        params = {k: v for k, v in sorted(vars(args).items()) if k not in _GLOBAL_KEYS}
        manifest = RunManifest(args.command, params, args.seed, args.out, args.format)
        t0 = time.perf_counter()
        result = args.func(args, ctx)
        text = render(result, args.format, manifest, time.perf_counter() - t0, ctx.threads)
    except SystemExit as stop:  # --help / --version
        return int(stop.code or 0)
    except UsageError as err:
        print(str(err), file=stderr)
        return 1
    except GuardFailure as err:
        print(f"cyclemetrics: {err}", file=stderr)
        return 2
    except ValueError as err:
        print(f"cyclemetrics {getattr(args, 'command', '')}: {err}", file=stderr)
        return 1
    if args.out == "-":
        stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
