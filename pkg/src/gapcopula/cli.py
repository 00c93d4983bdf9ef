"""Command-line front end: ``gapcopula <subcommand> [flags]``.

Every subcommand reads a long-format vehicle CSV and writes its artifacts to
``--output-dir``. Report tables are written as CSV and JSON unless
``--format`` picks one; plot data (lambda curves, Q-Q points) and record
files are always CSV. ``report`` runs ingest, trim, describe, select, gof,
simulate and both crosstabs in sequence, feeding each step the files the
previous one wrote, so its artifacts match the individual runs byte for byte.

Exit codes: 0 success, 1 data or numerical failure, 2 usage error. Errors go
to stderr as ``code=<kind> <message>``.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from . import artifacts as art
from .data_pipeline import (
    descriptive_stats,
    dependence_summary,
    gaps,
    load_and_pair,
    model_year_labels,
    qq_data,
    trim_outliers,
)
from .dependence import params_from_kendall_tau
from .errors import CopulaError, DomainError
from .estimation import FitResult, PseudoSample, fit_mle, pseudo_observations
from .families import CopulaFamily, CopulaParams, Kind, check_params, parse_family
from .fixtures import fixture_path
from .selection import (
    LAMBDA_N,
    SelectionReport,
    fit_all_and_rank,
    lambda_boundaries,
    lambda_deviation,
    lambda_empirical,
    lambda_theoretical,
)
from .simulation import (
    CATEGORY_LABELS,
    MODEL_YEAR_LABELS,
    REFERENCE_MARGINS,
    MarginModel,
    apply_margins,
    crosstab,
    gap_category,
    generate_synthetic_dataset,
    prediction_report,
    sample_pairs,
)

SUBCOMMANDS = ("generate", "ingest", "trim", "describe", "fit", "select", "gof", "simulate", "crosstab", "report")
SEED_MAX = 2**64 - 1
DEFAULT_SEED = 0
DEFAULT_GENERATE_N = 7126
GENERATE_TAU = 0.281
REFERENCE_T = CopulaParams(0.427, nu=5.325)
FIXTURE_TOKEN = "@fixture"


class UsageError(Exception):
    code = "usage"


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    input: Optional[str]
    output_dir: str
    seed: int
    trim_k: Optional[float]
    family: str
    params: Optional[tuple[float, ...]]
    n: Optional[int]
    pairing: str
    formats: tuple[str, ...]
    lambda_n: int
    source: str


# ---------------------------------------------------------------- parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _seed(text: str) -> int:
    try:
        x = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= x <= SEED_MAX:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return x


def _positive_int(text: str) -> int:
    try:
        x = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if x < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return x


def _positive_float(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not x > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return x


def _params(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"params must be comma-separated numbers, got {text!r}") from None


SUBCOMMAND_HELP = {
    "generate": "synthetic long-format dataset from a copula",
    "ingest": "validate and pair records",
    "trim": "drop garages outside mean +/- k SD",
    "describe": "descriptive statistics, dependence and Q-Q data",
    "fit": "maximum-likelihood fit of one family",
    "select": "fit all families and rank by AIC and BIC",
    "gof": "empirical vs model lambda-function",
    "simulate": "simulated gaps and prediction summaries",
    "crosstab": "4 x 4 gap-category table",
    "report": "ingest, trim and every analysis in one run",
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--input", help="long-format CSV; @fixture names the bundled fixture")
    common.add_argument("--output-dir", default=".", help="directory for artifacts (created if missing)")
    common.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help="root seed, unsigned 64-bit")
    common.add_argument("--trim-k", type=_positive_float, default=None, help="trim at mean +/- k SD (trim and report default to 3)")
    common.add_argument("--family", default="best", help="copula family, or 'best' for the lowest-BIC model")
    common.add_argument("--params", type=_params, default=None, help="comma-separated parameters for generate")
    common.add_argument("--n", type=_positive_int, default=None, help="sample size for generate and simulate")
    common.add_argument("--pairing", choices=("sorted", "random"), default="sorted")
    common.add_argument("--format", choices=("csv", "json"), default=None, help="write only this table format")
    common.add_argument("--lambda-n", type=_positive_int, default=LAMBDA_N, help="simulation size for lambda curves without closed form")
    common.add_argument("--source", choices=("observed", "simulated"), default="observed", help="crosstab data source")
    parser = _Parser(prog="gapcopula", description="Bivariate copula modelling of paired fuel-economy gaps.")
    sub = parser.add_subparsers(dest="subcommand", metavar="subcommand")
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=SUBCOMMAND_HELP[name])
    return parser


def parse_args(argv: Sequence[str]) -> RunConfig:
    ns = build_parser().parse_args(list(argv))
    if ns.subcommand is None:
        raise UsageError(f"a subcommand is required: {', '.join(SUBCOMMANDS)}")
    if ns.subcommand != "generate" and not ns.input:
        raise UsageError(f"{ns.subcommand} requires --input")
    if ns.family != "best":
        try:
            parse_family(ns.family)
        except DomainError as exc:
            raise UsageError(str(exc)) from None
    elif ns.subcommand == "generate":
        ns.family = "studentt"
    formats = (ns.format,) if ns.format else ("csv", "json")
    return RunConfig(
        subcommand=ns.subcommand,
        input=ns.input,
        output_dir=ns.output_dir,
        seed=ns.seed,
        trim_k=ns.trim_k,
        family=ns.family,
        params=ns.params,
        n=ns.n,
        pairing=ns.pairing,
        formats=formats,
        lambda_n=ns.lambda_n,
        source=ns.source,
    )


# ---------------------------------------------------------------- session


class Session:
    """Per-process cache so a chained run fits each model once."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.written: list[str] = []
        self._selection: dict = {}
        self._fits: dict = {}

    def path(self, name: str) -> str:
        return os.path.join(self.cfg.output_dir, name)

    def table(self, stem: str, header, rows, payload) -> None:
        if "csv" in self.cfg.formats:
            self.csv(stem + ".csv", header, rows)
        if "json" in self.cfg.formats:
            p = self.path(stem + ".json")
            art.write_json(p, payload)
            self.written.append(p)

    def csv(self, name: str, header, rows) -> None:
        p = self.path(name)
        art.write_csv(p, header, rows)
        self.written.append(p)

    def records(self, name: str, rows, extra=None) -> str:
        p = self.path(name)
        art.write_records(rows, p, extra=extra)
        self.written.append(p)
        return p

    def selection(self, s: PseudoSample) -> SelectionReport:
        if s.source_digest not in self._selection:
            rep = fit_all_and_rank(s)
            self._selection[s.source_digest] = rep
            for f in rep.fits.values():
                self._fits[(s.source_digest, f.key)] = f
        return self._selection[s.source_digest]

    def fit(self, s: PseudoSample, family: str) -> FitResult:
        if family == "best":
            return self.selection(s).best
        fam = parse_family(family)
        key = (s.source_digest, fam.key)
        if key not in self._fits:
            self._fits[key] = fit_mle(fam, s)
        return self._fits[key]


def _input_path(cfg: RunConfig) -> str:
    if cfg.input == FIXTURE_TOKEN:
        return str(fixture_path())
    return cfg.input


def _load(cfg: RunConfig):
    """Pairs from --input, trimmed inline when --trim-k is given."""
    pairs, rejections = load_and_pair(_input_path(cfg))
    if cfg.trim_k is not None:
        pairs, _ = trim_outliers(pairs, k=cfg.trim_k)
    return pairs, rejections


def _sample(pairs) -> PseudoSample:
    return pseudo_observations(*gaps(pairs))


def _param_names(family: CopulaFamily) -> tuple[str, str]:
    return ("theta", "nu") if family.kind is Kind.STUDENT_T else ("theta", "delta")


def _fit_row(f: FitResult, rank_aic=None, rank_bic=None) -> list:
    est = list(f.params.as_tuple()) + [None]
    ci = list(f.ci) + [(None, None)]
    return [
        f.key, f.family.display_name, f.k,
        est[0], ci[0][0], ci[0][1], est[1], ci[1][0], ci[1][1],
        f.loglik, f.aic, f.bic, f.tau, f.tails.lower, f.tails.upper,
        f.converged, rank_aic, rank_bic,
    ]


FIT_HEADER = (
    "family", "name", "k", "param1", "param1_lo", "param1_hi", "param2", "param2_lo", "param2_hi",
    "loglik", "aic", "bic", "tau", "tail_lower", "tail_upper", "converged", "rank_aic", "rank_bic",
)


# ---------------------------------------------------------------- subcommands


def cmd_generate(ses: Session) -> None:
    cfg = ses.cfg
    family = parse_family(cfg.family)
    if cfg.params is not None:
        p = cfg.params
        if family.kind is Kind.STUDENT_T:
            if len(p) != 2:
                raise DomainError("studentt needs two parameters: rho,nu")
            params = CopulaParams(p[0], nu=p[1])
        elif family.n_params == 2:
            if len(p) != 2:
                raise DomainError(f"{family.key} needs two parameters: theta,delta")
            params = CopulaParams(p[0], delta=p[1])
        else:
            if len(p) != 1:
                raise DomainError(f"{family.key} takes one parameter")
            params = CopulaParams(p[0])
    elif family.kind is Kind.STUDENT_T:
        params = REFERENCE_T
    else:
        params = params_from_kendall_tau(family, GENERATE_TAU)
    check_params(family, params)
    n = cfg.n or DEFAULT_GENERATE_N
    rows = generate_synthetic_dataset(n, cfg.seed, REFERENCE_MARGINS, family, params)
    ses.records("synthetic.csv", rows, extra={"seed": cfg.seed})


def cmd_ingest(ses: Session) -> None:
    cfg = ses.cfg
    pairs, rejections = load_and_pair(_input_path(cfg))
    ses.records("pairs.csv", art.vehicle_rows(pairs))
    ses.csv("rejections.csv", ("line", "reason"), [(r.line, r.reason) for r in rejections])
    reasons = {}
    for r in rejections:
        reasons[r.reason] = reasons.get(r.reason, 0) + 1
    summary = {"n_pairs": len(pairs), "n_rejected_rows": len(rejections), "reasons": dict(sorted(reasons.items()))}
    rows = [("n_pairs", len(pairs)), ("n_rejected_rows", len(rejections))]
    rows += [(f"rejected:{k}", v) for k, v in sorted(reasons.items())]
    ses.table("ingest", ("statistic", "value"), rows, summary)


def cmd_trim(ses: Session) -> None:
    cfg = ses.cfg
    pairs, _ = load_and_pair(_input_path(cfg))
    kept, rep = trim_outliers(pairs, k=3.0 if cfg.trim_k is None else cfg.trim_k)
    ses.records("trimmed.csv", art.vehicle_rows(kept))
    th = rep.thresholds
    rows = [
        ("mean", th.mean1, th.mean2),
        ("sd", th.sd1, th.sd2),
        ("outside_2sd", *rep.outside_2sd),
        ("outside_3sd", *rep.outside_3sd),
        ("k", rep.k, None),
        ("n_before", rep.n_before, None),
        ("n_after", rep.n_after, None),
        ("removed_garages", rep.removed_garages, None),
    ]
    ses.table("trim", ("statistic", "vehicle1", "vehicle2"), rows, rep.to_dict())


def cmd_describe(ses: Session) -> None:
    pairs, _ = _load(ses.cfg)
    d = descriptive_stats(pairs)
    dep = dependence_summary(pairs)
    rows = []
    for var in ("reported_mpg", "epa_mpg", "gap"):
        for stat in ("mean", "sd", "min", "max"):
            rows.append((var, stat, d["vehicle1"][var][stat], d["vehicle2"][var][stat]))
    for block in ("fuel_type", "transmission", "model_year"):
        for cat in d["vehicle1"][block]:
            rows.append((block, cat, d["vehicle1"][block][cat], d["vehicle2"][block][cat]))
    rows.append(("n", "garages", d["n"], d["n"]))
    g1, g2 = gaps(pairs)
    q1, q2 = qq_data(g1), qq_data(g2)
    markers = {
        "vehicle1": {str(p): list(v) for p, v in q1.markers.items()},
        "vehicle2": {str(p): list(v) for p, v in q2.markers.items()},
    }
    ses.table("describe", ("variable", "statistic", "vehicle1", "vehicle2"), rows,
              {"descriptive": d, "dependence": dep, "qq_markers": markers})
    ses.table("dependence", ("statistic", "value"), list(dep.items()), dep)
    ses.csv("qq.csv", ("i", "vehicle1_normal", "vehicle1_sample", "vehicle2_normal", "vehicle2_sample"),
            zip(range(1, g1.size + 1), q1.normal_quantiles, q1.sample_quantiles, q2.normal_quantiles, q2.sample_quantiles))
    ses.csv("qq_markers.csv", ("percentile", "vehicle1_normal", "vehicle1_sample", "vehicle2_normal", "vehicle2_sample"),
            [(p, *q1.markers[p], *q2.markers[p]) for p in q1.markers])


def cmd_fit(ses: Session) -> None:
    pairs, _ = _load(ses.cfg)
    s = _sample(pairs)
    f = ses.fit(s, ses.cfg.family)
    ses.table("fit", FIT_HEADER, [_fit_row(f)], {"seed": ses.cfg.seed, "fit": f.to_dict()})


def cmd_select(ses: Session) -> None:
    pairs, _ = _load(ses.cfg)
    s = _sample(pairs)
    rep = ses.selection(s)
    aic_rank = {k: i + 1 for i, k in enumerate(rep.ranking_aic)}
    bic_rank = {k: i + 1 for i, k in enumerate(rep.ranking_bic)}
    rows = [_fit_row(rep.fits[k], aic_rank[k], bic_rank[k]) for k in rep.ranking_bic]
    tests = [
        {"model_a": t.key_a, "model_b": t.key_b, "vuong_statistic": t.vuong_statistic, "vuong_p": t.vuong_p,
         "clarke_statistic": t.clarke_statistic, "clarke_p": t.clarke_p}
        for t in rep.pairwise_tests
    ]
    payload = {
        "ranking": {k: rep.fits[k].to_dict() for k in rep.ranking_bic},
        "ranking_aic": list(rep.ranking_aic),
        "ranking_bic": list(rep.ranking_bic),
        "best": rep.best.key,
        "tests": tests,
        "n": s.n,
        "seed": ses.cfg.seed,
    }
    ses.table("selection", FIT_HEADER, rows, payload)
    if "csv" in ses.cfg.formats:
        ses.csv("tests.csv", ("model_a", "model_b", "vuong_statistic", "vuong_p", "clarke_statistic", "clarke_p"),
                [t.as_tuple() for t in rep.pairwise_tests])


def cmd_gof(ses: Session) -> None:
    cfg = ses.cfg
    pairs, _ = _load(cfg)
    s = _sample(pairs)
    f = ses.fit(s, cfg.family)
    emp = lambda_empirical(s)
    theo = lambda_theoretical(f.family, f.params, emp.v_grid, n_sim=cfg.lambda_n, seed=cfg.seed)
    ind, com = lambda_boundaries(emp.v_grid)
    ses.csv("lambda.csv", ("v", "empirical", "theoretical", "independence", "comonotonicity", "family", "seed"),
            [(v, a, b, c, d, f.key, cfg.seed) for v, a, b, c, d in zip(emp.v_grid, emp.lam, theo.lam, ind.lam, com.lam)])
    dev = lambda_deviation(emp, theo)
    payload = {"family": f.key, "params": list(f.params.as_tuple()), "max_abs_deviation": dev,
               "lambda_n": cfg.lambda_n, "aic": f.aic, "bic": f.bic, "seed": cfg.seed}
    ses.table("gof", ("family", "max_abs_deviation", "lambda_n", "aic", "bic", "seed"),
              [(f.key, dev, cfg.lambda_n, f.aic, f.bic, cfg.seed)], payload)


def _simulate(ses: Session, pairs):
    """Simulated gaps from the chosen model with margins estimated from the observed gaps."""
    cfg = ses.cfg
    s = _sample(pairs)
    f = ses.fit(s, cfg.family)
    g1, g2 = gaps(pairs)
    margins = MarginModel.from_gaps(g1, g2)
    n = cfg.n or len(pairs)
    u, v = sample_pairs(f.family, f.params, n, cfg.seed)
    sim1, sim2 = apply_margins(u, v, margins)
    return f, margins, (g1, g2), (sim1, sim2)


def cmd_simulate(ses: Session) -> None:
    cfg = ses.cfg
    pairs, _ = _load(cfg)
    f, margins, obs, sim = _simulate(ses, pairs)
    c1, c2 = gap_category(sim[0]), gap_category(sim[1])
    ses.csv("simulated.csv", ("i", "gap1", "gap2", "category1", "category2", "family", "seed"),
            [(i + 1, a, b, CATEGORY_LABELS[x], CATEGORY_LABELS[y], f.key, cfg.seed)
             for i, (a, b, x, y) in enumerate(zip(sim[0], sim[1], c1, c2))])
    if sim[0].size != obs[0].size:
        return
    rep = prediction_report(obs, sim, model_year_labels(pairs), pairing=cfg.pairing, seed=cfg.seed, order=MODEL_YEAR_LABELS)
    rows = [
        (r["stratum"], r["statistic"], r["v1_observed"], r["v1_simulated"], r["v1_absdiff"],
         r["v2_observed"], r["v2_simulated"], r["v2_absdiff"], cfg.seed)
        for r in rep.rows()
    ]
    payload = {
        "family": f.key, "params": list(f.params.as_tuple()), "margins": vars(margins),
        "pairing": rep.pairing, "seed": cfg.seed,
        "strata": {
            name: {f"vehicle{k + 1}": {"n": c.n, "observed": vars(c.observed), "simulated": vars(c.simulated),
                                       "mad": c.mad, "rmse": c.rmse}
                   for k, c in enumerate(cmp)}
            for name, cmp in rep.strata.items()
        },
    }
    ses.table("prediction", ("stratum", "statistic", "v1_observed", "v1_simulated", "v1_absdiff",
                             "v2_observed", "v2_simulated", "v2_absdiff", "seed"), rows, payload)


def cmd_crosstab(ses: Session) -> None:
    cfg = ses.cfg
    pairs, _ = _load(cfg)
    if cfg.source == "observed":
        g1, g2 = gaps(pairs)
        extra = {}
    else:
        f, _, _, (g1, g2) = _simulate(ses, pairs)
        extra = {"family": f.key, "seed": cfg.seed}
    ct = crosstab(g1, g2)
    rows = []
    for i in range(4):
        for j in range(4):
            rows.append((CATEGORY_LABELS[i], CATEGORY_LABELS[j], *ct.cell(i + 1, j + 1)))
        rows.append((CATEGORY_LABELS[i], "Total", int(ct.row_totals[i]), 100.0 if ct.row_totals[i] else 0.0,
                     100.0 * ct.row_totals[i] / ct.grand))
    for j in range(4):
        rows.append(("Total", CATEGORY_LABELS[j], int(ct.col_totals[j]), 100.0 * ct.col_totals[j] / ct.grand, 100.0))
    rows.append(("Total", "Total", ct.grand, 100.0, 100.0))
    header = ("vehicle1", "vehicle2", "count", "row_pct", "col_pct")
    if extra:
        header += tuple(extra)
        rows = [r + tuple(extra.values()) for r in rows]
    ses.table(f"crosstab_{cfg.source}", header, rows, {"source": cfg.source, **extra, **ct.to_dict()})


def cmd_report(ses: Session) -> None:
    """The full chain; each step sees the files written by the previous one."""
    cfg = ses.cfg
    steps = [
        ("ingest", cfg.input, {}),
        ("trim", ses.path("pairs.csv"), {"trim_k": 3.0 if cfg.trim_k is None else cfg.trim_k}),
    ]
    trimmed = ses.path("trimmed.csv")
    for name in ("describe", "select", "gof", "simulate"):
        steps.append((name, trimmed, {"trim_k": None}))
    steps.append(("crosstab", trimmed, {"trim_k": None, "source": "observed"}))
    steps.append(("crosstab", trimmed, {"trim_k": None, "source": "simulated"}))
    for name, path, over in steps:
        ses.cfg = replace(cfg, subcommand=name, input=path, **over)
        COMMANDS[name](ses)
    ses.cfg = cfg


COMMANDS = {
    "generate": cmd_generate,
    "ingest": cmd_ingest,
    "trim": cmd_trim,
    "describe": cmd_describe,
    "fit": cmd_fit,
    "select": cmd_select,
    "gof": cmd_gof,
    "simulate": cmd_simulate,
    "crosstab": cmd_crosstab,
    "report": cmd_report,
}


def _fail(code: str, message: str, status: int) -> int:
    print(f"code={code} {message}", file=sys.stderr)
    return status


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand; returns the process exit code."""
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        return _fail("usage", str(exc), 2)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    ses = Session(cfg)
    try:
        art.ensure_dir(cfg.output_dir)
        COMMANDS[cfg.subcommand](ses)
    except DomainError as exc:
        return _fail(exc.code, str(exc), 2)
    except CopulaError as exc:
        return _fail(exc.code, str(exc), 1)
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        return _fail("io", str(exc), 1)
    except UnicodeDecodeError as exc:
        return _fail("data", f"input is not UTF-8 ({exc.reason})", 1)
    for p in ses.written:
        print(p)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
