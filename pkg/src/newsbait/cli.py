"""Command-line pipeline: ingest, score, aggregate, diagnose, analyze, report.

Each stage runs independently so intermediate products can be inspected.
Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
All reports are UTF-8 with fixed decimal formatting, so identical inputs
produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import csv
import json
import re
import sys
from dataclasses import dataclass
from datetime import date
from pathlib import Path

from . import __version__, detector, diagnostics, its, svgplot
from .errors import DataError, NewsbaitError, NumericalError, UsageError
from .ingest import IngestConfig, is_probably_english, iter_matched_texts, select_crawl_day
from .store import ScoreRow, ScoreStore
from .warc import read_warc_stream


@dataclass
class PipelineConfig:
    ingest: IngestConfig
    store_path: str
    model_path: str | None
    events: list[its.EventSpec]
    ar_order: int = its.DEFAULT_AR_ORDER
    base_alpha: float = 0.05
    acf_max_lag: int = 20
    out_dir: str = "newsbait-out"
    seed: int | None = None  # reserved; the analysis stages are deterministic


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 instead of argparse's default 2
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="newsbait", description=__doc__)
    parser.add_argument("--version", action="version", version=f"newsbait {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="pipeline config JSON")
    common.add_argument("--store", help="score database path (SQLite file)")
    common.add_argument("--model", help="detector model JSON (default: bundled model)")
    common.add_argument("--events", help="events JSON path (default: bundled five)")
    common.add_argument("--ar-order", type=int, default=None, help="AR error order p")
    common.add_argument("--alpha", type=float, default=None, help="base significance level")
    common.add_argument("--seed", type=int, default=None, help="random seed (reserved)")
    common.add_argument("--out", default=None, help="output directory for reports")

    sub = parser.add_subparsers(dest="command", required=True)
    p_ingest = sub.add_parser("ingest", parents=[common], help="parse WARC files into the store")
    p_ingest.add_argument("warc_files", nargs="+", help="WARC files (.warc / .warc.gz)")
    p_ingest.set_defaults(func=cmd_ingest)
    sub.add_parser("score", parents=[common], help="re-score stored rows with a model") \
        .set_defaults(func=cmd_score)
    sub.add_parser("aggregate", parents=[common], help="write the daily mean series") \
        .set_defaults(func=cmd_aggregate)
    sub.add_parser("diagnose", parents=[common], help="ACF/PACF and stationarity tests") \
        .set_defaults(func=cmd_diagnose)
    sub.add_parser("analyze", parents=[common], help="fit per-event GLS segmented models") \
        .set_defaults(func=cmd_analyze)
    sub.add_parser("report", parents=[common], help="summary, histogram, fit plots") \
        .set_defaults(func=cmd_report)
    return parser


def _load_config(args) -> PipelineConfig:
    raw = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"invalid config JSON: {exc}") from exc

    ingest_cfg = IngestConfig.from_dict(raw.get("ingest", raw))

    store_path = args.store or raw.get("store_path")
    if not store_path:
        raise UsageError("a store path is required (--store or config store_path)")

    model_path = args.model or raw.get("model_path")
    if model_path and not Path(model_path).exists():
        raise UsageError(f"model file not found: {model_path}")

    events_path = args.events or raw.get("events_path")
    if events_path:
        if not Path(events_path).exists():
            raise UsageError(f"events file not found: {events_path}")
        events = its.load_events(events_path)
    elif "events" in raw:
        events = [
            its.EventSpec(name=e["name"], date=date.fromisoformat(e["date"]))
            for e in raw["events"]
        ]
    else:
        events = its.default_events()

    ar_order = args.ar_order if args.ar_order is not None else int(raw.get("ar_order", its.DEFAULT_AR_ORDER))
    base_alpha = args.alpha if args.alpha is not None else float(raw.get("base_alpha", 0.05))
    if ar_order < 0:
        raise UsageError("--ar-order must be >= 0")
    if not 0.0 < base_alpha < 1.0:
        raise UsageError("--alpha must be in (0, 1)")

    out_dir = args.out or raw.get("out_dir", "newsbait-out")
    return PipelineConfig(
        ingest=ingest_cfg,
        store_path=store_path,
        model_path=model_path,
        events=events,
        ar_order=ar_order,
        base_alpha=base_alpha,
        acf_max_lag=int(raw.get("acf_max_lag", 20)),
        out_dir=out_dir,
        seed=args.seed,
    )


def _load_model(config: PipelineConfig):
    if config.model_path:
        return detector.load_model(config.model_path)
    return detector.default_model()


def _out_dir(config: PipelineConfig) -> Path:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _event_slug(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", name.lower()).strip("_")


# -- subcommands

def cmd_ingest(args) -> int:
    config = _load_config(args)
    model, registry = _load_model(config)
    counts = {
        "files": 0, "files_failed": 0, "records_read": 0, "parse_errors": 0,
        "truncated_records": 0, "html_pages": 0, "skipped_non_html": 0,
        "skipped_off_day": 0, "elements_matched": 0, "below_min_words": 0,
        "non_english": 0, "rows_stored": 0,
    }
    min_words = config.ingest.min_words
    english_on = config.ingest.english_filter_enabled
    with ScoreStore(config.store_path) as store:
        for path in args.warc_files:
            try:
                reader = read_warc_stream(path)
            except OSError as exc:
                print(f"error: cannot read {path}: {exc}", file=sys.stderr)
                counts["files_failed"] += 1
                continue
            counts["files"] += 1
            rows = []
            for record in reader:
                if not record.is_html:
                    counts["skipped_non_html"] += 1
                    continue
                if record.warc_date is None or not select_crawl_day(record, config.ingest):
                    counts["skipped_off_day"] += 1
                    continue
                counts["html_pages"] += 1
                ymd = record.warc_date.date()
                for tag, text in iter_matched_texts(record.payload, config.ingest, record.charset):
                    counts["elements_matched"] += 1
                    if len(text.split()) < min_words:
                        counts["below_min_words"] += 1
                        continue
                    if english_on and not is_probably_english(text, config.ingest):
                        counts["non_english"] += 1
                        continue
                    features = detector.extract_features(text, registry)
                    pair = detector.score(features, model)
                    rows.append(ScoreRow(
                        ymd=ymd,
                        tag=tag,
                        pageurl=record.target_uri,
                        headline=text,
                        detector=",".join(repr(v) for v in features.values),
                        score_1=pair.score_1,
                        score_2=pair.score_2,
                    ))
            counts["rows_stored"] += store.insert_batch(rows)
            counts["records_read"] += reader.records_read
            counts["parse_errors"] += len(reader.errors)
            counts["truncated_records"] += reader.truncated
    for key, value in counts.items():
        print(f"{key}: {value}")
    if counts["rows_stored"] == 0:
        raise DataError("no rows stored (all inputs empty or filtered out)")
    return 0


def cmd_score(args) -> int:
    config = _load_config(args)
    model, registry = _load_model(config)
    updated = 0
    with ScoreStore(config.store_path) as store:
        triples = []
        for row in store.iter_rows():
            features = detector.extract_features(row.headline, registry)
            pair = detector.score(features, model)
            triples.append((
                row.id,
                ",".join(repr(v) for v in features.values),
                pair.score_1,
                pair.score_2,
            ))
        updated = store.update_scores(triples)
    print(f"rows_rescored: {updated}")
    return 0


def cmd_aggregate(args) -> int:
    config = _load_config(args)
    out = _out_dir(config)
    with ScoreStore(config.store_path) as store:
        series = store.aggregate_daily()
    path = out / "daily_series.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "mean_score", "count"])
        for d, mean, count in zip(series.dates, series.means, series.counts):
            writer.writerow([d.isoformat(), repr(mean), count])
    print(f"days: {len(series)}")
    print(f"wrote: {path}")
    return 0


def _write_acf_csv(path: Path, result) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lag", "coefficient"])
        for lag, coef in zip(result.lags, result.coefficients):
            writer.writerow([lag, f"{coef:.6f}"])


def _unit_root_text(label: str, result) -> str:
    crit = "  ".join(f"{level}={value:.4f}" for level, value in result.critical_values.items())
    decision = "reject" if result.reject_null else "fail to reject"
    return (
        f"{label}\n"
        f"  null hypothesis : {result.null}\n"
        f"  statistic       : {result.statistic:.6f}\n"
        f"  critical values : {crit}\n"
        f"  lags/bandwidth  : {result.lags_used}\n"
        f"  decision at 5%  : {decision} the null\n"
    )


def _write_diagnostics(out: Path, series, config: PipelineConfig) -> None:
    values = series.means
    max_lag = min(config.acf_max_lag, len(values) - 1)
    _write_acf_csv(out / "acf.csv", diagnostics.acf(values, max_lag))
    _write_acf_csv(out / "pacf.csv", diagnostics.pacf(values, max_lag))
    adf = diagnostics.adf_test(values)
    kpss = diagnostics.kpss_test(values)
    text = (
        _unit_root_text("ADF test (regression: constant, Schwert auto lag)", adf)
        + "\n"
        + _unit_root_text("KPSS test (null: level, Bartlett auto bandwidth)", kpss)
    )
    (out / "stationarity.txt").write_text(text, encoding="utf-8")


def cmd_diagnose(args) -> int:
    config = _load_config(args)
    out = _out_dir(config)
    with ScoreStore(config.store_path) as store:
        series = store.aggregate_daily()
    try:
        _write_diagnostics(out, series, config)
    except ValueError as exc:
        raise DataError(f"series unsuitable for diagnostics: {exc}") from exc
    print(f"wrote: {out / 'acf.csv'}, {out / 'pacf.csv'}, {out / 'stationarity.txt'}")
    return 0


def _write_fit_csv(path: Path, event: its.EventSpec, fit: its.GlsFit) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["event", event.name, "date", event.date.isoformat(),
                         "aic", f"{fit.aic:.6f}", "ar_order", fit.ar.order])
        writer.writerow(["term", "value", "std_error", "t_value", "p_value", "sig"])
        for i, term in enumerate(fit.term_names):
            writer.writerow([
                term,
                f"{fit.coefficients[i]:.6f}",
                f"{fit.std_errors[i]:.6f}",
                f"{fit.t_values[i]:.6f}",
                f"{fit.p_values[i]:.4f}",
                fit.significant[i] if fit.significant else "",
            ])


def _write_fit_json(path: Path, event: its.EventSpec, fit: its.GlsFit,
                    design: its.SegmentedDesign, alpha_adjusted: float) -> None:
    payload = {
        "event": event.name,
        "date": event.date.isoformat(),
        "n": design.n,
        "event_index": design.event_index,
        "ar_order": fit.ar.order,
        "phi": list(fit.ar.phi),
        "innovation_variance": fit.ar.sigma2,
        "loglik": fit.loglik,
        "aic": fit.aic,
        "alpha_adjusted": alpha_adjusted,
        "terms": {
            term: {
                "value": float(fit.coefficients[i]),
                "std_error": float(fit.std_errors[i]),
                "t_value": float(fit.t_values[i]),
                "p_value": float(fit.p_values[i]),
                "sig": fit.significant[i] if fit.significant else None,
            }
            for i, term in enumerate(fit.term_names)
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_analyze(args) -> int:
    config = _load_config(args)
    out = _out_dir(config)
    with ScoreStore(config.store_path) as store:
        series = store.aggregate_daily()
    if not config.events:
        raise UsageError("no events configured")
    alpha_adjusted = its.bonferroni_alpha(config.base_alpha, len(config.events))

    try:
        _write_diagnostics(out, series, config)
    except (ValueError, NumericalError) as exc:
        print(f"warning: diagnostics skipped: {exc}", file=sys.stderr)

    aic_rows = []
    fitted = 0
    for event in config.events:
        try:
            design = its.build_design(series, event)
        except DataError as exc:
            print(f"warning: skipping event {event.name!r}: {exc}", file=sys.stderr)
            continue
        fit = its.fit_gls_ar(design, p=config.ar_order)
        its.flag_significance(fit, alpha_adjusted)
        slug = _event_slug(event.name)
        _write_fit_csv(out / f"fit_{slug}.csv", event, fit)
        _write_fit_json(out / f"fit_{slug}.json", event, fit, design, alpha_adjusted)
        aic_rows.append((event.name, fit.aic, fit.ar.order))
        fitted += 1
        print(f"fitted: {event.name} (AIC {fit.aic:.3f})")
    with open(out / "aic.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["event", "aic", "ar_order"])
        for name, aic, order in aic_rows:
            writer.writerow([name, f"{aic:.6f}", order])
    if fitted == 0:
        raise DataError("no event could be fitted against this series")
    print(f"alpha_adjusted: {alpha_adjusted:.6f}")
    return 0


def cmd_report(args) -> int:
    config = _load_config(args)
    out = _out_dir(config)
    with ScoreStore(config.store_path) as store:
        stats = store.summary_stats()
        days = store.distinct_days()
        series = store.aggregate_daily()
    alpha_adjusted = its.bonferroni_alpha(config.base_alpha, len(config.events)) \
        if config.events else config.base_alpha

    summary = (
        f"rows: {stats.n}\n"
        f"mean_score: {stats.mean:.5f}\n"
        f"median_score: {stats.median:.5f}\n"
        f"mode_score: {stats.mode:.5f}\n"
        f"days: {days}\n"
        f"events: {len(config.events)}\n"
        f"base_alpha: {config.base_alpha:.4f}\n"
        f"bonferroni_alpha: {alpha_adjusted:.6f}\n"
    )
    (out / "summary.txt").write_text(summary, encoding="utf-8")

    with open(out / "histogram.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_midpoint", "count"])
        for i, count in enumerate(stats.histogram):
            writer.writerow([f"{(i + 0.5) / 100.0:.3f}", count])
    (out / "histogram.svg").write_text(
        svgplot.histogram_svg(stats.histogram, "Histogram of all text clickbait scores"),
        encoding="utf-8",
    )

    missing = []
    for event in config.events:
        slug = _event_slug(event.name)
        fit_path = out / f"fit_{slug}.json"
        if not fit_path.exists():
            missing.append(event.name)
            continue
        with open(fit_path, encoding="utf-8") as fh:
            fit_data = json.load(fh)
        coeffs = [fit_data["terms"][t]["value"] for t in ("intercept", "T", "D", "P")]
        svg = svgplot.fit_overlay_svg(
            series.means,
            fit_data["event_index"],
            coeffs,
            f"{event.name} ({event.date.isoformat()})",
        )
        (out / f"fit_{slug}.svg").write_text(svg, encoding="utf-8")
    print(f"wrote: {out / 'summary.txt'}, {out / 'histogram.svg'}")
    if missing:
        print(
            "missing fits (run 'analyze' first): " + "; ".join(missing),
            file=sys.stderr,
        )
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NewsbaitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
