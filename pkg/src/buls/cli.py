"""Command-line front end.

Subcommands: describe, fit, fit-all, simulate, mc-study, qq, datasets.
Two soccer datasets ship embedded: `uefa` (2022/23 Champions League group
stage, fractions of the 90 regulation minutes with the ball) and `fifa`
(2022 World Cup group stage, pass-completion and possession shares).

Exit codes: 0 success, 2 usage error, 3 data error, 4 fit did not
converge (results are still written, with a warning on stderr).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .core import ModelParams
from .experiments import MCConfig, MCReport, describe, mc_study, qq_data
from .generators import KINDS, GeneratorFamily
from .inference import (
    DEFAULT_SHAPE_GRID,
    PARAM_NAMES,
    BivariateDataset,
    FitResult,
    fit,
    profile_fit,
)
from .sampling import RandomSource, sample_buls

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NOCONV = 4

SHAPED = ("student", "hyperbolic", "slash")

# 2022/23 Champions League group stage: minutes (out of 90) with ball
# possession, home and away team of each of the 37 broadcast matches.
_UEFA_NINETIETHS = (
    (26, 20), (63, 18), (19, 19), (66, 85), (40, 40), (49, 49), (8, 8),
    (69, 71), (39, 39), (82, 48), (72, 72), (66, 62), (25, 9), (41, 3),
    (16, 75), (18, 18), (22, 14), (42, 42), (2, 2), (36, 52), (34, 34),
    (53, 39), (54, 7), (51, 28), (76, 64), (64, 15), (26, 48), (16, 16),
    (44, 13), (25, 14), (55, 11), (49, 49), (24, 24), (44, 30), (42, 3),
    (27, 47), (28, 28),
)

# 2022 World Cup group stage: (pass completion, possession) shares for
# the 32 teams, as published to three decimals.
_FIFA_ROWS = (
    (0.888, 0.541), (0.815, 0.474), (0.907, 0.624), (0.891, 0.606),
    (0.827, 0.517), (0.898, 0.557), (0.856, 0.462), (0.861, 0.618),
    (0.890, 0.603), (0.860, 0.477), (0.920, 0.646), (0.894, 0.587),
    (0.913, 0.648), (0.849, 0.471), (0.781, 0.427), (0.828, 0.442),
    (0.864, 0.581), (0.820, 0.527), (0.846, 0.526), (0.879, 0.601),
    (0.860, 0.481), (0.885, 0.616), (0.862, 0.592), (0.769, 0.463),
    (0.845, 0.495), (0.846, 0.489), (0.931, 0.751), (0.863, 0.555),
    (0.856, 0.447), (0.879, 0.569), (0.812, 0.613), (0.841, 0.594),
)


@dataclass(frozen=True)
class EmbeddedDataset:
    """A named dataset bundled with the package."""

    name: str
    rows: tuple


def _embedded(name: str) -> EmbeddedDataset:
    if name == "uefa":
        rows = tuple((a / 90.0, b / 90.0) for a, b in _UEFA_NINETIETHS)
    elif name == "fifa":
        rows = _FIFA_ROWS
    else:
        raise KeyError(name)
    return EmbeddedDataset(name=name, rows=rows)


def dataset(name: str) -> BivariateDataset:
    """One of the embedded datasets as a fit-ready BivariateDataset."""
    emb = _embedded(name)
    return BivariateDataset(rows=np.array(emb.rows), label=emb.name)


class DataError(Exception):
    """Raised for unreadable or out-of-range input data."""


def _read_csv(path: str) -> BivariateDataset:
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc.strerror}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if [h.strip().lower() for h in header] != ["w1", "w2"]:
            raise DataError(f"{path}: expected header 'w1,w2', got {','.join(header)!r}")
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != 2:
                raise DataError(f"{path}:{lineno}: expected two columns, got {len(rec)}")
            try:
                w1, w2 = float(rec[0]), float(rec[1])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric value") from None
            if not (0.0 < w1 < 1.0 and 0.0 < w2 < 1.0):
                raise DataError(f"{path}:{lineno}: values must lie strictly in (0, 1)")
            rows.append((w1, w2))
    if not rows:
        raise DataError(f"{path}: no data rows")
    return BivariateDataset(rows=np.array(rows), label=path)


def _load_data(spec: str) -> BivariateDataset:
    if spec in ("uefa", "fifa"):
        return dataset(spec)
    return _read_csv(spec)


def _write_csv(path_or_none, header, rows) -> None:
    """Delimited output at 17 significant digits (lossless round-trip)."""
    fh = sys.stdout if path_or_none is None else open(path_or_none, "w", newline="")
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])
    finally:
        if fh is not sys.stdout:
            fh.close()


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return f"{v:.6g}"
    return str(v)


def _print_table(header, rows, stream=None) -> None:
    stream = stream or sys.stdout
    cells = [list(map(_fmt, r)) for r in rows]
    widths = [
        max(len(h), *(len(r[i]) for r in cells)) if cells else len(h)
        for i, h in enumerate(header)
    ]
    fmt_row = lambda r: "  ".join(s.rjust(w) if i else s.ljust(w) for i, (s, w) in enumerate(zip(r, widths)))
    print(fmt_row(header), file=stream)
    for r in cells:
        print(fmt_row(r), file=stream)


def _family(model: str, shape) -> GeneratorFamily:
    if model in SHAPED:
        if shape is None:
            raise ValueError(f"--shape is required for the {model} family here")
        return GeneratorFamily(kind=model, shape=float(shape))
    if shape is not None:
        raise ValueError(f"--shape does not apply to the {model} family")
    return GeneratorFamily(kind=model, shape=None)


def _parse_grid(text: str):
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo, hi = int(lo), int(hi)
        if lo < 1 or hi < lo:
            raise argparse.ArgumentTypeError("grid must satisfy 1 <= a <= b")
        return tuple(range(lo, hi + 1))
    return (int(text),)


def _positive_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def _fit_to_dict(fr: FitResult) -> dict:
    return {
        "gen": {"kind": fr.gen.kind, "shape": fr.gen.shape},
        "theta_hat": {k: v for k, v in zip(PARAM_NAMES, fr.theta_hat.as_array())},
        "se": {k: v for k, v in zip(PARAM_NAMES, fr.se)},
        "loglik": fr.loglik,
        "aic": fr.aic,
        "bic": fr.bic,
        "converged": fr.converged,
        "iterations": fr.iterations,
        "score_norm": fr.score_norm,
    }


def _scrub(x):
    """Replace non-finite floats with null so the JSON stays portable."""
    if isinstance(x, float):
        return float(x) if math.isfinite(x) else None
    if isinstance(x, dict):
        return {k: _scrub(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_scrub(v) for v in x]
    return x


def _dump_json(obj) -> str:
    return json.dumps(_scrub(obj), indent=2, allow_nan=False)


def _print_fit_table(fr: FitResult, stream) -> None:
    rows = [
        (name, est, se)
        for name, est, se in zip(PARAM_NAMES, fr.theta_hat.as_array(), fr.se)
    ]
    _print_table(("parameter", "estimate", "se"), rows, stream)
    shape = "-" if fr.gen.shape is None else _fmt(float(fr.gen.shape))
    print(
        f"model {fr.gen.kind}  shape {shape}  loglik {_fmt(fr.loglik)}  "
        f"aic {_fmt(fr.aic)}  bic {_fmt(fr.bic)}  converged {_fmt(fr.converged)}",
        file=stream,
    )


def _fit_model(model, shape, grid, data, seed):
    """Fixed-shape fit when --shape is given, profile fit otherwise."""
    if model in SHAPED and shape is None:
        fr, _ = profile_fit(model, data, grid, seed=seed)
        return fr
    return fit(_family(model, shape), data, seed=seed)


# ---- subcommand handlers ----


def _cmd_describe(args) -> int:
    data = _load_data(args.data)
    summary = describe(data, adjusted=args.adjusted)
    if args.json:
        print(_dump_json({k: vars(v) for k, v in summary.items()}))
        return EXIT_OK
    rows = [
        (
            k, s.n, s.minimum, s.median, s.mean, s.maximum, s.sd, s.cv, s.cs, s.ck,
        )
        for k, s in summary.items()
    ]
    _print_table(
        ("variable", "n", "min", "median", "mean", "max", "sd", "cv", "cs", "ck"),
        rows,
    )
    return EXIT_OK


def _cmd_fit(args) -> int:
    data = _load_data(args.data)
    fr = _fit_model(args.model, args.shape, args.shape_grid, data, args.seed)
    _print_fit_table(fr, sys.stderr)
    print(_dump_json(_fit_to_dict(fr)))
    if not fr.converged:
        print("warning: fit did not converge; best point found reported", file=sys.stderr)
        return EXIT_NOCONV
    return EXIT_OK


def _cmd_fit_all(args) -> int:
    data = _load_data(args.data)
    results = []
    for model in KINDS:
        results.append(_fit_model(model, None, args.shape_grid, data, args.seed))
    ranked = sorted((f for f in results if f.converged), key=lambda f: f.aic)
    flagged = [f for f in results if not f.converged]
    rows = []
    for rank, fr in enumerate(ranked + flagged, start=1):
        rows.append(
            (
                fr.gen.kind,
                "-" if fr.gen.shape is None else int(fr.gen.shape),
                fr.loglik,
                fr.aic,
                fr.bic,
                fr.converged,
            )
        )
    if args.json:
        print(_dump_json([_fit_to_dict(f) for f in ranked + flagged]))
    else:
        _print_table(("model", "shape", "loglik", "aic", "bic", "converged"), rows)
    for fr in flagged:
        print(
            f"warning: {fr.gen.kind} fit did not converge; listed unranked",
            file=sys.stderr,
        )
    return EXIT_OK if ranked else EXIT_NOCONV


def _cmd_simulate(args) -> int:
    theta = ModelParams(args.eta1, args.eta2, args.sigma1, args.sigma2, args.rho)
    gen = _family(args.model, args.shape)
    data = sample_buls(gen, theta, args.n, RandomSource(args.seed))
    _write_csv(args.out, ("w1", "w2"), [(float(a), float(b)) for a, b in data.rows])
    return EXIT_OK


def _study_config(path: str) -> MCConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from exc
    try:
        theta = ModelParams(**{k: float(raw["theta"][k]) for k in PARAM_NAMES})
        gen = _family(raw["model"], raw.get("shape"))
        return MCConfig(
            gen=gen,
            theta_true=theta,
            sample_sizes=tuple(int(n) for n in raw["sample_sizes"]),
            replications=int(raw["replications"]),
            confidence=float(raw.get("confidence", 0.95)),
            base_seed=int(raw.get("seed", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: bad study config ({exc})") from exc


def _cmd_mc_study(args) -> int:
    cfg = _study_config(args.config)
    report = mc_study(cfg)
    rates = dict(report.failure_rates)
    rows = [
        (c.n, c.param, c.bias, c.rmse, c.cp, c.cp_se, rates[c.n]) for c in report.cells
    ]
    _write_csv(
        args.out,
        ("n", "parameter", "bias", "rmse", "cp", "cp_se", "failure_rate"),
        rows,
    )
    if args.plot:
        _render_mc_png(args.plot, report)
    return EXIT_OK


def _cmd_qq(args) -> int:
    data = _load_data(args.data)
    fr = _fit_model(args.model, args.shape, args.shape_grid, data, args.seed)
    series = qq_data(fr.gen, fr.theta_hat, data)
    _write_csv(args.out, ("theoretical", "empirical"), [tuple(p) for p in series.pairs])
    if args.svg:
        _write_qq_svg(args.svg, series.pairs)
    if args.plot:
        _render_qq_png(args.plot, series.pairs)
    if not fr.converged:
        print("warning: fit did not converge; diagnostics use best point found", file=sys.stderr)
        return EXIT_NOCONV
    return EXIT_OK


def _cmd_datasets(args) -> int:
    os.makedirs(args.export, exist_ok=True)
    for name in ("uefa", "fifa"):
        ds = dataset(name)
        _write_csv(
            os.path.join(args.export, f"{name}.csv"),
            ("w1", "w2"),
            [(float(a), float(b)) for a, b in ds.rows],
        )
        print(os.path.join(args.export, f"{name}.csv"))
    return EXIT_OK


# ---- figures ----


def _write_qq_svg(path: str, pairs) -> None:
    """Minimal scatter SVG: one circle per observation plus the identity
    reference line, written through an XML tree so output stays well formed."""
    from xml.etree import ElementTree as ET

    size, margin = 480.0, 48.0
    hi = max(max(p[0] for p in pairs), max(p[1] for p in pairs)) * 1.05 or 1.0
    span = size - 2 * margin

    def sx(v):
        return margin + span * v / hi

    def sy(v):
        return size - margin - span * v / hi

    svg = ET.Element(
        "svg",
        xmlns="http://www.w3.org/2000/svg",
        width=str(int(size)),
        height=str(int(size)),
        viewBox=f"0 0 {int(size)} {int(size)}",
    )
    ET.SubElement(
        svg,
        "rect",
        x=str(margin), y=str(margin), width=str(span), height=str(span),
        fill="white", stroke="#444",
    )
    ET.SubElement(
        svg,
        "line",
        x1=str(sx(0.0)), y1=str(sy(0.0)), x2=str(sx(hi)), y2=str(sy(hi)),
        stroke="#888",
    )
    for t, e in pairs:
        ET.SubElement(
            svg, "circle", cx=f"{sx(t):.2f}", cy=f"{sy(e):.2f}", r="3",
            fill="none", stroke="#1a6",
        )
    lab = ET.SubElement(svg, "text", x=str(size / 2), y=str(size - 10))
    lab.set("text-anchor", "middle")
    lab.text = "theoretical quantile"
    lab = ET.SubElement(svg, "text", x="14", y=str(size / 2))
    lab.set("transform", f"rotate(-90 14 {size / 2})")
    lab.set("text-anchor", "middle")
    lab.text = "empirical quantile"
    ET.ElementTree(svg).write(path, xml_declaration=True, encoding="unicode")


def _agg_pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _render_qq_png(path: str, pairs) -> None:
    plt = _agg_pyplot()
    t = [p[0] for p in pairs]
    e = [p[1] for p in pairs]
    fig, ax = plt.subplots(figsize=(5, 5))
    hi = max(max(t), max(e)) * 1.05
    ax.plot([0, hi], [0, hi], color="0.6", lw=1)
    ax.scatter(t, e, s=14, facecolors="none", edgecolors="C0")
    ax.set_xlabel("theoretical quantile")
    ax.set_ylabel("empirical quantile")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _render_mc_png(path: str, report: MCReport) -> None:
    plt = _agg_pyplot()
    sizes = sorted({c.n for c in report.cells})
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.6))
    for ax, stat in zip(axes, ("bias", "rmse", "cp")):
        for param in PARAM_NAMES:
            ys = [getattr(report.cell(n, param), stat) for n in sizes]
            ax.plot(sizes, ys, marker="o", ms=3, label=param)
        ax.set_xlabel("sample size")
        ax.set_ylabel(stat)
    if report.cells:
        axes[2].axhline(report.config.confidence, color="0.5", lw=0.8, ls="--")
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


# ---- parser ----


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="buls",
        description="Bivariate unit-log-symmetric distributions: fitting, "
        "simulation and diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_data(p):
        p.add_argument("--data", required=True, help="uefa, fifa, or a CSV file with header w1,w2")

    def add_fit_opts(p):
        p.add_argument("--model", required=True, choices=KINDS)
        p.add_argument("--shape", type=float, default=None, help="family shape parameter; omit to profile over --shape-grid")
        p.add_argument("--shape-grid", type=_parse_grid, default=DEFAULT_SHAPE_GRID, metavar="A..B")
        p.add_argument("--seed", type=int, default=0, help="seed for optimizer restarts")

    p = sub.add_parser("describe", help="summary statistics per variable")
    add_data(p)
    p.add_argument("--adjusted", action="store_true", help="small-sample adjusted skewness/kurtosis")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_describe)

    p = sub.add_parser("fit", help="maximum-likelihood fit of one family")
    add_data(p)
    add_fit_opts(p)
    p.set_defaults(handler=_cmd_fit)

    p = sub.add_parser("fit-all", help="fit all five families, rank by AIC")
    add_data(p)
    p.add_argument("--shape-grid", type=_parse_grid, default=DEFAULT_SHAPE_GRID, metavar="A..B")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_fit_all)

    p = sub.add_parser("simulate", help="draw a synthetic dataset")
    p.add_argument("--model", required=True, choices=KINDS)
    p.add_argument("--shape", type=float, default=None)
    for name in PARAM_NAMES:
        p.add_argument(f"--{name}", type=float, required=True)
    p.add_argument("-n", type=int, dest="n", required=True, help="sample size (>= 1)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output CSV (default stdout)")
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("mc-study", help="Monte Carlo bias/RMSE/coverage study")
    p.add_argument("--config", required=True, help="JSON study configuration")
    p.add_argument("--out", default=None, help="report CSV (default stdout)")
    p.add_argument("--plot", default=None, help="also render a PNG figure")
    p.set_defaults(handler=_cmd_mc_study)

    p = sub.add_parser("qq", help="Mahalanobis-distance QQ diagnostics")
    add_data(p)
    add_fit_opts(p)
    p.add_argument("--out", default=None, help="QQ pairs CSV (default stdout)")
    p.add_argument("--svg", default=None, help="also write an SVG scatter")
    p.add_argument("--plot", default=None, help="also render a PNG figure")
    p.set_defaults(handler=_cmd_qq)

    p = sub.add_parser("datasets", help="export the embedded datasets")
    p.add_argument("--export", required=True, metavar="DIR")
    p.set_defaults(handler=_cmd_datasets)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "simulate" and args.n < 1:
        parser.error("-n must be a positive integer")
    try:
        return args.handler(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        parser.exit(EXIT_USAGE, f"error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
