"""Command-line interface: CSV in, fitted-model JSON / tabular CSV out.

Subcommands: fit, predict, test, score, rootogram, simulate, quadcheck.
Exit codes: 0 success, 2 usage error, 3 data error, 4 convergence failure.
"""

import argparse
import csv
import io
import sys

import numpy as np

from . import infer, sim
from .errors import DataError, DomainError, FitError, ShapeError, XbxError
from .model import (Dataset, FitOptions, ModelSpec, fit, fit_from_json,
                    fit_to_json, predict)
from .quad import gauss_laguerre
from .score import crps, rootogram, total_score

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_CONVERGENCE = 4


# ---------------------------------------------------------------------------
# CSV ingestion

def _read_table(path):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [c.strip() for c in rows[0]]
    body = rows[1:]
    if not body:
        raise DataError(f"{path}: no data rows")
    for i, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise DataError(f"{path} row {i}: expected {len(header)} cells, "
                            f"got {len(row)}")
    cols = {name: [row[j].strip() for row in body]
            for j, name in enumerate(header)}
    return header, cols


def _numeric_column(name, cells, path="<input>"):
    out = np.empty(len(cells))
    for i, cell in enumerate(cells):
        if cell == "" or cell.upper() in ("NA", "NAN"):
            raise DataError(f"{path} row {i + 2}, column {name!r}: missing value")
        try:
            out[i] = float(cell)
        except ValueError:
            raise DataError(f"{path} row {i + 2}, column {name!r}: "
                            f"unparseable numeric cell {cell!r}") from None
    return out


def _expand_column(name, cells, path):
    """One column -> (column names, 2-d float block). Categorical columns are
    one-hot encoded with the first level (sorted) as reference."""
    for cell in cells:
        if cell == "" or cell.upper() in ("NA", "NAN"):
            raise DataError(f"{path}, column {name!r}: missing value")
    try:
        vals = _numeric_column(name, cells, path)
        return [name], vals[:, None]
    except DataError as exc:
        if "missing value" in str(exc):
            raise
    levels = sorted(set(cells))
    names = [f"{name}[{lv}]" for lv in levels[1:]]
    block = np.column_stack([
        np.array([1.0 if c == lv else 0.0 for c in cells]) for lv in levels[1:]
    ]) if len(levels) > 1 else np.zeros((len(cells), 0))
    return names, block


def _design(cols, spec_list, path):
    """Build a design matrix from a column list; `a:b` terms are elementwise
    products of the (possibly one-hot expanded) factor blocks."""
    n = len(next(iter(cols.values())))
    names = ["intercept"]
    blocks = [np.ones((n, 1))]
    for term in spec_list:
        term = term.strip()
        if not term:
            continue
        factors = [f.strip() for f in term.split(":")]
        for f in factors:
            if f not in cols:
                raise DataError(f"{path}: column {f!r} not in header")
        fnames, fblock = _expand_column(factors[0], cols[factors[0]], path)
        for f in factors[1:]:
            gnames, gblock = _expand_column(f, cols[f], path)
            fnames = [f"{a}:{b}" for a in fnames for b in gnames]
            fblock = np.column_stack([
                fblock[:, i] * gblock[:, j]
                for i in range(fblock.shape[1]) for j in range(gblock.shape[1])
            ]) if fblock.size and gblock.size else np.zeros((n, 0))
        names.extend(fnames)
        blocks.append(fblock)
    return tuple(names), np.column_stack(blocks)


def ingest_csv(path, response_col, mean_cols, precision_cols, rng=(0.0, 1.0)):
    """Read a CSV into a Dataset, mapping the response from [a, b] to [0, 1]
    with values equal to the endpoints landing exactly on 0.0 / 1.0."""
    a, b = float(rng[0]), float(rng[1])
    if not a < b:
        raise DomainError(f"response range needs a < b, got ({a}, {b})")
    header, cols = _read_table(path)
    if response_col not in cols:
        raise DataError(f"{path}: response column {response_col!r} not in header")
    raw = _numeric_column(response_col, cols[response_col], path)
    if np.any((raw < a) | (raw > b)):
        bad = int(np.argmax((raw < a) | (raw > b)))
        raise DataError(f"{path} row {bad + 2}: response {raw[bad]} outside "
                        f"[{a}, {b}]")
    y = (raw - a) / (b - a)
    y[raw == a] = 0.0
    y[raw == b] = 1.0
    x_names, X = _design(cols, mean_cols, path)
    z_names, Z = _design(cols, precision_cols, path)
    return Dataset(y=y, X=X, Z=Z, x_names=x_names, z_names=z_names)


# ---------------------------------------------------------------------------
# Helpers

def _split_cols(text):
    return [t for t in (text or "").split(",") if t.strip()]


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _make_spec(args):
    kwargs = dict(family=args.family, quad_order=args.quad_order)
    if args.link_mean:
        kwargs["mean_link"] = args.link_mean
    if args.link_precision:
        kwargs["precision_link"] = args.link_precision
    if getattr(args, "fixed_u", None) is not None:
        kwargs["fixed_u"] = args.fixed_u
    if getattr(args, "rescale_u", None) is not None:
        kwargs["rescale_u"] = args.rescale_u
    return ModelSpec(**kwargs)


def _load_dataset(args):
    return ingest_csv(args.input, args.response, _split_cols(args.mean),
                      _split_cols(args.precision), args.range)


def _fit_or_exit(spec, data):
    try:
        result = fit(spec, data)
    except (FitError, XbxError) as exc:
        print(f"error: fit failed: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_CONVERGENCE)
    return result


def _add_data_args(p, need_response=True):
    p.add_argument("input", help="input CSV path (header row required)")
    p.add_argument("--response", required=need_response, help="response column")
    p.add_argument("--mean", default="", help="comma-separated mean columns; "
                   "interactions via ':'")
    p.add_argument("--precision", default="", help="comma-separated precision "
                   "columns")
    p.add_argument("--range", nargs=2, type=float, default=(0.0, 1.0),
                   metavar=("A", "B"), help="response range mapped to [0,1]")


def _add_model_args(p):
    p.add_argument("--family", default="xbx",
                   choices=["xbx", "xb", "beta", "cn", "normal"])
    p.add_argument("--link-mean", default=None,
                   choices=["logit", "probit", "cloglog", "log", "identity"])
    p.add_argument("--link-precision", default=None,
                   choices=["log", "identity"])
    p.add_argument("--quad-order", type=int, default=20)
    p.add_argument("--fixed-u", type=float, default=None, dest="fixed_u")
    p.add_argument("--rescale-u", type=float, default=None, dest="rescale_u")


# ---------------------------------------------------------------------------
# Subcommand implementations

def _cmd_fit(args):
    data = _load_dataset(args)
    result = _fit_or_exit(_make_spec(args), data)
    _write(args.out, fit_to_json(result) + "\n")
    return EXIT_OK if result.converged else EXIT_CONVERGENCE


def _resolve_fit(args, data):
    if getattr(args, "model", None):
        with open(args.model, encoding="utf-8") as fh:
            return fit_from_json(fh.read(), data)
    return _fit_or_exit(_make_spec(args), data)


def _cmd_predict(args):
    data = _load_dataset(args)
    result = _resolve_fit(args, data)
    targets = _split_cols(args.targets) or ["mean"]
    out = predict(result, targets=targets, threshold=args.threshold)
    buf = io.StringIO()
    w = csv.writer(buf)
    keys = list(out)
    w.writerow(keys)
    for i in range(data.n):
        w.writerow([repr(float(out[k][i])) for k in keys])
    _write(args.out, buf.getvalue())
    return EXIT_OK


def _cmd_test(args):
    data = _load_dataset(args)
    full = _fit_or_exit(_make_spec(args), data)
    if args.restrict:
        hyp = infer.zero_restrictions(full, _split_cols(args.restrict))
        result = infer.wald_test(full, hyp)
    elif args.null_model:
        parts = dict(kv.split("=", 1) for kv in args.null_model.split(";"))
        null_data = ingest_csv(args.input, args.response,
                               _split_cols(parts.get("mean", args.mean)),
                               _split_cols(parts.get("precision", args.precision)),
                               args.range)
        null = _fit_or_exit(_make_spec(args), null_data)
        result = infer.lr_test(full, null)
    else:
        print("error: test needs --restrict or --null-model", file=sys.stderr)
        return EXIT_USAGE
    _write(args.out, result.to_json() + "\n")
    return EXIT_OK


def _cmd_score(args):
    data = _load_dataset(args)
    result = _resolve_fit(args, data)
    dists = result.row_distributions()
    per_row = [crps(d, z) for d, z in zip(dists, data.y)]
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["row", "y", "crps"])
    for i, (z, c) in enumerate(zip(data.y, per_row)):
        w.writerow([i, z, c])
    w.writerow(["total", "", sum(per_row)])
    _write(args.out, buf.getvalue())
    return EXIT_OK


def _cmd_rootogram(args):
    data = _load_dataset(args)
    result = _resolve_fit(args, data)
    breaks = None
    if args.breaks:
        breaks = np.array([float(t) for t in _split_cols(args.breaks)])
    table = rootogram(result, data, breaks)
    _write(args.out, table.to_csv())
    return EXIT_OK


def _cmd_simulate(args):
    if args.settings == "paper":
        settings = sim.paper_settings(n=args.n)
    else:
        settings = sim.desk_settings(n=args.n)
    u_grid = ([float(t) for t in _split_cols(args.u_grid)]
              if args.u_grid else list(sim.PAPER_U_GRID))
    results = sim.run_comparison(settings, u_grid, args.replications,
                                 seed0=args.seed, quad_order=args.quad_order)
    out = args.out or "sim_results.csv"
    _write(out, sim.results_to_csv(results))
    summary_path = (out[:-4] if out.endswith(".csv") else out) + "_summary.csv"
    _write(summary_path, sim.summary_to_csv(sim.summarize(results)))
    return EXIT_OK


def _cmd_quadcheck(args):
    rule = gauss_laguerre(args.quad_order)
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["node", "weight"])
    for nd, wt in zip(rule.nodes, rule.weights):
        w.writerow([repr(float(nd)), repr(float(wt))])
    _write(args.out, buf.getvalue())
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="xbxreg",
                                description="Bounded-response regression with "
                                "boundary observations")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="fit a model, write JSON artifact")
    _add_data_args(f)
    _add_model_args(f)
    f.add_argument("--out", default=None)
    f.set_defaults(func=_cmd_fit)

    pr = sub.add_parser("predict", help="per-row predictions as CSV")
    _add_data_args(pr)
    _add_model_args(pr)
    pr.add_argument("--model", default=None, help="fitted-model JSON path")
    pr.add_argument("--targets", default="mean",
                    help="comma list from: mean,params,p_above,p_below,cdf_at")
    pr.add_argument("--threshold", type=float, default=0.95)
    pr.add_argument("--out", default=None)
    pr.set_defaults(func=_cmd_predict)

    t = sub.add_parser("test", help="Wald (--restrict) or LR (--null-model) test")
    _add_data_args(t)
    _add_model_args(t)
    t.add_argument("--restrict", default=None,
                   help="comma list of coefficients tested jointly zero")
    t.add_argument("--null-model", default=None,
                   help="reduced column lists, e.g. 'mean=g,t;precision=g'")
    t.add_argument("--out", default=None)
    t.set_defaults(func=_cmd_test)

    s = sub.add_parser("score", help="per-row CRPS plus total")
    _add_data_args(s)
    _add_model_args(s)
    s.add_argument("--model", default=None)
    s.add_argument("--out", default=None)
    s.set_defaults(func=_cmd_score)

    r = sub.add_parser("rootogram", help="observed vs expected bin counts")
    _add_data_args(r)
    _add_model_args(r)
    r.add_argument("--model", default=None)
    r.add_argument("--breaks", default=None, help="comma list of bin edges")
    r.add_argument("--out", default=None)
    r.set_defaults(func=_cmd_rootogram)

    sm = sub.add_parser("simulate", help="model-comparison simulation study")
    sm.add_argument("--settings", default="desk", choices=["desk", "paper"])
    sm.add_argument("--u-grid", default=None, dest="u_grid")
    sm.add_argument("--replications", type=int, default=20)
    sm.add_argument("--n", type=int, default=500)
    sm.add_argument("--seed", type=int, default=20260826)
    sm.add_argument("--quad-order", type=int, default=20)
    sm.add_argument("--out", default=None)
    sm.set_defaults(func=_cmd_simulate)

    qc = sub.add_parser("quadcheck", help="emit quadrature nodes and weights")
    qc.add_argument("--order", type=int, default=20, dest="quad_order")
    qc.add_argument("--out", default=None)
    qc.set_defaults(func=_cmd_quadcheck)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        return exc.code
    except (DataError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (DomainError, ShapeError, XbxError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
