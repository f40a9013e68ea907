"""Command-line front end.

Subcommands: `simulate` (emit synthetic series as CSV plus a JSON parameter
sidecar), `cluster` (merge history JSON, labels CSV, trajectory CSV),
`nclusters` (elbow and bootstrap cluster-count selection as JSON),
`experiment` (Monte Carlo method comparison tables), and `segments`
(run-length segmentation of a label sequence).

Configuration comes from flags, optionally backed by a flat ``key = value``
config file (flags win).  Output files are written atomically via a
temporary file and rename; existing files are only overwritten with
``--force``.  The default output directory honors the ``SPECMERGE_OUTDIR``
environment variable.  All randomness flows from the ``--seed`` flag, which
is recorded in every JSON output.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import evaluate, modelselect
from .evaluate import DESIGNS, METHOD_NAMES, cluster_with_method
from .hsm import MergeHistory, hsm_cluster
from .linkage import LinkageSpec, linkage_cluster
from .distances import pairwise_matrix
from .spectra import TimeSeries, normalize, smoothed_spectrum

__all__ = ["main", "ingest_csv", "write_series_csv"]

ENV_OUTDIR = "SPECMERGE_OUTDIR"


# ---------------------------------------------------------------- data I/O


def ingest_csv(path, fs: float) -> list[TimeSeries]:
    """Read one series per column from a CSV file with a header row of ids.

    All columns must be equally long and fully numeric; decimal points are
    locale-independent.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if not header or any(not h for h in header):
        raise ValueError(f"{path}: header row must name every column")
    if len(set(header)) != len(header):
        raise ValueError(f"{path}: duplicate series ids in header")
    data_rows = rows[1:]
    if not data_rows:
        raise ValueError(f"{path}: no data rows below the header")
    columns = [[] for _ in header]
    for r, row in enumerate(data_rows, start=2):
        if len(row) != len(header):
            raise ValueError(f"{path}: line {r} has {len(row)} cells, expected {len(header)}")
        for c, cell in enumerate(row):
            cell = cell.strip()
            if not cell:
                raise ValueError(f"{path}: missing value at line {r}, column {header[c]!r}")
            try:
                columns[c].append(float(cell))
            except ValueError:
                raise ValueError(
                    f"{path}: non-numeric cell {cell!r} at line {r}, column {header[c]!r}"
                ) from None
    return [TimeSeries(np.array(col), fs, id=name) for name, col in zip(header, columns)]


def write_series_csv(path, series: list[TimeSeries], force: bool = False):
    """Write series as CSV columns; `repr` formatting round-trips exactly."""
    lengths = {len(x) for x in series}
    if len(lengths) != 1:
        raise ValueError("CSV emission requires equal-length series")
    rows = [[x.id for x in series]]
    for t in range(lengths.pop()):
        rows.append([repr(float(x.values[t])) for x in series])
    _write_text_atomic(path, "".join(",".join(r) + "\n" for r in rows), force)


def _write_text_atomic(path, text: str, force: bool):
    path = Path(path)
    if path.exists() and not force:
        raise FileExistsError(f"{path} exists; pass --force to overwrite")
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path, payload: dict, force: bool):
    _write_text_atomic(path, json.dumps(payload, indent=2, sort_keys=True) + "\n", force)


def _write_csv_rows(path, header: list[str], rows, force: bool):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(c) for c in row))
    _write_text_atomic(path, "\n".join(lines) + "\n", force)


def _check_targets(paths, force: bool):
    if force:
        return
    for p in paths:
        if Path(p).exists():
            raise FileExistsError(f"{p} exists; pass --force to overwrite")


# ------------------------------------------------------------ configuration


def _load_config(path) -> dict:
    """Flat ``key = value`` file; blank lines and # comments ignored."""
    out = {}
    for ln, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}: line {ln} is not a key = value pair")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser):
    """Fill unset flags from the config file; explicit flags win."""
    if not getattr(args, "config", None):
        return
    config = _load_config(args.config)
    for key, value in config.items():
        if not hasattr(args, key):
            continue
        if getattr(args, key) is None:
            setattr(args, key, value)


def _outdir(args) -> Path:
    if getattr(args, "out_dir", None):
        return Path(args.out_dir)
    return Path(os.environ.get(ENV_OUTDIR, "."))


def _resolve_out(args, name: str) -> Path:
    return _outdir(args) / name


# -------------------------------------------------------------- subcommands


def _estimate_spectra(series, bandwidth):
    return [normalize(smoothed_spectrum(x, bandwidth)) for x in series]


def _run_clustering(series, method: str, linkage: str, bandwidth):
    """Build the merge history for a method name, plus spectra when the
    bootstrap test needs them separately."""
    if method in ("HSM1", "HSM2"):
        variant = "single" if method == "HSM1" else "average"
        return hsm_cluster(series, variant, bandwidth), None
    spectra = None
    labels = [x.id for x in series]
    if method == "CEP":
        dmat = pairwise_matrix(series, "CEP", labels=labels)
    else:
        spectra = _estimate_spectra(series, bandwidth)
        dmat = pairwise_matrix(spectra, method, labels=labels)
    history = linkage_cluster(dmat, LinkageSpec(linkage, method))
    history.series_length = max(len(x) for x in series)
    history.fs = series[0].fs
    spectra_map = dict(zip(labels, spectra)) if spectra is not None else None
    return history, spectra_map


def _cmd_simulate(args) -> int:
    if args.design not in DESIGNS:
        raise ValueError(f"unknown design {args.design!r}; choose from {sorted(DESIGNS)}")
    design = DESIGNS[args.design]()
    n_samples = int(args.T)
    seed = int(args.seed)
    series, truth = design.simulate(n_samples, seed)

    csv_path = _resolve_out(args, f"{args.out}.csv")
    json_path = _resolve_out(args, f"{args.out}.params.json")
    _check_targets([csv_path, json_path], args.force)
    write_series_csv(csv_path, series, force=True)
    _write_json(
        json_path,
        {
            "seed": seed,
            "design": design.name,
            "fs": design.fs,
            "n_samples": n_samples,
            "k_true": design.k_true,
            "truth": [sorted(b) for b in truth],
        },
        force=True,
    )
    print(f"wrote {csv_path} and {json_path}")
    return 0


def _history_outputs(args, history: MergeHistory, k: int, seed):
    base = args.out
    paths = {
        "history": _resolve_out(args, f"{base}.history.json"),
        "labels": _resolve_out(args, f"{base}.labels.csv"),
        "trajectory": _resolve_out(args, f"{base}.trajectory.csv"),
    }
    _check_targets(paths.values(), args.force)
    payload = history.to_json_dict()
    payload["seed"] = seed
    _write_json(paths["history"], payload, force=True)
    assignments = history.assignments_at(k)
    _write_csv_rows(
        paths["labels"],
        ["id", "label"],
        [(sid, assignments[sid]) for sid in history.series_ids],
        force=True,
    )
    counts = range(history.n_series - 1, 0, -1)
    _write_csv_rows(
        paths["trajectory"],
        ["k", "value"],
        [(k_, repr(float(v))) for k_, v in zip(counts, history.trajectory)],
        force=True,
    )
    return paths


def _cmd_cluster(args) -> int:
    fs = float(args.fs)
    if fs <= 0:
        raise ValueError("--fs must be positive")
    series = ingest_csv(args.input, fs)
    bandwidth = float(args.bandwidth) if args.bandwidth is not None else None
    seed = int(args.seed)
    history, spectra_map = _run_clustering(series, args.method, args.linkage, bandwidth)

    if args.k is not None:
        k = int(args.k)
    else:
        criterion = args.choose_k or "elbow"
        if criterion == "elbow":
            k = modelselect.elbow(history).suggested_k
        else:
            k = modelselect.choose_k(
                history,
                "bootstrap",
                n_draws=int(args.draws),
                alpha=float(args.alpha),
                seed=seed,
                spectra=spectra_map,
                bandwidth=bandwidth,
            )
    paths = _history_outputs(args, history, k, seed)
    print(f"clustered {len(series)} series with {args.method}; cut at k={k}")
    for p in paths.values():
        print(f"wrote {p}")
    return 0


def _cmd_nclusters(args) -> int:
    fs = float(args.fs)
    if fs <= 0:
        raise ValueError("--fs must be positive")
    series = ingest_csv(args.input, fs)
    bandwidth = float(args.bandwidth) if args.bandwidth is not None else None
    seed = int(args.seed)
    history, spectra_map = _run_clustering(series, args.method, args.linkage, bandwidth)

    tests = []
    if args.criterion == "elbow":
        suggested = modelselect.elbow(history).suggested_k
    else:
        suggested = history.n_series
        for k in range(1, history.n_series):
            result = modelselect.test_k_vs_k_minus_1(
                history,
                k + 1,
                n_draws=int(args.draws),
                alpha=float(args.alpha),
                seed=seed,
                spectra=spectra_map,
                bandwidth=bandwidth,
            )
            tests.append(
                {
                    "k": result.k,
                    "observed": result.observed,
                    "p_value": result.p_value,
                    "reject": result.reject,
                }
            )
            if not result.reject:
                suggested = k
                break

    out_path = _resolve_out(args, args.out)
    counts = list(range(history.n_series - 1, 0, -1))
    _write_json(
        out_path,
        {
            "seed": seed,
            "method": args.method,
            "criterion": args.criterion,
            "alpha": float(args.alpha),
            "draws": int(args.draws),
            "suggested_k": suggested,
            "trajectory": [
                {"k": k_, "value": float(v)}
                for k_, v in zip(counts, history.trajectory)
            ],
            "tests": tests,
        },
        force=args.force,
    )
    print(f"suggested k = {suggested}; wrote {out_path}")
    return 0


def _cmd_experiment(args) -> int:
    if args.design not in ("1", "2"):
        raise ValueError("experiment design must be '1' or '2'")
    design = DESIGNS[args.design]()
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in METHOD_NAMES:
            raise ValueError(f"unknown method {m!r}; choose from {METHOD_NAMES}")
    lengths = [int(t) for t in str(args.T).split(",")]
    seed = int(args.seed)
    workers = int(args.workers) if args.workers is not None else (os.cpu_count() or 1)
    bandwidth = float(args.bandwidth) if args.bandwidth is not None else None

    means_path = _resolve_out(args, f"{args.out}.means.csv")
    raw_path = _resolve_out(args, f"{args.out}.raw.csv")
    config_path = _resolve_out(args, f"{args.out}.config.json")
    _check_targets([means_path, raw_path, config_path], args.force)

    report = evaluate.run_experiment(
        design,
        methods,
        lengths,
        int(args.N),
        seed,
        bandwidth=bandwidth,
        workers=workers,
    )
    _write_csv_rows(
        means_path,
        ["T"] + list(report.methods),
        [
            [row["T"]] + [f"{row[m]:.6f}" for m in report.methods]
            for row in report.table_rows()
        ],
        force=True,
    )
    raw_rows = []
    for t_len in report.lengths:
        for m in report.methods:
            for rep, val in enumerate(report.raw[(m, t_len)]):
                raw_rows.append([t_len, m, rep, repr(float(val))])
    _write_csv_rows(raw_path, ["T", "method", "replicate", "similarity"], raw_rows, force=True)
    _write_json(
        config_path,
        {
            "seed": seed,
            "design": report.design,
            "methods": list(report.methods),
            "lengths": list(report.lengths),
            "n_replicates": report.n_replicates,
            "k_true": report.k_true,
        },
        force=True,
    )
    for row in report.table_rows():
        print(row)
    print(f"wrote {means_path}, {raw_path} and {config_path}")
    return 0


def _cmd_segments(args) -> int:
    path = Path(args.input)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ValueError(f"{path}: need a header plus at least one labeled interval")
    header = [h.strip() for h in rows[0]]
    try:
        col = header.index(args.column)
    except ValueError:
        raise ValueError(f"{path}: no column named {args.column!r}") from None
    labels = [row[col].strip() for row in rows[1:]]
    segments = evaluate.contiguous_segments(labels)
    width = float(args.interval_width)
    out_path = _resolve_out(args, args.out)
    _write_csv_rows(
        out_path,
        ["start", "end", "label", "duration"],
        [(s, e, lab, repr((e - s) * width)) for s, e, lab in segments],
        force=args.force,
    )
    print(f"{len(segments)} segments; wrote {out_path}")
    return 0


# ------------------------------------------------------------------ parser


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat key = value config file (flags win)")
    p.add_argument("--out-dir", help=f"output directory (default: ${ENV_OUTDIR} or .)")
    p.add_argument("--force", action="store_true", help="overwrite existing outputs")
    p.add_argument("--seed", default=None, help="root seed (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specmerge",
        description="Cluster stationary time series by normalized spectral shape.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a named experiment design")
    _add_common(p)
    p.add_argument("--design", default=None, help="1, 2, or elbow-a")
    p.add_argument("--T", default=None, help="series length")
    p.add_argument("--out", default=None, help="output prefix")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("cluster", help="cluster the series of a CSV file")
    _add_common(p)
    p.add_argument("--input", default=None, help="CSV file, one series per column")
    p.add_argument("--fs", default=None, help="sampling frequency in Hz")
    p.add_argument("--method", default=None, help="|".join(METHOD_NAMES))
    p.add_argument("--linkage", default=None, help="complete|average (non-merger methods)")
    p.add_argument("--bandwidth", default=None, help="smoothing bandwidth (default 100/T)")
    p.add_argument("--k", default=None, help="cut the dendrogram at this cluster count")
    p.add_argument("--choose-k", default=None, help="elbow|bootstrap (used when --k absent)")
    p.add_argument("--alpha", default=None, help="bootstrap test level (default 0.05)")
    p.add_argument("--draws", default=None, help="bootstrap draws (default 500)")
    p.add_argument("--out", default=None, help="output prefix")
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("nclusters", help="suggest the number of clusters")
    _add_common(p)
    p.add_argument("--input", default=None)
    p.add_argument("--fs", default=None)
    p.add_argument("--method", default=None, help="|".join(METHOD_NAMES))
    p.add_argument("--linkage", default=None)
    p.add_argument("--bandwidth", default=None)
    p.add_argument("--criterion", default=None, help="elbow|bootstrap")
    p.add_argument("--alpha", default=None)
    p.add_argument("--draws", default=None)
    p.add_argument("--out", default=None, help="output JSON file name")
    p.set_defaults(func=_cmd_nclusters)

    p = sub.add_parser("experiment", help="Monte Carlo method comparison")
    _add_common(p)
    p.add_argument("--design", default=None, help="1 or 2")
    p.add_argument("--T", default=None, help="series length(s), comma separated")
    p.add_argument("--N", default=None, help="number of replicates")
    p.add_argument("--methods", default=None, help="comma list from " + ",".join(METHOD_NAMES))
    p.add_argument("--bandwidth", default=None)
    p.add_argument("--workers", default=None, help="worker processes (default: all cores)")
    p.add_argument("--out", default=None, help="output prefix")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("segments", help="segment a time-ordered label sequence")
    _add_common(p)
    p.add_argument("--input", default=None, help="CSV with a label column, rows in time order")
    p.add_argument("--column", default=None, help="label column name (default 'label')")
    p.add_argument("--interval-width", default=None, help="duration per interval (default 1)")
    p.add_argument("--out", default=None, help="output CSV file name")
    p.set_defaults(func=_cmd_segments)

    return parser


_DEFAULTS = {
    "seed": "0",
    "alpha": "0.05",
    "draws": str(modelselect.DEFAULT_BOOTSTRAP_DRAWS),
    "linkage": "complete",
    "method": "HSM2",
    "criterion": "elbow",
    "column": "label",
    "interval_width": "1.0",
    "out": "specmerge",
    "methods": ",".join(METHOD_NAMES),
}

_REQUIRED = {
    "simulate": ("design", "T"),
    "cluster": ("input", "fs"),
    "nclusters": ("input", "fs"),
    "experiment": ("design", "T", "N"),
    "segments": ("input",),
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args, parser)
        for key, value in _DEFAULTS.items():
            if hasattr(args, key) and getattr(args, key) is None:
                setattr(args, key, value)
        missing = [
            f"--{k.replace('_', '-')}"
            for k in _REQUIRED[args.command]
            if getattr(args, k) is None
        ]
        if missing:
            raise ValueError(f"missing required flags: {', '.join(missing)}")
        return args.func(args)
    except (ValueError, FileExistsError, FileNotFoundError, OSError) as exc:
        print(f"specmerge: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
