"""Batch command-line interface.

Every command is deterministic under --seed (default from QSMOTE_SEED):
file outputs are byte-identical across re-runs with identical flags, and
run reports embed the fully-resolved configuration plus a content hash of
each input. Exit codes: 0 success, 1 usage error, 2 data error.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .classify import ClassifierSpec
from .dataset import Dataset, SplitSpec, imbalance_report, make_imbalanced
from .dataio import (
    CsvSchema,
    SynthSpec,
    canonical_json,
    emit_scatter,
    file_sha256,
    gen_gaussian_binary,
    load_csv,
    run_report,
    save_csv,
)
from .errors import InvalidInputError
from .experiment import METRIC_NAMES, run_experiment
from .metrics import format_wilcoxon_report, improvement_pct, wilcoxon_signed_rank
from .resample import METHODS, ResamplePlan, resample
from .seeding import SeedSpec
from .vqe import VqeConfig

USAGE_ERROR = 1
DATA_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _default_seed() -> int:
    raw = os.environ.get("QSMOTE_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        return 0


def _add_schema_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--label-column", default="label")
    p.add_argument("--positive-label", default="1")
    p.add_argument("--negative-label", default="0")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--no-header", action="store_true")


def _schema(args) -> CsvSchema:
    return CsvSchema(
        label_column=args.label_column,
        positive_label=args.positive_label,
        negative_label=args.negative_label,
        delimiter=args.delimiter,
        has_header=not args.no_header,
    )


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("--config", help="flat key=value file mirroring long flags")
    p.add_argument("--report", help="write a JSON run report to this path")


def _add_vqe_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--hamiltonian", choices=("outer_product", "ising"), default="outer_product")
    p.add_argument("--vqe-iters", type=int, default=100)
    p.add_argument("--vqe-tol", type=float, default=1e-6)
    p.add_argument("--vqe-optimizer", choices=("cobyla_like", "nelder_mead"), default="cobyla_like")


def _plan_from_args(args, method: str) -> ResamplePlan:
    return ResamplePlan(
        method=method,
        k_neighbors=args.k,
        target=getattr(args, "target", None),
        seed=SeedSpec(args.seed),
        vqe=VqeConfig(
            max_iterations=args.vqe_iters,
            tolerance=args.vqe_tol,
            optimizer=args.vqe_optimizer,
        ),
        hamiltonian_mode=args.hamiltonian,
    )


def _classifier_from_args(args) -> ClassifierSpec:
    return ClassifierSpec(
        kind=args.classifier,
        k=args.clf_k,
        learning_rate=args.learning_rate,
        epochs=args.epochs,
        l2=args.l2,
        standardize=not args.no_standardize,
    )


def _parse_float_list(raw: str, n: int, what: str) -> tuple[float, ...]:
    parts = [p for p in raw.split(",") if p.strip()]
    if len(parts) != n:
        raise InvalidInputError(f"{what} needs {n} comma-separated values")
    return tuple(float(p) for p in parts)


def _emit_table(headers: list[str], rows: list[list], fmt: str, title: str = "") -> None:
    if fmt == "json":
        payload = {"title": title, "rows": [dict(zip(headers, row)) for row in rows]}
        sys.stdout.write(canonical_json(payload))
        return
    if fmt == "csv":
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(headers)
        writer.writerows(rows)
        return
    if title:
        print(title)
    widths = [
        max(len(str(h)), *(len(_cell(r[i])) for r in rows)) if rows else len(str(h))
        for i, h in enumerate(headers)
    ]
    print("  ".join(str(h).ljust(w) for h, w in zip(headers, widths)))
    for row in rows:
        print("  ".join(_cell(v).ljust(w) for v, w in zip(row, widths)))


def _cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _write_report(args, command: str, config: dict, result: dict) -> None:
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(run_report(command, config, result))


# ---------------------------------------------------------------- commands


def _paired_float_lists(a, b, n, what):
    if (a is None) != (b is None):
        raise InvalidInputError(f"give both or neither of the {what} flags")
    if a is None:
        return None
    return (
        _parse_float_list(a, n, f"--{what}-majority"),
        _parse_float_list(b, n, f"--{what}-minority"),
    )


def _cmd_gen(args) -> int:
    n = args.n_features
    spec = SynthSpec(
        n_majority=args.n_majority,
        n_minority=args.n_minority,
        n_features=n,
        class_means=_paired_float_lists(args.mean_majority, args.mean_minority, n, "mean"),
        class_scales=_paired_float_lists(args.scale_majority, args.scale_minority, n, "scale"),
        seed=SeedSpec(args.seed),
    )
    d = gen_gaussian_binary(spec)
    save_csv(d, args.out, _schema(args))
    config = {
        "n_majority": args.n_majority,
        "n_minority": args.n_minority,
        "n_features": n,
        "class_means": spec.class_means,
        "class_scales": spec.class_scales,
        "seed": args.seed,
        "out": args.out,
    }
    result = {"rows": d.n_samples, "class_counts": {str(k): v for k, v in d.class_counts().items()}}
    _write_report(args, "gen", config, result)
    _emit_table(
        ["rows", "majority", "minority", "out"],
        [[d.n_samples, spec.n_majority, spec.n_minority, args.out]],
        args.format,
    )
    return 0


def _cmd_imbalance(args) -> int:
    schema = _schema(args)
    d = load_csv(args.input, schema)
    rep = imbalance_report(d)
    rows = [["input", rep.majority_count, rep.minority_count,
             "undefined" if rep.ir is None else rep.ir]]
    result = {
        "input": {"majority": rep.majority_count, "minority": rep.minority_count, "ir": rep.ir}
    }
    if args.ir is not None:
        if args.out is None:
            raise InvalidInputError("--ir needs --out for the variant dataset")
        variant = make_imbalanced(d, args.ir, SeedSpec(args.seed))
        save_csv(variant, args.out, schema)
        vrep = imbalance_report(variant)
        rows.append(["variant", vrep.majority_count, vrep.minority_count, vrep.ir])
        result["variant"] = {
            "majority": vrep.majority_count,
            "minority": vrep.minority_count,
            "ir": vrep.ir,
            "out": args.out,
        }
    config = {
        "input": args.input,
        "input_sha256": file_sha256(args.input),
        "target_ir": args.ir,
        "seed": args.seed,
    }
    _write_report(args, "imbalance", config, result)
    _emit_table(["dataset", "majority", "minority", "ir"], rows, args.format)
    return 0


def _cmd_resample(args) -> int:
    schema = _schema(args)
    d = load_csv(args.input, schema)
    plan = _plan_from_args(args, args.method)
    out, report = resample(d, plan)
    save_csv(out, args.out, schema, report=report)
    config = {
        "input": args.input,
        "input_sha256": file_sha256(args.input),
        "method": args.method,
        "k_neighbors": args.k,
        "target": args.target,
        "seed": args.seed,
        "hamiltonian": args.hamiltonian,
        "vqe_iters": args.vqe_iters,
        "vqe_tol": args.vqe_tol,
        "vqe_optimizer": args.vqe_optimizer,
        "out": args.out,
    }
    _write_report(args, "resample", config, report.to_dict())
    _emit_table(
        ["method", "synthetic", "removed", "majority_after", "minority_after", "out"],
        [[
            report.method,
            report.n_synthetic,
            report.n_removed,
            max(report.class_counts_after.values()),
            min(report.class_counts_after.values()),
            args.out,
        ]],
        args.format,
    )
    return 0


def _split_from_args(args) -> SplitSpec:
    if args.folds is not None and args.test_fraction is not None:
        raise InvalidInputError("choose either --folds or --test-fraction")
    if args.folds is not None:
        return SplitSpec(n_folds=args.folds)
    return SplitSpec(test_fraction=args.test_fraction if args.test_fraction is not None else 0.2)


def _cmd_evaluate(args) -> int:
    schema = _schema(args)
    d = load_csv(args.input, schema)
    plan = None if args.method == "none" else _plan_from_args(args, args.method)
    split = _split_from_args(args)
    result = run_experiment(d, plan, _classifier_from_args(args), split, SeedSpec(args.seed))
    config = {
        "input": args.input,
        "input_sha256": file_sha256(args.input),
        "method": args.method,
        "classifier": args.classifier,
        "split_mode": result.mode,
        "folds": result.n_folds,
        "seed": args.seed,
    }
    _write_report(args, "evaluate", config, result.to_dict())
    header = ["metric", "mean", "std"] + [f"fold{i}" for i in range(result.n_folds)]
    rows = [
        [name, result.means[name], result.stds[name]] + list(result.fold_metrics[name])
        for name in METRIC_NAMES
    ]
    _emit_table(header, rows, args.format, title=f"split mode: {result.mode} ({result.n_folds} folds)")
    return 0


def _cmd_compare(args) -> int:
    schema = _schema(args)
    d = load_csv(args.input, schema)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in METHODS:
            raise InvalidInputError(f"unknown method {m!r}")
    split = _split_from_args(args)
    clf = _classifier_from_args(args)
    conditions = [("none", None)] + [(m, _plan_from_args(args, m)) for m in methods]
    grid_rows = []
    fold_payload = {}
    for name, plan in conditions:
        result = run_experiment(d, plan, clf, split, SeedSpec(args.seed))
        fold_payload[name] = result.to_dict()
        grid_rows.append([name] + [result.means[m] for m in METRIC_NAMES])
    headers = ["method"] + list(METRIC_NAMES)
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(headers)
            for row in grid_rows:
                writer.writerow([row[0]] + [repr(float(v)) for v in row[1:]])
    if args.fold_report:
        with open(args.fold_report, "w", encoding="utf-8") as fh:
            fh.write(canonical_json(fold_payload))
    config = {
        "input": args.input,
        "input_sha256": file_sha256(args.input),
        "methods": methods,
        "classifier": args.classifier,
        "folds": args.folds,
        "test_fraction": args.test_fraction,
        "seed": args.seed,
    }
    _write_report(
        args,
        "compare",
        config,
        {"grid_headers": headers, "grid": grid_rows, "per_fold": fold_payload},
    )
    _emit_table(headers, grid_rows, args.format)
    return 0


def _read_columns(path) -> tuple[list[str], dict[str, list[float]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if len(rows) < 2:
        raise InvalidInputError(f"{path}: need a header and at least one data row")
    header = [h.strip() for h in rows[0]]
    columns: dict[str, list[float]] = {h: [] for h in header}
    for r, row in enumerate(rows[1:]):
        if len(row) != len(header):
            raise InvalidInputError(f"{path}: row {r + 1} has {len(row)} cells")
        for h, cell in zip(header, row):
            try:
                columns[h].append(float(cell))
            except ValueError:
                raise InvalidInputError(
                    f"{path}: row {r + 1}, column {h!r}: cannot parse {cell!r}"
                ) from None
    return header, columns


def _cmd_wilcoxon(args) -> int:
    header, columns = _read_columns(args.input)
    name_a = args.col_a or header[0]
    name_b = args.col_b or (header[1] if len(header) > 1 else None)
    if name_b is None or name_a not in columns or name_b not in columns:
        raise InvalidInputError("need two score columns (see --col-a/--col-b)")
    a = np.array(columns[name_a])
    b = np.array(columns[name_b])
    result = wilcoxon_signed_rank(a, b)
    config = {
        "input": args.input,
        "input_sha256": file_sha256(args.input),
        "col_a": name_a,
        "col_b": name_b,
    }
    payload = {
        "n_pairs": result.n_pairs,
        "n_zeros_dropped": result.n_zeros_dropped,
        "w_plus": result.w_plus,
        "w_minus": result.w_minus,
        "w": result.w,
        "p_exact": result.p_exact,
        "z_tie_corrected": result.z_approx,
        "p_normal": result.p_approx,
        "effect_size_r": result.effect_size_r,
        "undefined": result.undefined,
        "differences": list(result.differences),
        "ranks": list(result.ranks),
    }
    _write_report(args, "wilcoxon", config, payload)
    if args.format == "json":
        sys.stdout.write(canonical_json(payload))
    else:
        print(format_wilcoxon_report(result, name_a, name_b, a, b))
    return 0


def _cmd_improve(args) -> int:
    base_header, base_cols = _read_columns(args.baseline)
    with open(args.techniques, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise InvalidInputError(f"{args.techniques}: need a header and data rows")
    tech_header = [h.strip() for h in rows[0]]
    datasets = tech_header[1:]
    for ds in datasets:
        if ds not in base_cols:
            raise InvalidInputError(f"dataset column {ds!r} missing from the baseline file")
    out_rows = []
    for row in rows[1:]:
        name = row[0]
        cells = [name]
        for ds, cell in zip(datasets, row[1:]):
            pct = improvement_pct(float(cell), base_cols[ds][0])
            cells.append("undefined" if pct is None else round(pct, 2))
        out_rows.append(cells)
    headers = ["technique"] + datasets
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(headers)
            writer.writerows(out_rows)
    config = {
        "baseline": args.baseline,
        "baseline_sha256": file_sha256(args.baseline),
        "techniques": args.techniques,
        "techniques_sha256": file_sha256(args.techniques),
    }
    _write_report(args, "improve", config, {"rows": out_rows})
    _emit_table(headers, out_rows, args.format, title="F1 improvement over baseline (%)")
    return 0


def _cmd_bench(args) -> int:
    import resource
    import tracemalloc

    os.makedirs(args.out_dir, exist_ok=True)
    spec = SynthSpec(
        n_majority=args.n_majority,
        n_minority=args.n_minority,
        n_features=args.n_features,
        seed=SeedSpec(args.seed),
    )
    d = gen_gaussian_binary(spec)
    data_path = os.path.join(args.out_dir, "bench_data.csv")
    save_csv(d, data_path)

    rows = []
    result = {}
    for method in ("smote", "qi_smote"):
        plan = _plan_from_args(args, method)
        tracemalloc.start()
        start = time.perf_counter()
        out, report = resample(d, plan)
        elapsed = time.perf_counter() - start
        _, alloc_peak = tracemalloc.get_traced_memory()
        tracemalloc.stop()
        out_path = os.path.join(args.out_dir, f"bench_{method}.csv")
        save_csv(out, out_path, report=report)
        rss_mb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0
        rows.append([method, report.n_synthetic, f"{elapsed:.4f}",
                     f"{alloc_peak / 1e6:.2f}", f"{rss_mb:.1f}", out_path])
        result[method] = {
            "n_synthetic": report.n_synthetic,
            "seconds": elapsed,
            "alloc_peak_mb": alloc_peak / 1e6,
            "process_peak_rss_mb_approx": rss_mb,
            "out": out_path,
        }
    config = {
        "n_majority": args.n_majority,
        "n_minority": args.n_minority,
        "n_features": args.n_features,
        "target": args.target,
        "seed": args.seed,
        "vqe_iters": args.vqe_iters,
        "out_dir": args.out_dir,
    }
    _write_report(args, "bench", config, result)
    _emit_table(
        ["method", "synthetic", "seconds", "alloc_peak_mb", "rss_mb_approx", "out"],
        rows,
        args.format,
        title="process rss is a whole-process high-water mark (approximate)",
    )
    return 0


def _cmd_scatter(args) -> int:
    schema = _schema(args)
    d = load_csv(args.input, schema)
    dims = [int(x) for x in args.dims.split(",") if x.strip()]
    synthetic_rows = set()
    if args.provenance:
        with open(args.provenance, encoding="utf-8") as fh:
            doc = json.load(fh)
        synthetic_rows = {
            p["row"] for p in doc.get("provenance", []) if p.get("row") is not None
        }
    _emit_scatter_with_rows(d, dims, args.out, synthetic_rows, args.svg)
    config = {
        "input": args.input,
        "input_sha256": file_sha256(args.input),
        "dims": dims,
        "provenance": args.provenance,
        "out": args.out,
        "svg": args.svg,
    }
    _write_report(args, "scatter", config, {"rows": d.n_samples})
    _emit_table(["rows", "dims", "out"], [[d.n_samples, args.dims, args.out]], args.format)
    return 0


def _emit_scatter_with_rows(d: Dataset, dims, out, synthetic_rows, svg) -> None:
    # reuse emit_scatter by faking a minimal report-like provenance
    from .resample import Provenance, ResampleReport

    report = None
    if synthetic_rows:
        report = ResampleReport(
            method="external",
            n_synthetic=len(synthetic_rows),
            n_removed=0,
            class_counts_before=d.class_counts(),
            class_counts_after=d.class_counts(),
            provenance=tuple(
                Provenance(kind="interpolation", row=int(r), parent=0, neighbor=0, lam=None)
                for r in sorted(synthetic_rows)
            ),
        )
    emit_scatter(d, dims, out, report=report, svg_path=svg)


# ---------------------------------------------------------------- wiring


def _build_parser() -> _Parser:
    parser = _Parser(prog="qsmote", description=__doc__)
    parser.add_argument("--version", action="version", version=f"qsmote {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a seeded two-class Gaussian dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--n-majority", type=int, default=670)
    p.add_argument("--n-minority", type=int, default=30)
    p.add_argument("--n-features", type=int, default=3)
    p.add_argument("--mean-majority")
    p.add_argument("--mean-minority")
    p.add_argument("--scale-majority")
    p.add_argument("--scale-minority")
    _add_schema_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("imbalance", help="report the imbalance ratio; optionally build an IR variant")
    p.add_argument("input")
    p.add_argument("--ir", type=float)
    p.add_argument("--out")
    _add_schema_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_imbalance)

    p = sub.add_parser("resample", help="run one resampling method on a CSV dataset")
    p.add_argument("input")
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--target", type=int)
    _add_vqe_flags(p)
    _add_schema_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_resample)

    p = sub.add_parser("evaluate", help="resample the training split only and score a classifier")
    p.add_argument("input")
    p.add_argument("--method", default="none", choices=("none",) + METHODS)
    p.add_argument("--classifier", default="knn", choices=("knn", "logistic"))
    p.add_argument("--folds", type=int)
    p.add_argument("--test-fraction", type=float)
    p.add_argument("--k", type=int, default=5, help="resampler neighbor count")
    p.add_argument("--clf-k", type=int, default=5, help="knn classifier neighbor count")
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--no-standardize", action="store_true")
    _add_vqe_flags(p)
    _add_schema_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("compare", help="method x metric grid over one dataset")
    p.add_argument("input")
    p.add_argument("--methods", default=",".join(METHODS))
    p.add_argument("--classifier", default="knn", choices=("knn", "logistic"))
    p.add_argument("--folds", type=int)
    p.add_argument("--test-fraction", type=float)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--clf-k", type=int, default=5)
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--no-standardize", action="store_true")
    p.add_argument("--out", help="grid CSV path")
    p.add_argument("--fold-report", help="per-fold JSON path (grid recomputes from it)")
    _add_vqe_flags(p)
    _add_schema_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("wilcoxon", help="paired signed-rank test on two fold-score columns")
    p.add_argument("input")
    p.add_argument("--col-a")
    p.add_argument("--col-b")
    _add_common(p)
    p.set_defaults(func=_cmd_wilcoxon)

    p = sub.add_parser("improve", help="percentage F1 improvement table from two grids")
    p.add_argument("--baseline", required=True)
    p.add_argument("--techniques", required=True)
    p.add_argument("--out")
    _add_common(p)
    p.set_defaults(func=_cmd_improve)

    p = sub.add_parser("bench", help="desk benchmark: classical vs quantum-evolved oversampling")
    p.add_argument("--out-dir", default="bench_out")
    p.add_argument("--n-majority", type=int, default=670)
    p.add_argument("--n-minority", type=int, default=30)
    p.add_argument("--n-features", type=int, default=3)
    p.add_argument("--target", type=int, default=100)
    p.add_argument("--k", type=int, default=5)
    _add_vqe_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("scatter", help="emit plot data (and optional SVG) for 2 or 3 features")
    p.add_argument("input")
    p.add_argument("--dims", required=True, help="comma-separated feature indices (2 or 3)")
    p.add_argument("--out", required=True)
    p.add_argument("--svg")
    p.add_argument("--provenance", help="provenance sidecar JSON marking synthetic rows")
    _add_schema_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_scatter)

    return parser


def _expand_config(argv: list[str]) -> list[str]:
    """Splice key=value config lines in as flags (explicit flags win)."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        return argv  # let argparse report the missing value
    path = argv[i + 1]
    rest = argv[:i] + argv[i + 2 :]
    tokens: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InvalidInputError(f"{path}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            flag = "--" + key.strip().replace("_", "-")
            value = value.strip()
            if value.lower() == "true":
                tokens.append(flag)
            elif value.lower() == "false":
                continue
            else:
                tokens.extend([flag, value])
    return rest[:1] + tokens + rest[1:]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        argv = _expand_config(argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:  # argparse exits (usage/--help/--version)
        code = exc.code if isinstance(exc.code, int) else 0
        return code
    except (InvalidInputError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"qsmote: error: {exc}", file=sys.stderr)
        return DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
