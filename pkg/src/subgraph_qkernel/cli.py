"""Command-line entry point: ``subgraph-qkernel <command> [options]``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .features import EncodingKind
from .graph import DatasetError, GraphDataset, filter_dataset, parse_tu_dataset, random_graph, toy_graphs
from .kernels import KernelKind, gram
from .spectrum import (
    DEFAULT_MAX_N,
    SpectrumCache,
    enumerate_spectrum,
    range_growth_report,
    success_probability,
    write_spectrum,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_VERIFY = 0, 1, 2, 3
DEV_TOL = 1e-9


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    args: dict
    dataset: str | None = None
    encoding: str | None = None
    kernel: str | None = None
    max_vertices: int | None = None
    min_edges: int | None = None
    seed: int | None = None
    threads: int | None = None
    outputs: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)
    version: str = __version__

    def write(self, out_dir: Path) -> Path:
        path = out_dir / f"{self.command}.manifest.json"
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")
        return path


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_range(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(t) for t in text.split(",")]


def _sizes(text: str) -> list[int]:
    return [int(float(t)) for t in text.split(",")]


def _common(p: argparse.ArgumentParser, kernel=False) -> None:
    p.add_argument("--dataset", help="TU dataset name (directory under --data-root)")
    p.add_argument("--data-root", default="data", help="directory holding TU dataset folders")
    p.add_argument("--toy", action="store_true", help="use the built-in triangle / star pair")
    p.add_argument("--encoding", default="ve", choices=["ve", "ved"])
    if kernel:
        p.add_argument("--kernel", default="bh", choices=["bh", "sh", "classical"])
    p.add_argument("--max-vertices", type=int, default=DEFAULT_MAX_N)
    p.add_argument("--min-edges", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", default="out")
    p.add_argument("--cache", default=None, help="spectrum cache directory (default <out>/cache)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="subgraph-qkernel", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--from-manifest", help="re-run the command recorded in a manifest file")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("spectrum", help="enumerate exact feature spectra")
    _common(p)

    p = sub.add_parser("gram", help="write a Gram matrix CSV")
    _common(p, kernel=True)

    p = sub.add_parser("verify-quantum", help="simulate the circuits and compare with closed forms")
    _common(p)
    p.add_argument("--random", type=int, default=0, help="number of random graph pairs")
    p.add_argument("--max-n", type=int, default=8)
    p.add_argument("--density", type=float, default=0.4)
    p.add_argument("--aa", action="store_true", help="tabulate amplitude amplification")
    p.add_argument("--t", type=_int_range, default=list(range(11)), help="iterations, e.g. 0..10")

    p = sub.add_parser("sample", help="classical sampling ladder and concentration bound")
    _common(p)
    p.add_argument("--graph-id", type=int, default=0)
    p.add_argument("--S", type=_sizes, default=[100, 1000, 10000, 100000])
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.1)

    p = sub.add_parser("benchmark", help="repeated double cross-validation of the SVM")
    _common(p)
    p.add_argument("--kernels", default="bh,sh")
    p.add_argument("--encodings", default=None, help="comma list; defaults to --encoding")
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--outer-folds", type=int, default=10)
    p.add_argument("--inner-folds", type=int, default=10)

    p = sub.add_parser("report", help="success probability versus n (plot-ready CSV)")
    _common(p)
    return parser


# -- helpers ------------------------------------------------------------------

def _load(args) -> tuple[GraphDataset, dict]:
    if args.toy or args.dataset == "toy":
        g, h = toy_graphs()
        ds = GraphDataset("toy", (g, h), 2, (0, 1), "toy")
        return ds, {"kept": 2, "total": 2}
    if not args.dataset:
        raise UsageError("either --dataset or --toy is required")
    root = Path(args.data_root)
    if not (root / args.dataset).is_dir():
        raise DatasetError(f"dataset directory not found: {root / args.dataset}")
    full = parse_tu_dataset(root, args.dataset)
    by_vertices = filter_dataset(full, args.max_vertices, 0)
    ds = filter_dataset(by_vertices, args.max_vertices, args.min_edges)
    counts = {"total": len(full), "after_vertex_filter": len(by_vertices), "kept": len(ds)}
    # the edge filter applied first, for comparison
    counts["edge_filter_first"] = len(filter_dataset(filter_dataset(full, 64, args.min_edges), args.max_vertices, 0))
    return ds, counts


def _spectra(ds: GraphDataset, kind: EncodingKind, args) -> list:
    cache = SpectrumCache(args.cache or Path(args.out) / "cache")
    if ds.fingerprint == "toy":
        return [enumerate_spectrum(g, kind) for g in ds.graphs]
    return [cache.get(ds.fingerprint, g, kind, max_n=max(args.max_vertices, DEFAULT_MAX_N)) for g in ds.graphs]


def _manifest(args, **kw) -> RunManifest:
    recorded = {k: v for k, v in vars(args).items() if k not in ("func", "from_manifest")}
    return RunManifest(
        command=args.command,
        args=recorded,
        dataset="toy" if args.toy else args.dataset,
        encoding=getattr(args, "encoding", None),
        kernel=getattr(args, "kernel", None),
        max_vertices=args.max_vertices,
        min_edges=args.min_edges,
        seed=args.seed,
        threads=args.threads,
        **kw,
    )


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- commands -----------------------------------------------------------------

def cmd_spectrum(args) -> int:
    ds, counts = _load(args)
    kind = EncodingKind.parse(args.encoding)
    out = _out(args)
    spec_dir = out / "spectra" / ds.name / kind.value
    spec_dir.mkdir(parents=True, exist_ok=True)
    spectra = _spectra(ds, kind, args)
    rows = []
    for g, s in zip(ds.graphs, spectra):
        write_spectrum(s, spec_dir / f"{g.id}.spec")
        pr = success_probability(s)
        rows.append([g.id, s.n, g.num_edges, s.distinct_keys, f"{float(pr.exact):.17g}", f"{float(pr.bound):.17g}"])
    summary = out / f"{ds.name}_{kind.value}_spectrum_summary.csv"
    with summary.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["graph_id", "n", "edges", "a", "pr_success", "inverse_a"])
        w.writerows(rows)
    m = _manifest(args, outputs=[str(spec_dir), str(summary)], counts=counts)
    m.write(out)
    print(f"{len(spectra)} spectra -> {spec_dir}; summary {summary}")
    return EXIT_OK


def cmd_gram(args) -> int:
    ds, counts = _load(args)
    kind = EncodingKind.parse(args.encoding)
    kernel = KernelKind.parse(args.kernel)
    out = _out(args)
    G = gram(_spectra(ds, kind, args), kernel, dataset=ds.name)
    path = out / f"{ds.name}_{kernel.value}_{kind.value}_gram.csv"
    G.to_csv(path)
    labels = out / f"{ds.name}_labels.csv"
    labels.write_text("\n".join(str(g.label) for g in ds.graphs) + "\n")
    _manifest(args, outputs=[str(path), str(labels)], counts=counts).write(out)
    print(f"{G.size}x{G.size} {kernel.name}[{kind.value}] Gram -> {path}")
    return EXIT_OK


def cmd_verify_quantum(args) -> int:
    from .quantum import aa_amplitude, aa_closed_form, verify_pair

    kind = EncodingKind.parse(args.encoding)
    out = _out(args)
    report = {"encoding": kind.name, "pairs": [], "aa": []}
    failures = 0
    pairs = []
    if args.toy or not (args.random or args.aa):
        pairs.append(toy_graphs())
    rng = np.random.default_rng(args.seed)
    for _ in range(args.random):
        n1, n2 = rng.integers(1, args.max_n + 1, size=2)
        pairs.append((random_graph(int(n1), args.density, rng), random_graph(int(n2), args.density, rng)))
    for g, h in pairs:
        r = verify_pair(g, h, kind)
        ok = (
            r.max_abs_dev <= DEV_TOL
            and r.p_postselect >= r.p_bound - 1e-12
            and r.p_switch >= r.p_switch_bound - 1e-12
        )
        failures += not ok
        report["pairs"].append(asdict(r) | {"ok": ok})
    if args.aa:
        graphs = [toy_graphs()[0]] if args.toy or not args.random else [p[0] for p in pairs]
        for g in graphs:
            p = float(success_probability(enumerate_spectrum(g, kind)).exact)
            for t in args.t:
                sim, closed = aa_amplitude(g, kind, t), aa_closed_form(p, t)
                ok = abs(sim - closed) <= DEV_TOL
                failures += not ok
                report["aa"].append({"n": g.num_vertices, "t": t, "simulated": sim, "closed_form": closed, "ok": ok})
    report["failures"] = failures
    path = out / "verify_quantum.json"
    path.write_text(json.dumps(report, indent=2) + "\n")
    _manifest(args, outputs=[str(path)]).write(out)
    print(f"{len(report['pairs'])} pairs, {len(report['aa'])} AA rows, {failures} failures -> {path}")
    return EXIT_VERIFY if failures else EXIT_OK


def cmd_sample(args) -> int:
    from .sampler import ConcentrationReport, l1_trials, phi, pi_max, sample_size_for, true_distribution, weissman_bound

    ds, _ = _load(args)
    kind = EncodingKind.parse(args.encoding)
    g = next((g for g in ds.graphs if g.id == args.graph_id), None)
    if g is None:
        raise DatasetError(f"graph id {args.graph_id} not in dataset")
    s = enumerate_spectrum(g, kind)
    P = true_distribution(s)
    pi = pi_max(P)
    if pi >= 0.5:
        raise DatasetError(f"largest feature probability {pi} is not below 1/2; bound does not apply")
    out = _out(args)
    ladder = []
    for S in args.S:
        d = l1_trials(g, s, S, args.trials, args.seed)
        bound = weissman_bound(s.distinct_keys, pi, S, args.epsilon)
        ladder.append(
            {
                "S": S,
                "median_l1": float(np.median(d)),
                "mean_l1": float(d.mean()),
                "violation_rate": float(np.mean(d >= args.epsilon)),
                "bound": bound,
            }
        )
    ladder_path = out / f"{ds.name}_{kind.value}_l1_ladder.csv"
    with ladder_path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(ladder[0]))
        w.writeheader()
        w.writerows(ladder)
    rec = sample_size_for(s.distinct_keys, args.epsilon, args.delta, pi, s.n)
    last = ladder[-1]
    report = asdict(
        ConcentrationReport(
            n=s.n,
            kind=kind.name,
            S=args.S[-1],
            seed=args.seed,
            l1=last["median_l1"],
            epsilon=args.epsilon,
            delta=args.delta,
            bound=min(1.0, last["bound"]),
            pi_P=pi,
            phi=phi(pi),
        )
    )
    report["recommended_S"] = rec
    report["ladder"] = ladder
    json_path = out / f"{ds.name}_{kind.value}_sampler.json"
    json_path.write_text(json.dumps(report, indent=2) + "\n")
    _manifest(args, outputs=[str(ladder_path), str(json_path)]).write(out)
    print(f"recommended S = {rec['S']} for eps={args.epsilon}, delta={args.delta}; ladder -> {ladder_path}")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    from .svm import CvConfig, nested_cv

    ds, counts = _load(args)
    if len(ds) < 20:
        raise DatasetError(f"benchmark needs at least 20 graphs, dataset has {len(ds)}")
    out = _out(args)
    kernels = [KernelKind.parse(k) for k in args.kernels.split(",")]
    encodings = [EncodingKind.parse(e) for e in (args.encodings or args.encoding).split(",")]
    cfg = CvConfig(
        outer_folds=args.outer_folds,
        inner_folds=args.inner_folds,
        repeats=args.repeats,
        seed=args.seed,
        n_jobs=args.threads or 1,
    )
    outputs, table = [], []
    labels = ds.labels
    for enc in encodings:
        spectra = _spectra(ds, enc, args)
        for kern in kernels:
            t0 = time.perf_counter()
            G = gram(spectra, kern, dataset=ds.name)
            rep = nested_cv(G, labels, cfg, ds.name, kern.name, enc.name)
            path = out / f"{ds.name}_{kern.value}_{enc.value}_report.json"
            path.write_text(rep.to_json() + "\n")
            outputs.append(str(path))
            table.append(
                [kern.name, enc.name, f"{rep.accuracy_mean:.2f}", f"{rep.accuracy_std:.2f}",
                 f"{rep.f_mean:.2f}", f"{rep.f_std:.2f}", rep.f_scheme, f"{time.perf_counter() - t0:.1f}"]
            )
            print(f"{kern.name}[{enc.value}] acc {rep.accuracy_mean:.2f} +- {rep.accuracy_std:.2f}  "
                  f"F {rep.f_mean:.2f} +- {rep.f_std:.2f}")
        growth_csv = out / f"{ds.name}_{enc.value}_success_probability.csv"
        _write_growth(range_growth_report(spectra), growth_csv)
        outputs.append(str(growth_csv))
    summary = out / f"{ds.name}_benchmark_summary.csv"
    with summary.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kernel", "encoding", "acc_mean", "acc_std", "f_mean", "f_std", "f_scheme", "seconds"])
        w.writerows(table)
    outputs.append(str(summary))
    _manifest(args, outputs=outputs, counts=counts).write(out)
    return EXIT_OK


def _write_growth(rows, path: Path) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "graphs", "mean_a", "mean_pr", "stderr_pr", "min_pr", "mean_inverse_a", "reference"])
        for r in rows:
            w.writerow([r.n, r.graphs, f"{r.mean_a:.6g}", f"{r.mean_pr:.17g}", f"{r.stderr_pr:.6g}",
                        f"{r.min_pr:.17g}", f"{r.mean_inverse_a:.6g}", f"{r.reference:.6g}"])


def cmd_report(args) -> int:
    ds, counts = _load(args)
    kind = EncodingKind.parse(args.encoding)
    out = _out(args)
    rows = range_growth_report(_spectra(ds, kind, args))
    path = out / f"{ds.name}_{kind.value}_success_probability.csv"
    _write_growth(rows, path)
    _manifest(args, outputs=[str(path)], counts=counts).write(out)
    for r in rows:
        print(f"n={r.n:3d}  graphs={r.graphs:4d}  mean a={r.mean_a:9.1f}  Pr={r.mean_pr:.5f}  ref={r.reference:.3g}")
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "gram": cmd_gram,
    "verify-quantum": cmd_verify_quantum,
    "sample": cmd_sample,
    "benchmark": cmd_benchmark,
    "report": cmd_report,
}


def main(argv=None) -> int:
    import warnings

    warnings.filterwarnings("ignore", message="The TBB threading layer")
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.from_manifest:
        recorded = json.loads(Path(args.from_manifest).read_text())
        args = argparse.Namespace(**recorded["args"], from_manifest=None)
    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    if args.threads:
        import numba

        numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DatasetError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
