"""Command-line pipeline: kinematics statistics, metric analysis, comparison.

Every output directory is self-describing: it contains the fully resolved
configuration, the package version and the input file checksum, and
re-running with identical inputs reproduces byte-identical files regardless
of the parallelism degree.

Exit codes: 0 success, 1 runtime/data error, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from pathlib import Path as FilePath
from typing import Dict, List, Optional, Sequence

from . import __version__
from .analysis import (
    BIN_LABELS,
    BinningError,
    CriticalityBinning,
    CriticalityMap,
    RiskEvent,
    bin_fixed,
    bin_matched,
    build_map,
    canonical_metric,
    evaluate_dataset,
    front_pairs_over_dataset,
    natural_value,
    velocity_histograms,
)
from .config import ConfigError, RunConfig
from .ingest import (
    DataError,
    EmptyDatasetError,
    HistogramStats,
    SchemaError,
    kinematics_statistics,
    parse_trajectories,
    smooth_dataset,
)

__all__ = ["main", "build_parser"]

_METRIC_NAMES = {"rsd_front": "RSD_front", "rsd_all": "RSD_all", "th": "TH", "ttc": "TTC"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riskspot",
        description="Collision-risk criticality maps for recorded trajectories",
    )
    parser.add_argument("--version", action="version", version=f"riskspot {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    stats = sub.add_parser("stats", help="dataset kinematics statistics (pmf/cdf histograms)")
    stats.add_argument("--input", required=True, help="trajectory CSV")
    stats.add_argument("--config", help="JSON config file")
    stats.add_argument("--out", required=True, help="output directory")
    stats.add_argument("--threads", type=int, help="parallelism degree (0 = all cores)")

    analyze = sub.add_parser("analyze", help="run one risk metric over the whole dataset")
    analyze.add_argument("--input", required=True, help="trajectory CSV")
    analyze.add_argument(
        "--metric",
        required=True,
        help="one of RSD_front, RSD_all, TH, TTC (case-insensitive)",
    )
    analyze.add_argument("--config", help="JSON config file")
    analyze.add_argument("--out", required=True, help="output directory")
    analyze.add_argument(
        "--counts",
        help="reference-counts JSON from a TH run (required for matched binning)",
    )
    analyze.add_argument("--threads", type=int, help="parallelism degree (0 = all cores)")

    compare = sub.add_parser("compare", help="compare two or more analyze outputs")
    compare.add_argument("dirs", nargs="+", help="analyze output directories")
    compare.add_argument("--out", help="write the JSON report here instead of stdout")
    return parser


def _load_config(args) -> RunConfig:
    config = RunConfig.from_file(args.config) if args.config else RunConfig()
    if getattr(args, "threads", None) is not None:
        if args.threads < 0:
            raise ConfigError(f"--threads must be >= 0, got {args.threads}")
        config.threads = args.threads
    return config


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _write_json(path: FilePath, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_csv(path: FilePath, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(value: float) -> str:
    return repr(float(value))


def _write_run_config(out: FilePath, config: RunConfig, command: str, input_path: str, **extra) -> None:
    resolved = config.to_dict()
    # The parallelism degree does not affect results; keeping it out of the
    # emitted config preserves byte-identical outputs across thread counts.
    resolved.pop("threads")
    payload = {
        "command": command,
        "config": resolved,
        "input": FilePath(input_path).name,
        "input_sha256": _sha256(input_path),
        "version": __version__,
    }
    payload.update(extra)
    _write_json(out / "config.json", payload)


def _histogram_rows(stats: HistogramStats):
    for i in range(stats.pmf.shape[0]):
        yield (
            stats.variable,
            _fmt(stats.bin_edges[i]),
            _fmt(stats.bin_edges[i + 1]),
            _fmt(stats.pmf[i]),
            _fmt(stats.cdf[i]),
        )


def _histogram_payload(stats: HistogramStats) -> dict:
    return {
        "variable": stats.variable,
        "sample_count": stats.sample_count,
        "bin_edges": [float(v) for v in stats.bin_edges],
        "pmf": [float(v) for v in stats.pmf],
        "cdf": [float(v) for v in stats.cdf],
    }


def cmd_stats(args) -> int:
    config = _load_config(args)
    out = FilePath(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dataset = parse_trajectories(
        args.input, config.schema(), dt_s=config.dt_s, feet_to_meters=config.feet_to_meters
    )
    dataset = smooth_dataset(dataset, config.smooth_pos_s, config.smooth_vel_s, config.smooth_acc_s)
    pairs = front_pairs_over_dataset(dataset, config)
    histograms = kinematics_statistics(
        dataset,
        pairs,
        v_bin_width=config.v_bin_width_mps,
        a_bin_width=config.a_bin_width_mps2,
        gap_bin_width=config.gap_bin_width_m,
        dv_bin_width=config.dv_bin_width_mps,
    )
    rows = [row for stats in histograms for row in _histogram_rows(stats)]
    _write_csv(out / "stats.csv", ("variable", "bin_low", "bin_high", "pmf", "cdf"), rows)
    _write_json(out / "stats.json", {s.variable: _histogram_payload(s) for s in histograms})
    _write_run_config(out, config, "stats", args.input)
    return 0


def _event_rows(events: Sequence[RiskEvent], assignments: Sequence[int], metric: str):
    for event, bin_index in zip(events, assignments):
        row = [
            event.ego_id,
            _fmt(event.t_s),
            _fmt(event.east_m),
            _fmt(event.north_m),
            _fmt(event.ego_velocity_mps),
            _fmt(event.metric_value),
        ]
        if metric in ("th", "ttc"):
            row.append(_fmt(natural_value(metric, event.metric_value)))
        row.append(bin_index)
        yield row


def _bin_assignments(events: Sequence[RiskEvent], binning: CriticalityBinning) -> List[int]:
    membership = {}
    for index, bucket in enumerate(binning.bins):
        for event in bucket.events:
            membership[id(event)] = index
    return [membership.get(id(event), -1) for event in events]


def _boundary_payload(binning: CriticalityBinning) -> list:
    payload = []
    for bucket in binning.bins:
        entry = {
            "label": bucket.label,
            "count": bucket.count,
            "boundary_high": bucket.boundary_high,
            "boundary_low": bucket.boundary_low,
        }
        if binning.metric in ("th", "ttc") and binning.mode == "matched":
            entry["boundary_high_s"] = (
                None if bucket.boundary_high is None else natural_value(binning.metric, bucket.boundary_high)
            )
            entry["boundary_low_s"] = (
                None if bucket.boundary_low is None else natural_value(binning.metric, bucket.boundary_low)
            )
        payload.append(entry)
    return payload


def _map_rows(grid: CriticalityMap):
    for (ie, in_), stats in sorted(grid.cells.items()):
        yield (ie, in_, stats.bin_index, *stats.counts)


def cmd_analyze(args) -> int:
    config = _load_config(args)
    metric = canonical_metric(args.metric)
    out = FilePath(args.out)
    out.mkdir(parents=True, exist_ok=True)

    dataset = parse_trajectories(
        args.input, config.schema(), dt_s=config.dt_s, feet_to_meters=config.feet_to_meters
    )
    dataset = smooth_dataset(dataset, config.smooth_pos_s, config.smooth_vel_s, config.smooth_acc_s)
    events = evaluate_dataset(dataset, metric, config)
    total_steps = dataset.total_samples

    shortfall = 0
    if metric == "th":
        binning = bin_fixed(events, config.th_bins_s, metric)
        _write_json(
            out / "counts.json",
            {
                "metric": "th",
                "reference_counts": binning.counts,
                "total_events": len(events),
                "total_steps": total_steps,
            },
        )
    else:
        if not args.counts:
            raise ConfigError(
                f"{_METRIC_NAMES[metric]} uses count-matched binning: run the TH metric first "
                "and pass its counts.json via --counts"
            )
        with open(args.counts, "r", encoding="utf-8") as handle:
            reference = json.load(handle)
        try:
            counts = [int(c) for c in reference["reference_counts"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"counts file {args.counts} lacks usable reference_counts") from exc
        # Degenerate corpora can define fewer events than the reference
        # requires (e.g. TTC with no closing pairs). Clamp per bin, most
        # critical first, and record the shortfall instead of failing.
        available = len(events)
        clamped = []
        for count in counts:
            take = min(count, available)
            clamped.append(take)
            available -= take
        shortfall = sum(counts) - sum(clamped)
        binning = bin_matched(events, clamped, metric)

    grid = build_map(binning, config.cell_size_m)
    histograms = velocity_histograms(binning, config.v_bin_width_mps)

    header = ["ego_id", "t_s", "east_m", "north_m", "ego_velocity_mps", "metric_value"]
    if metric in ("th", "ttc"):
        header.append(f"{metric}_s")
    header.append("bin_index")
    _write_csv(out / "events.csv", header, _event_rows(events, _bin_assignments(events, binning), metric))

    _write_json(
        out / "binning.json",
        {
            "metric": metric,
            "mode": binning.mode,
            "bins": _boundary_payload(binning),
            "unbinned_count": binning.unbinned_count,
            "shortfall": shortfall,
            "total_events": len(events),
            "total_steps": total_steps,
            "binned_fraction_of_events": (binning.total_binned / len(events)) if events else 0.0,
            "binned_fraction_of_steps": (binning.total_binned / total_steps) if total_steps else 0.0,
        },
    )

    _write_csv(
        out / "map.csv",
        ("east_cell", "north_cell", "bin_index", *(f"count_{label}" for label in BIN_LABELS)),
        _map_rows(grid),
    )
    _write_json(
        out / "map.json",
        {
            "origin_east_m": grid.origin_east_m,
            "origin_north_m": grid.origin_north_m,
            "cell_size_m": grid.cell_size_m,
            "cells": [
                {"east_cell": ie, "north_cell": in_, "bin_index": s.bin_index, "counts": s.counts}
                for (ie, in_), s in sorted(grid.cells.items())
            ],
        },
    )
    _write_csv(
        out / "velocity_histograms.csv",
        ("criticality_bin", "velocity_low_mps", "velocity_high_mps", "pmf", "cdf"),
        (
            (label, *row[1:])
            for label in BIN_LABELS
            for row in _histogram_rows(histograms[label])
        ),
    )
    _write_run_config(out, config, "analyze", args.input, metric=metric)
    return 0


def _load_analysis_dir(directory: str) -> dict:
    base = FilePath(directory)
    try:
        binning = json.loads((base / "binning.json").read_text(encoding="utf-8"))
        map_doc = json.loads((base / "map.json").read_text(encoding="utf-8"))
        events: Dict[tuple, int] = {}
        with open(base / "events.csv", newline="", encoding="utf-8") as handle:
            for row in csv.DictReader(handle):
                key = (int(row["ego_id"]), row["t_s"])
                events[key] = int(row["bin_index"])
    except FileNotFoundError as exc:
        raise ConfigError(f"{directory} is not an analyze output directory: {exc}") from exc
    return {"dir": directory, "binning": binning, "map": map_doc, "events": events}


def _absolute_cells(map_doc: dict) -> Dict[tuple, int]:
    cs = map_doc["cell_size_m"]
    de = round(map_doc["origin_east_m"] / cs)
    dn = round(map_doc["origin_north_m"] / cs)
    return {
        (cell["east_cell"] + de, cell["north_cell"] + dn): cell["bin_index"]
        for cell in map_doc["cells"]
    }


def cmd_compare(args) -> int:
    if len(args.dirs) < 2:
        raise ConfigError("compare needs at least two analyze output directories")
    runs = [_load_analysis_dir(d) for d in args.dirs]
    cell_sizes = {run["map"]["cell_size_m"] for run in runs}
    if len(cell_sizes) != 1:
        raise ConfigError(f"incompatible map grids: differing cell sizes {sorted(cell_sizes)}")

    report = {
        "runs": [
            {
                "dir": run["dir"],
                "metric": run["binning"]["metric"],
                "bins": run["binning"]["bins"],
            }
            for run in runs
        ],
        "pairs": [],
    }
    for i in range(len(runs)):
        for j in range(i + 1, len(runs)):
            a, b = runs[i], runs[j]
            cells_a = _absolute_cells(a["map"])
            cells_b = _absolute_cells(b["map"])
            if cells_a and cells_b:
                ea = {k[0] for k in cells_a}
                na = {k[1] for k in cells_a}
                eb = {k[0] for k in cells_b}
                nb = {k[1] for k in cells_b}
                overlap_extent = (
                    min(max(ea), max(eb)) >= max(min(ea), min(eb))
                    and min(max(na), max(nb)) >= max(min(na), min(nb))
                )
                if not overlap_extent:
                    raise ConfigError(
                        f"map extents of {a['dir']} and {b['dir']} are disjoint; "
                        "the runs cover different areas"
                    )
            shared = set(cells_a) & set(cells_b)
            disagreements = sorted(
                (key, cells_a[key], cells_b[key]) for key in shared if cells_a[key] != cells_b[key]
            )
            bin_overlap = {}
            for index, label in enumerate(BIN_LABELS):
                members_a = {k for k, v in a["events"].items() if v == index}
                members_b = {k for k, v in b["events"].items() if v == index}
                union = members_a | members_b
                bin_overlap[label] = {
                    "count_a": len(members_a),
                    "count_b": len(members_b),
                    "jaccard": (len(members_a & members_b) / len(union)) if union else 1.0,
                }
            report["pairs"].append(
                {
                    "a": a["dir"],
                    "b": b["dir"],
                    "bin_occupancy_overlap": bin_overlap,
                    "shared_cells": len(shared),
                    "disagreeing_cells": [
                        {"east_cell": k[0], "north_cell": k[1], "bin_a": va, "bin_b": vb}
                        for k, va, vb in disagreements
                    ],
                }
            )
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        FilePath(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"stats": cmd_stats, "analyze": cmd_analyze, "compare": cmd_compare}
    try:
        return handlers[args.command](args)
    except (ConfigError, SchemaError) as exc:
        print(f"riskspot: error: {exc}", file=sys.stderr)
        return 2
    except (DataError, EmptyDatasetError, BinningError, OSError, ValueError) as exc:
        print(f"riskspot: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
