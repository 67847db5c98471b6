"""End-to-end pipeline on a synthetic corpus, via the CLI surface.

Builds a small trajectory file (a tailgating pair plus a crossing conflict),
runs the kinematics statistics, evaluates TH and the probabilistic metric,
count-matches the bins and compares the runs. All artifacts land in
demos/output/.
"""

import csv
import json
from pathlib import Path

from riskspot.cli import main as riskspot_main

OUT = Path(__file__).parent / "output"


def write_corpus(path):
    rows = []
    dt = 0.1
    n = 200
    # tailgating pair heading east
    for f in range(n):
        rows.append((1, f, 5.0 + 12.0 * f * dt, 0.0))
        rows.append((2, f, 19.0 + 12.0 * f * dt, 0.0))
    # crossing conflict: eastbound meets northbound near (60, 40)
    for f in range(n):
        rows.append((3, f, 10.0 + 10.0 * f * dt, 40.0))
        rows.append((4, f, 60.0, -5.0 + 9.0 * f * dt))
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["Vehicle_ID", "Frame_ID", "Local_X", "Local_Y", "v_Class"])
        for vid, frame, x, y in rows:
            writer.writerow([vid, frame, repr(x), repr(y), 2])


def run(argv):
    code = riskspot_main(argv)
    assert code == 0, f"riskspot {' '.join(argv)} exited with {code}"


def main():
    OUT.mkdir(exist_ok=True)
    corpus = OUT / "corpus.csv"
    write_corpus(corpus)
    config = OUT / "config.json"
    config.write_text(
        json.dumps(
            {
                "feet_to_meters": False,
                "smooth_pos_s": 0.5,
                "smooth_vel_s": 0.5,
                "smooth_acc_s": 0.5,
                "threads": 1,
            },
            indent=2,
        )
    )

    print("1. kinematics statistics")
    run(["stats", "--input", str(corpus), "--config", str(config), "--out", str(OUT / "stats")])
    stats = json.loads((OUT / "stats" / "stats.json").read_text())
    print(f"   velocity histogram over {stats['v']['sample_count']} samples, "
          f"{len(stats['v']['pmf'])} bins")

    print("2. time-headway baseline (fixed bins, emits reference counts)")
    run(["analyze", "--input", str(corpus), "--metric", "TH", "--config", str(config),
         "--out", str(OUT / "th")])
    counts = json.loads((OUT / "th" / "counts.json").read_text())
    print(f"   TH reference counts: {counts['reference_counts']}")

    print("3. probabilistic metric, all partners in sensor range (count-matched)")
    run(["analyze", "--input", str(corpus), "--metric", "RSD_all", "--config", str(config),
         "--out", str(OUT / "rsd_all"), "--counts", str(OUT / "th" / "counts.json")])
    binning = json.loads((OUT / "rsd_all" / "binning.json").read_text())
    for entry in binning["bins"]:
        print(f"   {entry['label']:13s} count={entry['count']:4d} "
              f"boundaries=({entry['boundary_high']}, {entry['boundary_low']})")

    print("4. compare the two criticality maps")
    run(["compare", str(OUT / "th"), str(OUT / "rsd_all"), "--out", str(OUT / "report.json")])
    report = json.loads((OUT / "report.json").read_text())
    pair = report["pairs"][0]
    print(f"   shared cells: {pair['shared_cells']}, "
          f"disagreeing: {len(pair['disagreeing_cells'])}")
    print(f"   artifacts in {OUT}")


if __name__ == "__main__":
    main()
