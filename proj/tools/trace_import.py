#!/usr/bin/env python3
"""Convert public cluster-trace container tables into the minimal request pool
CSV that `decoynet` ingests (`container_id,cpu_request,ram_request`).

The tool is offline and format-agnostic: point it at a (possibly headerless)
CSV, name the columns holding the container id and its requested CPU/RAM, and
give scale factors that normalize the values to fractions of one node. For the
Alibaba cluster-trace 2017 container table, CPU is requested in cores on
64-core machines and memory as a fraction already normalized per machine:

    tools/trace_import.py --input container_event.csv \
        --id-col 1 --cpu-col 5 --ram-col 6 --cpu-scale 64 \
        --output pool.csv

Rows with non-positive requests are dropped; values above a full node clamp
to 1.0.
"""

import argparse
import csv
import sys


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--input", required=True)
    parser.add_argument("--output", required=True)
    parser.add_argument("--id-col", type=int, required=True, help="0-based column index")
    parser.add_argument("--cpu-col", type=int, required=True)
    parser.add_argument("--ram-col", type=int, required=True)
    parser.add_argument("--cpu-scale", type=float, default=1.0,
                        help="divide CPU values by this (e.g. machine core count)")
    parser.add_argument("--ram-scale", type=float, default=1.0)
    parser.add_argument("--delimiter", default=",")
    parser.add_argument("--skip-header", action="store_true")
    args = parser.parse_args()

    kept = 0
    dropped = 0
    with open(args.input, newline="") as src, open(args.output, "w", newline="") as dst:
        reader = csv.reader(src, delimiter=args.delimiter)
        writer = csv.writer(dst)
        writer.writerow(["container_id", "cpu_request", "ram_request"])
        for row_no, row in enumerate(reader):
            if args.skip_header and row_no == 0:
                continue
            try:
                cid = row[args.id_col].strip()
                cpu = float(row[args.cpu_col]) / args.cpu_scale
                ram = float(row[args.ram_col]) / args.ram_scale
            except (IndexError, ValueError):
                dropped += 1
                continue
            if cpu <= 0.0 or ram <= 0.0 or not cid:
                dropped += 1
                continue
            writer.writerow([cid, f"{min(cpu, 1.0):.9g}", f"{min(ram, 1.0):.9g}"])
            kept += 1

    print(f"wrote {kept} rows, dropped {dropped}", file=sys.stderr)
    return 0 if kept > 0 else 1


if __name__ == "__main__":
    raise SystemExit(main())
