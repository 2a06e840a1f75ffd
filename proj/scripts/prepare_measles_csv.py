#!/usr/bin/env python3
"""Convert a weekly surveillance export into the count CSV the CLI reads.

The Tokyo weekly measles series used by the conditional acceptance check is
not bundled: the surveillance data is published by Japan's National Institute
of Infectious Diseases (IDWR weekly reports, https://www.niid.go.jp) under
terms that do not allow redistribution here. Download the weekly
notifications for measles in Tokyo for the study window (2012 through
mid-2019, 391 weeks, 264 cases in total), export them as a CSV with one row
per week, then run:

    scripts/prepare_measles_csv.py raw.csv --date-column week --count-column tokyo \
        --out data/niid_measles_tokyo_weekly.csv

The output has a `label,count` header, one ISO-dated row per week, and is
ready for:

    hawkes fit --input data/niid_measles_tokyo_weekly.csv --kernel gauss --delta 7
    hawkes gof --input data/niid_measles_tokyo_weekly.csv --kernel gauss --delta 7 \
        --bandwidth 0.10

The acceptance binary picks the file up at data/niid_measles_tokyo_weekly.csv
(or from $HAWKES_NIID_CSV) and otherwise reports the criterion as skipped.
"""

import argparse
import csv
import datetime
import sys


def parse_date(text):
    text = text.strip()
    for fmt in ("%Y-%m-%d", "%Y/%m/%d", "%d-%m-%Y", "%d/%m/%Y"):
        try:
            return datetime.datetime.strptime(text, fmt).date()
        except ValueError:
            continue
    raise SystemExit(f"unrecognized date: {text!r}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("raw", help="downloaded weekly CSV")
    ap.add_argument("--date-column", required=True, help="column holding the week start date")
    ap.add_argument("--count-column", required=True, help="column holding the Tokyo case count")
    ap.add_argument("--out", default="data/niid_measles_tokyo_weekly.csv")
    args = ap.parse_args()

    rows = []
    with open(args.raw, newline="", encoding="utf-8-sig") as fh:
        for record in csv.DictReader(fh):
            date = parse_date(record[args.date_column])
            count = int(record[args.count_column].strip() or 0)
            if count < 0:
                raise SystemExit(f"negative count in week {date}")
            rows.append((date, count))

    rows.sort()
    if not rows:
        raise SystemExit("no data rows found")
    step = (rows[1][0] - rows[0][0]).days if len(rows) > 1 else 7
    if step != 7:
        print(f"warning: first two rows are {step} days apart, expected 7", file=sys.stderr)

    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        fh.write("label,count\n")
        for date, count in rows:
            fh.write(f"{date.isoformat()},{count}\n")
    total = sum(c for _, c in rows)
    print(f"wrote {len(rows)} weeks, {total} cases -> {args.out}")


if __name__ == "__main__":
    main()
