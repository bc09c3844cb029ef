import csv
import os
from pathlib import Path

OUT = Path(os.environ.get("RESISTIVE_SIFT_OUT", "runs")) / "experiments"
DATA = Path(__file__).resolve().parents[1] / "tests" / "data"


def write_csv(name, header, rows):
    OUT.mkdir(parents=True, exist_ok=True)
    path = OUT / name
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([f"{x:.9g}" if isinstance(x, float) else x for x in row])
    print(f"wrote {path}")
    return path
