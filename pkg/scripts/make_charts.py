"""Write both d3 scenarios in every chart format to an output directory."""

import argparse
from pathlib import Path

from k2local import charts


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="charts_out")
    args = p.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for label in ("A", "B"):
        page = charts.scenario_page(label)
        for fmt, ext in (("svg", "svg"), ("ascii", "txt"), ("json", "json")):
            path = out / f"scenario_{label}.{ext}"
            path.write_text(charts.emit_chart(page, fmt))
            print(path)


if __name__ == "__main__":
    main()
