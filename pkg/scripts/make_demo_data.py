"""Write a synthetic 20-asset price panel and region map for trying the CLI.

    python scripts/make_demo_data.py --out data/
"""

import argparse
import json
from pathlib import Path

from gkcascade.marketdata import DEFAULT_REGIONS
from gkcascade.synthetic import factor_panel, panel_to_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="data")
    ap.add_argument("--days", type=int, default=2500)
    ap.add_argument("--seed", type=int, default=2015)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    panel = factor_panel(n_days=args.days, seed=args.seed)
    (out / "demo_prices.csv").write_bytes(panel_to_csv(panel))
    (out / "regions.json").write_text(json.dumps({t: r.value for t, r in sorted(DEFAULT_REGIONS.items())}, indent=2) + "\n")
    print(f"wrote {out / 'demo_prices.csv'} ({len(panel.dates)} rows x {len(panel.assets)} assets)")


if __name__ == "__main__":
    main()
