"""Run time of the closed form against the SDR pipeline on the same gamma = 0 instance."""
import argparse
from pathlib import Path

from isac import harness
from isac.scenario import ScenarioConfig, load_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenario")
    ap.add_argument("--repeats", type=int, default=30)
    ap.add_argument("--out", default="results/table1_timing.csv")
    args = ap.parse_args()
    cfg = load_scenario(args.scenario) if args.scenario else ScenarioConfig()
    res = harness.run_timing(cfg, n_repeats=args.repeats)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    res.to_csv(args.out)
    rt = res.runtime
    print(f"closed form  median {rt['median_closed_s'] * 1e3:8.3f} ms")
    print(f"SDR pipeline median {rt['median_sdr_s'] * 1e3:8.3f} ms")
    print(f"speedup {rt['speedup']:.0f}x over {args.repeats} repeats")


if __name__ == "__main__":
    main()
