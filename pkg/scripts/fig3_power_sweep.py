"""Average radar MI of both designs versus P0 for 6 and 12 antennas."""
import argparse
from pathlib import Path

from isac import harness
from isac.scenario import ScenarioConfig, load_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenario")
    ap.add_argument("--trials", type=int, default=harness.DEFAULT_TRIALS)
    ap.add_argument("--out", default="results/fig3_power_sweep.csv")
    args = ap.parse_args()
    cfg = load_scenario(args.scenario) if args.scenario else ScenarioConfig()
    res = harness.run_power_sweep(cfg, antenna_list=(6, 12), n_trials=args.trials)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    res.to_csv(args.out)
    print(f"{'N':>3} {'P0 dBm':>7} {'W/O nats':>10} {'W nats':>10} {'valid':>6}")
    for row in zip(*(res.column(k) for k in ("n_antennas", "p0_dbm", "mi_wo_nats", "mi_w_nats", "n_valid"))):
        print(f"{row[0]:>3} {row[1]:>7.1f} {row[2]:>10.4f} {row[3]:>10.4f} {row[4]:>6}")
    print(f"wrote {args.out} ({res.runtime['wall_clock_s']:.0f} s)")


if __name__ == "__main__":
    main()
