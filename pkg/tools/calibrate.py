"""Parameter sweep helper used while fixing the default operating point.

Runs small multi-seed campaigns for candidate (tx power, queue cap, meas
error sigma) combinations and prints the quantities the comparative
experiment cares about: pooled mean and 5th percentile per policy, add /
release counts, dead and starved UE counts in the baseline, and whether the
expected orderings hold.

Usage: python3 tools/calibrate.py [--seeds 1..6] [--jobs 12] [--tx 40,43,46]
       [--cap 1000000] [--sigma 0.75]
"""

import argparse
import multiprocessing
import sys
from dataclasses import replace

sys.path.insert(0, "src")

from ntnmc.cli import parse_seeds  # noqa: E402
from ntnmc.config import load_config  # noqa: E402
from ntnmc.simulation import run_single  # noqa: E402
from ntnmc.stats import mean, percentile  # noqa: E402

POLICY_ORDER = ("off", "rsrp", "bo", "mcs")


def _run(task):
    cfg, seed = task
    return run_single(cfg, seed)


def sweep_combo(base_cfg, tx, cap, sigma, nlos, seeds, pool):
    cfg = replace(base_cfg, tn_tx_power_dbm=tx, ue_queue_bytes=cap,
                  meas_error_sigma_db=sigma, shadow_sigma_nlos_db=nlos)
    tasks = [(replace(cfg, policy=p), s) for p in POLICY_ORDER for s in seeds]
    results = pool.map(_run, tasks, chunksize=1)
    by_policy = {}
    n = len(seeds)
    for i, p in enumerate(POLICY_ORDER):
        by_policy[p] = results[i * n:(i + 1) * n]

    print(f"\n== tx={tx} dBm, cap={cap} B, sigma={sigma} dB, nlos={nlos} dB, "
          f"seeds={seeds[0]}..{seeds[-1]}")
    stats = {}
    for p in POLICY_ORDER:
        runs = by_policy[p]
        pooled = [x for r in runs for x in r.throughput_kbps]
        stats[p] = {
            "mean": mean(pooled),
            "p5": percentile(pooled, 5.0),
            "adds": mean([r.sn_adds for r in runs]),
            "rel": mean([r.sn_releases for r in runs]),
            "bound": mean([r.distinct_bound_ues for r in runs]),
            "elig": mean([r.eligible_ues for r in runs]),
            "zeros": mean([sum(1 for x in r.throughput_kbps if x == 0.0)
                           for r in runs]),
            "semi": mean([sum(1 for x in r.throughput_kbps if 0.0 < x < 400.0)
                          for r in runs]),
            "deliv": mean([r.delivered_bits for r in runs]) / 1e6,
            "drop": mean([r.dropped_bits for r in runs]) / 1e6,
            "stale": mean([r.stale_bits for r in runs]) / 1e6,
        }
        s = stats[p]
        print(f"  {p:5s} mean={s['mean']:7.1f} p5={s['p5']:7.1f} "
              f"adds={s['adds']:5.1f} rel={s['rel']:4.1f} bound={s['bound']:5.1f} "
              f"zeros={s['zeros']:4.1f} semi={s['semi']:4.1f} "
              f"deliv={s['deliv']:7.1f}Mb drop={s['drop']:6.1f}Mb "
              f"stale={s['stale']:5.1f}Mb")

    mean_ok = (stats["mcs"]["mean"] > stats["bo"]["mean"]
               > stats["rsrp"]["mean"] > stats["off"]["mean"])
    p5_ok = (stats["mcs"]["p5"] > stats["rsrp"]["p5"]
             > stats["bo"]["p5"] > stats["off"]["p5"])
    ratio = stats["mcs"]["mean"] / stats["off"]["mean"]
    adds_ok = stats["mcs"]["adds"] > stats["bo"]["adds"]
    rel_ok = stats["mcs"]["rel"] > 0 and stats["bo"]["rel"] == 0 == stats["rsrp"]["rel"]
    cover = stats["rsrp"]["bound"] / max(stats["rsrp"]["elig"], 1e-9)
    print(f"  -> mean order {'OK ' if mean_ok else 'BAD'} "
          f"(gaps {stats['rsrp']['mean']-stats['off']['mean']:+6.1f} "
          f"{stats['bo']['mean']-stats['rsrp']['mean']:+6.1f} "
          f"{stats['mcs']['mean']-stats['bo']['mean']:+6.1f}) | "
          f"p5 order {'OK ' if p5_ok else 'BAD'} "
          f"(off={stats['off']['p5']:.1f} bo={stats['bo']['p5']:.1f} "
          f"rsrp={stats['rsrp']['p5']:.1f} mcs={stats['mcs']['p5']:.1f}) | "
          f"ratio={ratio:.3f} {'OK' if 1.10 <= ratio <= 1.60 else 'BAD'} | "
          f"adds {'OK' if adds_ok else 'BAD'} rel {'OK' if rel_ok else 'BAD'} "
          f"cover={cover:.2f}")
    return mean_ok and p5_ok and 1.10 <= ratio <= 1.60 and adds_ok and rel_ok


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", default="1..6")
    ap.add_argument("--jobs", type=int, default=12)
    ap.add_argument("--tx", default="40,43,46")
    ap.add_argument("--cap", default="1000000")
    ap.add_argument("--sigma", default="0.75")
    ap.add_argument("--nlos", default="8.0")
    args = ap.parse_args()

    seeds = parse_seeds(args.seeds)
    base = load_config(None)
    txs = [float(x) for x in args.tx.split(",")]
    caps = [int(x) for x in args.cap.split(",")]
    sigmas = [float(x) for x in args.sigma.split(",")]
    nloses = [float(x) for x in args.nlos.split(",")]

    with multiprocessing.Pool(args.jobs) as pool:
        for tx in txs:
            for cap in caps:
                for sigma in sigmas:
                    for nlos in nloses:
                        sweep_combo(base, tx, cap, sigma, nlos, seeds, pool)


if __name__ == "__main__":
    main()
