"""Batch experiment harness: seeded runs, transfers, and report aggregation."""
import csv
import dataclasses
import glob
import io
import json
import os

import numpy as np

from .checkpoint import (load_population, save_checkpoint, write_json_atomic,
                         write_text_atomic)
from .config import ConfigError, RunConfig
from .engine import initial_state, run
from .metrics import polyfit_gain, rows_to_csv_lines, spearman

REPORT_COLUMNS = [
    "method", "world", "seeds",
    "top_fitness_mean", "top_fitness_std",
    "average_fitness_mean", "average_fitness_std",
    "spearman_weighted_mean_r", "polyfit_gain_fitness", "radius_mass_0_9_10",
]


def run_experiment(cfg: RunConfig, verbose: bool = True) -> str:
    """Execute every seed; returns the output directory."""
    outdir = cfg.resolve_output_dir()
    os.makedirs(outdir, exist_ok=True)
    write_json_atomic(os.path.join(outdir, "resolved_config.json"), cfg.resolved())
    for seed in cfg.seeds:
        world = cfg.build_world(seed)
        engine_cfg = cfg.engine_config(seed)
        history, final = run(engine_cfg, world, initial_state(world))
        lines = rows_to_csv_lines(history, world.metrics_columns())
        write_text_atomic(os.path.join(outdir, f"metrics_seed{seed}.csv"),
                          "\n".join(lines) + "\n")
        save_checkpoint(os.path.join(outdir, f"checkpoint_seed{seed}.json"),
                        world, final)
        if verbose:
            last = history[-1] if history else None
            wf = f"{last.weighted_mean_fitness:.4g}" if last else "n/a"
            print(f"seed {seed}: {engine_cfg.generations} generations, "
                  f"final weighted fitness {wf}")
    return outdir


def run_transfer(checkpoint_path: str, cfg: RunConfig, generations: int,
                 reset_ratios: bool = False, verbose: bool = True) -> str:
    """Continue a checkpointed population in the target world."""
    with open(checkpoint_path) as fh:
        ck = json.load(fh)
    if ck["world_kind"] != cfg.world_kind:
        raise ConfigError(
            f"checkpoint world kind {ck['world_kind']!r} is incompatible with "
            f"target world {cfg.world_kind!r}"
        )
    outdir = cfg.resolve_output_dir()
    os.makedirs(outdir, exist_ok=True)
    resolved = cfg.resolved()
    resolved["transfer"] = {
        "checkpoint": os.path.abspath(checkpoint_path),
        "generations": generations,
        "reset_ratios": reset_ratios,
    }
    write_json_atomic(os.path.join(outdir, "resolved_config.json"), resolved)
    for seed in cfg.seeds:
        world = cfg.build_world(seed)
        state = load_population(ck, world)
        if reset_ratios:
            for g in state.genomes:
                g.population = 1.0 / len(state.genomes)
        state.generation = 0
        engine_cfg = dataclasses.replace(cfg.engine_config(seed),
                                         generations=generations)
        history, final = run(engine_cfg, world, state)
        lines = rows_to_csv_lines(history, world.metrics_columns())
        write_text_atomic(os.path.join(outdir, f"transfer_metrics_seed{seed}.csv"),
                          "\n".join(lines) + "\n")
        save_checkpoint(os.path.join(outdir, f"transfer_checkpoint_seed{seed}.json"),
                        world, final)
        if verbose:
            last = history[-1] if history else None
            wf = f"{last.weighted_mean_fitness:.4g}" if last else "n/a"
            print(f"seed {seed}: transferred {generations} generations, "
                  f"final weighted fitness {wf}")
    return outdir


def _read_metrics_csv(path):
    with open(path) as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    out = {}
    if not rows:
        return out
    for col in rows[0]:
        if col == "strategy":
            out[col] = [r[col] for r in rows]
        else:
            out[col] = np.array([float(r[col]) for r in rows])
    return out


def _method_label(resolved: dict) -> str:
    if resolved.get("label"):
        return resolved["label"]
    strategy = resolved["engine"]["strategy"]
    world = resolved["world"]
    static = (world.get("shuffle_period", 0) is None
              or world.get("goal_period", 0) is None
              or world.get("fixed_goal") is not None)
    return f"{strategy}_static" if static else strategy


def _fmt(v) -> str:
    if v is None:
        return ""
    return repr(float(v))


def build_report(run_dirs) -> list[dict]:
    """One aggregated row per run directory (transfer CSVs take precedence)."""
    if not run_dirs:
        raise ValueError("no run directories given")
    report = []
    for d in run_dirs:
        resolved_path = os.path.join(d, "resolved_config.json")
        if not os.path.exists(resolved_path):
            raise ValueError(f"{d}: missing resolved_config.json")
        with open(resolved_path) as fh:
            resolved = json.load(fh)
        paths = sorted(glob.glob(os.path.join(d, "transfer_metrics_seed*.csv")))
        if not paths:
            paths = sorted(glob.glob(os.path.join(d, "metrics_seed*.csv")))
        if not paths:
            raise ValueError(f"{d}: no metrics CSVs found")
        tops, avgs, spearmans, gains, ringmass = [], [], [], [], []
        for p in paths:
            cols = _read_metrics_csv(p)
            if not cols:
                continue
            tops.append(cols["max_fitness"][-1])
            avgs.append(cols["weighted_mean_fitness"][-1])
            if "weighted_mean_r" in cols and len(cols["generation"]) >= 3:
                spearmans.append(spearman(cols["generation"], cols["weighted_mean_r"]))
            if len(cols["generation"]) >= 5:
                gains.append(polyfit_gain(cols["generation"],
                                          cols["weighted_mean_fitness"]))
            if "p0" in cols:
                ringmass.append(cols["p0"][-1] + cols["p9"][-1] + cols["p10"][-1])
        if not tops:
            raise ValueError(f"{d}: metrics CSVs are empty")

        def agg(xs):
            if not xs:
                return None, None
            mean = float(np.mean(xs))
            std = float(np.std(xs, ddof=1)) if len(xs) > 1 else 0.0
            return mean, std

        top_m, top_s = agg(tops)
        avg_m, avg_s = agg(avgs)
        report.append({
            "method": _method_label(resolved),
            "world": resolved["world"]["kind"],
            "seeds": len(tops),
            "top_fitness_mean": top_m,
            "top_fitness_std": top_s,
            "average_fitness_mean": avg_m,
            "average_fitness_std": avg_s,
            "spearman_weighted_mean_r": agg(spearmans)[0],
            "polyfit_gain_fitness": agg(gains)[0],
            "radius_mass_0_9_10": agg(ringmass)[0],
        })
    return report


def report_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for row in rows:
        writer.writerow([
            row["method"], row["world"], row["seeds"],
            _fmt(row["top_fitness_mean"]), _fmt(row["top_fitness_std"]),
            _fmt(row["average_fitness_mean"]), _fmt(row["average_fitness_std"]),
            _fmt(row["spearman_weighted_mean_r"]),
            _fmt(row["polyfit_gain_fitness"]),
            _fmt(row["radius_mass_0_9_10"]),
        ])
    return buf.getvalue()
