"""Experiment runner: `dpptest <subcommand>` with JSON/CSV/PNG artifacts.

Subcommands
    sample         kernel JSON -> sample text file
    test           sample file + params -> verdict JSON
    learn          sample file -> candidate grid dump + best-candidate kernel
    verify-lemmas  randomized verification suites -> report JSON + CSV + PNG
    hardness       hard-instance sweep -> CSV + PNG
    bench          tester operating-rate curves -> CSV + PNG

Config resolution: built-in defaults, overlaid by the --config JSON
file, overlaid by explicit flags. Every output embeds the resolved
config (minus --threads, which cannot affect results) and the seed, and
identical config + seed reproduces every artifact byte for byte. Exit
codes: 0 success, 1 suite failure, 2 config/usage error, 3 I/O error.

--threads caps worker parallelism. This implementation runs serially
(equivalent to --threads 1), which satisfies the determinism contract
for every value.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .errors import DppTestError, SampleFormatError
from .estimator import (
    bracketing_params,
    candidate_grid,
    empirical_marginals,
    enumerate_candidates,
    grid_to_json_dict,
)
from .figures import fig_bench, fig_hardness, fig_suites
from .formats import read_json, read_sample_file, write_json, write_sample_file
from .hardness import (
    hard_instance,
    l1_to_log_submodular_lb,
    random_dpp_table,
    random_product_table,
    vs_contribution,
    witness_set,
)
from .kernel import (
    exact_distribution,
    kernel_from_json_dict,
    kernel_to_json_dict,
    random_normal_kernel,
)
from .sampler import SampleBatch, sample_dpp, sample_table
from .suites import run_all_suites
from .tester import (
    GeneralMode,
    NormalMode,
    SubsetCounts,
    c2_lower_bound,
    chi2_l1_statistic,
    dpp_tester,
    general_mode_params,
    required_samples,
)


class ConfigError(Exception):
    """Bad or missing configuration value (exit code 2)."""


_DEFAULTS: dict[str, dict] = {
    "sample": {"kernel": None, "trials": 1000, "seed": 0, "out": "."},
    "test": {
        "samples": None,
        "eps": 0.25,
        "delta": 0.1,
        "alpha": None,
        "zeta": None,
        "general": False,
        "c_test": 1.0,
        "c1": 1.0,
        "c2": 23.0,
        "xi": None,
        "zero_floor": None,
        "candidate_cap": 10**6,
        "out": ".",
    },
    "learn": {
        "samples": None,
        "eps": 0.25,
        "delta": 0.1,
        "alpha": None,
        "zeta": None,
        "xi": None,
        "zero_floor": None,
        "candidate_cap": 10**6,
        "out": ".",
    },
    "verify-lemmas": {"trials": None, "seed": 0, "out": "."},
    "hardness": {
        "n": 10,
        "eps_prime": 0.6,
        "trials": 100,
        "family_size": 16,
        "seed": 0,
        "out": ".",
    },
    "bench": {
        "n": 4,
        "eps": 0.25,
        "delta": 0.1,
        "alpha": 0.2,
        "zeta": 0.3,
        "eps_prime": 0.6,
        "trials": 10,
        "c_test": 1.0,
        "xi": None,
        "seed": 0,
        "out": ".",
    },
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dpptest",
        description="DPP distribution-testing experiments (seeded, reproducible).",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file (flags override it)")
        p.add_argument("--out", help="output directory (default .)")
        p.add_argument("--seed", type=int, help="root seed")
        p.add_argument("--threads", type=int, help="parallelism cap (results identical)")

    p = sub.add_parser("sample", help="draw subsets from a kernel file")
    common(p)
    p.add_argument("--kernel", help="kernel JSON file")
    p.add_argument("--trials", type=int, help="number of draws m")

    p = sub.add_parser("test", help="run the full tester on a sample file")
    common(p)
    p.add_argument("--samples", help="sample text file")
    p.add_argument("--eps", type=float, help="distance parameter in (0,1)")
    p.add_argument("--delta", type=float, help="error budget in (0,1)")
    p.add_argument("--alpha", type=float, help="normal mode: entry floor")
    p.add_argument("--zeta", type=float, help="normal mode: spectrum margin")
    p.add_argument(
        "--general",
        action="store_const",
        const=True,
        help="general mode (derives the clamping level internally)",
    )
    p.add_argument("--c-test", dest="c_test", type=float, help="sample-budget constant")
    p.add_argument("--c1", type=float, help="general-mode constant c1")
    p.add_argument("--c2", type=float, help="general-mode constant c2")
    p.add_argument("--xi", type=float, help="override the interval scale")
    p.add_argument("--zero-floor", dest="zero_floor", type=float, help="magnitude pruning floor")
    p.add_argument("--candidate-cap", dest="candidate_cap", type=int, help="max |M|")

    p = sub.add_parser("learn", help="learn a candidate grid and pick the best kernel")
    common(p)
    p.add_argument("--samples", help="sample text file")
    p.add_argument("--eps", type=float, help="distance parameter in (0,1)")
    p.add_argument("--delta", type=float, help="error budget in (0,1)")
    p.add_argument("--alpha", type=float, help="entry floor")
    p.add_argument("--zeta", type=float, help="spectrum margin")
    p.add_argument("--xi", type=float, help="override the interval scale")
    p.add_argument("--zero-floor", dest="zero_floor", type=float, help="magnitude pruning floor")
    p.add_argument("--candidate-cap", dest="candidate_cap", type=int, help="max |M|")

    p = sub.add_parser("verify-lemmas", help="run the randomized verification suites")
    common(p)
    p.add_argument(
        "--trials",
        type=int,
        help="scale factor: suite counts are defaults * trials/1000 (default full)",
    )

    p = sub.add_parser("hardness", help="hard-instance sweep")
    common(p)
    p.add_argument("--n", type=int, help="ground-set size")
    p.add_argument("--eps-prime", dest="eps_prime", type=float, help="perturbation in (0, 2/3]")
    p.add_argument("--trials", type=int, help="number of instance seeds")
    p.add_argument("--family-size", dest="family_size", type=int, help="log-submodular family size")

    p = sub.add_parser("bench", help="tester operating-rate curves")
    common(p)
    p.add_argument("--n", type=int, help="ground-set size")
    p.add_argument("--eps", type=float, help="distance parameter in (0,1)")
    p.add_argument("--delta", type=float, help="error budget in (0,1)")
    p.add_argument("--alpha", type=float, help="entry floor (> 0)")
    p.add_argument("--zeta", type=float, help="spectrum margin")
    p.add_argument("--eps-prime", dest="eps_prime", type=float, help="far-input perturbation")
    p.add_argument("--trials", type=int, help="runs per (kind, m) cell")
    p.add_argument("--c-test", dest="c_test", type=float, help="sample-budget constant")
    p.add_argument("--xi", type=float, help="override the interval scale")

    return parser


def resolve_config(cmd: str, args: argparse.Namespace) -> dict:
    cfg = dict(_DEFAULTS[cmd])
    if args.config is not None:
        loaded = read_json(args.config)
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {args.config} must hold a JSON object")
        for key, value in loaded.items():
            if key not in cfg:
                raise ConfigError(f"unknown config key {key!r} for subcommand {cmd}")
            cfg[key] = value
    for key in cfg:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    threads = getattr(args, "threads", None)
    if threads is not None and threads < 1:
        raise ConfigError(f"--threads must be >= 1, got {threads}")
    for key in ("trials", "family_size", "candidate_cap", "n"):
        if key in cfg and cfg[key] is not None and cfg[key] < 1:
            raise ConfigError(f"{key} must be >= 1, got {cfg[key]}")
    return cfg


def _embed(cmd: str, cfg: dict) -> dict:
    """Resolved config as written into every artifact.

    Excludes --out and --threads: both are execution plumbing that
    cannot affect results, so two runs differing only there still
    produce byte-identical files.
    """
    out = {"subcommand": cmd}
    out.update((k, v) for k, v in cfg.items() if k != "out")
    return out


def _out_dir(cfg: dict) -> Path:
    out = Path(cfg["out"])
    os.makedirs(out, exist_ok=True)
    return out


def _write_csv(path: Path, embed: dict, header: list[str], rows: list[list]) -> None:
    lines = ["# config: " + json.dumps(embed, sort_keys=True)]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(str(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


def run_sample(cfg: dict) -> int:
    if not cfg["kernel"]:
        raise ConfigError("sample needs --kernel <file>")
    K = kernel_from_json_dict(read_json(cfg["kernel"]))
    batch = sample_dpp(K, cfg["trials"], cfg["seed"])
    out = _out_dir(cfg)
    path = out / "samples.txt"
    write_sample_file(path, batch)
    print(f"wrote {batch.m} draws over n={batch.n} to {path}")
    return 0


def _test_mode(cfg: dict):
    if cfg["general"]:
        if cfg["c2"] < c2_lower_bound(cfg["c1"]) - 1e-12:
            raise ConfigError(
                f"c2 = {cfg['c2']} is below the supported floor "
                f"{c2_lower_bound(cfg['c1'])} for c1 = {cfg['c1']}"
            )
        return GeneralMode(c2=cfg["c2"])
    if cfg["alpha"] is None or cfg["zeta"] is None:
        raise ConfigError("test needs --alpha and --zeta (or --general)")
    return NormalMode(alpha=cfg["alpha"], zeta=cfg["zeta"])


def run_test(cfg: dict) -> int:
    if not cfg["samples"]:
        raise ConfigError("test needs --samples <file>")
    mode = _test_mode(cfg)
    batch = read_sample_file(cfg["samples"])
    verdict = dpp_tester(
        batch,
        cfg["eps"],
        cfg["delta"],
        mode,
        c_test=cfg["c_test"],
        candidate_cap=cfg["candidate_cap"],
        xi=cfg["xi"],
        zero_floor=cfg["zero_floor"],
    )
    if isinstance(mode, GeneralMode):
        params = {
            "eps": cfg["eps"],
            "delta": cfg["delta"],
            "z_bar": general_mode_params(batch.n, cfg["eps"], mode.c2).z_bar,
        }
        mode_name = "general"
    else:
        params = {
            "eps": cfg["eps"],
            "delta": cfg["delta"],
            "alpha": mode.alpha,
            "zeta": mode.zeta,
        }
        mode_name = "normal"
    record = {
        "decision": verdict.decision,
        "Z_best": verdict.statistic if math.isfinite(verdict.statistic) else None,
        "C": verdict.threshold,
        "m": verdict.m,
        "candidate_index": verdict.candidate_index,
        "mode": mode_name,
        "params": params,
        "seed": batch.seed,
        "config": _embed("test", cfg),
    }
    out = _out_dir(cfg)
    path = out / "verdict.json"
    write_json(path, record)
    print(f"{verdict.decision}: Z_best={record['Z_best']} C={verdict.threshold} -> {path}")
    return 0


def run_learn(cfg: dict) -> int:
    if not cfg["samples"]:
        raise ConfigError("learn needs --samples <file>")
    if cfg["alpha"] is None or cfg["zeta"] is None:
        raise ConfigError("learn needs --alpha and --zeta")
    batch = read_sample_file(cfg["samples"])
    n = batch.n
    m_learn = batch.m // 2
    if m_learn < 1 or batch.m - m_learn < 1:
        raise ConfigError(f"cannot split {batch.m} samples into learn + pick halves")
    learn_half = SampleBatch(n=n, subsets=batch.subsets[:m_learn], seed=batch.seed)
    pick_half = SampleBatch(n=n, subsets=batch.subsets[m_learn:], seed=batch.seed)
    bp = bracketing_params(n, cfg["eps"], cfg["delta"], cfg["alpha"], cfg["zeta"], xi=cfg["xi"])
    zero_floor = cfg["zero_floor"]
    if zero_floor is None:
        zero_floor = cfg["alpha"] / 2.0 if cfg["alpha"] > 0.0 else 0.0
    grid = candidate_grid(
        empirical_marginals(learn_half),
        bp,
        cap=cfg["candidate_cap"],
        zero_floor=zero_floor,
    )
    counts = SubsetCounts.from_batch(pick_half)
    best_z = math.inf
    best_idx = 0
    best_kernel = None
    for idx, cand in enumerate(enumerate_candidates(grid, cap=cfg["candidate_cap"])):
        z = chi2_l1_statistic(counts, exact_distribution(cand), cfg["eps"])
        if z < best_z:
            best_z, best_idx, best_kernel = z, idx, cand
    out = _out_dir(cfg)
    embed = _embed("learn", cfg)
    grid_path = out / "grid.json"
    write_json(grid_path, {"grid": grid_to_json_dict(grid), "config": embed, "seed": batch.seed})
    best_path = out / "best_kernel.json"
    record = kernel_to_json_dict(best_kernel)
    record.update(
        {"candidate_index": best_idx, "Z": best_z, "config": embed, "seed": batch.seed}
    )
    write_json(best_path, record)
    print(
        f"grid |M|={grid.total_count} -> {grid_path}; "
        f"best candidate #{best_idx} (Z={best_z:.4g}) -> {best_path}"
    )
    return 0


_SUITE_BASE = {
    "min_singular_trials": 1000,
    "det_perturbation_trials": 100_000,
    "helper_trials": 1_000_000,
    "coupling_reps": 1000,
    "coupling_marginal_draws": 200_000,
    "crosspath_trials": 200,
}


def run_verify(cfg: dict) -> int:
    counts = dict(_SUITE_BASE)
    if cfg["trials"] is not None:
        factor = cfg["trials"] / 1000.0
        counts = {k: max(1, round(v * factor)) for k, v in counts.items()}
    results = run_all_suites(seed=cfg["seed"], **counts)
    out = _out_dir(cfg)
    embed = _embed("verify-lemmas", cfg)
    report = {
        "suites": [
            {
                "name": r.name,
                "trials": r.trials,
                "checks": r.checks,
                "failures": r.failures,
                "worst_slack": r.worst_slack,
                "passed": r.passed,
                "detail": {k: (None if isinstance(v, float) and math.isnan(v) else v)
                           for k, v in r.detail.items()},
            }
            for r in results
        ],
        "all_passed": all(r.passed for r in results),
        "config": embed,
        "seed": cfg["seed"],
    }
    write_json(out / "report.json", report)
    _write_csv(
        out / "suites.csv",
        embed,
        ["suite", "trials", "checks", "failures", "worst_slack", "passed"],
        [
            [r.name, r.trials, r.checks, r.failures, repr(r.worst_slack), int(r.passed)]
            for r in results
        ],
    )
    fig_suites(results, out / "suites.png")
    for r in results:
        print(r.summary_line())
    if report["all_passed"]:
        print(f"all suites pass -> {out / 'report.json'}")
        return 0
    print(f"SUITE FAILURE -> {out / 'report.json'}", file=sys.stderr)
    return 1


def _hardness_family(n: int, family_size: int, seed: int) -> list:
    states = np.random.SeedSequence((seed, 0xFA)).generate_state(family_size)
    family = []
    for k, s in enumerate(states.tolist()):
        if k % 2 == 0:
            family.append(random_dpp_table(n, s))
        else:
            family.append(random_product_table(n, s))
    return family


def run_hardness(cfg: dict) -> int:
    n, ep = cfg["n"], cfg["eps_prime"]
    size = 1 << n
    family = _hardness_family(n, cfg["family_size"], cfg["seed"])
    rows = []
    csv_rows = []
    for t in range(cfg["trials"]):
        inst_seed = cfg["seed"] + t
        inst = hard_instance(n, ep, inst_seed)
        ws = witness_set(inst)
        wc = ws.cardinality
        q1 = wc >= size / 64.0
        q2 = abs(inst.l_r - 1.0) <= 4.0 * ep / math.sqrt(size)
        min_l1 = l1_to_log_submodular_lb(inst, family)
        violations = 0
        for f in family:
            for s in ws.masks.tolist():
                if not vs_contribution(f, inst, s).bound_holds:
                    violations += 1
        rows.append({"witness_count": wc, "l_r": inst.l_r})
        csv_rows.append(
            [inst_seed, wc, repr(inst.l_r), int(q1), int(q2), repr(min_l1), violations]
        )
    out = _out_dir(cfg)
    embed = _embed("hardness", cfg)
    _write_csv(
        out / "hardness.csv",
        embed,
        ["seed", "witness_count", "l_r", "q1", "q2", "min_l1", "vs_violations"],
        csv_rows,
    )
    fig_hardness(rows, n, ep, out / "hardness.png")
    q1_rate = sum(r[3] for r in csv_rows) / len(csv_rows)
    q2_rate = sum(r[4] for r in csv_rows) / len(csv_rows)
    print(
        f"{cfg['trials']} instances at n={n}, eps'={ep}: "
        f"witness-floor rate {q1_rate:.3f}, normalizer-band rate {q2_rate:.3f} "
        f"-> {out / 'hardness.csv'}"
    )
    return 0


def forcing_xi(alpha: float, zeta: float, n: int) -> float:
    """Interval-scale override that pins the bracket count at 1.

    The bracket count is ceil(200 n^2 / zeta * min(sqrt(xi/eps),
    2 xi / alpha)); choosing xi slightly below alpha*zeta/(400 n^2)
    makes the alpha branch the minimum and the product strictly less
    than 1. Candidates then sit at the estimated entries themselves,
    which is the only regime where full enumeration fits at desk scale.
    """
    if alpha <= 0.0:
        raise ConfigError("the forcing default for xi needs alpha > 0")
    return 0.99 * alpha * zeta / (400.0 * n * n)


def run_bench(cfg: dict) -> int:
    if cfg["alpha"] is None or cfg["zeta"] is None or cfg["alpha"] <= 0.0:
        raise ConfigError("bench needs --alpha > 0 and --zeta")
    n, eps, delta = cfg["n"], cfg["eps"], cfg["delta"]
    xi = cfg["xi"] if cfg["xi"] is not None else forcing_xi(cfg["alpha"], cfg["zeta"], n)
    mode = NormalMode(alpha=cfg["alpha"], zeta=cfg["zeta"])
    # budget sized for a grid of ~27 candidates (three entries above the
    # zero floor at one bracket per sign); the m axis doubles from there
    base_m = required_samples(n, eps, delta, 27, c_test=cfg["c_test"])
    m_grid = [base_m, 2 * base_m, 4 * base_m]
    trials = cfg["trials"]
    children = np.random.SeedSequence(cfg["seed"]).spawn(2 * len(m_grid) * trials)
    rows = []
    csv_rows = []
    idx = 0
    for kind in ("dpp", "far"):
        for m in m_grid:
            hits = 0
            errors = 0
            for _ in range(trials):
                k_seed, s_seed = (
                    int(x) for x in children[idx].generate_state(2, np.uint64)
                )
                idx += 1
                try:
                    if kind == "dpp":
                        K = random_normal_kernel(n, cfg["alpha"], cfg["zeta"], k_seed)
                        batch = sample_dpp(K, m, s_seed)
                        verdict = dpp_tester(
                            batch, eps, delta, mode, c_test=cfg["c_test"], xi=xi
                        )
                        hits += verdict.decision == "accept"
                    else:
                        inst = hard_instance(n, cfg["eps_prime"], k_seed)
                        batch = sample_table(inst.h, m, s_seed)
                        verdict = dpp_tester(
                            batch, eps, delta, mode, c_test=cfg["c_test"], xi=xi
                        )
                        hits += verdict.decision == "reject"
                except DppTestError:
                    errors += 1
            rows.append(
                {"n": n, "eps": eps, "kind": kind, "m": m, "trials": trials, "hits": hits}
            )
            csv_rows.append(
                [n, repr(eps), kind, m, trials, hits, errors, repr(hits / trials)]
            )
    out = _out_dir(cfg)
    embed = _embed("bench", cfg)
    _write_csv(
        out / "bench.csv",
        embed,
        ["n", "eps", "kind", "m", "trials", "hits", "errors", "rate"],
        csv_rows,
    )
    fig_bench(rows, out / "bench.png")
    print(f"bench grid written -> {out / 'bench.csv'}")
    return 0


_RUNNERS = {
    "sample": run_sample,
    "test": run_test,
    "learn": run_learn,
    "verify-lemmas": run_verify,
    "hardness": run_hardness,
    "bench": run_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args.cmd, args)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"dpptest: cannot read config: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"dpptest: {exc}", file=sys.stderr)
        return 2
    try:
        return _RUNNERS[args.cmd](cfg)
    except (OSError, json.JSONDecodeError, SampleFormatError) as exc:
        print(f"dpptest: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"dpptest: {exc}", file=sys.stderr)
        return 2
    except DppTestError as exc:
        print(f"dpptest: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
