"""``holomux`` command line: generate, convergence, bench and theory runs.

Every run writes into ``--out`` only: images as 8-bit PGM, tables as CSV
(9 significant digits, LF endings) and a ``manifest.txt`` of ``key=value``
lines holding the full configuration, library version and timings.

Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 ``--check``
assertion failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import statistics
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import HoloError, ImageFormatError
from .hologen import Algorithm, DeviceSpec, GenerationPlan, generate, symmetrize_target
from .images import bundled_photo, load_image, save_hologram, save_intensity, synthetic_texture
from .metrics import (
    ReplayAccumulator,
    convergence_series,
    mse,
    perceived_amplitude,
    run_seed,
    simulate_replay,
)
from . import theory

log = logging.getLogger("holomux")

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_CHECK = 0, 1, 2, 3
COMMANDS = ("generate", "convergence", "bench", "theory")


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    input: str = "photo"
    out: str = "out"
    sizes: list = field(default_factory=lambda: [(512, 512)])
    algorithms: list = field(default_factory=lambda: ["sttm"])
    n: list = field(default_factory=lambda: [12])
    sets: int = 3
    levels: int = 2
    runs: int = 1
    seed: int = 0
    gain: bool = True
    check: bool = False
    repeats: int = 5
    samples: int = 1_000_000
    points: list | None = None

    @property
    def width(self):
        return self.sizes[0][0]

    @property
    def height(self):
        return self.sizes[0][1]

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        for w, h in self.sizes:
            if w < 1 or h < 1:
                raise ConfigError("--size values must be positive")
            if self.levels == 2 and (w % 2 or h % 2):
                raise ConfigError("binary devices need even image dimensions")
        if self.command != "bench" and len(self.sizes) != 1:
            raise ConfigError("only bench accepts more than one --size")
        if self.command != "bench" and len(self.n) != 1:
            raise ConfigError("only bench accepts more than one --n value")
        if any(k < 1 for k in self.n):
            raise ConfigError("--n must be >= 1")
        if self.sets < 1:
            raise ConfigError("--sets must be >= 1")
        if "hybrid" in self.algorithms:
            bad = [k for k in self.n if k % self.sets]
            if bad:
                raise ConfigError(f"hybrid needs --n divisible by --sets ({self.sets}): {bad}")
        if self.levels < 2:
            raise ConfigError("--levels must be >= 2")
        if self.runs < 1:
            raise ConfigError("--runs must be >= 1")
        if self.command == "bench" and self.repeats < 5:
            raise ConfigError("bench needs --repeats >= 5")
        if self.command == "theory" and self.samples < 1000:
            raise ConfigError("--samples must be >= 1000")
        if self.points is not None:
            if any(p < 1 or p > self.n[0] for p in self.points):
                raise ConfigError(f"--points must lie in 1..{self.n[0]}")
        if not -(2**63) <= self.seed < 2**64:
            raise ConfigError("--seed must fit in 64 bits")
        return self

    def manifest_items(self):
        d = asdict(self)
        d["sizes"] = " ".join(f"{w}x{h}" for w, h in self.sizes)
        d["algorithms"] = ",".join(self.algorithms)
        d["n"] = ",".join(str(k) for k in self.n)
        d["points"] = "" if self.points is None else ",".join(map(str, self.points))
        return d


# -- helpers ------------------------------------------------------------------

def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".9g")
    return str(x)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_manifest(path: Path, cfg: RunConfig, extra: dict) -> None:
    items = dict(cfg.manifest_items())
    items["version"] = __version__
    items.update(extra)
    with open(path, "w", newline="\n") as fh:
        for k, v in items.items():
            fh.write(f"{k}={fmt(v)}\n")


def load_target(cfg: RunConfig, size) -> np.ndarray:
    """Amplitude target for ``size``; symmetrized for binary devices."""
    w, h = size
    if cfg.input == "photo":
        amp = bundled_photo((w, h))
    elif cfg.input == "texture":
        amp = synthetic_texture(w, h, seed=cfg.seed)
    else:
        amp = load_image(cfg.input, (w, h))
    if cfg.levels == 2:
        amp = symmetrize_target(amp)
    return amp


def _plan(alg: str, n: int, cfg: RunConfig, seed: int) -> GenerationPlan:
    if alg == "hybrid":
        return GenerationPlan(Algorithm.HYBRID, n // cfg.sets, cfg.sets, seed)
    return GenerationPlan(Algorithm(alg), n, 1, seed)


class Checks:
    def __init__(self):
        self.results = []

    def add(self, name, ok, detail=""):
        self.results.append((name, bool(ok), detail))
        print(f"[{'PASS' if ok else 'FAIL'}] {name} {detail}".rstrip())

    @property
    def ok(self):
        return all(ok for _, ok, _ in self.results)


# -- commands -----------------------------------------------------------------

def cmd_generate(cfg: RunConfig, out: Path, checks: Checks) -> dict:
    device = DeviceSpec(cfg.levels)
    target = load_target(cfg, cfg.sizes[0])
    save_intensity(out / "target.pgm", target * target)
    alg, n = cfg.algorithms[0], cfg.n[0]
    rows, extra = [], {}
    gen_time = 0.0
    for r in range(cfg.runs):
        s = run_seed(cfg.seed, r)
        subs = generate(_plan(alg, n, cfg, s), target, device)
        gen_time += subs.elapsed
        acc = ReplayAccumulator(target.shape)
        for k, holo in enumerate(subs, start=1):
            replay = simulate_replay(holo)
            acc.add(replay)
            if r == 0:
                save_hologram(out / f"subframe_{k:03d}.pgm", holo)
            if cfg.check:
                energy = float(replay.sum())
                if abs(energy - target.size) > 1e-9 * target.size:
                    checks.add(f"energy run {r} subframe {k}", False, fmt(energy))
        amp = perceived_amplitude(acc)
        rep = mse(target, amp, cfg.gain, len(subs))
        rows.append((alg, n, r, s, rep.mse, rep.gain))
        if r == 0:
            save_intensity(out / "replay.pgm", acc.mean(), scaling="sqrt")
    write_csv(out / "error.csv", ["algorithm", "N", "run", "seed", "mse", "gain"], rows)
    mean_mse = statistics.fmean(row[4] for row in rows)
    print(f"{alg} N={n}: mean MSE {fmt(mean_mse)} over {cfg.runs} run(s)")
    extra["mean_mse"] = mean_mse
    extra["elapsed_generation_s"] = gen_time
    if cfg.check:
        checks.add("replay energy conserved", all(ok for _, ok, _ in checks.results))
    return extra


def cmd_convergence(cfg: RunConfig, out: Path, checks: Checks) -> dict:
    device = DeviceSpec(cfg.levels)
    target = load_target(cfg, cfg.sizes[0])
    n_max = cfg.n[0]
    rows, series = [], {}
    for alg in cfg.algorithms:
        t0 = time.perf_counter()
        cs = convergence_series(target, device, alg, n_max, cfg.runs, cfg.seed,
                                n_values=cfg.points, sets=cfg.sets, apply_gain=cfg.gain)
        log.info("%s convergence took %.1f s", alg, time.perf_counter() - t0)
        series[alg] = cs
        for p in cs.points:
            rows.append((alg, p.n, p.mean_mse, p.std_mse, p.runs, cfg.seed))
    write_csv(out / "convergence.csv",
              ["algorithm", "N", "mean_mse", "std_mse", "runs", "seed"], rows)
    extra = {}
    sttm, ospr = series.get("sttm"), series.get("ospr")
    ns = {p.n for p in (sttm or ospr or next(iter(series.values()))).points}
    if sttm and {1, 16} <= ns:
        ratio = sttm.mean(16) / sttm.mean(1)
        extra["sttm_plateau_ratio"] = ratio
        if cfg.check:
            checks.add("STTM MSE(16)/MSE(1) in [0.22, 0.30]", 0.22 <= ratio <= 0.30, fmt(ratio))
    if sttm and ospr and cfg.check:
        for k in (2, 3, 4, 5):
            if k in ns:
                checks.add(f"STTM({k}) <= OSPR({k})", sttm.mean(k) <= ospr.mean(k),
                           f"{fmt(sttm.mean(k))} vs {fmt(ospr.mean(k))}")
        if 24 in ns:
            checks.add("OSPR(24) <= STTM(24)", ospr.mean(24) <= sttm.mean(24),
                       f"{fmt(ospr.mean(24))} vs {fmt(sttm.mean(24))}")
    return extra


def time_generation(plan: GenerationPlan, target, device, repeats: int) -> float:
    """Median generation time in ms over ``repeats`` runs after one warm-up."""
    generate(plan, target, device)
    times = [generate(plan, target, device).elapsed for _ in range(repeats)]
    return statistics.median(times) * 1e3


# (N, width, height) -> {algorithm: max ratio to OSPR}
BENCH_LIMITS = {
    (12, 512, 512): {"sttm": 0.25},
    (24, 1024, 1024): {"sttm": 0.15, "hybrid": 0.35},
}


def cmd_bench(cfg: RunConfig, out: Path, checks: Checks) -> dict:
    device = DeviceSpec(cfg.levels)
    rows, timings, extra = [], {}, {}
    for w, h in cfg.sizes:
        target = load_target(cfg, (w, h))
        for n in cfg.n:
            for alg in cfg.algorithms:
                ms = time_generation(_plan(alg, n, cfg, cfg.seed), target, device, cfg.repeats)
                timings[(alg, n, w, h)] = ms
                rows.append((alg, n, w, h, ms, cfg.repeats))
                print(f"{alg:>6} N={n:<3d} {w}x{h}: {ms:.2f} ms")
    write_csv(out / "bench.csv", ["algorithm", "N", "width", "height", "median_ms", "repeats"], rows)
    for (alg, n, w, h), ms in timings.items():
        base = timings.get(("ospr", n, w, h))
        if alg == "ospr" or base is None:
            continue
        ratio = ms / base
        extra[f"ratio_{alg}_over_ospr_N{n}_{w}x{h}"] = ratio
        limit = BENCH_LIMITS.get((n, w, h), {}).get(alg)
        if cfg.check and limit is not None:
            checks.add(f"{alg}/OSPR time N={n} {w}x{h} <= {limit}", ratio <= limit, fmt(ratio))
    return extra


def cmd_theory(cfg: RunConfig, out: Path, checks: Checks) -> dict:
    n_max = cfg.n[0]
    target = load_target(cfg, cfg.sizes[0])
    extra = {}

    base_cf = theory.expected_mse_formula(1)
    base_direct = theory.expected_mse_direct(1)
    mc1, se1 = theory.monte_carlo_quant_error(1, cfg.samples, cfg.seed)
    rows, mc_ok = [], True
    for n in range(1, n_max + 1):
        cf = theory.expected_mse_formula(n)
        direct = theory.expected_mse_direct(n)
        if n == 1:
            mc, se = mc1, se1
        else:
            mc, se = theory.monte_carlo_quant_error(n, cfg.samples, run_seed(cfg.seed, n))
        mc_ratio = mc / mc1
        mc_ratio_se = mc_ratio * np.hypot(se / mc, se1 / mc1)
        if n > 1 and abs(mc_ratio - cf / base_cf) > 3 * mc_ratio_se:
            mc_ok = False
        rows.append((n, cf, cf / base_cf, direct, direct / base_direct, mc, se, mc_ratio, mc_ratio_se))
    write_csv(out / "theory_table.csv",
              ["N", "closed_form", "closed_form_ratio", "direct_form", "direct_ratio",
               "mc_mean", "mc_stderr", "mc_ratio", "mc_ratio_stderr"], rows)
    final_ratio = rows[-1][2]
    extra["closed_form_ratio_at_nmax"] = final_ratio
    extra["asymptotic_ratio"] = theory.asymptotic_ratio()

    mags, phases = theory.diffraction_stats(target, cfg.seed)
    write_csv(out / "ks.csv", ["quantity", "ks_statistic", "sample_count"],
              [("magnitude", mags.ks_statistic, mags.sample_count),
               ("phase", phases.ks_statistic, phases.sample_count)])
    for name, res, expected in (
        ("magnitude", mags, np.diff(theory.rayleigh_cdf(mags.bin_edges))),
        ("phase", phases, np.diff(phases.bin_edges) / (2 * np.pi)),
    ):
        write_csv(out / f"hist_{name}.csv", ["bin_left", "bin_right", "count", "expected"],
                  zip(res.bin_edges[:-1], res.bin_edges[1:], res.counts,
                      expected * res.sample_count))

    sc = theory.quantization_scatter(target, cfg.seed, DeviceSpec(cfg.levels))
    write_csv(out / "scatter.csv", ["x", "y", "dh_sq", "delta_e"],
              zip(sc.x, sc.y, sc.dh_sq, sc.delta_e))
    c_mse = sc.c_mse()
    extra["c_mse"] = c_mse
    _, bin_de = theory.binned_means(sc.dh_sq, sc.delta_e, 8)

    if cfg.check:
        if n_max >= 64:
            checks.add("closed-form ratio at N_max = 0.2611 +- 0.0005",
                       abs(final_ratio - 0.2611) <= 0.0005, fmt(final_ratio))
        checks.add("Monte-Carlo ratios within 3 combined std errors", mc_ok)
        checks.add("KS(magnitudes) < 0.01", mags.ks_statistic < 0.01, fmt(mags.ks_statistic))
        checks.add("KS(phases) < 0.01", phases.ks_statistic < 0.01, fmt(phases.ks_statistic))
        checks.add("binned dE nondecreasing in |dH|^2", bool(np.all(np.diff(bin_de) >= 0)))
        checks.add("fitted C_MSE in (0, 1)", 0 < c_mse < 1, fmt(c_mse))
    return extra


HANDLERS = {
    "generate": cmd_generate,
    "convergence": cmd_convergence,
    "bench": cmd_bench,
    "theory": cmd_theory,
}


# -- argument parsing ---------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _algorithms(value: str):
    names = ["ospr", "sttm", "hybrid"] if value == "all" else value.split(",")
    for v in names:
        if v not in ("ospr", "sttm", "hybrid"):
            raise argparse.ArgumentTypeError(f"unknown algorithm {v!r}")
    return names


def _int_list(value: str):
    return [int(v) for v in value.split(",") if v]


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--input", default="photo",
                        help="PGM/PNG path, 'photo' (bundled) or 'texture' (synthetic)")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--size", nargs=2, type=int, action="append", metavar=("W", "H"),
                        help="target size (bench accepts several)")
    common.add_argument("--algorithm", type=_algorithms, default=None,
                        help="ospr, sttm, hybrid, comma list or 'all'")
    common.add_argument("--n", nargs="+", type=int, default=None,
                        help="sub-frames (total, for hybrid); N_max for convergence/theory")
    common.add_argument("--sets", type=int, default=3, help="hybrid restarts")
    common.add_argument("--levels", type=int, default=2, help="device phase levels")
    common.add_argument("--runs", type=int, default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--no-gain", dest="gain", action="store_false",
                        help="score MSE without the least-squares brightness gain")
    common.add_argument("--check", action="store_true", help="assert acceptance thresholds")
    common.add_argument("--repeats", type=int, default=5, help="bench repetitions")
    common.add_argument("--samples", type=int, default=1_000_000, help="Monte-Carlo samples")
    common.add_argument("--points", type=_int_list, default=None,
                        help="convergence: comma list of N values to score (default 1..N)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="holomux", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


_DEFAULTS = {
    # command: (algorithms, n, runs)
    "generate": (["sttm"], [12], 1),
    "convergence": (["ospr", "sttm", "hybrid"], [24], 20),
    "bench": (["ospr", "sttm", "hybrid"], [12], 1),
    "theory": (["sttm"], [64], 1),
}


def parse_config(argv=None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    algs, n, runs = _DEFAULTS[ns.command]
    cfg = RunConfig(
        command=ns.command,
        input=ns.input,
        out=ns.out,
        sizes=[tuple(s) for s in ns.size] if ns.size else [(512, 512)],
        algorithms=ns.algorithm or algs,
        n=ns.n or n,
        sets=ns.sets,
        levels=ns.levels,
        runs=ns.runs if ns.runs is not None else runs,
        seed=ns.seed,
        gain=ns.gain,
        check=ns.check,
        repeats=ns.repeats,
        samples=ns.samples,
        points=ns.points,
    )
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    return cfg.validate()


def run(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    checks = Checks()
    t0 = time.perf_counter()
    extra = HANDLERS[cfg.command](cfg, out, checks)
    extra["elapsed_total_s"] = time.perf_counter() - t0
    if cfg.check:
        extra["check"] = "pass" if checks.ok else "fail"
    write_manifest(out / "manifest.txt", cfg, extra)
    if cfg.check and not checks.ok:
        return EXIT_CHECK
    return EXIT_OK


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"holomux: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run(cfg)
    except (ImageFormatError, OSError) as exc:
        print(f"holomux: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, HoloError) as exc:
        print(f"holomux: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
