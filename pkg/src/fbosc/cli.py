"""Command-line interface.

Exit codes: 0 ok, 1 verification failed, 2 configuration error, 3 frequency
grid error, 4 simulation error, 5 fit error.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import errors as E
from .config import (FrequencyGrid, OscillatorConfig, PhaseSensitive,
                     SaturatingTanh, config_from_dict, config_hash, config_to_dict,
                     load_config, validate_config)
from .fixtures import BUILTIN, db_to_r
from .outputs import RunManifest, write_binary, write_csv

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_GRID, EXIT_SIM, EXIT_FIT = range(6)

SPECTRUM_COLUMNS = ["omega_rad_s", "sqq", "spp", "product", "bound_heisenberg",
                    "bound_insensitive", "s_phidot"]
SPECTRUM_UNITS = ("omega_rad_s in rad/s (offset from carrier unless noted); sqq, spp, product "
                  "and bounds in vacuum units; s_phidot in rad^2/s")


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _load(args) -> OscillatorConfig:
    if getattr(args, "builtin", None):
        if args.builtin not in BUILTIN:
            raise CliError(EXIT_CONFIG, f"unknown builtin {args.builtin!r}; "
                                        f"choose from {', '.join(BUILTIN)}")
        return BUILTIN[args.builtin]
    if not args.config:
        raise CliError(EXIT_CONFIG, "a config file or --builtin is required")
    try:
        return load_config(args.config)
    except (OSError, ValueError) as exc:
        if isinstance(exc, E.FboscError):
            raise
        raise CliError(EXIT_CONFIG, f"cannot read config: {exc}") from exc


def _seed(args) -> int:
    env = os.environ.get("FBOSC_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise CliError(EXIT_CONFIG, f"FBOSC_SEED={env!r} is not an integer") from exc
    return int(args.seed)


def _add_config_args(p):
    p.add_argument("config", nargs="?", help="JSON configuration file")
    p.add_argument("--builtin", help=f"use a built-in configuration ({', '.join(BUILTIN)})")


def _add_grid_args(p):
    p.add_argument("--omega-min", type=float, help="lowest frequency, rad/s (default 1e-4/tau)")
    p.add_argument("--omega-max", type=float, help="highest frequency, rad/s (default 3/tau)")
    p.add_argument("--points", type=int, default=512)
    p.add_argument("--scale", choices=["log", "linear"], default="log")
    p.add_argument("--absolute", action="store_true",
                   help="grid holds absolute frequencies Omega instead of offsets from the carrier")
    p.add_argument("--one-sided", action="store_true",
                   help="emit one-sided sqq, spp and s_phidot (twice the double-sided values)")


def _grid(args, cfg) -> FrequencyGrid:
    lo = args.omega_min if args.omega_min is not None else 1e-4 / cfg.tau
    hi = args.omega_max if args.omega_max is not None else 3.0 / cfg.tau
    try:
        if args.scale == "log":
            if lo <= 0:
                raise ValueError("log-spaced grids need omega-min > 0")
            return FrequencyGrid.logspace(lo, hi, args.points, args.absolute)
        return FrequencyGrid.linspace(lo, hi, args.points, args.absolute)
    except ValueError as exc:
        raise CliError(EXIT_GRID, f"bad frequency grid: {exc}") from exc


def _spectrum_table(cfg, grid: FrequencyGrid, one_sided: bool):
    from .spectra import spectra_for_config

    sp, sphi = spectra_for_config(cfg, grid.values, offset=not grid.absolute)
    k = 2.0 if one_sided else 1.0
    n = len(grid)
    return [grid.values, k * sp.sqq, k * sp.spp, sp.product, np.full(n, sp.bounds.heisenberg),
            np.broadcast_to(sp.bounds.insensitive, (n,)), k * sphi]


def _notes(cfg, grid: FrequencyGrid | None = None, one_sided: bool = False):
    notes = [f"carrier_index {cfg.carrier_index} carrier {cfg.carrier!r} rad/s"]
    if grid is not None:
        notes.append("grid: absolute Omega" if grid.absolute else "grid: offsets omega from carrier")
    if one_sided:
        notes.append("one-sided: sqq, spp, s_phidot doubled; product and bounds double-sided")
    return notes


# -- subcommands -------------------------------------------------------------

def cmd_inspect(args) -> int:
    from .saturation import steady_state_amplitude
    from .spectra import schawlow_townes

    cfg = validate_config(_load(args))
    print("config: valid")
    print(f"config_hash: {config_hash(cfg)}")
    print(f"eta: {cfg.eta!r}")
    print(f"tau_s: {cfg.tau!r}")
    print(f"kappa_per_s: {cfg.kappa!r}")
    print(f"carrier_rad_s: {cfg.carrier!r}")
    print(f"r_max: {cfg.r_max!r}")
    amp = cfg.amplifier
    if isinstance(amp, SaturatingTanh):
        ss = steady_state_amplitude(amp, cfg.eta)
        print(f"alpha_ss: {ss.alpha_ss:.10g}")
        print(f"g_linear: {ss.g_linear:.10g}")
        print(f"contraction: {ss.contraction:.6g}")
        if ss.other_roots:
            print(f"other_positive_roots: {list(ss.other_roots)}")
    else:
        print(f"g_linear: {cfg.linear_gain:.10g}")
    if isinstance(amp, PhaseSensitive):
        print(f"r_s: {amp.r_s!r}")
    if cfg.alpha_sq > 0:
        st = schawlow_townes(cfg.eta, cfg.tau, cfg.alpha_sq)
        print(f"s_phidot_st_rad2_s: {st.s_phidot:.6g}")
        print(f"gamma_st_hz: {st.linewidth_fwhm:.6g}")
    else:
        print("gamma_st_hz: n/a (alpha_sq = 0)")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    cfg = validate_config(_load(args))
    grid = _grid(args, cfg)
    cols = _spectrum_table(cfg, grid, args.one_sided)
    params = {k: v for k, v in vars(args).items() if k not in ("out", "func", "config")}
    man = RunManifest(config_hash(cfg), "spectrum", params, outputs=[args.out or "-"])
    _emit(args.out, SPECTRUM_COLUMNS, cols, man, SPECTRUM_UNITS, _notes(cfg, grid, args.one_sided))
    return EXIT_OK


def _emit(out, columns, cols, man, units, notes):
    if out:
        write_csv(out, columns, cols, man, units, notes)
        man.write(str(out) + ".manifest.json")
    else:
        import tempfile

        with tempfile.TemporaryDirectory() as d:
            p = Path(d) / "out.csv"
            write_csv(p, columns, cols, man, units, notes)
            sys.stdout.write(p.read_text())


def cmd_simulate(args) -> int:
    from .psd import estimate_psd
    from .spectra import spectra_for_config
    from .timedomain import (SimPlan, has_marginal_pole, measure_linewidth,
                             simulate_classical_startup, simulate_fluctuations)

    cfg = validate_config(_load(args))
    seed = _seed(args)
    if args.dt_div < 8:
        raise CliError(EXIT_CONFIG, "--dt-div must be >= 8")
    plan = SimPlan.from_divisions(cfg.tau, args.dt_div, args.steps, seed, warmup=args.warmup)
    prefix = args.out or "fbosc"
    params = {k: v for k, v in vars(args).items() if k not in ("out", "func", "config")}
    params["seed"] = seed
    chash = config_hash(cfg)
    t0 = time.time()
    outputs = []

    if args.startup:
        from .saturation import steady_state_amplitude

        if not isinstance(cfg.amplifier, SaturatingTanh):
            raise CliError(EXIT_CONFIG, "--startup needs a saturating_tanh amplifier")
        cplan = dataclasses.replace(plan, mode="classical_startup", duration=args.round_trips)
        res = simulate_classical_startup(cfg.amplifier, cfg.eta, cfg.tau, cplan,
                                         seed_amplitude=args.seed_amplitude)
        ss = steady_state_amplitude(cfg.amplifier, cfg.eta)
        path = f"{prefix}_startup.csv"
        man = RunManifest(chash, "simulate --startup", params, seed, [path])
        write_csv(path, ["k", "alpha_k"], [np.arange(res.trajectory.size), res.trajectory], man,
                  "k in round trips; alpha_k in field amplitude units", _notes(cfg))
        outputs.append(path)
        print(f"converged_round_trip: {res.converged_step}")
        print(f"final_amplitude: {res.final:.12g}")
        print(f"alpha_ss: {ss.alpha_ss:.12g}")
        print(f"difference: {abs(res.final - ss.alpha_ss):.3g}")
        print(f"early_growth_per_round_trip: {res.growth_factor:.6g}")

    if args.psd or args.series or args.binary:
        ts = simulate_fluctuations(cfg, plan)
        if args.series:
            path = f"{prefix}_series.csv"
            man = RunManifest(chash, "simulate", params, seed, [path])
            write_csv(path, ["t_s", "q_out", "p_out"], [ts.t, ts.q_out, ts.p_out], man,
                      "t in s; quadratures in vacuum units (variance 1/(2 dt) for vacuum)",
                      _notes(cfg))
            outputs.append(path)
        if args.binary:
            path = f"{prefix}_series.bin"
            write_binary(path, ts.dt, ts.q_out, ts.p_out)
            outputs.append(path)
        if args.psd:
            seg = args.segment_len or max(len(ts) // 256, 16)
            ests = {k: estimate_psd(ts, seg, quadrature=k, prewhiten=has_marginal_pole(cfg, k))
                    for k in ("q", "p")}
            # prewhitened estimates lack the zero bin; drop it everywhere
            w = ests["q"].freqs[ests["q"].freqs != 0]
            cols = [w]
            for k in ("q", "p"):
                e = ests[k]
                psd = e.psd[e.freqs != 0]
                cols += [psd, psd * e.rel_stderr]
            sp, _ = spectra_for_config(cfg, w, offset=True)
            cols += [sp.sqq, sp.spp]
            path = f"{prefix}_psd.csv"
            man = RunManifest(chash, "simulate --psd", params, seed, [path])
            write_csv(path, ["omega_rad_s", "psd_q", "stderr_q", "psd_p", "stderr_p",
                             "sqq_closed_form", "spp_closed_form"], cols, man,
                      "omega_rad_s offset from carrier in rad/s; PSD in vacuum units",
                      _notes(cfg) + [f"segments {ests['p'].n_segments}",
                                     "prewhitened quadratures: " + ",".join(
                                         k for k in ("q", "p") if ests[k].prewhitened)])
            outputs.append(path)
            print(f"psd_segments: {ests['p'].n_segments}")

    if args.linewidth:
        res = measure_linewidth(cfg, dt_div=args.dt_div, steps=args.linewidth_steps,
                                runs=args.runs, seed=seed)
        path = f"{prefix}_linewidth.csv"
        man = RunManifest(chash, "simulate --linewidth", params, seed, [path])
        sp = res.spectrum
        write_csv(path, ["omega_rad_s", "field_psd"], [sp.freqs, sp.psd], man,
                  "omega_rad_s offset from carrier in rad/s; field PSD in s", _notes(cfg))
        outputs.append(path)
        print(f"alpha_sq_used: {res.alpha_sq:.6g}")
        print(f"gamma_st_times_t_run: {res.gamma_t:.4g}")
        print(f"phase_variance_per_step_rad2: {res.phase_step_var:.3g}")
        print(f"fwhm_fit_rad_s: {res.fwhm_fit:.6g}")
        print(f"fwhm_schawlow_townes_rad_s: {res.fwhm_st:.6g}")
        print(f"relative_error: {res.rel_error:+.4f}")

    man = RunManifest(chash, "simulate", params, seed, outputs, wall_time=time.time() - t0)
    if outputs:
        man.write(f"{prefix}.manifest.json")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_suite

    seed = _seed(args)
    cfgs = {}
    if args.all_builtin:
        cfgs.update(BUILTIN)
    if args.config or args.builtin:
        cfgs[args.config or args.builtin] = _load(args)
    for cfg in cfgs.values():
        validate_config(cfg)
    results = run_suite(cfgs, seed=seed, global_checks=not args.no_global)
    width = max(len(r.name) for _, r in results) if results else 10
    failed = 0
    for label, r in results:
        mark = "PASS" if r.passed else "FAIL"
        failed += not r.passed
        print(f"{mark}  {label:<16} {r.name:<{width}}  {r.value:.6g}  {r.detail}")
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


def cmd_decompose(args) -> int:
    from .transfer import decompose_phase_sensitive

    try:
        gcal, r = decompose_phase_sensitive(args.big_g, args.small_g)
    except E.NonAmplifier as exc:
        raise CliError(EXIT_CONFIG, f"NonAmplifier: {exc}") from exc
    print(f"Gcal: {gcal:.12g}")
    print(f"r: {r:.12g}")
    return EXIT_OK


_SWEEP_PARAMS = ("eta", "tau", "alpha_sq", "r0", "rG", "rE", "r_s")


def _with_param(cfg: OscillatorConfig, name: str, value: float) -> OscillatorConfig:
    d = config_to_dict(cfg)
    if name in ("r0", "rG", "rE"):
        d["input"][name] = value
    elif name == "r_s":
        if d["amplifier"]["variant"] != "phase_sensitive":
            raise CliError(EXIT_CONFIG, "sweeping r_s needs a phase_sensitive amplifier")
        d["amplifier"]["r_s"] = value
    else:
        d[name] = value
    return config_from_dict(d)


def cmd_sweep(args) -> int:
    base = _load(args)
    if args.values:
        values = [float(v) for v in args.values.split(",")]
    elif args.count:
        values = list(np.linspace(args.start, args.stop, args.count))
    else:
        raise CliError(EXIT_CONFIG, "give --values or --start/--stop/--count")
    if args.db:
        if args.param not in ("r0", "rG", "rE", "r_s"):
            raise CliError(EXIT_CONFIG, "--db applies to squeeze parameters only")
        values = [db_to_r(v) for v in values]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    params = {k: v for k, v in vars(args).items() if k not in ("out_dir", "func", "config")}
    for i, val in enumerate(values):
        cfg = validate_config(_with_param(base, args.param, val))
        grid = _grid(args, cfg)
        cols = _spectrum_table(cfg, grid, args.one_sided)
        theta = grid.values * cfg.tau
        path = out_dir / f"sweep_{args.param}_{i:03d}.csv"
        man = RunManifest(config_hash(cfg), "sweep", {**params, "value": val}, outputs=[str(path)])
        notes = _notes(cfg, grid, args.one_sided) + [f"{args.param} = {val!r}"]
        write_csv(path, SPECTRUM_COLUMNS + ["omega_tau"], cols + [theta], man,
                  SPECTRUM_UNITS + "; omega_tau dimensionless", notes)
        print(f"{path}  {args.param}={val:.6g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fbosc",
        description="Quantum-noise spectra and linewidths of feedback oscillators.",
        epilog="Exit codes: 0 ok, 1 verify failed, 2 config, 3 grid, 4 simulation, 5 fit. "
               "FBOSC_SEED overrides --seed.")
    p.add_argument("--version", action="version", version=f"fbosc {__version__}")
    p.add_argument("--threads", type=int, default=None, help="cap on worker threads")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("inspect", help="validate a config and report derived quantities")
    _add_config_args(s)
    s.set_defaults(func=cmd_inspect)

    s = sub.add_parser("spectrum", help="closed-form output spectra on a frequency grid")
    _add_config_args(s)
    _add_grid_args(s)
    s.add_argument("--out", help="CSV path (stdout when omitted)")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("simulate", help="time-domain Monte Carlo of the loop")
    _add_config_args(s)
    s.add_argument("--dt-div", type=int, default=16, help="samples per loop delay (>= 8)")
    s.add_argument("--steps", type=int, default=1 << 20)
    s.add_argument("--warmup", type=int, default=None, help="discarded steps (default 10 delays)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--psd", action="store_true", help="write Welch PSDs next to closed forms")
    s.add_argument("--segment-len", type=int, default=None)
    s.add_argument("--series", action="store_true", help="write the time series as CSV")
    s.add_argument("--binary", action="store_true", help="write the time series as binary")
    s.add_argument("--linewidth", action="store_true", help="fit the field linewidth")
    s.add_argument("--linewidth-steps", type=int, default=1 << 24)
    s.add_argument("--runs", type=int, default=16, help="trajectories averaged for --linewidth")
    s.add_argument("--startup", action="store_true", help="classical startup from a tiny seed")
    s.add_argument("--round-trips", type=int, default=1000)
    s.add_argument("--seed-amplitude", type=float, default=1e-6)
    s.add_argument("--out", help="output path prefix")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("verify", help="run the invariant suites")
    _add_config_args(s)
    s.add_argument("--all-builtin", action="store_true")
    s.add_argument("--no-global", action="store_true", help="skip the global sweeps")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("decompose", help="split a phase-sensitive gain into gain and squeezer")
    s.add_argument("--big-g", type=float, required=True)
    s.add_argument("--small-g", type=float, required=True)
    s.set_defaults(func=cmd_decompose)

    s = sub.add_parser(
        "sweep", help="spectra over a parameter range, one CSV per value",
        description="Squeeze values given with --db use r = ln(10^(dB/20)); 12 dB is r = 1.3816.")
    _add_config_args(s)
    _add_grid_args(s)
    s.add_argument("--param", choices=_SWEEP_PARAMS, required=True)
    s.add_argument("--values", help="comma-separated values")
    s.add_argument("--start", type=float)
    s.add_argument("--stop", type=float)
    s.add_argument("--count", type=int)
    s.add_argument("--db", action="store_true", help="values are squeezing levels in dB")
    s.add_argument("--out-dir", default="sweep")
    s.set_defaults(func=cmd_sweep)
    return p


_EXIT_FOR = [
    ((E.InvalidConfig, E.ConfigIssue, E.NonAmplifier, E.WrongVariant), EXIT_CONFIG),
    ((E.PoleFrequency,), EXIT_GRID),
    ((E.UnstableLoop, E.TooShort, E.NotConverged), EXIT_SIM),
    ((E.FitDiverged, E.FlatSpectrum), EXIT_FIT),
]


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads:
        import numba

        numba.set_num_threads(max(1, min(args.threads, numba.config.NUMBA_NUM_THREADS)))
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except E.FboscError as exc:
        for types, code in _EXIT_FOR:
            if isinstance(exc, types):
                print(f"error: {exc.code}: {exc}", file=sys.stderr)
                return code
        raise


if __name__ == "__main__":
    sys.exit(main())
