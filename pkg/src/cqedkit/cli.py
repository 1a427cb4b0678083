"""Command-line front end.

Subcommands: eigen (mode energies and figures of merit), sweep
(temperature anticrossing CSV), simulate (click-stream generation),
correlate (histograms and g2 estimates), fit (spectral fitting and
coupling extraction), demo-paper (end-to-end reproduction of the
headline numbers).

Exit codes: 0 success, 2 configuration error, 3 numerical
non-convergence, 4 insufficient statistics.
"""
import argparse
import os
import sys

import numpy as np

from . import clickio, config as cfgmod, coupled, hbt, lindblad, specfit, trajectory
from .errors import ConfigError, ConvergenceError, InsufficientStatisticsError
from .units import HC_UEV_NM, HBAR_UEV_PS, q_factor, wavelength_to_energy

EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_STATISTICS = 4


def _load_config(args) -> dict:
    if args.config:
        cfg = cfgmod.load_config(args.config)
    else:
        cfg = cfgmod.validate_config(cfgmod.PRESETS[args.preset])
    if getattr(args, "seed", None) is not None:
        cfg = dict(cfg, seed=args.seed)
    return cfg


def _out_path(args, name: str) -> str:
    os.makedirs(args.out_dir, exist_ok=True)
    return os.path.join(args.out_dir, name)


def cmd_eigen(args) -> int:
    cfg = _load_config(args)
    p = cfgmod.build_system(cfg)
    pair = coupled.eigen_energies(p)
    sc = coupled.is_strongly_coupled(p)
    fields = {
        "config_hash": cfgmod.config_hash(cfg),
        "e_upper_ueV": pair.upper.real,
        "e_lower_ueV": pair.lower.real,
        "fwhm_upper_ueV": 2 * abs(pair.upper.imag),
        "fwhm_lower_ueV": 2 * abs(pair.lower.imag),
        "strong_coupling": sc,
    }
    if sc:
        fields["splitting_ueV"] = coupled.vacuum_rabi_splitting(p)
    fom = coupled.figures_of_merit(p.g, p.gamma_c, p.gamma_x)
    fields.update(purcell_factor=fom.purcell,
                  quantum_efficiency=fom.efficiency,
                  g_over_gamma_c=p.g / p.gamma_c,
                  cavity_q=q_factor(p.e_c, p.gamma_c))
    sys.stdout.write(clickio.format_report("eigen", fields))
    return 0


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    p = cfgmod.build_system(cfg)
    calib = specfit.TuningCalibration(resonance_temp=args.resonance_temp)
    temps = np.arange(args.t_min, args.t_max + 1e-9, args.t_step)
    rows = []
    for t in temps:
        lam_x, lam_c = specfit.temperature_tuning(float(t), calib)
        pt = coupled.SystemParams(wavelength_to_energy(lam_x),
                                  wavelength_to_energy(lam_c),
                                  p.gamma_x, p.gamma_c, p.g)
        pair = coupled.eigen_energies(pt)
        hi, lo = ((pair.upper, pair.lower)
                  if pair.upper.real >= pair.lower.real
                  else (pair.lower, pair.upper))
        rows.append((float(t), float(HC_UEV_NM / hi.real),
                     float(HC_UEV_NM / lo.real),
                     float(2 * abs(hi.imag)), float(2 * abs(lo.imag))))
    path = _out_path(args, "anticrossing.csv")
    with open(path, "w") as fh:
        fh.write(f"# confighash={cfgmod.config_hash(cfg)}\n")
        fh.write("T_K,lambda_upper_nm,lambda_lower_nm,"
                 "fwhm_upper_ueV,fwhm_lower_ueV\n")
        for row in rows:
            fh.write(",".join(repr(v) for v in row) + "\n")
    print(path)
    return 0


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    model = cfgmod.build_model(cfg)
    pump = cfgmod.build_pump(cfg)
    det = cfgmod.build_detectors(cfg)
    duration = args.pulses * pump.rep_period if args.pulses else args.duration
    if not duration or duration <= 0:
        raise ConfigError("give --duration or --pulses")
    stream = trajectory.simulate_stream(model, pump, det, duration,
                                        cfg.get("seed", 0),
                                        config_hash=cfgmod.config_hash(cfg))
    path = _out_path(args, args.name)
    clickio.write_click_stream(path, stream)
    print(path)
    return 0


def cmd_correlate(args) -> int:
    streams = [clickio.read_click_stream(f) for f in args.files]
    channels = args.channels.split(",")
    if len(channels) not in (1, 2):
        raise ConfigError("--channels takes one or two channel names")

    hist = None
    for stream in streams:
        times_a = stream.filter(channels[0])
        times_b = stream.filter(channels[1]) if len(channels) == 2 else None
        h = hbt.correlate(times_a, times_b, window=args.window,
                          bin_width=args.bin, duration=stream.duration)
        hist = h if hist is None else hist.merged_with(h)

    if args.dark_subtract:
        dur = sum(s.duration for s in streams)
        n_d = sum(np.sum(s.channels == "D") for s in streams)
        # darks fall on both detectors; per-channel rates include them
        d_rate = n_d / dur / 2.0
        hist = hbt.subtract_dark_counts(
            hist, (d_rate, d_rate),
            (hist.n_a / dur + d_rate, hist.n_b / dur + d_rate))

    path = _out_path(args, "histogram.csv")
    clickio.write_histogram(path, hist)
    if len(channels) == 2:
        est = hbt.cross_g2_zero(hist, args.rep_period, n_side=args.n_side)
    else:
        est = hbt.pulsed_g2_zero(hist, args.rep_period, n_side=args.n_side)
    sys.stdout.write(clickio.format_report("g2", {
        "config_hash": streams[0].config_hash,
        "channels": args.channels,
        "value": est.value,
        "stderr": est.stderr,
        "method": est.method,
        "histogram": path,
    }))
    return 0


def cmd_fit(args) -> int:
    pairs = [(clickio.read_spectrum(f), f) for f in args.files]
    tagged = all(s.temperature is not None for s, _ in pairs)
    if tagged:
        pairs.sort(key=lambda sf: sf[0].temperature)
        series = specfit.fit_series([s for s, _ in pairs],
                                    noise_fraction=args.noise_fraction)
    else:
        series = [(float(i), specfit.fit_double_lorentzian(s))
                  for i, (s, _) in enumerate(pairs)]
    for (tag, fit), (_, fname) in zip(series, pairs):
        p1, p2 = fit.peaks
        sys.stdout.write(clickio.format_report("fit", {
            "file": fname,
            "center_1_nm": p1.center, "fwhm_1_nm": p1.fwhm, "area_1": p1.area,
            "center_2_nm": p2.center, "fwhm_2_nm": p2.fwhm, "area_2": p2.area,
            "baseline": fit.baseline,
            "reduced_chi2": fit.reduced_chi2,
            "converged": fit.converged,
        }))
    if tagged and len(series) >= 5:
        ext = specfit.extract_coupling(specfit.assemble_anticrossing(series))
        sys.stdout.write(clickio.format_report("coupling", {
            "gamma_c_ueV": ext.gamma_c,
            "gamma_x_ueV": ext.gamma_x,
            "splitting_ueV": ext.splitting,
            "g_ueV": ext.g,
            "g_err_ueV": ext.g_err,
            "resonance_temperature_K": ext.resonance_temperature,
            "splitting_resolvable": ext.resolvable,
        }))
    return 0


def _g2_from_stream(stream, channels, rep, bin_width, window, n_side):
    times_a = stream.filter(channels[0])
    times_b = stream.filter(channels[1]) if len(channels) == 2 else None
    h = hbt.correlate(times_a, times_b, window=window, bin_width=bin_width,
                      duration=stream.duration)
    return hbt.pulsed_g2_zero(h, rep, n_side=n_side)


def cmd_demo_paper(args) -> int:
    rows = []  # (name, computed, target midpoint, tolerance)

    def check(name, value, target, tol):
        rows.append((name, value, target, tol))

    stage = "mode structure"
    try:
        cfg = cfgmod.validate_config(cfgmod.DEFAULT_CONFIG)
        p = cfgmod.build_system(cfg)
        check("vacuum Rabi splitting (ueV)",
              coupled.vacuum_rabi_splitting(p), 56.0, 1.0)
        check("g / gamma_c", p.g / p.gamma_c, 0.412, 0.003)
        fom = coupled.figures_of_merit(p.g, p.gamma_c, p.gamma_x)
        check("Purcell factor", fom.purcell, 61.0, 7.0)
        check("quantum efficiency", fom.efficiency, 0.973, 0.004)

        stage = "lifetimes"
        delta = wavelength_to_energy(936.0) - wavelength_to_energy(936.7)
        check("coupled lifetime at 0.7 nm detuning (ps)",
              coupled.exciton_branch_lifetime(p.at_detuning(delta)), 620.0, 70.0)
        check("inferred bare lifetime (ps)",
              coupled.infer_bare_lifetime(620.0, delta, p.g, p.gamma_c),
              700.0, 80.0)

        stage = "spectral extraction"
        calib = specfit.TuningCalibration()
        rng = np.random.default_rng(cfg["seed"])
        temps = np.concatenate([np.arange(6, 8.6, 0.5),
                                np.arange(9, 12.01, 0.25),
                                np.arange(12.5, 16.01, 0.5)])
        spectra = []
        for t in temps:
            lam_x, lam_c = specfit.temperature_tuning(float(t), calib)
            pt = coupled.SystemParams(wavelength_to_energy(lam_x),
                                      wavelength_to_energy(lam_c),
                                      p.gamma_x, p.gamma_c, p.g)
            pair = coupled.eigen_energies(pt)
            mid = HC_UEV_NM / (0.5 * (pair.upper.real + pair.lower.real))
            grid = mid + np.arange(-30, 31) * 0.03
            s = coupled.model_spectrum(pt, grid)
            noisy = np.maximum(
                s.intensity * (1 + 0.05 * rng.standard_normal(grid.size)), 0.0)
            spectra.append(specfit.Spectrum(grid, noisy, temperature=float(t)))
        ext = specfit.extract_coupling(specfit.assemble_anticrossing(
            specfit.fit_series(spectra, noise_fraction=0.05)))
        check("fitted coupling g (ueV)", ext.g, 35.0, 0.05 * 35.0)
        check("fitted cavity linewidth (ueV)", ext.gamma_c, 85.0, 0.05 * 85.0)
        check("resonance temperature (K)", ext.resonance_temperature, 10.5, 0.5)

        stage = "photon statistics"
        rep = cfgmod.REP_PERIOD_PS
        window, bin_w, n_side = 6.5 * rep, 130.0, 6
        n_pulses = args.pulses
        det_cfg = cfgmod.validate_config(cfgmod.FIG4_DETUNED_CONFIG)
        res_cfg = cfgmod.validate_config(cfgmod.FIG4_RESONANT_CONFIG)
        det_stream = trajectory.simulate_stream(
            cfgmod.build_model(det_cfg), cfgmod.build_pump(det_cfg),
            cfgmod.build_detectors(det_cfg), n_pulses * rep, det_cfg["seed"])
        res_stream = trajectory.simulate_stream(
            cfgmod.build_model(res_cfg), cfgmod.build_pump(res_cfg),
            cfgmod.build_detectors(res_cfg), n_pulses * rep, res_cfg["seed"])

        rates = trajectory.channel_rates(det_stream)
        check("cavity:exciton flux ratio (detuned)",
              rates["C"][0] / rates["X"][0], 3.5, 0.3)
        check("g2(0) resonant, cavity channel",
              _g2_from_stream(res_stream, "C", rep, bin_w, window, n_side).value,
              0.18, 0.08)
        check("g2(0) detuned, exciton channel",
              _g2_from_stream(det_stream, "X", rep, bin_w, window, n_side).value,
              0.19, 0.08)
        check("g2(0) detuned, cavity channel",
              _g2_from_stream(det_stream, "C", rep, bin_w, window, n_side).value,
              0.39, 0.08)
        check("g2(0) detuned, cross X-C",
              _g2_from_stream(det_stream, "XC", rep, bin_w, window, n_side).value,
              0.22, 0.08)

        stage = "continuous-wave correlation"
        model = cfgmod.build_model(cfg).with_rates(pump_x=1e-4)
        tau = np.linspace(0.0, 120.0, 241)
        g2 = lindblad.cw_g2(model, tau, channel="X")
        target = g2[-1] * (1.0 - 1.0 / np.e)
        recovery = float(tau[np.argmax(g2 >= target)])
        check("cw g2 recovery time (ps)", recovery, 17.5, 7.5)
    except Exception as exc:
        print(f"demo aborted during stage '{stage}': {exc}", file=sys.stderr)
        raise

    width = max(len(r[0]) for r in rows)
    print(f"{'quantity':<{width}}  {'computed':>10}  {'target':>14}  result")
    failures = 0
    for name, value, target, tol in rows:
        ok = abs(value - target) <= tol
        failures += not ok
        print(f"{name:<{width}}  {value:>10.4g}  "
              f"{f'{target:g} +/- {tol:g}':>14}  {'pass' if ok else 'FAIL'}")
    print(f"{len(rows) - failures}/{len(rows)} checks passed")
    return 0 if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cqedkit",
        description="Coupled quantum dot-cavity simulation and analysis")
    ap.add_argument("--seed", type=int, default=None,
                    help="override the config seed")
    ap.add_argument("--threads", type=int, default=1,
                    help="worker threads (results are thread-count independent)")
    ap.add_argument("--out-dir", default=".", help="directory for output files")
    sub = ap.add_subparsers(dest="command", required=True)

    def with_config(sp):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--preset", choices=sorted(cfgmod.PRESETS),
                        default="default")

    sp = sub.add_parser("eigen", help="mode energies and figures of merit")
    with_config(sp)
    sp.set_defaults(func=cmd_eigen)

    sp = sub.add_parser("sweep", help="temperature anticrossing CSV")
    with_config(sp)
    sp.add_argument("--t-min", type=float, default=6.0)
    sp.add_argument("--t-max", type=float, default=16.0)
    sp.add_argument("--t-step", type=float, default=0.25)
    sp.add_argument("--resonance-temp", type=float, default=10.5)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("simulate", help="generate a click stream")
    with_config(sp)
    sp.add_argument("--duration", type=float, default=None,
                    help="acquisition time in ps")
    sp.add_argument("--pulses", type=int, default=None,
                    help="number of excitation pulses (alternative to --duration)")
    sp.add_argument("--name", default="clicks.csv")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("correlate", help="correlation histogram and g2")
    sp.add_argument("files", nargs="+", help="click stream files")
    sp.add_argument("--channels", default="C",
                    help="one channel (auto) or two comma-separated (cross)")
    sp.add_argument("--bin", type=float, default=130.0, help="bin width, ps")
    sp.add_argument("--window", type=float, default=84500.0,
                    help="correlation window, ps")
    sp.add_argument("--rep-period", type=float, default=13000.0)
    sp.add_argument("--n-side", type=int, default=6)
    sp.add_argument("--dark-subtract", action="store_true")
    sp.set_defaults(func=cmd_correlate)

    sp = sub.add_parser("fit", help="fit spectra, extract coupling")
    sp.add_argument("files", nargs="+", help="spectrum CSV files")
    sp.add_argument("--noise-fraction", type=float, default=0.0,
                    help="relative intensity noise for weighting")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("demo-paper",
                        help="reproduce the headline numbers end to end")
    sp.add_argument("--pulses", type=int, default=60000,
                    help="pulses per simulated correlation run")
    sp.set_defaults(func=cmd_demo_paper)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except InsufficientStatisticsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STATISTICS


if __name__ == "__main__":
    sys.exit(main())
