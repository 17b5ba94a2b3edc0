"""Command-line entry point: run named experiments, write CSV + JSON results.

Every subcommand loads the device configuration (packaged defaults unless
``--device`` points at a key = value file), runs one protocol, writes
``<name>.csv`` and ``<name>.meta.json`` into the output directory and prints
a one-line summary statistic.  Identical configuration and seed give
byte-identical outputs.

Exit codes: 0 success, 1 failed reproduction criteria, 2 usage errors,
3 malformed configuration, 4 out-of-range parameters.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import device as dev
from . import experiments as ex
from . import pulses as pl
from . import readout as ro
from . import tomo
from .acceptance import CRITERIA, DEFAULT_SEED, run_all
from .device import ConfigError
from .results import SweepSpec, base_metadata

EXIT_OK = 0
EXIT_FAILED_CRITERIA = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_RANGE = 4

OUT_DIR_ENV = "DQDSIM_OUT_DIR"


def _load_device(path: str | None) -> dev.DeviceParams:
    if path is None:
        text = resources.files("dqdsim.configs").joinpath("default_device.cfg").read_text()
        return dev.device_from_config(text)
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"device file not found: {p}")
    return dev.load_device_config(p)


def _write(result, out_dir: Path, name: str) -> None:
    csv_path, meta_path = result.save(out_dir, name)
    print(f"wrote {csv_path} and {meta_path}")


# ---------------------------------------------------------------------------
# Subcommand implementations


def cmd_rabi(args, params: dev.DeviceParams, out_dir: Path) -> int:
    f0 = dev.transition_frequencies(params, 0.0)
    center = f0.f_left_down if args.target == "left" else f0.f_right_down
    freqs = center + np.linspace(-args.span / 2, args.span / 2, args.n_freq)
    times = np.linspace(0.0, args.max_time, args.n_time)
    res = ex.rabi_chevron(params, args.target, freqs, times, rabi=args.rabi)
    _write(res, out_dir, "rabi")
    resonant = res.data["p_up"][args.n_freq // 2]
    f_fit, _ = ex.fit_decaying_cosine(times, resonant)
    print(f"rabi: fitted rabi frequency = {f_fit / 1e6:.4f} MHz (drive amplitude {args.rabi / 1e6:.3f} MHz)")
    return EXIT_OK


def cmd_ramsey(args, params: dev.DeviceParams, out_dir: Path) -> int:
    sigma = pl.sigma_from_t2_star(
        params.t2_star_left if args.target == "left" else params.t2_star_right)
    noise = pl.NoiseConfig(
        sigma_f_left=sigma if args.target == "left" else 0.0,
        sigma_f_right=sigma if args.target == "right" else 0.0,
        n_samples=args.samples, seed=args.seed)
    delays = np.linspace(0.0, args.max_delay, args.n)
    res = ex.ramsey(params, args.target, delays, noise=noise, detuning=args.detuning)
    _write(res, out_dir, "ramsey")
    t2, _ = ex.fit_gaussian_envelope(delays, res.data["p_up"])
    print(f"ramsey: fitted T2* = {t2 * 1e6:.3f} us")
    return EXIT_OK


def cmd_echo(args, params: dev.DeviceParams, out_dir: Path) -> int:
    sigma = pl.sigma_from_t2_star(
        params.t2_star_left if args.target == "left" else params.t2_star_right)
    noise = pl.NoiseConfig(
        sigma_f_left=sigma if args.target == "left" else 0.0,
        sigma_f_right=sigma if args.target == "right" else 0.0,
        n_samples=args.samples, seed=args.seed)
    delays = np.linspace(0.0, args.max_delay, args.n)
    res = ex.hahn_echo(params, args.target, delays, noise=noise)
    _write(res, out_dir, "echo")
    p = res.data["p_up"]
    print(f"echo: envelope spread = {p.max() - p.min():.4f} (quasi-static noise refocused)")
    return EXIT_OK


def cmd_spectroscopy(args, params: dev.DeviceParams, out_dir: Path) -> int:
    j = dev.exchange_from_voltage(params.exchange_fit, args.vm)
    f = dev.transition_frequencies(params, j)
    freqs = np.linspace(f.f_left_down - args.margin, f.f_left_up + args.margin, args.n_freq)
    taus = np.linspace(0.0, args.n_periods / ex.DEFAULT_RABI, args.n_tau)
    res = ex.exchange_spectroscopy(params, args.vm, taus, freqs)
    _write(res, out_dir, "spectroscopy")
    split = ex.spectroscopy_branch_splitting(res)
    print(f"spectroscopy: branch splitting = {split / 1e6:.4f} MHz "
          f"(exchange law gives {j / 1e6:.4f} MHz at {args.vm} mV)")
    return EXIT_OK


def cmd_exchange_fit(args, params: dev.DeviceParams, out_dir: Path) -> int:
    truth = params.exchange_fit
    if args.input is not None:
        rows = np.loadtxt(args.input, delimiter=",", skiprows=1)
        samples = [(float(v), float(j)) for v, j in rows]
    else:
        v = np.concatenate([np.linspace(340, 372, 350), np.linspace(390, 400, 100),
                            np.linspace(405, 412.78, 350)])
        j = np.array([dev.exchange_from_voltage(truth, x) for x in v])
        rng = np.random.default_rng(args.seed)
        samples = list(zip(v, j * (1.0 + args.noise * rng.standard_normal(len(j)))))
    fit = dev.fit_exchange_law(samples)
    grid = np.linspace(min(s[0] for s in samples), max(s[0] for s in samples), 200)
    curve = np.array([dev.exchange_from_voltage(fit.params, x) for x in grid])
    from .results import ExperimentResult
    res = ExperimentResult(
        axes=(SweepSpec("v_m_mv", grid),),
        data={"exchange_hz": curve},
        metadata=base_metadata("exchange_fit", params, seed=args.seed,
                               fitted={"c": fit.params.c, "vm0": fit.params.vm0,
                                       "vm1": fit.params.vm1, "von": fit.params.von},
                               residual_norm=fit.residual_norm),
    )
    _write(res, out_dir, "exchange-fit")
    print(f"exchange-fit: vm0 = {fit.params.vm0:.2f} mV, vm1 = {fit.params.vm1:.2f} mV, "
          f"von = {fit.params.von:.4f} mV, residual = {fit.residual_norm:.3e}")
    return EXIT_OK


def cmd_echo_phase(args, params: dev.DeviceParams, out_dir: Path) -> int:
    taus = np.linspace(0.0, args.max_tau, args.n)
    res = ex.echo_exchange_phase(params, args.target, args.j_on, taus,
                                 other_qubit_state=args.other)
    _write(res, out_dir, "echo-phase")
    freq, _ = ex.fit_decaying_cosine(taus, res.data["p_up"])
    print(f"echo-phase: oscillation frequency = {freq / 1e6:.4f} MHz "
          f"(other qubit {args.other})")
    return EXIT_OK


def cmd_cnot_cal(args, params: dev.DeviceParams, out_dir: Path) -> int:
    taus = np.linspace(0.0, args.max_tau, args.n)
    res = ex.cnot_calibration(params, args.j_on, taus, input_state=args.input)
    _write(res, out_dir, "cnot-cal")
    p = res.data["p_up_left"]
    if args.input in ("dd", "ud"):
        print(f"cnot-cal: input {args.input}, max P_up(left) = {p.max():.4f} (control down, no rotation)")
    else:
        peak = taus[int(np.argmax(p))]
        print(f"cnot-cal: input {args.input}, pi flip at tau_p = {peak * 1e9:.1f} ns")
    return EXIT_OK


def cmd_cnot_scan(args, params: dev.DeviceParams, out_dir: Path) -> int:
    thetas = np.linspace(0.0, 2.0 * math.pi, args.n)
    res = ex.cnot_superposition_scan(params, thetas)
    _write(res, out_dir, "cnot-scan")
    diff = np.abs(res.data["p_up_left"] - res.data["p_up_right"]).max()
    print(f"cnot-scan: target follows control, max |P_L - P_R| = {diff:.2e}")
    return EXIT_OK


def cmd_rb(args, params: dev.DeviceParams, out_dir: Path) -> int:
    lengths = [int(x) for x in args.lengths.split(",")]
    if args.error == "none":
        model = None
    elif args.error == "depolarizing":
        model = ex.Depolarizing(args.rate)
    else:
        sigma = args.sigma
        if sigma is None:
            t2 = params.t2_star_left if args.target == "left" else params.t2_star_right
            sigma = pl.sigma_from_t2_star(t2)
        model = ex.QuasiStaticDephasing(sigma)
    res, fit = ex.run_rb(params, args.target, lengths, n_sequences=args.sequences,
                         error_model=model, seed=args.seed, shots=args.shots)
    _write(res, out_dir, "rb")
    print(f"rb: F_c = {fit.f_c:.5f} (p_c = {fit.p_c:.6f} +- {fit.p_c_err:.1e}, model {args.error})")
    return EXIT_OK


def cmd_readout_sim(args, params: dev.DeviceParams, out_dir: Path) -> int:
    rp = ro.ReadoutParams(t1=params.t1,
                          noise=ro.NoiseSpectrumConfig(seed=args.seed))
    left, right = ro.fidelity_sweep(rp, args.n_traces, sequential_partner_delay=args.delay)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "readout-sim.csv"
    with csv_path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("dot,threshold,f_up,f_down,visibility\n")
        for dot, curve in (("left", left), ("right", right)):
            for row in zip(curve.thresholds, curve.f_up, curve.f_down, curve.visibility):
                fh.write(dot + "," + ",".join(f"{v:.17g}" for v in row) + "\n")
    meta = base_metadata("readout_sim", params, seed=args.seed,
                         readout=rp, n_traces=args.n_traces, partner_delay_s=args.delay,
                         best_visibility_left=left.best_visibility,
                         best_visibility_right=right.best_visibility)
    (out_dir / "readout-sim.meta.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True, default=_json_default) + "\n", encoding="utf-8")
    print(f"wrote {csv_path} and {out_dir / 'readout-sim.meta.json'}")
    print(f"readout-sim: best visibility left = {left.best_visibility:.3f}, "
          f"right = {right.best_visibility:.3f}")
    return EXIT_OK


def cmd_bell_tomo(args, params: dev.DeviceParams, out_dir: Path) -> int:
    noise = None
    if args.samples > 0:
        noise = pl.NoiseConfig.from_device(params, args.samples, seed=args.seed)
    res = tomo.bell_experiment(params, tomo.VisibilityModel(args.vl, args.vr), noise=noise)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "bell-tomo.csv"
    tomo.density_matrix_to_csv(res.rho, csv_path)
    meta = dict(res.metadata)
    meta["fidelity_projected"] = res.fidelity_projected
    meta["fidelity_raw_inversion"] = res.fidelity_raw
    (out_dir / "bell-tomo.meta.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True, default=_json_default) + "\n", encoding="utf-8")
    print(f"wrote {csv_path} and {out_dir / 'bell-tomo.meta.json'}")
    print(f"bell-tomo: fidelity = {res.fidelity_projected:.4f} "
          f"(raw inversion {res.fidelity_raw:.4f}, V_L = {args.vl}, V_R = {args.vr})")
    return EXIT_OK


def cmd_reproduce_all(args, params: dev.DeviceParams, out_dir: Path) -> int:
    results = run_all(params)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = out_dir / "reproduce-all.csv"
    with report.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("criterion,passed,measured,expected,runtime_s\n")
        for r in results:
            measured = r.measured.replace(",", ";")
            expected = r.expected.replace(",", ";")
            fh.write(f"{r.name},{int(r.passed)},{measured},{expected},{r.runtime_s:.2f}\n")
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] {r.name:<{width}}  {r.measured}  (expected {r.expected})")
    n_fail = sum(not r.passed for r in results)
    print(f"reproduce-all: {len(results) - n_fail}/{len(results)} criteria passed; report in {report}")
    return EXIT_OK if n_fail == 0 else EXIT_FAILED_CRITERIA


def _json_default(obj):
    from .results import _jsonify
    return _jsonify(obj)


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dqdsim",
        description="Numerical experiments on a simulated double-quantum-dot spin-qubit device.",
    )
    parser.add_argument("--device", help="device configuration file (key = value)")
    parser.add_argument("--out-dir", help=f"output directory (default ${OUT_DIR_ENV} or ./results)")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help="master seed for Monte-Carlo commands")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rabi", help="driven-rotation chevron and rabi frequency fit")
    p.add_argument("--target", choices=("left", "right"), default="right")
    p.add_argument("--rabi", type=float, default=4.8e6)
    p.add_argument("--span", type=float, default=20e6)
    p.add_argument("--n-freq", type=int, default=41)
    p.add_argument("--max-time", type=float, default=1e-6)
    p.add_argument("--n-time", type=int, default=97)
    p.set_defaults(fn=cmd_rabi)

    p = sub.add_parser("ramsey", help="free-induction decay")
    p.add_argument("--target", choices=("left", "right"), default="left")
    p.add_argument("--max-delay", type=float, default=3e-6)
    p.add_argument("--n", type=int, default=25)
    p.add_argument("--samples", type=int, default=300)
    p.add_argument("--detuning", type=float, default=0.0)
    p.set_defaults(fn=cmd_ramsey)

    p = sub.add_parser("echo", help="refocusing sequence envelope")
    p.add_argument("--target", choices=("left", "right"), default="left")
    p.add_argument("--max-delay", type=float, default=8e-6)
    p.add_argument("--n", type=int, default=9)
    p.add_argument("--samples", type=int, default=200)
    p.set_defaults(fn=cmd_echo)

    p = sub.add_parser("spectroscopy", help="conditional resonance map vs control rotation")
    p.add_argument("--vm", type=float, default=405.0, help="barrier voltage in mV")
    p.add_argument("--margin", type=float, default=2e6)
    p.add_argument("--n-freq", type=int, default=200)
    p.add_argument("--n-tau", type=int, default=21)
    p.add_argument("--n-periods", type=float, default=2.0)
    p.set_defaults(fn=cmd_spectroscopy)

    p = sub.add_parser("exchange-fit", help="fit the exchange-vs-voltage law")
    p.add_argument("--input", help="CSV of v_m_mv,exchange_hz rows (default: synthetic roundtrip)")
    p.add_argument("--noise", type=float, default=0.01)
    p.set_defaults(fn=cmd_exchange_fit)

    p = sub.add_parser("echo-phase", help="echo-detected exchange phase accumulation")
    p.add_argument("--target", choices=("left", "right"), default="left")
    p.add_argument("--j-on", type=float, default=4.902e6)
    p.add_argument("--other", choices=("down", "up"), default="down")
    p.add_argument("--max-tau", type=float, default=0.9e-6)
    p.add_argument("--n", type=int, default=61)
    p.set_defaults(fn=cmd_echo_phase)

    p = sub.add_parser("cnot-cal", help="conditional oscillations vs burst length")
    p.add_argument("--input", choices=("uu", "ud", "du", "dd"), default="du")
    p.add_argument("--j-on", type=float, default=20e6)
    p.add_argument("--max-tau", type=float, default=300e-9)
    p.add_argument("--n", type=int, default=61)
    p.set_defaults(fn=cmd_cnot_cal)

    p = sub.add_parser("cnot-scan", help="gate response to control superpositions")
    p.add_argument("--n", type=int, default=41)
    p.set_defaults(fn=cmd_cnot_scan)

    p = sub.add_parser("rb", help="clifford randomized benchmarking")
    p.add_argument("--target", choices=("left", "right"), default="left")
    p.add_argument("--error", choices=("none", "depolarizing", "dephasing"), default="dephasing")
    p.add_argument("--rate", type=float, default=0.005, help="depolarizing rate per clifford")
    p.add_argument("--sigma", type=float, help="dephasing sigma in Hz (default from device T2*)")
    p.add_argument("--lengths", default="2,25,60,110,170,240")
    p.add_argument("--sequences", type=int, default=30)
    p.add_argument("--shots", type=int, default=100)
    p.set_defaults(fn=cmd_rb)

    p = sub.add_parser("readout-sim", help="single-shot readout fidelity curves")
    p.add_argument("--n-traces", type=int, default=20000)
    p.add_argument("--delay", type=float, default=ro.CALIBRATED_PARTNER_DELAY,
                   help="second-dot pre-readout delay in s")
    p.set_defaults(fn=cmd_readout_sim)

    p = sub.add_parser("bell-tomo", help="bell-state tomography through the pulse engine")
    p.add_argument("--vl", type=float, default=0.76)
    p.add_argument("--vr", type=float, default=0.70)
    p.add_argument("--samples", type=int, default=0,
                   help="noise samples per setting (0 = noiseless gates)")
    p.set_defaults(fn=cmd_bell_tomo)

    p = sub.add_parser("reproduce-all", help="run the full reproduction suite")
    p.set_defaults(fn=cmd_reproduce_all)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        params = _load_device(args.device)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = Path(args.out_dir or os.environ.get(OUT_DIR_ENV, "results"))
    try:
        return args.fn(args, params, out_dir)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return EXIT_RANGE


if __name__ == "__main__":
    sys.exit(main())
