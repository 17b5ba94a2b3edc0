"""Reproduction suite: every headline model prediction as a pass/fail check.

Each criterion function returns a :class:`CriterionResult`; ``run_all``
executes the list with pinned seeds so a fresh checkout reproduces the same
numbers.  The same checks back the acceptance test module.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import device as dev
from . import experiments as ex
from . import pulses as pl
from . import readout as ro
from . import tomo

DEFAULT_SEED = 12345


@dataclass(frozen=True)
class CriterionResult:
    name: str
    passed: bool
    measured: str
    expected: str
    runtime_s: float


def _result(name: str, passed: bool, measured: str, expected: str, t0: float) -> CriterionResult:
    return CriterionResult(name, bool(passed), measured, expected, time.perf_counter() - t0)


def exchange_splitting_identity(params: dev.DeviceParams, seed: int = DEFAULT_SEED) -> CriterionResult:
    """Conditional-frequency shift equals the exchange splitting exactly."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(1000):
        j = rng.uniform(1e5, 40e6)
        p = dev.DeviceParams(
            e_z=rng.uniform(5e9, 20e9),
            de_z=rng.uniform(5.0 * j, 12.0 * j),
            b1_z_left=rng.uniform(-2e6, 2e6),
            b1_z_right=rng.uniform(-2e6, 2e6),
        )
        f = dev.transition_frequencies(p, j)
        worst = max(worst,
                    abs(f.f_left_up - f.f_left_down - j) / j,
                    abs(f.f_right_up - f.f_right_down - j) / j)
    return _result("exchange splitting identity", worst < 1e-9,
                   f"worst relative deviation {worst:.2e}", "< 1e-9 over 1000 draws", t0)


def cnot_truth_table(params: dev.DeviceParams) -> CriterionResult:
    """Calibrated gate maps all four basis states and matches the ideal matrix."""
    t0 = time.perf_counter()
    gate = pl.calibrate_cnot(params, 1.0 / 204e-9)
    u_raw = pl.extract_gate(gate.segments(), params)
    u = pl.apply_phase_corrections(u_raw, gate.global_phase, gate.phase_left, gate.phase_right)
    pops = np.abs(u) ** 2
    min_pop = min(pops[2, 0], pops[1, 1], pops[0, 2], pops[3, 3])
    fid = pl.entanglement_fidelity(u, pl.IDEAL_CNOT)
    ok = min_pop > 0.99 and fid > 0.999
    return _result("cnot truth table and gate fidelity", ok,
                   f"min population {min_pop:.6f}, gate fidelity {fid:.6f}",
                   "> 0.99 and > 0.999", t0)


def conditional_phase_cancellation(params: dev.DeviceParams) -> CriterionResult:
    """Differential phase vanishes mod 2 pi at tau_dc = 1/J, analytically and evolved."""
    t0 = time.perf_counter()
    j = 1.0 / 204e-9
    tau = 204e-9
    analytic = pl.conditional_phase(params, j, tau)
    analytic = min(analytic, 2.0 * math.pi - analytic)

    phases = []
    for control in ("u", "d"):
        init = pl.TwoQubitState.product((1 / math.sqrt(2), 1 / math.sqrt(2)),
                                        (1, 0) if control == "u" else (0, 1))
        seq = pl.PulseSequence([pl.DcExchange(duration=tau, j=j)], init)
        amps = pl.evolve(seq, params).amplitudes
        if control == "u":
            phases.append(np.angle(amps[0] * np.conj(amps[2])))
        else:
            phases.append(np.angle(amps[1] * np.conj(amps[3])))
    evolved = (phases[0] - phases[1]) % (2.0 * math.pi)
    evolved = min(evolved, 2.0 * math.pi - evolved)
    ok = analytic < 1e-6 and evolved < 1e-6
    return _result("conditional phase cancellation", ok,
                   f"analytic {analytic:.2e} rad, evolved {evolved:.2e} rad",
                   "0 mod 2 pi within 1e-6", t0)


def conditional_rabi_pattern(params: dev.DeviceParams) -> CriterionResult:
    """Conditional oscillations, anti-correlated inputs, pi flip at 130 ns."""
    t0 = time.perf_counter()
    step = 5e-9
    taus = np.arange(0.0, 300e-9 + step / 2, step)
    res_du = ex.cnot_calibration(params, 20e6, taus, input_state="du")
    res_uu = ex.cnot_calibration(params, 20e6, taus, input_state="uu")
    p_du = res_du.data["p_up_left"]
    p_uu = res_uu.data["p_up_left"]
    anti = np.max(np.abs(p_du + p_uu - 1.0))
    peak = taus[int(np.argmax(p_du))]
    ok = anti < 0.05 and abs(peak - 130e-9) <= step
    return _result("conditional oscillation pattern", ok,
                   f"pi flip at {peak * 1e9:.0f} ns, anticorrelation defect {anti:.3f}",
                   "130 ns within one grid step; traces anti-correlated", t0)


def bell_fidelity_visibility_limited(params: dev.DeviceParams) -> CriterionResult:
    t0 = time.perf_counter()
    res = tomo.bell_experiment(params, tomo.VisibilityModel(0.76, 0.70))
    ok = abs(res.fidelity_projected - 0.805) < 0.01
    return _result("visibility limited bell fidelity", ok,
                   f"fidelity {res.fidelity_projected:.4f}", "0.805 +- 0.01", t0)


def ramsey_t2_star_recovery(params: dev.DeviceParams, seed: int = DEFAULT_SEED) -> CriterionResult:
    t0 = time.perf_counter()
    noise = pl.NoiseConfig(sigma_f_left=pl.sigma_from_t2_star(params.t2_star_left),
                           n_samples=500, seed=seed)
    delays = np.linspace(0.0, 3e-6, 25)
    res = ex.ramsey(params, pl.LEFT, delays, noise=noise)
    t2, _ = ex.fit_gaussian_envelope(delays, res.data["p_up"])
    rel = abs(t2 - params.t2_star_left) / params.t2_star_left
    return _result("ramsey t2* recovery", rel < 0.10,
                   f"fitted T2* {t2 * 1e6:.3f} us ({rel * 100:.1f}% off)",
                   f"{params.t2_star_left * 1e6:.1f} us within 10%", t0)


def rb_oracle_equivalence(params: dev.DeviceParams, seed: int = DEFAULT_SEED) -> CriterionResult:
    t0 = time.perf_counter()
    details = []
    ok = True
    _, fit0 = ex.run_rb(params, pl.LEFT, [2, 30, 80, 150, 250], n_sequences=8, seed=seed)
    ok &= abs(fit0.p_c - 1.0) <= 1e-6
    details.append(f"noiseless p_c {fit0.p_c:.8f}")
    for r, lengths in ((0.002, [2, 100, 250, 450, 700, 1000]), (0.01, [2, 25, 60, 110, 170, 240])):
        _, fit = ex.run_rb(params, pl.LEFT, lengths, n_sequences=30,
                           error_model=ex.Depolarizing(r), seed=seed)
        oracle = 1.0 - r / 2.0
        sigma = max(fit.p_c_err / 2.0, 1e-12)
        pulls = abs(fit.f_c - oracle) / sigma
        ok &= pulls <= 2.0
        details.append(f"r={r}: F_c {fit.f_c:.5f} vs {oracle} ({pulls:.2f} sigma)")
    return _result("benchmarking oracle equivalence", bool(ok),
                   "; ".join(details), "p_c = 1 +- 1e-6; F_c = 1 - r/2 within 2 sigma", t0)


def readout_model_properties(params: dev.DeviceParams, seed: int = DEFAULT_SEED) -> CriterionResult:
    t0 = time.perf_counter()
    details = []
    ok = True

    rp = ro.ReadoutParams(t1=1e9, noise=ro.NoiseSpectrumConfig(white_density=0.0, seed=seed))
    rng = np.random.default_rng(seed)
    t_out, width = [], []
    for _ in range(100_000):
        tr = ro.generate_trace(rp, "up", rng)
        if tr.events is not None:
            t_out.append(tr.events[0])
            width.append(tr.events[1] - tr.events[0])
    mean_out = float(np.mean(t_out))
    mean_width = float(np.mean(width))
    rel_out = abs(mean_out - 1.0 / rp.gamma_off_up) * rp.gamma_off_up
    rel_width = abs(mean_width - 1.0 / rp.gamma_on) * rp.gamma_on
    ok &= rel_out < 0.02 and rel_width < 0.02
    details.append(f"edge/width means off by {rel_out * 100:.2f}%/{rel_width * 100:.2f}%")

    quiet = ro.ReadoutParams(noise=ro.NoiseSpectrumConfig(white_density=0.0, seed=seed),
                             filter_cutoff=None)
    left, _ = ro.fidelity_sweep(quiet, 50_000)
    g, t1 = quiet.gamma_off_up, quiet.t1
    analytic = g / (g + 1.0 / t1) * (1.0 - math.exp(-(g + 1.0 / t1) * quiet.t_read))
    f_up0 = float(left.f_up[1])  # first threshold above zero
    mc_err = 3.0 * math.sqrt(analytic * (1 - analytic) / 50_000)
    ok &= abs(f_up0 - analytic) < max(mc_err, 2e-3)
    details.append(f"F_up(0+) {f_up0:.4f} vs analytic {analytic:.4f}")

    cal = ro.calibrate_readout(ro.ReadoutParams(), n_traces=20_000, iterations=12)
    ok &= abs(cal.visibility_left - 0.85) < 0.03 and abs(cal.visibility_right - 0.78) < 0.03
    details.append(f"calibrated visibilities {cal.visibility_left:.3f}/{cal.visibility_right:.3f}")
    return _result("readout monte carlo properties", bool(ok),
                   "; ".join(details),
                   "means within 2%; analytic F_up; visibilities 0.85/0.78 +- 0.03", t0)


def exchange_fit_roundtrip(params: dev.DeviceParams, seed: int = DEFAULT_SEED) -> CriterionResult:
    t0 = time.perf_counter()
    truth = params.exchange_fit
    v = np.concatenate([np.linspace(340, 372, 350), np.linspace(390, 400, 100),
                        np.linspace(405, 412.78, 350)])
    j = np.array([dev.exchange_from_voltage(truth, x) for x in v])
    rng = np.random.default_rng(seed)
    noisy = j * (1.0 + 0.01 * rng.standard_normal(len(j)))
    fitted = dev.fit_exchange_law(list(zip(v, noisy))).params
    rel = {name: abs(getattr(fitted, name) - getattr(truth, name)) / abs(getattr(truth, name))
           for name in ("c", "vm0", "vm1", "von")}
    ok = max(rel.values()) < 0.05
    anchors_ok = True
    anchor_text = []
    for vm, target in ((390.0, 0.3e6), (410.0, 10e6)):
        got = dev.exchange_from_voltage(fitted, vm)
        anchors_ok &= 1.0 / 1.5 < got / target < 1.5
        anchor_text.append(f"{vm:.0f} mV -> {got / 1e6:.3f} MHz")
    return _result("exchange law fit roundtrip", bool(ok and anchors_ok),
                   f"worst parameter error {max(rel.values()) * 100:.2f}%; " + ", ".join(anchor_text),
                   "parameters within 5%; anchors within factor 1.5", t0)


def eigenvalue_oracle(params: dev.DeviceParams, seed: int = DEFAULT_SEED) -> CriterionResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(1000):
        j = rng.uniform(1e5, 40e6)
        p = dev.DeviceParams(
            e_z=rng.uniform(5e9, 20e9),
            de_z=rng.uniform(5.0 * j, 12.0 * j),
            b1_z_left=rng.uniform(-2e6, 2e6),
            b1_z_right=rng.uniform(-2e6, 2e6),
        )
        num = np.array(dev.energy_levels(p, j))
        ana = np.array(dev.energy_levels_analytic(p, j))
        worst = max(worst, float(np.max(np.abs(num - ana)) / np.max(np.abs(num))))
    p0 = dev.DeviceParams(b1_z_left=0.0, b1_z_right=0.0)
    j0 = 17e6
    trace_dev = abs(sum(dev.energy_levels(p0, j0)) + j0) / j0
    ok = worst < 1e-9 and trace_dev < 1e-9
    return _result("eigenvalue oracle", ok,
                   f"worst analytic/numeric deviation {worst:.2e}; trace identity {trace_dev:.2e}",
                   "< 1e-9 relative; level sum = -J", t0)


CRITERIA: list[tuple[str, Callable[[dev.DeviceParams], CriterionResult]]] = [
    ("exchange-splitting-identity", exchange_splitting_identity),
    ("cnot-truth-table", cnot_truth_table),
    ("conditional-phase-cancellation", conditional_phase_cancellation),
    ("conditional-rabi-pattern", conditional_rabi_pattern),
    ("bell-fidelity", bell_fidelity_visibility_limited),
    ("ramsey-t2star", ramsey_t2_star_recovery),
    ("rb-oracle", rb_oracle_equivalence),
    ("readout-properties", readout_model_properties),
    ("exchange-fit-roundtrip", exchange_fit_roundtrip),
    ("eigenvalue-oracle", eigenvalue_oracle),
]


def run_all(params: dev.DeviceParams | None = None) -> list[CriterionResult]:
    if params is None:
        params = dev.DeviceParams()
    return [fn(params) for _, fn in CRITERIA]
