"""Canned experiment drivers: parameter sweeps over the pulse engine.

Every driver returns an :class:`~dqdsim.results.ExperimentResult` whose
metadata records the protocol name, a digest of the device parameters and
the seed, so identical configurations reproduce identical files.  Sweep
points are mutually independent; where Monte-Carlo noise is involved the
per-sample RNG streams are derived from (seed, sample index), which fixes
the aggregate regardless of evaluation order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import curve_fit

from . import device as dev
from . import pulses as pl
from .clifford import GENERATOR_PULSES, clifford_group, x180_index
from .qcore import TwoQubitState
from .results import ExperimentResult, SweepSpec, base_metadata

DEFAULT_RABI = 4.8e6


def _p_up(populations: np.ndarray, target: str) -> float:
    if target == pl.LEFT:
        return float(populations[0] + populations[1])
    return float(populations[0] + populations[2])


def _resonance(params: dev.DeviceParams, target: str, j: float = 0.0) -> float:
    f = dev.transition_frequencies(params, j)
    return f.f_left_down if target == pl.LEFT else f.f_right_down


# ---------------------------------------------------------------------------
# Single-qubit coherence protocols


def rabi_chevron(
    params: dev.DeviceParams,
    target: str,
    freq_sweep: Sequence[float],
    time_sweep: Sequence[float],
    rabi: float = DEFAULT_RABI,
    noise: pl.NoiseConfig | None = None,
) -> ExperimentResult:
    """Spin-up probability of ``target`` over (drive frequency, burst length)."""
    freq_sweep = np.asarray(freq_sweep, dtype=float)
    time_sweep = np.asarray(time_sweep, dtype=float)
    p_up = np.empty((len(freq_sweep), len(time_sweep)))
    for i, f in enumerate(freq_sweep):
        for k, tau in enumerate(time_sweep):
            burst = pl.MicrowaveBurst(target=target, frequency=f, rabi=rabi, duration=tau)
            seq = pl.PulseSequence([burst])
            if noise is None:
                p_up[i, k] = _p_up(pl.evolve(seq, params).populations(), target)
            else:
                p_up[i, k] = _p_up(pl.evolve_ensemble(seq, params, noise), target)
    return ExperimentResult(
        axes=(SweepSpec("drive_frequency_hz", freq_sweep), SweepSpec("burst_length_s", time_sweep)),
        data={"p_up": p_up},
        metadata=base_metadata("rabi_chevron", params,
                               seed=None if noise is None else noise.seed,
                               target=target, rabi_hz=rabi),
    )


def ramsey(
    params: dev.DeviceParams,
    target: str,
    delay_sweep: Sequence[float],
    noise: pl.NoiseConfig | None = None,
    detuning: float = 0.0,
    rabi: float = 10e6,
) -> ExperimentResult:
    """pi/2 - wait - pi/2 free-induction decay under the noise ensemble."""
    delay_sweep = np.asarray(delay_sweep, dtype=float)
    p_up = np.empty(len(delay_sweep))
    for k, tau in enumerate(delay_sweep):
        seq = pl.PulseSequence(pl.ramsey_segments(params, target, tau, rabi, detuning=detuning))
        if noise is None:
            p_up[k] = _p_up(pl.evolve(seq, params).populations(), target)
        else:
            p_up[k] = _p_up(pl.evolve_ensemble(seq, params, noise), target)
    return ExperimentResult(
        axes=(SweepSpec("delay_s", delay_sweep),),
        data={"p_up": p_up},
        metadata=base_metadata("ramsey", params,
                               seed=None if noise is None else noise.seed,
                               target=target, rabi_hz=rabi, detuning_hz=detuning),
    )


def hahn_echo(
    params: dev.DeviceParams,
    target: str,
    total_delay_sweep: Sequence[float],
    noise: pl.NoiseConfig | None = None,
    rabi: float = 10e6,
) -> ExperimentResult:
    """pi/2 - tau/2 - pi - tau/2 - (-pi/2); flat under quasi-static noise."""
    total_delay_sweep = np.asarray(total_delay_sweep, dtype=float)
    p_up = np.empty(len(total_delay_sweep))
    for k, tau in enumerate(total_delay_sweep):
        seq = pl.PulseSequence(pl.hahn_echo_segments(params, target, tau, rabi))
        if noise is None:
            p_up[k] = _p_up(pl.evolve(seq, params).populations(), target)
        else:
            p_up[k] = _p_up(pl.evolve_ensemble(seq, params, noise), target)
    return ExperimentResult(
        axes=(SweepSpec("total_delay_s", total_delay_sweep),),
        data={"p_up": p_up},
        metadata=base_metadata("hahn_echo", params,
                               seed=None if noise is None else noise.seed,
                               target=target, rabi_hz=rabi),
    )


def fit_gaussian_envelope(delays: np.ndarray, p_up: np.ndarray) -> tuple[float, float]:
    """Fit p = b + a exp(-((t + t0)/T2)^2); returns (T2, t0).

    ``t0`` absorbs the finite pulse duration, which adds effective free
    evolution beyond the programmed delay.
    """
    delays = np.asarray(delays, dtype=float)
    p_up = np.asarray(p_up, dtype=float)
    t_scale = delays.max()

    def model(t, a, b, t2, t0):
        return b + a * np.exp(-(((t + t0) / t2) ** 2))

    p0 = (p_up.max() - p_up.min(), p_up.min(), t_scale / 2, 0.0)
    popt, _ = curve_fit(model, delays, p_up, p0=p0,
                        bounds=([0, 0, t_scale / 50, -t_scale], [1, 1, t_scale * 50, t_scale]))
    return float(popt[2]), float(popt[3])


def fit_decaying_cosine(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Fit y = c + a cos(2 pi f x + phi) (no decay term); returns (f, residual).

    The initial frequency guess comes from the peak of a zero-padded
    periodogram of the mean-subtracted data.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx = x[1] - x[0]
    spectrum = np.fft.rfft((y - y.mean()) * np.hanning(len(y)), n=8 * len(y))
    freqs = np.fft.rfftfreq(8 * len(y), dx)
    f0 = float(freqs[np.argmax(np.abs(spectrum[1:])) + 1])

    def model(t, c, a, f, phi):
        return c + a * np.cos(2 * np.pi * f * t + phi)

    best = None
    for phi0 in (0.0, np.pi / 2, np.pi, -np.pi / 2):
        try:
            popt, _ = curve_fit(model, x, y, p0=(y.mean(), (y.max() - y.min()) / 2, f0, phi0),
                                maxfev=20000)
        except RuntimeError:
            continue
        res = float(np.linalg.norm(model(x, *popt) - y))
        if best is None or res < best[1]:
            best = (abs(float(popt[2])), res)
    if best is None:
        raise RuntimeError("cosine fit failed")
    return best


# ---------------------------------------------------------------------------
# Exchange spectroscopy


def exchange_spectroscopy(
    params: dev.DeviceParams,
    v_m: float,
    tau_r_sweep: Sequence[float],
    probe_freq_sweep: Sequence[float],
    control_rabi: float = DEFAULT_RABI,
    probe_rabi: float | None = None,
    probe_duration: float | None = None,
) -> ExperimentResult:
    """Left-qubit probe response versus (control rotation time, probe frequency).

    The control (right) qubit is rotated for ``tau_r`` with exchange already
    on, then a long low-power probe saturates the left qubit whenever the
    probe frequency falls within a linewidth of the conditional resonance:
    the left qubit is left fully mixed (p_up = 1/2) on resonance, weighted
    by the control-state populations.  The linewidth is
    max(1 / (pi tau_probe), probe rabi).
    """
    j = dev.exchange_from_voltage(params.exchange_fit, v_m)
    if probe_duration is None:
        probe_duration = 10.0 * max(params.t2_star_left, params.t2_star_right)
    if probe_rabi is None:
        probe_rabi = j / 20.0
    if probe_rabi > j / 5.0:
        warnings.warn("probe power exceeds J/5; the two branches will blur together",
                      stacklevel=2)
    tau_r_sweep = np.asarray(tau_r_sweep, dtype=float)
    probe_freq_sweep = np.asarray(probe_freq_sweep, dtype=float)

    f = dev.transition_frequencies(params, j)
    linewidth = max(1.0 / (math.pi * probe_duration), probe_rabi)

    p_control = np.empty(len(tau_r_sweep))
    for k, tau_r in enumerate(tau_r_sweep):
        if tau_r == 0:
            p_control[k] = 0.0
            continue
        # exchange stays on during the control rotation (the barrier voltage
        # is held at its measurement value for the whole cycle)
        burst = pl.MicrowaveBurst(target=pl.RIGHT, frequency=f.f_right_down,
                                  rabi=control_rabi, duration=tau_r)
        seg = pl.CompositeSegment(duration=tau_r, exchange=j, microwave=burst)
        pops = pl.evolve(pl.PulseSequence([seg]), params).populations()
        p_control[k] = pops[0] + pops[2]

    on_up = (np.abs(probe_freq_sweep - f.f_left_up) < linewidth).astype(float)
    on_down = (np.abs(probe_freq_sweep - f.f_left_down) < linewidth).astype(float)
    p_up_left = 0.5 * (np.outer(p_control, on_up) + np.outer(1.0 - p_control, on_down))

    return ExperimentResult(
        axes=(SweepSpec("control_burst_s", tau_r_sweep), SweepSpec("probe_frequency_hz", probe_freq_sweep)),
        data={"p_up_left": p_up_left, "p_up_right": np.repeat(p_control[:, None], len(probe_freq_sweep), axis=1)},
        metadata=base_metadata(
            "exchange_spectroscopy", params, v_m_mv=v_m, exchange_hz=j,
            f_left_up_hz=f.f_left_up, f_left_down_hz=f.f_left_down,
            linewidth_hz=linewidth, probe_rabi_hz=probe_rabi, probe_duration_s=probe_duration,
        ),
    )


def spectroscopy_branch_splitting(result: ExperimentResult) -> float:
    """Estimate the two branch frequencies from the response map (grid limited).

    Uses the response rows where the control is most nearly up / down and
    returns the difference of the response centroids.
    """
    p_control = result.data["p_up_right"][:, 0]
    freqs = result.axes[1].values
    row_up = result.data["p_up_left"][np.argmax(p_control)]
    row_down = result.data["p_up_left"][np.argmin(p_control)]
    if row_up.sum() == 0 or row_down.sum() == 0:
        raise RuntimeError("no probe response on one of the branches; widen the frequency sweep")
    f_up = float(np.sum(freqs * row_up) / row_up.sum())
    f_down = float(np.sum(freqs * row_down) / row_down.sum())
    return f_up - f_down


# ---------------------------------------------------------------------------
# Echo-detected exchange phase accumulation


def echo_exchange_phase(
    params: dev.DeviceParams,
    target: str,
    j_on: float,
    tau_dc_sweep: Sequence[float],
    other_qubit_state: str = "down",
    total_delay: float = 2e-6,
    rabi: float = 10e6,
) -> ExperimentResult:
    """Hahn echo with a dc exchange pulse in the first free-evolution half.

    The echo cancels every static phase except the one acquired during the
    exchange window, where the target precesses at its conditional J-shifted
    frequency; p_up therefore oscillates in tau_dc at the frequency shift
    induced by the pulse, and the shift differs by exactly J between the two
    control states.
    """
    tau_dc_sweep = np.asarray(tau_dc_sweep, dtype=float)
    if tau_dc_sweep.max() > total_delay / 2:
        raise ValueError("tau_dc sweep exceeds the echo half-period")
    other = pl.RIGHT if target == pl.LEFT else pl.LEFT
    prep: tuple[pl.Segment, ...] = ()
    if other_qubit_state == "up":
        prep = (pl.rotation_burst(params, other, math.pi, rabi),)
    elif other_qubit_state != "down":
        raise ValueError("other_qubit_state must be 'up' or 'down'")

    p_up = np.empty(len(tau_dc_sweep))
    for k, tau_dc in enumerate(tau_dc_sweep):
        insert = (pl.DcExchange(duration=tau_dc, j=j_on),) if tau_dc > 0 else ()
        seq = pl.PulseSequence(
            prep + pl.hahn_echo_segments(params, target, total_delay, rabi, first_half_insert=insert)
        )
        p_up[k] = _p_up(pl.evolve(seq, params).populations(), target)

    f_on = dev.transition_frequencies(params, j_on)
    f_off = dev.transition_frequencies(params, 0.0)
    if target == pl.LEFT:
        shift_down = f_on.f_left_down - f_off.f_left_down
        shift_up = f_on.f_left_up - f_off.f_left_down
    else:
        shift_down = f_on.f_right_down - f_off.f_right_down
        shift_up = f_on.f_right_up - f_off.f_right_down
    return ExperimentResult(
        axes=(SweepSpec("exchange_pulse_s", tau_dc_sweep),),
        data={"p_up": p_up},
        metadata=base_metadata(
            "echo_exchange_phase", params, target=target, j_on_hz=j_on,
            other_qubit_state=other_qubit_state, total_delay_s=total_delay,
            predicted_shift_down_hz=shift_down, predicted_shift_up_hz=shift_up,
        ),
    )


# ---------------------------------------------------------------------------
# CNOT drivers


def cnot_calibration(
    params: dev.DeviceParams,
    j_on: float,
    tau_p_sweep: Sequence[float],
    input_state: str = "du",
    tau_dc: float = 1e-6,
    rabi: float = 1.0 / (2.0 * 130e-9),
) -> ExperimentResult:
    """Conditional oscillations: burst length swept inside a long exchange window.

    The drive sits on the control-up left-qubit line, so oscillations appear
    only when the control (right) qubit is up; the two control-up inputs give
    anti-correlated target traces.
    """
    tau_p_sweep = np.asarray(tau_p_sweep, dtype=float)
    init = TwoQubitState.basis(input_state)
    p_left = np.empty(len(tau_p_sweep))
    p_right = np.empty(len(tau_p_sweep))
    for k, tau_p in enumerate(tau_p_sweep):
        seq = pl.cnot_sequence(params, j_on, tau_p, tau_dc, rabi=rabi, initial_state=init)
        pops = pl.evolve(seq, params).populations()
        p_left[k] = _p_up(pops, pl.LEFT)
        p_right[k] = _p_up(pops, pl.RIGHT)
    return ExperimentResult(
        axes=(SweepSpec("burst_length_s", tau_p_sweep),),
        data={"p_up_left": p_left, "p_up_right": p_right},
        metadata=base_metadata("cnot_calibration", params, j_on_hz=j_on,
                               input_state=input_state, tau_dc_s=tau_dc, rabi_hz=rabi),
    )


def cnot_superposition_scan(
    params: dev.DeviceParams,
    theta_sweep: Sequence[float],
    gate: pl.CnotGate | None = None,
    prep_rabi: float = DEFAULT_RABI,
) -> ExperimentResult:
    """CNOT response to control-qubit superposition inputs.

    Prepares cos(theta/2)|d> - i sin(theta/2)|u> on the control via an
    x rotation, applies the calibrated gate, and records both spin-up
    probabilities; the target follows the control, so both curves trace
    sin^2(theta/2).
    """
    if gate is None:
        gate = pl.calibrate_cnot(params, 1.0 / 204e-9)
    theta_sweep = np.asarray(theta_sweep, dtype=float)
    p_left = np.empty(len(theta_sweep))
    p_right = np.empty(len(theta_sweep))
    for k, theta in enumerate(theta_sweep):
        segments: list[pl.Segment] = []
        start = 0.0
        if theta > 0:
            prep = pl.rotation_burst(params, pl.RIGHT, theta, prep_rabi)
            segments.append(prep)
            start = prep.duration
        segments.extend(gate.segments(start_time=start))
        pops = pl.evolve(pl.PulseSequence(segments), params).populations()
        p_left[k] = _p_up(pops, pl.LEFT)
        p_right[k] = _p_up(pops, pl.RIGHT)
    return ExperimentResult(
        axes=(SweepSpec("theta_rad", theta_sweep),),
        data={"p_up_left": p_left, "p_up_right": p_right},
        metadata=base_metadata("cnot_superposition_scan", params,
                               j_on_hz=gate.j_on, tau_p_s=gate.tau_p, rabi_hz=gate.rabi),
    )


# ---------------------------------------------------------------------------
# Randomized benchmarking


@dataclass(frozen=True)
class Depolarizing:
    """Depolarizing channel with parameter ``rate`` applied after each Clifford."""

    rate: float


@dataclass(frozen=True)
class QuasiStaticDephasing:
    """Gaussian frequency offset (std ``sigma`` Hz) redrawn per shot."""

    sigma: float


ErrorModel = Depolarizing | QuasiStaticDephasing | None


@dataclass(frozen=True)
class RbFit:
    a: float
    b: float
    p_c: float
    f_c: float
    p_c_err: float


def _letter_unitary(letter: str, rabi: float, detuning: float) -> np.ndarray:
    """2x2 propagator of one generator burst at a quasi-static detuning.

    This is the single-qubit reduction of the rotating-frame engine: with
    exchange off and the partner idle the four-level propagator factorizes.
    """
    angle, axis_phase = GENERATOR_PULSES[letter]
    duration = angle / (2.0 * math.pi * rabi)
    nx = -rabi * math.sin(axis_phase)
    ny = rabi * math.cos(axis_phase)
    nz = detuning
    omega = math.sqrt(nx * nx + ny * ny + nz * nz)
    theta = 2.0 * math.pi * omega * duration
    if omega == 0.0:
        return np.eye(2, dtype=complex)
    ux, uy, uz = nx / omega, ny / omega, nz / omega
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array(
        [[c - 1j * s * uz, -s * (uy + 1j * ux)],
         [s * (uy - 1j * ux), c + 1j * s * uz]],
        dtype=complex,
    )


def compiled_clifford(index: int, rabi: float, detuning: float = 0.0) -> np.ndarray:
    """Pulse-compiled unitary of Clifford ``index`` at a given detuning."""
    group = clifford_group()
    u = np.eye(2, dtype=complex)
    for letter in group.words[index]:
        u = _letter_unitary(letter, rabi, detuning) @ u
    return u


def run_rb(
    params: dev.DeviceParams,
    target: str,
    n_cliffords_list: Sequence[int],
    n_sequences: int = 30,
    error_model: ErrorModel = None,
    seed: int = 0,
    shots: int = 200,
    rabi: float = DEFAULT_RABI,
) -> tuple[ExperimentResult, RbFit]:
    """Single-qubit Clifford randomized benchmarking with recovery gates.

    Random Clifford strings are compiled to resonant x/y quarter-turn pulses;
    a recovery Clifford (group-inverse lookup composed with a flip) returns
    the qubit to spin up in the error-free case.  The mean spin-up return
    probability is fit to a * p_c**n + b and the Clifford fidelity reported
    as F_c = (1 + p_c) / 2.  ``shots`` controls binomial readout sampling;
    the dephasing model redraws its frequency offset every shot.
    """
    group = clifford_group()
    flip = x180_index(group)
    lengths = np.asarray(n_cliffords_list, dtype=int)
    down = np.array([0.0, 1.0], dtype=complex)  # |d> in the (up, down) basis

    mean_p = np.empty(len(lengths))
    sem_p = np.empty(len(lengths))
    for li, n in enumerate(lengths):
        seq_means = np.empty(n_sequences)
        for s in range(n_sequences):
            rng = np.random.default_rng((seed, int(n), s))
            indices = rng.integers(0, len(group), size=int(n))
            recovery = int(group.product[flip, group.inverse[group.compose_word(indices)]])
            play = list(indices) + [recovery]

            if isinstance(error_model, Depolarizing):
                r = error_model.rate
                rho = np.outer(down, down.conj())
                for idx in play:
                    u = group.unitaries[idx]
                    rho = u @ rho @ u.conj().T
                    rho = (1.0 - r) * rho + r * 0.5 * np.eye(2)
                p_up = float(rho[0, 0].real)
                seq_means[s] = rng.binomial(shots, min(max(p_up, 0.0), 1.0)) / shots
            elif isinstance(error_model, QuasiStaticDephasing):
                hits = 0
                for _ in range(shots):
                    delta = rng.normal(0.0, error_model.sigma)
                    cache: dict[int, np.ndarray] = {}
                    psi = down.copy()
                    for idx in play:
                        u = cache.get(idx)
                        if u is None:
                            u = cache[idx] = compiled_clifford(idx, rabi, delta)
                        psi = u @ psi
                    p_up = float(abs(psi[0]) ** 2)
                    hits += rng.binomial(1, min(max(p_up, 0.0), 1.0))
                seq_means[s] = hits / shots
            else:
                psi = down.copy()
                for idx in play:
                    psi = compiled_clifford(idx, rabi, 0.0) @ psi
                seq_means[s] = float(abs(psi[0]) ** 2)
        mean_p[li] = seq_means.mean()
        sem_p[li] = seq_means.std(ddof=1) / math.sqrt(n_sequences) if n_sequences > 1 else 0.0

    fit = _fit_rb_decay(lengths, mean_p, sem_p)
    result = ExperimentResult(
        axes=(SweepSpec("n_cliffords", lengths.astype(float)),),
        data={"p_up": mean_p, "p_up_sem": sem_p},
        metadata=base_metadata(
            "randomized_benchmarking", params, seed=seed, target=target,
            n_sequences=n_sequences, shots=shots, rabi_hz=rabi,
            error_model=repr(error_model),
            fit={"a": fit.a, "b": fit.b, "p_c": fit.p_c, "f_c": fit.f_c, "p_c_err": fit.p_c_err},
        ),
    )
    return result, fit


def _fit_rb_decay(lengths: np.ndarray, p_up: np.ndarray, sem: np.ndarray) -> RbFit:
    def model(n, a, p, b):
        return a * np.power(p, n) + b

    sigma = None
    if np.all(sem > 0):
        sigma = sem
    try:
        popt, pcov = curve_fit(
            model, lengths, p_up, p0=(0.5, 0.99, 0.5),
            sigma=sigma, absolute_sigma=sigma is not None,
            bounds=([0.0, 0.0, 0.0], [1.0, 1.0, 1.0]), maxfev=20000,
        )
    except RuntimeError as exc:
        raise RuntimeError(f"benchmarking decay fit failed: {exc}") from exc
    a, p_c, b = popt
    p_err = float(math.sqrt(max(pcov[1, 1], 0.0)))
    return RbFit(a=float(a), b=float(b), p_c=float(p_c), f_c=(1.0 + float(p_c)) / 2.0, p_c_err=p_err)
