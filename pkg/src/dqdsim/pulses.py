"""Pulse sequences and time-dependent two-qubit evolution.

Evolution runs in a rotating frame common to both spins,

    U_frame = exp(+i 2 pi f_frame t (S_zL + S_zR)),

under the rotating-wave approximation: a microwave burst of amplitude
``rabi`` (the on-resonance population Rabi frequency, Hz) at frequency f_b
and phase phi contributes

    rabi * (cos(chi) S_y - sin(chi) S_x),   chi = 2 pi (f_b - f_frame) t + phi

on the target spin, so phi = -pi/2 drives an x rotation and phi = 0 a y
rotation.  The frame frequency follows the active burst per segment; frame
changes insert the exact diagonal rephasing factor, and burst phases are
referenced to absolute sequence time (the microwave sources stay coherent
for the whole sequence).

Exchange pulses are square but treated as adiabatic with respect to the
Zeeman-difference gap: amplitudes are carried over between the bare basis
and the instantaneous eigenbasis label by label, so a dc exchange segment is
a pure (exact) phase evolution at the instantaneous eigenvalues.  Within a
segment the Hamiltonian is piecewise constant and each sub-step is an exact
matrix exponential; time-dependent (off-frame) drives are sampled at the
sub-step midpoint.

A fine-step lab-frame integrator (no rotating-wave approximation) is
included purely as a validation oracle; it is orders of magnitude slower.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from . import device as dev
from .qcore import OPS, TOTAL_SZ_DIAG, TwoQubitState, expm_skew_hermitian

LEFT = "left"
RIGHT = "right"

#: sub-steps per modulation period of an off-frame drive
STEPS_PER_CYCLE = 50


@dataclass(frozen=True)
class MicrowaveBurst:
    """Resonant drive on one spin; ``rabi`` is the population Rabi frequency."""

    target: str
    frequency: float
    rabi: float
    phase: float = -math.pi / 2  # x rotation by default
    duration: float = 0.0

    def __post_init__(self) -> None:
        if self.target not in (LEFT, RIGHT):
            raise ValueError("target must be 'left' or 'right'")
        if self.rabi < 0 or self.duration < 0:
            raise ValueError("rabi amplitude and duration must be non-negative")


@dataclass(frozen=True)
class DcExchange:
    """Square exchange pulse, either at an explicit J or at a barrier voltage."""

    duration: float
    j: float | None = None
    v_m: float | None = None

    def __post_init__(self) -> None:
        if self.duration < 0:
            raise ValueError("duration must be non-negative")
        if (self.j is None) == (self.v_m is None):
            raise ValueError("specify exactly one of j or v_m")

    def exchange(self, params: dev.DeviceParams) -> float:
        if self.j is not None:
            return self.j
        return dev.exchange_from_voltage(params.exchange_fit, self.v_m)


@dataclass(frozen=True)
class Idle:
    duration: float

    def __post_init__(self) -> None:
        if self.duration < 0:
            raise ValueError("duration must be non-negative")


@dataclass(frozen=True)
class CompositeSegment:
    """Exchange held on while a microwave burst is applied (the CNOT primitive)."""

    duration: float
    exchange: float
    microwave: MicrowaveBurst

    def __post_init__(self) -> None:
        if self.duration < 0:
            raise ValueError("duration must be non-negative")
        if self.exchange < 0:
            raise ValueError("exchange must be non-negative")


Segment = MicrowaveBurst | DcExchange | Idle | CompositeSegment


@dataclass(frozen=True)
class PulseSequence:
    segments: tuple[Segment, ...]
    initial_state: TwoQubitState

    def __init__(self, segments: Iterable[Segment], initial_state: TwoQubitState | None = None):
        object.__setattr__(self, "segments", tuple(segments))
        if initial_state is None:
            initial_state = TwoQubitState.basis("dd")
        object.__setattr__(self, "initial_state", initial_state)

    @property
    def duration(self) -> float:
        return sum(s.duration for s in self.segments)

    def extended(self, more: Iterable[Segment]) -> "PulseSequence":
        return PulseSequence(self.segments + tuple(more), self.initial_state)


@dataclass(frozen=True)
class NoiseConfig:
    """Quasi-static Gaussian frequency noise, one draw per shot.

    ``sigma_f_left/right`` are the standard deviations (Hz) of the per-shot
    qubit frequency offsets.  sigma = sqrt(2) / (2 pi T2*) reproduces a
    Gaussian free-induction decay with time constant T2*.  This model is
    deliberately static within a shot: a Hahn echo refocuses it completely,
    so echo decay times are not reproduced.
    """

    sigma_f_left: float = 0.0
    sigma_f_right: float = 0.0
    n_samples: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.sigma_f_left < 0 or self.sigma_f_right < 0:
            raise ValueError("noise sigmas must be non-negative")
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")

    @classmethod
    def from_device(cls, params: dev.DeviceParams, n_samples: int, seed: int = 0) -> "NoiseConfig":
        return cls(
            sigma_f_left=math.sqrt(2.0) / (2.0 * math.pi * params.t2_star_left),
            sigma_f_right=math.sqrt(2.0) / (2.0 * math.pi * params.t2_star_right),
            n_samples=n_samples,
            seed=seed,
        )


def sigma_from_t2_star(t2_star: float) -> float:
    return math.sqrt(2.0) / (2.0 * math.pi * t2_star)


# ---------------------------------------------------------------------------
# Rotating-frame Hamiltonian assembly


def _segment_parts(segment: Segment) -> tuple[float | None, float, MicrowaveBurst | None]:
    """(explicit J or None, voltage-mapped handled by caller) -> (j, dur, burst)."""
    if isinstance(segment, MicrowaveBurst):
        return 0.0, segment.duration, segment
    if isinstance(segment, DcExchange):
        return None, segment.duration, None
    if isinstance(segment, Idle):
        return 0.0, segment.duration, None
    if isinstance(segment, CompositeSegment):
        return segment.exchange, segment.duration, segment.microwave
    raise TypeError(f"unknown segment type {type(segment).__name__}")


def _drive_generator(burst: MicrowaveBurst, chi: float) -> np.ndarray:
    sy = OPS.sy_left if burst.target == LEFT else OPS.sy_right
    sx = OPS.sx_left if burst.target == LEFT else OPS.sx_right
    return burst.rabi * (math.cos(chi) * sy - math.sin(chi) * sx)


def rotating_frame_hamiltonian(
    params: dev.DeviceParams,
    segment: Segment,
    frame_freq: float,
    t: float,
    offsets: tuple[float, float] = (0.0, 0.0),
) -> np.ndarray:
    """RWA Hamiltonian of one segment at absolute time ``t``, in Hz.

    The static part is the bare-basis device Hamiltonian with the frame term
    subtracted; ``offsets`` are additional quasi-static per-qubit frequency
    shifts (used by the noise ensemble).
    """
    if frame_freq <= 0:
        raise ValueError("frame frequency must be positive")
    j, _, burst = _segment_parts(segment)
    if j is None:
        j = segment.exchange(params)
    b_left, b_right = params.z_fields(j)
    h = dev.static_hamiltonian(j, b_left - frame_freq + offsets[0], b_right - frame_freq + offsets[1])
    if burst is not None and burst.rabi > 0:
        chi = 2.0 * math.pi * (burst.frequency - frame_freq) * t + burst.phase
        h = h + _drive_generator(burst, chi)
    return h


# ---------------------------------------------------------------------------
# Evolution


def _phase_diag(delta_f: float, t: float) -> np.ndarray:
    return np.exp(2j * math.pi * delta_f * t * TOTAL_SZ_DIAG)


def _static_eigensystem(params, j, offsets):
    b_left, b_right = params.z_fields(j)
    return dev.labeled_eigensystem(j, b_left + offsets[0], b_right + offsets[1])


def _evolve(
    seq: PulseSequence,
    params: dev.DeviceParams,
    dt_max: float | None,
    offsets: tuple[float, float],
) -> tuple[np.ndarray, float, float]:
    """Propagate in the label basis; returns (amplitudes, frame_freq, t_end)."""
    psi = seq.initial_state.amplitudes.copy()
    frame = None
    t = 0.0
    for segment in seq.segments:
        j, duration, burst = _segment_parts(segment)
        if j is None:
            j = segment.exchange(params)
        if j > 0:
            params.check_regime(j)
        if duration == 0.0:
            continue

        new_frame = burst.frequency if burst is not None else (frame or params.e_z)
        if frame is not None and new_frame != frame:
            psi = _phase_diag(new_frame - frame, t) * psi
        frame = new_frame

        levels, vectors = _static_eigensystem(params, j, offsets)
        h_static = np.diag(levels - frame * TOTAL_SZ_DIAG)

        detuning = 0.0 if burst is None else burst.frequency - frame
        if burst is not None and burst.rabi > 0:
            drive_bare_y = OPS.sy_left if burst.target == LEFT else OPS.sy_right
            drive_bare_x = OPS.sx_left if burst.target == LEFT else OPS.sx_right
            m_y = vectors.conj().T @ drive_bare_y @ vectors
            m_x = vectors.conj().T @ drive_bare_x @ vectors
        else:
            m_y = m_x = None

        time_dependent = m_y is not None and detuning != 0.0
        if time_dependent or dt_max is not None:
            dt_cap = duration
            if dt_max is not None:
                dt_cap = min(dt_cap, dt_max)
            if time_dependent:
                dt_cap = min(dt_cap, 1.0 / (STEPS_PER_CYCLE * abs(detuning)))
            scale = float(np.abs(h_static).max())
            if m_y is not None:
                scale = max(scale, burst.rabi)
            if scale > 0 and dt_max is not None:
                dt_cap = min(dt_cap, 1.0 / (STEPS_PER_CYCLE * scale))
            n_steps = max(1, math.ceil(duration / dt_cap))
        else:
            n_steps = 1
        dt = duration / n_steps

        if m_y is None:
            # pure phase evolution in the instantaneous eigenbasis
            psi = np.exp(-2j * math.pi * (levels - frame * TOTAL_SZ_DIAG) * duration) * psi
        else:
            for k in range(n_steps):
                t_mid = t + (k + 0.5) * dt
                chi = 2.0 * math.pi * detuning * t_mid + burst.phase
                h = h_static + burst.rabi * (math.cos(chi) * m_y - math.sin(chi) * m_x)
                psi = expm_skew_hermitian(h, dt) @ psi
        t += duration
    if frame is None:
        frame = params.e_z
    return psi, frame, t


def evolve(
    seq: PulseSequence,
    params: dev.DeviceParams,
    dt_max: float | None = None,
    offsets: tuple[float, float] = (0.0, 0.0),
) -> TwoQubitState:
    """Final state after piecewise propagation of the sequence.

    ``dt_max`` forces sub-stepping even for segments whose rotating-frame
    Hamiltonian is constant (those are otherwise propagated in a single exact
    exponential); off-frame drives are always sub-stepped to resolve the
    modulation.  The returned amplitudes are in the rotating frame of the
    last active burst; populations are frame independent.
    """
    if dt_max is not None and dt_max <= 0:
        raise ValueError("dt_max must be positive")
    psi, _, _ = _evolve(seq, params, dt_max, offsets)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-9:
        raise RuntimeError(f"propagation lost norm: {norm}")
    return TwoQubitState(psi / norm)


def evolve_ensemble(
    seq: PulseSequence,
    params: dev.DeviceParams,
    noise: NoiseConfig,
    dt_max: float | None = None,
) -> np.ndarray:
    """Populations averaged over quasi-static Gaussian frequency offsets.

    Each sample draws one (left, right) offset pair from a stream derived
    from ``(seed, sample index)``, so the average is reproducible no matter
    how samples would be distributed over workers.
    """
    total = np.zeros(4)
    for i in range(noise.n_samples):
        rng = np.random.default_rng((noise.seed, i))
        d_left = rng.normal(0.0, noise.sigma_f_left) if noise.sigma_f_left else 0.0
        d_right = rng.normal(0.0, noise.sigma_f_right) if noise.sigma_f_right else 0.0
        state = evolve(seq, params, dt_max=dt_max, offsets=(d_left, d_right))
        total += state.populations()
    return total / noise.n_samples


def evolve_lab_frame(
    seq: PulseSequence,
    params: dev.DeviceParams,
    dt: float,
    offsets: tuple[float, float] = (0.0, 0.0),
) -> TwoQubitState:
    """Validation oracle: integrate the lab-frame Hamiltonian without RWA.

    The drive enters as ``2 rabi cos(2 pi f t + phi) S_y`` on the target (the
    factor 2 makes ``rabi`` the population Rabi frequency, matching the RWA
    engine).  The final state is rotated into the frame of the last burst so
    it can be compared directly with :func:`evolve`.  ``dt`` must resolve the
    Zeeman precession, so this is only affordable for short sequences.
    """
    psi = seq.initial_state.amplitudes.copy()
    t = 0.0
    frame = None
    for segment in seq.segments:
        j, duration, burst = _segment_parts(segment)
        if j is None:
            j = segment.exchange(params)
        if duration == 0.0:
            continue
        b_left, b_right = params.z_fields(j)
        h0 = dev.static_hamiltonian(j, b_left + offsets[0], b_right + offsets[1])
        if burst is not None:
            frame = burst.frequency
        n_steps = max(1, math.ceil(duration / dt))
        step = duration / n_steps
        for k in range(n_steps):
            h = h0
            if burst is not None and burst.rabi > 0:
                t_mid = t + (k + 0.5) * step
                amp = 2.0 * burst.rabi * math.cos(2.0 * math.pi * burst.frequency * t_mid + burst.phase)
                h = h0 + amp * (OPS.sy_left if burst.target == LEFT else OPS.sy_right)
            psi = expm_skew_hermitian(h, step) @ psi
        t += duration
    if frame is not None:
        psi = np.exp(2j * math.pi * frame * t * TOTAL_SZ_DIAG) * psi
    return TwoQubitState(psi / np.linalg.norm(psi))


# ---------------------------------------------------------------------------
# Standard burst constructors


def rotation_burst(
    params: dev.DeviceParams,
    target: str,
    angle: float,
    rabi: float,
    axis_phase: float = -math.pi / 2,
    frequency: float | None = None,
    detuning: float = 0.0,
) -> MicrowaveBurst:
    """Resonant rotation by ``angle`` (rad); duration = angle / (2 pi rabi).

    The default frequency is the target's J = 0 transition; ``axis_phase``
    follows the x-for-(-pi/2), y-for-0 convention.
    """
    if angle < 0:
        raise ValueError("rotation angle must be non-negative; shift the phase instead")
    if frequency is None:
        f = dev.transition_frequencies(params, 0.0)
        frequency = f.f_left_down if target == LEFT else f.f_right_down
    return MicrowaveBurst(
        target=target,
        frequency=frequency + detuning,
        rabi=rabi,
        phase=axis_phase,
        duration=angle / (2.0 * math.pi * rabi),
    )


# ---------------------------------------------------------------------------
# Conditional phase and the resonant CNOT


def conditional_phase(params: dev.DeviceParams, j_on: float, tau_dc: float) -> float:
    """Differential phase (rad) between control branches after a dc pulse.

    The target-qubit coherence advances 2 pi J tau_dc further when the
    control is up than when it is down, because the two conditional
    transition frequencies differ by exactly J.  Returned wrapped to
    [0, 2 pi); it vanishes exactly at tau_dc = k / J.
    """
    return (2.0 * math.pi * j_on * tau_dc) % (2.0 * math.pi)


@dataclass(frozen=True)
class CnotGate:
    """Calibrated resonant-CNOT parameters plus single-qubit phase bookkeeping.

    ``phase_left/right`` are virtual-z angles: any burst played after the
    gate on a given qubit must add the matching correction to its drive
    phase (see :func:`corrected_burst`).  ``global_phase`` completes the
    bookkeeping for gate-matrix comparisons.
    """

    j_on: float
    tau_p: float
    tau_dc: float
    rabi: float
    frequency: float
    target_idle_frequency: float = 0.0
    phase_left: float = 0.0
    phase_right: float = 0.0
    global_phase: float = 0.0

    def segments(self, burst_phase: float = -math.pi / 2, start_time: float = 0.0) -> tuple[Segment, ...]:
        """Gate segments for a gate beginning at absolute ``start_time``.

        The conditional burst runs off the target's idle frequency, so its
        rotation axis drifts relative to the target's frame at the
        difference frequency; re-referencing the drive phase to the gate
        start keeps the played gate identical to the calibrated one no
        matter where in a sequence it sits.
        """
        pad = (self.tau_dc - self.tau_p) / 2.0
        phase = burst_phase
        if start_time != 0.0 and self.target_idle_frequency != 0.0:
            phase -= 2.0 * math.pi * (self.frequency - self.target_idle_frequency) * start_time
        burst = MicrowaveBurst(
            target=LEFT, frequency=self.frequency, rabi=self.rabi,
            phase=phase, duration=self.tau_p,
        )
        parts: list[Segment] = []
        if pad > 0:
            parts.append(DcExchange(duration=pad, j=self.j_on))
        parts.append(CompositeSegment(duration=self.tau_p, exchange=self.j_on, microwave=burst))
        if pad > 0:
            parts.append(DcExchange(duration=pad, j=self.j_on))
        return tuple(parts)

    def corrected_burst(self, burst: MicrowaveBurst) -> MicrowaveBurst:
        # a pending virtual Z(a) commuted through a burst rotates its axis by -a
        correction = self.phase_left if burst.target == LEFT else self.phase_right
        return replace(burst, phase=burst.phase - correction)


def cnot_sequence(
    params: dev.DeviceParams,
    j_on: float,
    tau_p: float,
    tau_dc: float,
    rabi: float | None = None,
    initial_state: TwoQubitState | None = None,
    burst_phase: float = -math.pi / 2,
) -> PulseSequence:
    """Exchange window of length tau_dc with a centered conditional burst.

    The burst drives the left-qubit transition conditioned on the control
    (right) qubit being up, at frequency ``f_left_up(j_on)``.  ``rabi``
    defaults to the pi condition 1 / (2 tau_p).
    """
    if tau_p > tau_dc:
        raise ValueError("burst length tau_p must not exceed the exchange window tau_dc")
    if rabi is None:
        rabi = 1.0 / (2.0 * tau_p)
    freq = dev.transition_frequencies(params, j_on).f_left_up
    gate = CnotGate(j_on=j_on, tau_p=tau_p, tau_dc=tau_dc, rabi=rabi, frequency=freq)
    return PulseSequence(gate.segments(burst_phase), initial_state)


IDEAL_CNOT = np.array(
    [[0, 0, 1, 0],
     [0, 1, 0, 0],
     [1, 0, 0, 0],
     [0, 0, 0, 1]],
    dtype=complex,
)

_ML = np.array([0.5, 0.5, -0.5, -0.5])  # S_zL diagonal
_MR = np.array([0.5, -0.5, 0.5, -0.5])  # S_zR diagonal


def extract_gate(segments: Sequence[Segment], params: dev.DeviceParams) -> np.ndarray:
    """Unitary implemented by the segments, referenced to the qubit frames.

    The four basis states are evolved and the resulting matrix is rotated
    from the integration frame into the per-qubit rotating frames at the
    idle (J = 0) resonance frequencies.  In those frames an idling qubit
    accumulates no phase, so the matrix composes correctly with resonant
    bursts played before or after the block.
    """
    cols = []
    frame = t_end = None
    for label in ("uu", "ud", "du", "dd"):
        seq = PulseSequence(segments, TwoQubitState.basis(label))
        psi, frame, t_end = _evolve(seq, params, None, (0.0, 0.0))
        cols.append(psi)
    u = np.stack(cols, axis=1)
    f = dev.transition_frequencies(params, 0.0)
    phases = np.exp(2j * math.pi * t_end * ((f.f_left_down - frame) * _ML
                                            + (f.f_right_down - frame) * _MR))
    return phases[:, None] * u


def _z_phase_corrections(u: np.ndarray) -> tuple[float, float, float]:
    """Solve (global, left, right) z phases mapping u onto the ideal CNOT.

    Conditions: the dd->dd, ud->ud and du->uu matrix elements of
    exp(i g) Z_L(a) Z_R(b) u are made real positive, which fixes the three
    angles uniquely (mod 2 pi).
    """
    p_dd = -np.angle(u[3, 3])
    p_ud = -np.angle(u[1, 1])
    p_du = -np.angle(u[0, 2])
    # the correction phases enter those elements as
    #   g + a/2 + b/2 = p_dd,  g - a/2 + b/2 = p_ud,  g - a/2 - b/2 = p_du
    a = p_dd - p_ud
    b = p_ud - p_du
    g = p_dd - a / 2.0 - b / 2.0
    return g, a, b


def apply_phase_corrections(u: np.ndarray, g: float, a: float, b: float) -> np.ndarray:
    z_left = np.exp(-0.5j * a * np.array([1.0, 1.0, -1.0, -1.0]))
    z_right = np.exp(-0.5j * b * np.array([1.0, -1.0, 1.0, -1.0]))
    return np.exp(1j * g) * (z_left * z_right)[:, None] * u


def entanglement_fidelity(u: np.ndarray, target: np.ndarray) -> float:
    return float(abs(np.trace(target.conj().T @ u) / 4.0) ** 2)


def calibrate_cnot(params: dev.DeviceParams, j_on: float, extra_padding_cycles: int = 0) -> CnotGate:
    """Calibrated CNOT at exchange ``j_on``.

    The burst satisfies the synchronization condition rabi = J / sqrt(3):
    the resonant branch completes a pi rotation in tau_p = 1 / (2 rabi)
    while the branch detuned by J completes exactly one generalized-Rabi
    cycle and returns to identity, so no population leaks into the
    control-down branch.  The conditional phase of the detuned branch is
    absorbed into that full cycle, which requires the exchange-only padding
    around the burst to wind an integer number of conditional-phase turns:
    tau_dc = tau_p + k / J with k = ``extra_padding_cycles`` (default 0,
    i.e. the exchange window equals the burst).  The residual deterministic
    single-qubit phases are solved from the extracted gate matrix and stored
    for downstream phase bookkeeping.
    """
    rabi = j_on / math.sqrt(3.0)
    tau_p = 1.0 / (2.0 * rabi)
    tau_dc = tau_p + extra_padding_cycles / j_on
    freq = dev.transition_frequencies(params, j_on).f_left_up
    idle = dev.transition_frequencies(params, 0.0).f_left_down
    gate = CnotGate(j_on=j_on, tau_p=tau_p, tau_dc=tau_dc, rabi=rabi,
                    frequency=freq, target_idle_frequency=idle)
    u_raw = extract_gate(gate.segments(), params)
    g, a, b = _z_phase_corrections(u_raw)
    return replace(gate, phase_left=a, phase_right=b, global_phase=g)


# ---------------------------------------------------------------------------
# Ramsey / echo sequence builders (shared by the experiment drivers)


def ramsey_segments(
    params: dev.DeviceParams,
    target: str,
    delay: float,
    rabi: float,
    detuning: float = 0.0,
) -> tuple[Segment, ...]:
    """pi/2 - wait - pi/2, all x axis, drive detuned by ``detuning``."""
    half = rotation_burst(params, target, math.pi / 2, rabi, detuning=detuning)
    return (half, Idle(delay), half)


def hahn_echo_segments(
    params: dev.DeviceParams,
    target: str,
    total_delay: float,
    rabi: float,
    first_half_insert: Sequence[Segment] = (),
) -> tuple[Segment, ...]:
    """pi/2 - tau/2 - pi - tau/2 - (-pi/2); refocuses static detunings.

    ``first_half_insert`` segments (e.g. a dc exchange pulse) are placed
    inside the first free-evolution window; their duration counts toward
    tau/2.  The closing pi/2 is about -x so a fully refocused state returns
    spin up.
    """
    half = total_delay / 2.0
    insert_time = sum(s.duration for s in first_half_insert)
    if insert_time > half:
        raise ValueError("inserted segments exceed the first free-evolution half")
    x90 = rotation_burst(params, target, math.pi / 2, rabi)
    x180 = rotation_burst(params, target, math.pi, rabi)
    x90_minus = rotation_burst(params, target, math.pi / 2, rabi, axis_phase=math.pi / 2)
    return (
        x90,
        *first_half_insert,
        Idle(half - insert_time),
        x180,
        Idle(half),
        x90_minus,
    )


# ---------------------------------------------------------------------------
# Line-oriented sequence serialization

_COMPLEX_FMT = "{0.real:.17g}{0.imag:+.17g}j"


def sequence_to_text(seq: PulseSequence) -> str:
    """One segment per line as key=value pairs; first line holds the state."""
    amps = ",".join(_COMPLEX_FMT.format(a) for a in seq.initial_state.amplitudes)
    lines = [f"state amplitudes={amps}"]
    for s in seq.segments:
        if isinstance(s, MicrowaveBurst):
            lines.append(
                f"burst target={s.target} frequency={s.frequency:.17g} "
                f"rabi={s.rabi:.17g} phase={s.phase:.17g} duration={s.duration:.17g}"
            )
        elif isinstance(s, DcExchange):
            if s.j is not None:
                lines.append(f"exchange j={s.j:.17g} duration={s.duration:.17g}")
            else:
                lines.append(f"exchange v_m={s.v_m:.17g} duration={s.duration:.17g}")
        elif isinstance(s, Idle):
            lines.append(f"idle duration={s.duration:.17g}")
        elif isinstance(s, CompositeSegment):
            m = s.microwave
            lines.append(
                f"composite j={s.exchange:.17g} duration={s.duration:.17g} "
                f"target={m.target} frequency={m.frequency:.17g} "
                f"rabi={m.rabi:.17g} phase={m.phase:.17g}"
            )
        else:
            raise TypeError(f"unknown segment type {type(s).__name__}")
    return "\n".join(lines) + "\n"


def _parse_fields(parts: list[str], lineno: int) -> dict[str, str]:
    fields = {}
    for part in parts:
        if "=" not in part:
            raise ValueError(f"line {lineno}: expected key=value, got {part!r}")
        key, _, val = part.partition("=")
        fields[key] = val
    return fields


def sequence_from_text(text: str) -> PulseSequence:
    initial = None
    segments: list[Segment] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kind, *parts = line.split()
        fields = _parse_fields(parts, lineno)
        if kind == "state":
            amps = [complex(tok) for tok in fields["amplitudes"].split(",")]
            initial = TwoQubitState(np.array(amps))
        elif kind == "burst":
            segments.append(MicrowaveBurst(
                target=fields["target"], frequency=float(fields["frequency"]),
                rabi=float(fields["rabi"]), phase=float(fields["phase"]),
                duration=float(fields["duration"]),
            ))
        elif kind == "exchange":
            segments.append(DcExchange(
                duration=float(fields["duration"]),
                j=float(fields["j"]) if "j" in fields else None,
                v_m=float(fields["v_m"]) if "v_m" in fields else None,
            ))
        elif kind == "idle":
            segments.append(Idle(duration=float(fields["duration"])))
        elif kind == "composite":
            segments.append(CompositeSegment(
                duration=float(fields["duration"]), exchange=float(fields["j"]),
                microwave=MicrowaveBurst(
                    target=fields["target"], frequency=float(fields["frequency"]),
                    rabi=float(fields["rabi"]), phase=float(fields["phase"]),
                    duration=float(fields["duration"]),
                ),
            ))
        else:
            raise ValueError(f"line {lineno}: unknown segment kind {kind!r}")
    return PulseSequence(segments, initial)
