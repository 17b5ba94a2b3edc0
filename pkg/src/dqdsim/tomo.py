"""Two-qubit state tomography and Bell-state fidelity analysis.

Measurement model: both spins are read in the z basis after single-qubit
pre-rotations.  An x quarter turn maps Y onto the measured Z and a y quarter
turn maps X onto -Z, so the nine setting combinations of {identity, x90,
y90} recover all fifteen non-trivial Pauli expectations; the density matrix
follows by linear inversion, rho = (1/4) sum <P> P, optionally followed by
eigenvalue clipping to restore physicality.

State fidelity against a pure target uses the square-root convention
F = sqrt(<psi| rho |psi>).  Note that much of the literature instead reports
the overlap <psi| rho |psi> itself; the square root is what the reference
visibility-limited value 0.805 corresponds to.

Finite readout visibility enters as a symmetric per-qubit confusion channel:
single-qubit expectations shrink by that qubit's visibility and two-qubit
correlators by the product of both, which is also available as an asymmetric
(f_up, f_down) confusion-matrix variant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import device as dev
from . import pulses as pl
from .qcore import DensityMatrix, TwoQubitState, all_pauli_labels, density_from_pauli_vector
from .results import base_metadata

PREROTATIONS = ("I", "X90", "Y90", "X180")

#: pre-rotation -> (measured Pauli axis, sign) for a z-basis readout
_AXIS_OF = {"I": ("Z", 1.0), "X90": ("Y", 1.0), "Y90": ("X", -1.0), "X180": ("Z", -1.0)}


@dataclass(frozen=True)
class TomographyRecord:
    """Outcome probabilities (uu, ud, du, dd) after one pre-rotation setting."""

    prerotation: tuple[str, str]
    probabilities: np.ndarray

    def __post_init__(self) -> None:
        for r in self.prerotation:
            if r not in PREROTATIONS:
                raise ValueError(f"unknown pre-rotation {r!r}")
        probs = np.asarray(self.probabilities, dtype=float).reshape(4)
        if abs(probs.sum() - 1.0) > 1e-6 or probs.min() < -1e-9:
            raise ValueError("outcome probabilities must be non-negative and sum to 1")
        object.__setattr__(self, "probabilities", probs)

    def moments(self) -> tuple[float, float, float]:
        """(<Z_L>, <Z_R>, <Z_L Z_R>) of the post-rotation state."""
        p = self.probabilities
        return (
            float(p[0] + p[1] - p[2] - p[3]),
            float(p[0] - p[1] + p[2] - p[3]),
            float(p[0] - p[1] - p[2] + p[3]),
        )


@dataclass(frozen=True)
class VisibilityModel:
    """Readout contrast per qubit; optionally asymmetric (f_up, f_down) pairs."""

    v_left: float = 1.0
    v_right: float = 1.0
    f_left: tuple[float, float] | None = None  # (f_up, f_down) overrides v_left
    f_right: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        for v in (self.v_left, self.v_right):
            if not 0.0 <= v <= 1.0:
                raise ValueError("visibilities must lie in [0, 1]")

    def confusion(self, side: str) -> np.ndarray:
        """2x2 stochastic matrix mapping true (up, down) to reported (up, down)."""
        pair = self.f_left if side == "left" else self.f_right
        if pair is None:
            v = self.v_left if side == "left" else self.v_right
            f_up = f_down = (1.0 + v) / 2.0
        else:
            f_up, f_down = pair
        return np.array([[f_up, 1.0 - f_down], [1.0 - f_up, f_down]])


def measurement_settings() -> list[tuple[str, str]]:
    """The nine pre-rotation pairs covering all fifteen Pauli expectations."""
    rotations = ("I", "X90", "Y90")
    return [(l, r) for l in rotations for r in rotations]


def pauli_assignments() -> dict[str, tuple[tuple[str, str], float, str]]:
    """label -> (setting, sign, moment kind) for the default plan.

    Two-qubit labels come from the matching setting's correlator; each
    single-qubit label is taken from the setting whose partner rotation is
    the identity, so every label is read out exactly once.
    """
    plan: dict[str, tuple[tuple[str, str], float, str]] = {}
    for setting in measurement_settings():
        axis_l, sign_l = _AXIS_OF[setting[0]]
        axis_r, sign_r = _AXIS_OF[setting[1]]
        plan[axis_l + axis_r] = (setting, sign_l * sign_r, "corr")
        if setting[1] == "I":
            plan[axis_l + "I"] = (setting, sign_l, "left")
        if setting[0] == "I":
            plan["I" + axis_r] = (setting, sign_r, "right")
    del plan["IZ"], plan["ZI"]
    plan["IZ"] = (("I", "I"), 1.0, "right")
    plan["ZI"] = (("I", "I"), 1.0, "left")
    return plan


def pauli_expectations_from_records(records: Sequence[TomographyRecord]) -> dict[str, float]:
    by_setting = {rec.prerotation: rec for rec in records}
    plan = pauli_assignments()
    missing = sorted({str(setting) for setting, _, _ in plan.values() if setting not in by_setting})
    if missing:
        raise ValueError(f"incomplete tomography settings, missing {missing}")
    values: dict[str, float] = {"II": 1.0}
    for label, (setting, sign, kind) in plan.items():
        z_l, z_r, z_lr = by_setting[setting].moments()
        values[label] = sign * {"left": z_l, "right": z_r, "corr": z_lr}[kind]
    return values


def reconstruct(records: Sequence[TomographyRecord], project: bool = True) -> DensityMatrix:
    """Linear-inversion density matrix, physicality-projected by default."""
    rho = density_from_pauli_vector(pauli_expectations_from_records(records))
    rho = DensityMatrix(0.5 * (rho + rho.conj().T))
    return rho.project_physical() if project else rho


def fidelity(rho: DensityMatrix, target: TwoQubitState) -> float:
    """sqrt(<psi| rho |psi>), the square-root overlap convention."""
    overlap = float(np.real(target.amplitudes.conj() @ rho.rho @ target.amplitudes))
    return math.sqrt(max(overlap, 0.0))


def apply_visibility(probabilities: np.ndarray, model: VisibilityModel) -> np.ndarray:
    """Degrade 4-outcome probabilities through the per-qubit confusion channels."""
    p = np.asarray(probabilities, dtype=float).reshape(2, 2)
    out = model.confusion("left") @ p @ model.confusion("right").T
    return out.reshape(4)


BELL_TARGET = TwoQubitState(np.array([-1.0j, 0.0, 0.0, 1.0]) / math.sqrt(2.0))


@dataclass(frozen=True)
class BellResult:
    rho: DensityMatrix
    fidelity_projected: float
    fidelity_raw: float
    records: tuple[TomographyRecord, ...]
    metadata: dict


def _prerotation_bursts(
    params: dev.DeviceParams,
    setting: tuple[str, str],
    gate: pl.CnotGate,
    rabi: float,
) -> list[pl.Segment]:
    """Sequential pre-rotation bursts with the gate's phase bookkeeping applied."""
    segments: list[pl.Segment] = []
    angles = {"I": 0.0, "X90": math.pi / 2, "Y90": math.pi / 2, "X180": math.pi}
    phases = {"X90": -math.pi / 2, "Y90": 0.0, "X180": -math.pi / 2}
    for target, rot in zip((pl.LEFT, pl.RIGHT), setting):
        if rot == "I":
            continue
        burst = pl.rotation_burst(params, target, angles[rot], rabi, axis_phase=phases[rot])
        segments.append(gate.corrected_burst(burst))
    return segments


def bell_experiment(
    params: dev.DeviceParams,
    visibility: VisibilityModel = VisibilityModel(),
    noise: pl.NoiseConfig | None = None,
    gate: pl.CnotGate | None = None,
    rabi: float = 4.8e6,
) -> BellResult:
    """Prepare and tomograph the CNOT-generated Bell state.

    Pipeline: x quarter turn on the control, calibrated CNOT, one simulated
    pulse sequence per tomography setting, readout-visibility degradation of
    the outcome probabilities, linear inversion and projection.  The target
    is (|dd> - i|uu>)/sqrt(2); with ideal visibility and no noise the
    fidelity is 1 within integrator error.
    """
    if gate is None:
        gate = pl.calibrate_cnot(params, 1.0 / 204e-9)
    prep = pl.rotation_burst(params, pl.RIGHT, math.pi / 2, rabi)
    records = []
    for setting in measurement_settings():
        segments = [prep, *gate.segments(start_time=prep.duration),
                    *_prerotation_bursts(params, setting, gate, rabi)]
        seq = pl.PulseSequence(segments)
        if noise is None:
            probs = pl.evolve(seq, params).populations()
        else:
            probs = pl.evolve_ensemble(seq, params, noise)
        records.append(TomographyRecord(setting, apply_visibility(probs, visibility)))
    rho_raw = reconstruct(records, project=False)
    rho = rho_raw.project_physical()
    meta = base_metadata(
        "bell_tomography", params,
        seed=None if noise is None else noise.seed,
        v_left=visibility.v_left, v_right=visibility.v_right,
        j_on_hz=gate.j_on, tau_p_s=gate.tau_p,
    )
    return BellResult(
        rho=rho,
        fidelity_projected=fidelity(rho, BELL_TARGET),
        fidelity_raw=fidelity(rho_raw, BELL_TARGET),
        records=tuple(records),
        metadata=meta,
    )


def density_matrix_to_csv(rho: DensityMatrix, path) -> None:
    """16 rows: basis-pair label, real, imaginary."""
    from pathlib import Path

    labels = ("uu", "ud", "du", "dd")
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("row,col,real,imag\n")
        for i, li in enumerate(labels):
            for k, lk in enumerate(labels):
                v = rho.rho[i, k]
                fh.write(f"{li},{lk},{v.real:.17g},{v.imag:.17g}\n")
