"""Static device model: energy levels, transition frequencies, exchange law.

The two-spin Hamiltonian is

    H = J (S_L . S_R - 1/4) + b_L S_zL + b_R S_zR

with per-dot z-fields (in Hz)

    b_L = e_z - de_z / 2 + b1_z_left
    b_R = e_z + de_z / 2 + b1_z_right

where ``e_z`` is the mean Zeeman frequency, ``de_z`` the right-minus-left
Zeeman difference from the micromagnet gradient, and the ``b1`` terms are the
small shifts induced while an exchange pulse is on (they default to zero).

Canonical transition frequencies come from numerical diagonalization.  The
closed-form level expressions implemented in :func:`energy_levels_analytic`
use the standard two-level radical ``sqrt(J**2 + (de_z - db1)**2)`` and serve
as a cross-check of the numerics.
"""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import least_squares

from .qcore import OPS, eig_hermitian

#: factor demanded between the Zeeman difference and any exchange value used
REGIME_FACTOR = 5.0


@dataclass(frozen=True)
class ExchangeFitParams:
    """Parameters of the exchange-vs-barrier-voltage law.

    J(V) = c * (vm0 - V) / (V - vm1)**2 * exp(-sqrt(|V - vm0| / von))

    Voltages are in millivolts and ``c`` is an opaque overall scale in
    Hz * mV (the law is used as a fitted empirical curve, not an ab-initio
    formula).  ``window`` is the half-open voltage range on which the fitted
    curve is positive and strictly increasing.
    """

    c: float = 84124732360.70938
    vm0: float = 412.8
    vm1: float = 451.8
    von: float = 0.41378807829928904
    window: tuple[float, float] = (380.0, 411.0)

    def __post_init__(self) -> None:
        if self.von <= 0:
            raise ValueError("von must be positive")
        if self.vm0 == self.vm1:
            raise ValueError("vm0 and vm1 must differ")


class EnergyLevels(NamedTuple):
    """Eigenvalues in Hz labeled by dominant basis component."""

    e_uu: float
    e_ud: float
    e_du: float
    e_dd: float


class TransitionFrequencies(NamedTuple):
    """Single-spin-flip transition frequencies in Hz.

    ``f_left_down`` is the left-qubit frequency with the right qubit down,
    ``f_left_up`` with the right qubit up, and symmetrically for the right
    qubit conditioned on the left.
    """

    f_left_down: float
    f_left_up: float
    f_right_down: float
    f_right_up: float


@dataclass(frozen=True)
class DeviceParams:
    """All physical constants of the simulated device (Hz and seconds)."""

    e_z: float = 14.0e9
    de_z: float = 200.0e6
    b1_z_left: float = 0.0
    b1_z_right: float = 0.0
    e_c_left: float = 1.4508e12
    e_c_right: float = 1.4508e12
    t1: float = 22e-3
    t2_star_left: float = 1.2e-6
    t2_star_right: float = 1.4e-6
    t2_echo_left: float = 22e-6
    t2_echo_right: float = 80e-6
    exchange_fit: ExchangeFitParams = field(default_factory=ExchangeFitParams)

    def __post_init__(self) -> None:
        if self.e_z <= 0 or self.de_z <= 0:
            raise ValueError("e_z and de_z must be positive")
        for name in ("t1", "t2_star_left", "t2_star_right", "t2_echo_left", "t2_echo_right"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def z_fields(self, j: float = 0.0) -> tuple[float, float]:
        """Per-dot z-fields (b_L, b_R); the b1 shifts apply only while J is on."""
        b1l = self.b1_z_left if j != 0.0 else 0.0
        b1r = self.b1_z_right if j != 0.0 else 0.0
        return (self.e_z - self.de_z / 2 + b1l, self.e_z + self.de_z / 2 + b1r)

    def check_regime(self, j: float) -> None:
        if j > 0 and self.de_z < REGIME_FACTOR * j:
            warnings.warn(
                f"de_z = {self.de_z:.3g} Hz is less than {REGIME_FACTOR} x J = "
                f"{REGIME_FACTOR * j:.3g} Hz; the conditional-rotation regime "
                "assumes de_z >> J",
                stacklevel=3,
            )


def static_hamiltonian(j: float, b_left: float, b_right: float) -> np.ndarray:
    """H = J (S_L . S_R - 1/4) + b_L S_zL + b_R S_zR, entries in Hz."""
    h = j * (OPS.exchange - 0.25 * np.eye(4)) + b_left * OPS.sz_left + b_right * OPS.sz_right
    return h


def build_static_hamiltonian(params: DeviceParams, j: float) -> np.ndarray:
    """Device Hamiltonian at exchange J >= 0 including the b1 pulse shifts."""
    if j < 0:
        raise ValueError("exchange J must be non-negative")
    params.check_regime(j)
    return static_hamiltonian(j, *params.z_fields(j))


def labeled_eigensystem(j: float, b_left: float, b_right: float) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition with eigenvectors matched to basis labels.

    Returns ``(levels, vectors)`` where ``levels[k]`` is the eigenvalue whose
    eigenvector has dominant overlap with basis state ``k`` and ``vectors``
    has those eigenvectors as columns (phase fixed so the dominant component
    is real positive).  Raises if the assignment is ambiguous, which happens
    outside the de_z >> J regime.
    """
    w, v = eig_hermitian(static_hamiltonian(j, b_left, b_right))
    weights = np.abs(v) ** 2
    order = np.argmax(weights, axis=0)
    if sorted(order) != [0, 1, 2, 3] or weights.max(axis=0).min() < 0.7:
        raise ValueError(
            "cannot label eigenstates by dominant basis component; "
            "J is too large relative to the Zeeman difference"
        )
    levels = np.empty(4)
    vectors = np.empty((4, 4), dtype=complex)
    for col, label in enumerate(order):
        levels[label] = w[col]
        phase = v[label, col] / abs(v[label, col])
        vectors[:, label] = v[:, col] / phase
    return levels, vectors


def energy_levels(params: DeviceParams, j: float) -> EnergyLevels:
    """Labeled eigenvalues of the static Hamiltonian."""
    levels, _ = labeled_eigensystem(j, *params.z_fields(j))
    return EnergyLevels(*levels)


def energy_levels_analytic(params: DeviceParams, j: float) -> EnergyLevels:
    """Closed-form levels; cross-check for :func:`energy_levels`.

    The sign factor keeps the labels attached to the dominant basis state
    even when the pulse-induced shifts overwhelm the Zeeman difference and
    reorder the antiparallel pair.
    """
    b1l = params.b1_z_left if j != 0.0 else 0.0
    b1r = params.b1_z_right if j != 0.0 else 0.0
    sum_b1 = b1l + b1r
    gradient = params.de_z - (b1l - b1r)
    radical = math.copysign(math.hypot(j, gradient), gradient)
    return EnergyLevels(
        e_uu=params.e_z + sum_b1 / 2,
        e_ud=(-j - radical) / 2,
        e_du=(-j + radical) / 2,
        e_dd=-params.e_z - sum_b1 / 2,
    )


def transition_frequencies(params: DeviceParams, j: float) -> TransitionFrequencies:
    """The four single-spin-flip frequencies from numerical diagonalization."""
    e = energy_levels(params, j)
    return TransitionFrequencies(
        f_left_down=abs(e.e_dd - e.e_ud),
        f_left_up=abs(e.e_du - e.e_uu),
        f_right_down=abs(e.e_dd - e.e_du),
        f_right_up=abs(e.e_ud - e.e_uu),
    )


def transition_frequencies_analytic(params: DeviceParams, j: float) -> TransitionFrequencies:
    """Closed-form transition frequencies (cross-check only)."""
    b1l = params.b1_z_left if j != 0.0 else 0.0
    b1r = params.b1_z_right if j != 0.0 else 0.0
    sum_b1 = b1l + b1r
    radical = math.hypot(j, params.de_z - (b1l - b1r))
    ez = params.e_z
    return TransitionFrequencies(
        f_left_down=ez + (-j + sum_b1 - radical) / 2,
        f_left_up=ez + (j + sum_b1 - radical) / 2,
        f_right_down=ez + (-j + sum_b1 + radical) / 2,
        f_right_up=ez + (j + sum_b1 + radical) / 2,
    )


def exchange_from_detuning(e_c_left: float, e_c_right: float, t_c: float, eps: float) -> float:
    """Exchange J from the charge-detuning model, all arguments in Hz.

    J = 2 t_c^2 (E_CL + E_CR) / ((E_CL + eps)(E_CR - eps)); valid for
    detunings well inside the charging window and t_c << E_C.
    """
    if abs(eps) >= min(e_c_left, e_c_right):
        raise ValueError("detuning magnitude must stay below both charging energies")
    denom = (e_c_left + eps) * (e_c_right - eps)
    if denom <= 0:
        raise ValueError("detuning outside the validity window of the exchange model")
    if t_c > 0.1 * min(e_c_left, e_c_right):
        warnings.warn("tunnel coupling is not small compared to the charging energy", stacklevel=2)
    return 2.0 * t_c**2 * (e_c_left + e_c_right) / denom


def exchange_from_voltage(fit: ExchangeFitParams, v_m: float) -> float:
    """Exchange J in Hz at barrier voltage ``v_m`` (mV) from the fitted law."""
    if v_m == fit.vm1:
        raise ValueError("voltage coincides with the singular point vm1")
    j = (
        fit.c
        * (fit.vm0 - v_m)
        / (v_m - fit.vm1) ** 2
        * math.exp(-math.sqrt(abs(v_m - fit.vm0) / fit.von))
    )
    if j < 0:
        raise ValueError(f"exchange law is negative at {v_m} mV (beyond vm0)")
    return j


class ExchangeFitResult(NamedTuple):
    params: ExchangeFitParams
    residual_norm: float
    converged: bool


def _log_residuals(theta: np.ndarray, v: np.ndarray, log_j: np.ndarray) -> np.ndarray:
    """Log-space residuals with the overall scale c profiled out."""
    vm0, vm1, von = theta
    log_shape = (
        np.log(vm0 - v)
        - 2.0 * np.log(np.abs(v - vm1))
        - np.sqrt(np.abs(v - vm0) / von)
    )
    offset = np.mean(log_j - log_shape)
    return (log_shape + offset) - log_j


def fit_exchange_law(
    samples: Sequence[tuple[float, float]],
    initial: ExchangeFitParams | None = None,
    max_nfev: int = 2000,
) -> ExchangeFitResult:
    """Least-squares fit of the exchange law in log-J space.

    ``samples`` are (voltage mV, exchange Hz) pairs; at least 4 samples
    spanning two decades of J are required.  The scale ``c`` enters linearly
    in log space and is profiled out, so the optimizer only sees
    (vm0, vm1, von).  A coarse multi-start over vm0/von guards against the
    strong parameter correlations of the law.
    """
    pts = np.asarray(sorted(samples), dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 4:
        raise ValueError("need at least 4 (voltage, exchange) samples")
    v, j = pts[:, 0], pts[:, 1]
    if np.any(j <= 0):
        raise ValueError("exchange samples must be positive")
    if np.log10(j.max() / j.min()) < 2.0:
        raise ValueError("samples must span at least two decades of exchange")
    log_j = np.log(j)
    v_max, span = v.max(), v.max() - v.min()

    starts: list[np.ndarray] = []
    if initial is not None:
        starts.append(np.array([initial.vm0, initial.vm1, initial.von]))
    for frac0 in (0.02, 0.1, 0.5):
        for von0 in (span / 100.0, span / 10.0, span):
            starts.append(np.array([v_max + frac0 * span, v_max + (frac0 + 1.0) * span, von0]))

    lower = np.array([v_max + 1e-9 * span, v_max + 2e-9 * span, 1e-12])
    upper = np.array([v_max + 100 * span, v_max + 200 * span, 1e6])
    best = None
    for theta0 in starts:
        theta0 = np.clip(theta0, lower, upper)
        if theta0[1] <= theta0[0]:
            theta0[1] = theta0[0] + span
        try:
            sol = least_squares(
                _log_residuals, theta0, args=(v, log_j), bounds=(lower, upper),
                max_nfev=max_nfev, xtol=1e-15, ftol=1e-15, gtol=1e-15,
            )
        except ValueError:
            continue
        if best is None or sol.cost < best.cost:
            best = sol
    if best is None:
        raise RuntimeError("exchange-law fit failed from every starting point")

    vm0, vm1, von = best.x
    log_shape = np.log(vm0 - v) - 2.0 * np.log(np.abs(v - vm1)) - np.sqrt(np.abs(v - vm0) / von)
    c = math.exp(float(np.mean(log_j - log_shape)))
    residual = float(np.linalg.norm(best.res if hasattr(best, "res") else best.fun))
    params = ExchangeFitParams(c=c, vm0=vm0, vm1=vm1, von=von, window=(float(v.min()), float(v.max())))
    converged = bool(best.status > 0)
    if not converged:
        warnings.warn("exchange-law fit did not converge; returning best iterate", stacklevel=2)
    return ExchangeFitResult(params, residual, converged)


# ---------------------------------------------------------------------------
# Flat key = value configuration files

_DEVICE_KEYS = {
    "e_z", "de_z", "b1_z_left", "b1_z_right", "e_c_left", "e_c_right",
    "t1", "t2_star_left", "t2_star_right", "t2_echo_left", "t2_echo_right",
}
_FIT_KEYS = {"exchange_c": "c", "exchange_vm0": "vm0", "exchange_vm1": "vm1",
             "exchange_von": "von", "exchange_window_lo": None, "exchange_window_hi": None}


class ConfigError(ValueError):
    """Raised for malformed or out-of-range configuration input."""


def parse_config_text(text: str) -> dict[str, float]:
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = float(val.strip())
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: cannot parse value for {key!r}") from exc
    return values


def device_from_config(text: str) -> DeviceParams:
    """Build DeviceParams from flat ``key = value`` text (SI units per key)."""
    values = parse_config_text(text)
    unknown = set(values) - _DEVICE_KEYS - set(_FIT_KEYS)
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    fit_kwargs = {}
    for key, attr in _FIT_KEYS.items():
        if key in values and attr is not None:
            fit_kwargs[attr] = values.pop(key)
    lo = values.pop("exchange_window_lo", None)
    hi = values.pop("exchange_window_hi", None)
    fit = ExchangeFitParams(**fit_kwargs)
    if lo is not None or hi is not None:
        window = (lo if lo is not None else fit.window[0], hi if hi is not None else fit.window[1])
        fit = replace(fit, window=window)
    try:
        return DeviceParams(exchange_fit=fit, **values)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_device_config(path) -> DeviceParams:
    with io.open(path, "r", encoding="utf-8") as fh:
        return device_from_config(fh.read())
