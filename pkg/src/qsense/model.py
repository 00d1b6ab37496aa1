"""Qubit-oscillator dephasing model under periodic pulsed control.

A qubit is coupled to a harmonic oscillator of frequency omega through a
dephasing interaction of strength lam. A train of pi pulses flips the
sign of the coupling, described by a square-wave modulation f(t). Over
one control period of length tau the oscillator acquires a
qubit-conditional displacement alpha_1; N identical periods interfere
through the geometric factor K, so the total displacement is
alpha = alpha_1 * K. The sigma_x fringe contrast of the qubit is the
oscillator coherence factor L, which for a thermal state is
exp(-2*(2*nbar+1)*|alpha|^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

COHERENCE_BOUNDARY_TOL = 1e-12

__all__ = [
    "PulseSequence",
    "ControlSchedule",
    "ThermalState",
    "OscillatorMoments",
    "Coupling",
    "modulation_value",
    "alpha_single_unit",
    "alpha_cpmg",
    "interference_factor",
    "total_displacement",
    "total_displacement_direct",
    "zeta",
    "coherence_thermal",
    "coherence_small_alpha",
    "outcome_probability",
]


@dataclass(frozen=True)
class PulseSequence:
    """Pi-pulse pattern within one control period.

    pulse_fractions holds the pulse times in units of tau. They must be
    strictly increasing and lie inside (0, 1). The count must be even
    so the modulation returns to +1 at the end of the period and
    consecutive periods are identical.
    """

    tau: float
    pulse_fractions: tuple[float, ...]

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        fr = self.pulse_fractions
        if len(fr) % 2 != 0:
            raise ValueError(f"pulse count must be even, got {len(fr)}")
        for f in fr:
            if not 0.0 < f < 1.0:
                raise ValueError(f"pulse fraction {f} outside (0, 1)")
        if any(b <= a for a, b in zip(fr, fr[1:])):
            raise ValueError("pulse fractions must be strictly increasing")

    @property
    def pulse_times(self) -> tuple[float, ...]:
        return tuple(f * self.tau for f in self.pulse_fractions)

    @classmethod
    def cpmg(cls, tau: float) -> "PulseSequence":
        """Standard two-pulse unit: tau/4 - pi - tau/2 - pi - tau/4."""
        return cls(tau=tau, pulse_fractions=(0.25, 0.75))


@dataclass(frozen=True)
class ControlSchedule:
    """N identical control periods applied back to back."""

    unit: PulseSequence
    n_units: int

    def __post_init__(self):
        if self.n_units < 1:
            raise ValueError(f"n_units must be >= 1, got {self.n_units}")

    @property
    def total_time(self) -> float:
        return self.n_units * self.unit.tau


@dataclass(frozen=True)
class ThermalState:
    """Oscillator thermal state with mean occupation nbar."""

    nbar: float

    def __post_init__(self):
        if self.nbar < 0:
            raise ValueError(f"nbar must be nonnegative, got {self.nbar}")


@dataclass(frozen=True)
class OscillatorMoments:
    """Low-order moments of a general oscillator state.

    Used by the small-displacement coherence expansion. The bound
    |<b+>|^2 <= nbar holds for any physical state.
    """

    b_dag_mean: complex
    b_dag_sq_mean: complex
    nbar: float

    def __post_init__(self):
        if self.nbar < 0:
            raise ValueError(f"nbar must be nonnegative, got {self.nbar}")
        if abs(self.b_dag_mean) ** 2 > self.nbar * (1 + 1e-12) + 1e-15:
            raise ValueError(
                f"|<b+>|^2 = {abs(self.b_dag_mean)**2} exceeds nbar = {self.nbar}"
            )


@dataclass(frozen=True)
class Coupling:
    """Dephasing coupling strength between qubit and oscillator."""

    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")


def modulation_value(seq: PulseSequence, t: float) -> int:
    """Sign of the square-wave modulation f(t) at time t in [0, tau).

    Starts at +1 and flips at each pulse time.
    """
    if not 0.0 <= t < seq.tau:
        raise ValueError(f"t = {t} outside [0, {seq.tau})")
    flips = sum(1 for tp in seq.pulse_times if tp <= t)
    return 1 if flips % 2 == 0 else -1


def _segment_phase_sum(lam, omega, t_bounds, signs):
    """Piecewise-exact integral -(lam/(2*omega)) * sum_j s_j (e^{i w t_{j+1}} - e^{i w t_j})."""
    omega = np.asarray(omega, dtype=float)
    acc = np.zeros(np.shape(omega), dtype=complex)
    for j, s in enumerate(signs):
        acc = acc + s * (np.exp(1j * omega * t_bounds[j + 1]) - np.exp(1j * omega * t_bounds[j]))
    out = -(lam / (2.0 * omega)) * acc
    return out if out.shape else complex(out)


def alpha_single_unit(seq: PulseSequence, coupling: Coupling, omega) -> complex:
    """Oscillator displacement accumulated over one control period.

    Exact piecewise evaluation of -i*(lam/2) * int_0^tau f(t) e^{i omega t} dt,
    no numerical quadrature. Vectorized over omega.
    """
    if np.any(np.asarray(omega) <= 0):
        raise ValueError("omega must be positive")
    t_bounds = (0.0,) + seq.pulse_times + (seq.tau,)
    signs = [(-1) ** j for j in range(len(t_bounds) - 1)]
    return _segment_phase_sum(coupling.lam, omega, t_bounds, signs)


def alpha_cpmg(coupling: Coupling, omega, tau: float) -> complex:
    """Closed-form single-period displacement for the two-pulse unit.

    alpha_1 = i*(8*lam/omega) * e^{i omega tau/2} * cos(omega tau/8) * sin^3(omega tau/8).
    Agrees with alpha_single_unit on the same sequence to machine precision.
    """
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("omega must be positive")
    if not tau > 0:
        raise ValueError("tau must be positive")
    x = omega * tau / 8.0
    out = 1j * (8.0 * coupling.lam / omega) * np.exp(1j * omega * tau / 2.0) * np.cos(x) * np.sin(x) ** 3
    return out if out.shape else complex(out)


def interference_factor(n_units: int, omega, tau: float):
    """Coherent sum K = sum_{n=0}^{N-1} e^{i omega n tau} over control periods.

    Uses the geometric closed form; entries with |sin(omega*tau/2)| below
    1e-8 are evaluated by the direct sum, which is exact at every
    multiple of 2*pi/tau.
    """
    if n_units < 1:
        raise ValueError(f"n_units must be >= 1, got {n_units}")
    omega = np.asarray(omega, dtype=float)
    x = omega * tau / 2.0
    s = np.sin(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.exp(1j * (n_units - 1) * x) * np.sin(n_units * x) / s
    near = np.abs(s) < 1e-8
    if np.any(near):
        k = np.atleast_1d(k)
        xs = np.atleast_1d(x)[near]
        direct = np.zeros(xs.shape, dtype=complex)
        for n in range(n_units):
            direct += np.exp(1j * 2.0 * n * xs)
        k[near] = direct
        k = k.reshape(np.shape(x))
    return k if np.shape(x) else complex(k)


def total_displacement(sched: ControlSchedule, coupling: Coupling, omega) -> complex:
    """Total displacement alpha = alpha_1 * K over the full schedule."""
    a1 = alpha_single_unit(sched.unit, coupling, omega)
    k = interference_factor(sched.n_units, omega, sched.unit.tau)
    return a1 * k


def total_displacement_direct(sched: ControlSchedule, coupling: Coupling, omega) -> complex:
    """Total displacement summed segment by segment over all N periods.

    Independent of the alpha_1 * K factorization; used as an internal
    cross-check of total_displacement.
    """
    tau = sched.unit.tau
    unit_bounds = (0.0,) + sched.unit.pulse_times + (tau,)
    unit_signs = [(-1) ** j for j in range(len(unit_bounds) - 1)]
    t_bounds = [0.0]
    signs = []
    for n in range(sched.n_units):
        for j, s in enumerate(unit_signs):
            t_bounds.append(n * tau + unit_bounds[j + 1])
            signs.append(s)
    return _segment_phase_sum(coupling.lam, omega, t_bounds, signs)


def zeta(n_units: int, omega, tau: float):
    """Fringe label zeta = N*(omega*tau/(2*pi) - 1).

    Nonzero integers sit at the nodes of K around the major peak at
    omega*tau = 2*pi.
    """
    omega = np.asarray(omega, dtype=float)
    out = n_units * (omega * tau / (2.0 * np.pi) - 1.0)
    return out if out.shape else float(out)


def coherence_thermal(alpha, state: ThermalState):
    """Fringe contrast for a thermal oscillator: exp(-2*(2*nbar+1)*|alpha|^2)."""
    a2 = np.abs(np.asarray(alpha)) ** 2
    out = np.exp(-2.0 * (2.0 * state.nbar + 1.0) * a2)
    return out if out.shape else float(out)


def coherence_small_alpha(alpha: complex, moments: OscillatorMoments) -> complex:
    """Second-order coherence expansion for a general oscillator state.

    L ~ 1 + 4i*Im(alpha)*<b+> + 4*Re(alpha^2)*<b+^2> - 2*(2*nbar+1)*|alpha|^2.
    Valid for sqrt(2*nbar+1)*|alpha| << 1; the value is not clamped and
    may leave the unit disk outside that regime.
    """
    a = complex(alpha)
    return (
        1.0
        + 4j * a.imag * moments.b_dag_mean
        + 4.0 * (a * a).real * moments.b_dag_sq_mean
        - 2.0 * (2.0 * moments.nbar + 1.0) * abs(a) ** 2
    )


def outcome_probability(coherence_real: float) -> tuple[float, float]:
    """Probabilities (P_plus, P_minus) of the sigma_x outcomes for contrast L.

    P(+-1) = (1 +- L)/2. Values of |L| within 1e-12 of 1 are clamped to
    the boundary; anything beyond is rejected.
    """
    L = float(coherence_real)
    if abs(L) > 1.0 + COHERENCE_BOUNDARY_TOL:
        raise ValueError(f"coherence {L} outside [-1, 1]")
    L = min(1.0, max(-1.0, L))
    p_plus = (1.0 + L) / 2.0
    return p_plus, 1.0 - p_plus
