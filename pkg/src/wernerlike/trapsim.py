"""Ideal-pulse synthesis of the hybrid mixture in a trapped-particle register.

Available pulses: spin rotations about equatorial axes, oscillator
displacements, and the conditional displacement D(alpha * sigma1) that
displaces the sigma1 = +1 spin component by +alpha and the sigma1 = -1
component by -alpha.  The joint (sigma3, n) readout is modeled as an ideal
projective measurement.

A single equatorial rotation after D(alpha sigma1) cannot carry |up>|0> into
the pseudo-singlet (|down>|a> - |up>|-a>)/sqrt(2) even up to a global phase
(the required spin map needs a sigma3 component in its generator), so the
generator uses a three-pulse sequence; the result matches the target with
global phase exactly 1.
"""

import warnings
from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from . import montecarlo
from .fock import (
    SPIN_DOWN,
    SPIN_UP,
    coherent_state,
    displacement_matrix,
    displacement_operator,
    displaced_support,
    spin_rotation,
)
from .tomography import binomial_matrix

__all__ = [
    "SpinRotation",
    "Displacement",
    "ConditionalDisplacement",
    "JointPureState",
    "apply_pulse",
    "apply_sequence",
    "pseudo_singlet_pulses",
    "pseudo_singlet_target",
    "generate_pseudo_singlet",
    "COMPONENT_LABELS",
    "COMPONENT_WEIGHTS",
    "component_pulses",
    "component_state",
    "SynthesisRun",
    "synthesize_mixture_run",
    "bottle_readout",
    "simulate_trap_acquisition",
]

_SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class SpinRotation:
    theta: float
    phi: float


@dataclass(frozen=True)
class Displacement:
    beta: complex


@dataclass(frozen=True)
class ConditionalDisplacement:
    alpha: complex


@dataclass(frozen=True, eq=False)
class JointPureState:
    """Pure state of spin (x) truncated oscillator; amplitudes (2, dim)."""

    amplitudes: np.ndarray

    @property
    def dim(self):
        return self.amplitudes.shape[1]

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    @classmethod
    def product(cls, spin_index, fock_amplitudes):
        amp = np.zeros((2, len(fock_amplitudes)), dtype=complex)
        amp[spin_index] = fock_amplitudes
        return cls(amp)

    @classmethod
    def spin_up_vacuum(cls, dim):
        amp = np.zeros((2, dim), dtype=complex)
        amp[SPIN_UP, 0] = 1.0
        return cls(amp)


def apply_pulse(state, pulse):
    """One unitary pulse; warns when truncation eats more than 1e-6 of the norm."""
    amp = state.amplitudes
    if isinstance(pulse, SpinRotation):
        out = spin_rotation(pulse.theta, pulse.phi) @ amp
    elif isinstance(pulse, Displacement):
        d = displacement_operator(pulse.beta, state.dim)
        out = amp @ d.T
    elif isinstance(pulse, ConditionalDisplacement):
        plus = (amp[SPIN_UP] + amp[SPIN_DOWN]) / _SQRT2
        minus = (amp[SPIN_UP] - amp[SPIN_DOWN]) / _SQRT2
        vp = displacement_operator(pulse.alpha, state.dim) @ plus
        vm = displacement_operator(-pulse.alpha, state.dim) @ minus
        out = np.stack([(vp - vm) / _SQRT2, (vp + vm) / _SQRT2])
    else:
        raise TypeError(f"unknown pulse type {type(pulse).__name__}")
    result = JointPureState(out)
    if result.norm() < 1.0 - 1e-6:
        warnings.warn(
            f"pulse {pulse!r} lost {1.0 - result.norm():.2e} of the norm to truncation",
            stacklevel=2,
        )
    return result


def apply_sequence(state, pulses):
    for pulse in pulses:
        state = apply_pulse(state, pulse)
    return state


def pseudo_singlet_pulses(alpha):
    """Pulse sequence turning |up>|0> into (|down>|a> - |up>|-a>)/sqrt(2).

    The first rotation flips the spin, the conditional displacement splits
    the coherent pair on the sigma1 eigenstates, and the final rotation maps
    |+> -> |down>, |-> -> |up>; the global phase works out to exactly 1.
    """
    return (
        SpinRotation(np.pi / 2.0, np.pi / 2.0),
        ConditionalDisplacement(alpha),
        SpinRotation(np.pi / 4.0, np.pi / 2.0),
    )


def pseudo_singlet_target(alpha, dim):
    amp = np.zeros((2, dim), dtype=complex)
    amp[SPIN_DOWN] = coherent_state(alpha, dim) / _SQRT2
    amp[SPIN_UP] = -coherent_state(-alpha, dim) / _SQRT2
    return JointPureState(amp)


def generate_pseudo_singlet(alpha, dim=32):
    return apply_sequence(JointPureState.spin_up_vacuum(dim), pseudo_singlet_pulses(alpha))


COMPONENT_LABELS = ("down_minus", "up_minus", "down_plus", "up_plus", "singlet")
COMPONENT_WEIGHTS = (0.125, 0.125, 0.125, 0.125, 0.5)


def component_pulses(label, alpha):
    """Pulse sequence of one mixture component, from |up>|0>.

    Product components need only a spin flip and a displacement; the
    entangled component uses the pseudo-singlet sequence.
    """
    if label == "singlet":
        return pseudo_singlet_pulses(alpha)
    spin, sign = label.split("_")
    pulses = []
    if spin == "down":
        pulses.append(SpinRotation(np.pi / 2.0, np.pi / 2.0))
    pulses.append(Displacement(alpha if sign == "plus" else -alpha))
    return tuple(pulses)


_component_cache = {}


def component_state(label, alpha, dim):
    key = (label, float(alpha), int(dim))
    if key not in _component_cache:
        state = apply_sequence(JointPureState.spin_up_vacuum(dim), component_pulses(label, alpha))
        state.amplitudes.setflags(write=False)
        _component_cache[key] = state
    return _component_cache[key]


SynthesisRun = namedtuple("SynthesisRun", ["label", "state", "pulses"])


def synthesize_mixture_run(alpha, rng, dim=32):
    """Draw one mixture component: four product states at 1/8 each and the
    pseudo-singlet at 1/2."""
    idx = rng.choice(len(COMPONENT_LABELS), p=COMPONENT_WEIGHTS)
    label = COMPONENT_LABELS[idx]
    return SynthesisRun(
        label=label,
        state=component_state(label, alpha, dim),
        pulses=component_pulses(label, alpha),
    )


def bottle_readout(state, rng):
    """Ideal joint projective (spin, count) sample from |amplitudes|^2."""
    p = np.abs(state.amplitudes) ** 2
    p = p.ravel() / p.sum()
    flat = rng.choice(p.size, p=p)
    s, n = divmod(int(flat), state.dim)
    return s, n


def simulate_trap_acquisition(alpha, settings, events_per_phase, seed, dim=32,
                              setting_index=0):
    """Record files from the pulse-level backend, drop-in compatible with the
    density-operator simulator.

    Per phase, the component label counts follow a multinomial over the
    mixture weights and each component's outcomes follow its own pulse-evolved
    distribution: the aggregate of per-run synthesis, sampled in one pass.
    Pre-measurement pulses are D(-beta_j) then the inverse spin rotation.
    """
    comp_amps = [component_state(lbl, alpha, dim).amplitudes for lbl in COMPONENT_LABELS]
    rows = displaced_support(dim - 1, settings.beta_abs)
    win = settings.n_max + 1
    smear = binomial_matrix(settings.eta, win, rows) if settings.eta < 1.0 else None
    u_inv = spin_rotation(-settings.theta, settings.phi_spin)
    records = []
    for j in range(settings.n_phases):
        beta_j = settings.beta_abs * np.exp(1j * settings.phases[j])
        dmat = displacement_matrix(-beta_j, rows, dim)
        rng = montecarlo.phase_generator(seed, setting_index, j)
        comp_counts = rng.multinomial(events_per_phase, COMPONENT_WEIGHTS)
        counts = np.zeros((2, win), dtype=np.int64)
        over = np.zeros(2, dtype=np.int64)
        for amp, n_runs in zip(comp_amps, comp_counts):
            if n_runs == 0:
                continue
            moved = u_inv @ (amp @ dmat.T)
            probs = np.abs(moved) ** 2
            if smear is not None:
                window = probs @ smear.T
            else:
                window = probs[:, :win].copy()
            overflow = np.clip(probs.sum(axis=1) - window.sum(axis=1), 0.0, None)
            c, o = montecarlo.sample_phase_counts(rng, int(n_runs), window, overflow)
            counts += c
            over += o
        records.append(
            montecarlo.MeasurementRecord(
                theta=settings.theta,
                phi_spin=settings.phi_spin,
                beta_abs=settings.beta_abs,
                phase_index=j,
                n_phases=settings.n_phases,
                total_events=events_per_phase,
                seed=seed,
                counts_up=counts[SPIN_UP],
                counts_down=counts[SPIN_DOWN],
                overflow_up=int(over[SPIN_UP]),
                overflow_down=int(over[SPIN_DOWN]),
            )
        )
    return records
