"""Pseudo-pure state preparation by basis permutation plus T1 relaxation.

Starting from the thermal state, a gate that cyclically permutes the seven
populations outside |000> alternates with a free-evolution delay. Relaxation
keeps feeding deviation toward the thermal pattern while the permutation
spreads it evenly over the minor states, so after a few cycles the state is
(1-eta)/8 * I + eta |000><000| to good accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .pulses import NoiseConfig, Waveform, evolve, free_evolution
from .spincore import (
    DensityMatrix,
    MoleculeSpec,
    build_drift_hamiltonian,
    diagonal_probabilities,
    thermal_state,
)


@dataclass(frozen=True)
class PpsConfig:
    cycles: int = 4
    delay_s: float = 6.0
    use_ideal_permutation: bool = True

    def __post_init__(self):
        if self.cycles < 1:
            raise ValueError("need at least one cycle")
        if self.delay_s <= 0:
            raise ValueError("delay must be positive")


@dataclass
class PpsReport:
    state: DensityMatrix
    eta: float
    uniformity: float
    cycles: int
    delay_s: float

    def populations(self) -> np.ndarray:
        return diagonal_probabilities(self.state)

    def to_dict(self) -> dict:
        return {
            "eta": self.eta,
            "uniformity": self.uniformity,
            "populations": [float(p) for p in self.populations()],
            "cycles": self.cycles,
            "delay_s": self.delay_s,
        }


def permutation_unitary() -> np.ndarray:
    """Exact 8x8 permutation: |000> fixed, the other seven basis states on a
    single cycle |001>->|010>->...->|111>->|001>."""
    u = np.zeros((8, 8), dtype=complex)
    u[0, 0] = 1.0
    for src in range(1, 8):
        dst = src + 1 if src < 7 else 1
        u[dst, src] = 1.0
    return u


def fit_eta(rho: DensityMatrix) -> tuple[float, float]:
    """|000>-anchored least-squares fit of the PPS polarization.

    For the model (1-eta)/8 * I + eta|000><000| the fit collapses to
    eta = (8*rho_11 - 1)/7 regardless of how unequal the minor populations
    are. Uniformity is their relative spread, (max-min)/mean.
    """
    pops = diagonal_probabilities(rho)
    eta = (8.0 * pops[0] - 1.0) / 7.0
    minors = pops[1:]
    mean = minors.mean()
    uniformity = float((minors.max() - minors.min()) / mean) if mean > 0 else np.inf
    return float(eta), uniformity


def prepare_pps(spec: MoleculeSpec, config: PpsConfig, noise: NoiseConfig,
                permutation_waveform: Waveform | None = None) -> PpsReport:
    """Run the permutation/relaxation cycles from the thermal state.

    With use_ideal_permutation the exact matrix is applied; otherwise a GRAPE
    waveform for the permutation gate must be supplied (from the pulse
    library). Poor configurations simply yield a low eta.
    """
    if not config.use_ideal_permutation and permutation_waveform is None:
        raise ValueError("non-ideal permutation requires its GRAPE waveform")
    rho = thermal_state(spec, noise.polarization)
    u = permutation_unitary()
    h0 = build_drift_hamiltonian(spec)
    t = 0.0
    for _ in range(config.cycles):
        if config.use_ideal_permutation:
            rho = DensityMatrix(u @ rho.matrix @ u.conj().T, validate=False)
        else:
            rho = evolve(rho, permutation_waveform, h0, noise, spec, t_start=t)
            t += permutation_waveform.total_duration
        rho = free_evolution(rho, config.delay_s, spec, noise, t_start=t)
        t += config.delay_s
    eta, uniformity = fit_eta(rho)
    return PpsReport(state=rho, eta=eta, uniformity=uniformity,
                     cycles=config.cycles, delay_s=config.delay_s)


@lru_cache(maxsize=8)
def _tuned_config(spec_key: tuple, polarization: float, cross: float) -> PpsConfig:
    spec = MoleculeSpec(chemical_shifts_hz=spec_key[0], j_couplings_hz=spec_key[1],
                        t1_s=spec_key[2], t2_s=spec_key[3])
    noise = NoiseConfig(polarization=polarization, cross_relaxation=cross)
    best = None
    best_eta = -np.inf
    fallback = None
    fallback_ratio = np.inf
    for cycles in (2, 4, 6, 8, 12, 16, 20, 24):
        for frac in (0.15, 0.2, 0.25, 0.3, 0.4, 0.5, 0.75, 1.0, 1.5):
            delay = float(frac * spec.t1_s)
            report = prepare_pps(spec, PpsConfig(cycles, delay), noise)
            pops = diagonal_probabilities(report.state)
            minors = pops[1:]
            spread_ratio = float((minors.max() - minors.min()) / max(report.eta, 1e-30))
            if spread_ratio < fallback_ratio:
                fallback_ratio = spread_ratio
                fallback = PpsConfig(cycles, delay)
            # population uniformity per the report, plus the deviation-scaled
            # gate that actually bounds computational error
            if report.uniformity <= 0.05 and spread_ratio <= 0.15 and report.eta > best_eta:
                best_eta = report.eta
                best = PpsConfig(cycles, delay)
    return best or fallback or PpsConfig()


def default_pps_config(spec: MoleculeSpec, noise: NoiseConfig) -> PpsConfig:
    """Grid-searched (cycles, delay) maximizing eta subject to uniform minor
    populations on both the absolute and the deviation scale; cached per
    molecule."""
    key = (spec.chemical_shifts_hz, spec.j_couplings_hz, spec.t1_s, spec.t2_s)
    return _tuned_config(key, noise.polarization, noise.cross_relaxation)
