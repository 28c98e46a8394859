"""RF energy harvesting, battery bookkeeping and the per-slot duty cycle.

Each slot follows a harvest-then-sense-and-transmit sequence: the node
harvests during the short harvesting sub-slot, then turns active for the
remainder if and only if its battery covers the active-mode energy. A
backscatter node in active mode reflects the full incident wave (and
therefore harvests nothing during that window); a traditional node drains
its entire remaining battery through the power amplifier (greedy policy,
which maximises per-slot SNR and keeps "sufficient energy" a single
threshold). Batteries carry over between slots with no cap and no leakage.
"""

from __future__ import annotations

from dataclasses import dataclass

from .scenario import NodeKind


@dataclass(frozen=True)
class ConsumptionProfile:
    """Active-mode power draws of one node kind."""

    kind: NodeKind
    digital_w: float
    mixer_w: float          # zero for backscatter
    dac_w: float            # zero for backscatter
    pa_efficiency: float    # unused for backscatter
    sense_energy_j: float
    min_radiated_w: float   # smallest useful PA output, traditional only

    def __post_init__(self):
        for name in ("digital_w", "mixer_w", "dac_w", "pa_efficiency",
                     "sense_energy_j", "min_radiated_w"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")
        if self.kind == NodeKind.BACKSCATTER and (self.mixer_w != 0.0 or self.dac_w != 0.0):
            raise ValueError("backscatter profile must have zero mixer/DAC draw")

    @classmethod
    def for_kind(cls, kind, config):
        kind = NodeKind(kind)
        if kind == NodeKind.BACKSCATTER:
            return cls(kind=kind, digital_w=config.digital_circuit_w, mixer_w=0.0,
                       dac_w=0.0, pa_efficiency=1.0,
                       sense_energy_j=config.sense_energy_j, min_radiated_w=0.0)
        min_radiated = config.min_pa_radiated_w
        if min_radiated is None:
            # Activity below the receiver noise floor is pointless.
            min_radiated = config.noise_w
        return cls(kind=kind, digital_w=config.digital_circuit_w, mixer_w=config.mixer_w,
                   dac_w=config.dac_w, pa_efficiency=config.pa_efficiency,
                   sense_energy_j=config.sense_energy_j, min_radiated_w=min_radiated)


@dataclass(frozen=True)
class SlotOutcome:
    """Energy flows of one node over one slot."""

    harvested_j: float
    consumed_j: float
    was_active: bool
    tx_power_w: float        # radiated power (traditional, 0 otherwise)
    reflect_fraction: float  # reflected fraction (backscatter, 0 otherwise)
    battery_after_j: float


def harvested_energy(incident_w, efficiency, duration_s):
    """Energy captured from an incident wave: power x efficiency x time."""
    if incident_w < 0.0 or duration_s < 0.0:
        raise ValueError("incident power and duration must be non-negative")
    if not 0.0 <= efficiency <= 1.0:
        raise ValueError("efficiency must lie in [0, 1]")
    return incident_w * efficiency * duration_s


def required_active_energy(profile, config):
    """Battery level needed to run the active sub-slot, in joules.

    Backscatter: one sensing task plus the digital circuit for the window.
    Traditional: sensing plus digital, mixer and DAC draws, plus the PA
    drain needed to radiate at least ``min_radiated_w``.
    """
    active_s = config.active_s
    if profile.kind == NodeKind.BACKSCATTER:
        return profile.sense_energy_j + profile.digital_w * active_s
    overhead_w = profile.digital_w + profile.mixer_w + profile.dac_w
    pa_drain_j = profile.min_radiated_w * active_s / profile.pa_efficiency
    return profile.sense_energy_j + overhead_w * active_s + pa_drain_j


def activation_decision(battery_j, profile, config):
    """True (active) iff the battery covers the active-mode requirement.

    The boundary is inclusive: a battery exactly at the requirement
    activates, which keeps the threshold deterministic.
    """
    if battery_j < 0.0:
        raise ValueError("battery must be non-negative")
    return battery_j >= required_active_energy(profile, config)


def traditional_tx_power(battery_j, profile, config):
    """Radiated power of an active traditional node under the greedy policy.

    Everything left after sensing and circuit overheads is pushed through
    the class-AB amplifier over the active window; the battery is empty by
    the end of the slot.
    """
    overhead_j = profile.sense_energy_j + (
        profile.digital_w + profile.mixer_w + profile.dac_w) * config.active_s
    drain_j = battery_j - overhead_j
    if drain_j < 0.0:
        raise ValueError("node lacks the active-mode overhead; it should be silent")
    return profile.pa_efficiency * drain_j / config.active_s


def step_slot(node, incident_w, profile, config):
    """Advance one node through one slot, mutating it, and report the flows.

    Harvesting happens only during the harvesting sub-slot (an active
    backscatter node reflects everything during the active window, so it
    harvests nothing there). Degenerate inputs resolve to silent outcomes.
    """
    harvested = harvested_energy(incident_w, config.harvest_efficiency, config.harvest_s)
    battery = node.battery_j + harvested
    active = activation_decision(battery, profile, config)

    tx_power = 0.0
    reflect = 0.0
    if not active:
        consumed = 0.0
    elif profile.kind == NodeKind.BACKSCATTER:
        consumed = profile.sense_energy_j + profile.digital_w * config.active_s
        reflect = 1.0
    else:
        tx_power = traditional_tx_power(battery, profile, config)
        consumed = battery  # greedy: overheads plus full PA drain

    battery_after = battery - consumed
    if battery_after < 0.0:
        raise RuntimeError("battery went negative; energy accounting is broken")

    node.battery_j = battery_after
    node.was_active = active
    node.tx_power_w = tx_power
    node.reflect_fraction = reflect
    node.harvested_total_j += harvested
    node.consumed_total_j += consumed
    node.slots_seen += 1
    node.slots_active += int(active)

    return SlotOutcome(harvested_j=harvested, consumed_j=consumed, was_active=active,
                       tx_power_w=tx_power, reflect_fraction=reflect,
                       battery_after_j=battery_after)


def duty_cycle_tradeoff(alpha, incident_w, reflect_mean_fraction, config):
    """Average harvest rate and relative rate for a duty cycle ``alpha``.

    A tag silent for a fraction 1 - alpha of the time harvests the full
    incident wave then; while active it harvests only the unreflected part.
    The achievable information rate is proportional to the active fraction.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if not 0.0 <= reflect_mean_fraction <= 1.0:
        raise ValueError("reflect_mean_fraction must lie in [0, 1]")
    if incident_w < 0.0:
        raise ValueError("incident power must be non-negative")
    avg_harvest_w = config.harvest_efficiency * incident_w * (
        (1.0 - alpha) + alpha * (1.0 - reflect_mean_fraction))
    return avg_harvest_w, alpha
