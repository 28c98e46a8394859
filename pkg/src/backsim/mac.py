"""Multiple access: TDMA, time-hopping spread spectrum and interference.

A backscatter node reflects every wave that hits it, so each co-slot tag
contributes a regenerated copy of every carrier it is illuminated by; with
K coexisting links each receiver sees (K - 1) * K first-order interference
components (every one of the K - 1 other tags reflects all K carriers),
quadratic in K instead of the linear count of conventional radios. Only
first-order reflections are modelled: each extra bounce costs another
free-space factor and is numerically negligible at these ranges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import friis_gain
from .scenario import NodeKind

MODES = ("all_on", "tdma", "th_ss")


@dataclass(frozen=True)
class SlotAssignment:
    """Map from node id to its sub-slot within a frame of length N."""

    frame_length: int
    assignments: dict

    def __post_init__(self):
        if self.frame_length < 1:
            raise ValueError("frame_length must be at least 1")
        for node_id, slot in self.assignments.items():
            if not 0 <= slot < self.frame_length:
                raise ValueError(f"slot {slot} of node {node_id} outside [0, {self.frame_length})")


def tdma_schedule(node_ids, frame_length):
    """Pre-assign one slot per node, round-robin in id order; collision-free."""
    ids = sorted(node_ids)
    if len(set(ids)) != len(ids):
        raise ValueError("node ids must be unique")
    if frame_length < len(ids):
        raise ValueError(f"frame of {frame_length} slots cannot hold {len(ids)} nodes")
    return SlotAssignment(frame_length=frame_length,
                          assignments={nid: i for i, nid in enumerate(ids)})


def th_ss_assign(node_ids, frame_length, rng):
    """Each node independently picks one of N sub-slots uniformly at random."""
    ids = list(node_ids)
    if frame_length < 1:
        raise ValueError("frame_length must be at least 1")
    slots = rng.integers(0, frame_length, size=len(ids))
    return SlotAssignment(frame_length=frame_length,
                          assignments={nid: int(s) for nid, s in zip(ids, slots)})


def expected_simultaneous(num_links, frame_length):
    """Expected co-slot population K / N under random slot selection."""
    if num_links < 0:
        raise ValueError("link count must be non-negative")
    if frame_length < 1:
        raise ValueError("frame_length must be at least 1")
    return num_links / frame_length


def th_ss_collision_probability(num_links, frame_length):
    """Probability that a given node shares its slot with anyone,
    1 - (1 - 1/N)^(K-1)."""
    if num_links < 1:
        raise ValueError("need at least one link")
    if frame_length < 1:
        raise ValueError("frame_length must be at least 1")
    return 1.0 - (1.0 - 1.0 / frame_length) ** (num_links - 1)


def th_ss_collision_rate_mc(num_links, frame_length, trials, rng):
    """Empirical per-node collision frequency over independent frames."""
    if trials < 1:
        raise ValueError("need at least one trial")
    slots = rng.integers(0, frame_length, size=(trials, num_links))
    collided = (slots[:, 1:] == slots[:, :1]).any(axis=1)
    return float(collided.mean())


def count_interference_components(num_links):
    """First-order interference components per receiver, (K - 1) * K.

    Each of the K - 1 other tags reflects all K carriers. The network-wide
    total is K times this, K^2 * (K - 1).
    """
    if num_links < 1:
        raise ValueError("need at least one coexisting link")
    return (num_links - 1) * num_links


def aggregate_interference(receiver, actives, pb_power_w, config, mode="all_on",
                           assignment=None):
    """Total interference power at one node's receiver, in watts.

    ``actives`` holds the other transmitting nodes in this slot (the
    receiver's own transmitter excluded). A backscatter interferer
    contributes the beacon carrier reflected off it; a traditional
    interferer contributes its own radiated power. Under ``tdma`` or
    ``th_ss`` only interferers sharing the receiver's sub-slot count.
    Incoherent power sum, first-order reflections only.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if mode != "all_on":
        if assignment is None:
            raise ValueError(f"mode {mode!r} requires a slot assignment")
        rx_slot = assignment.assignments[receiver.id]

    wavelength = config.wavelength_m
    aperture = config.aperture_m2
    rx_pos = receiver.receiver_position

    total = 0.0
    for node in actives:
        if node.id == receiver.id:
            continue
        if mode != "all_on" and assignment.assignments[node.id] != rx_slot:
            continue
        d_to_rx = math.hypot(node.position[0] - rx_pos[0], node.position[1] - rx_pos[1])
        gain_to_rx = friis_gain(d_to_rx, wavelength, aperture, aperture)
        if node.kind == NodeKind.BACKSCATTER:
            gain_pb = friis_gain(node.pb_distance_m, wavelength, aperture, aperture)
            total += pb_power_w * gain_pb * node.reflect_fraction * gain_to_rx
        else:
            total += node.tx_power_w * gain_to_rx
    return total
