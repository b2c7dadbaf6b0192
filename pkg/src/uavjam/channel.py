"""Radio propagation and the RSSI/SINR measurement chain at the UAV receiver.

Pathloss uses the UMi street-canyon closed forms (LOS 32.4 + 21 log10 d +
20 log10 f_GHz, NLOS 32.4 + 31.9 log10 d + 20 log10 f_GHz). Fast fading is
a reduced clustered-delay-line surrogate: one Rician line-of-sight ray
(K = 13.3 dB on LOS links, K = 0 otherwise) over C = 12 equal-power scatter
clusters with i.i.d. phases per subchannel and per-cluster Doppler
f_c = f_max * cos(theta_c). Power bookkeeping is linear milliwatts;
interfaces speak dBm/dB.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .errors import ConfigError, DomainError
from .scenario import (
    Role,
    Scenario,
    ScenarioConfig,
    generate_scenario,
    seeded_rng,
    step_mobility,
)

SPEED_OF_LIGHT = 299_792_458.0
RICIAN_K_LOS_DB = 13.3
NUM_CLUSTERS = 12
THERMAL_NOISE_DBM_PER_HZ = -174.0

_TAG_FADING = 2
_TAG_MEAS_NOISE = 3


@dataclass(frozen=True)
class RadioConstants:
    carrier_freq_ghz: float = 3.5
    bandwidth_hz: float = 10e6
    noise_figure_db: float = 9.0
    subchannels: int = 12
    slots_per_trace: int = 20_000
    slot_duration_s: float = 1e-3
    doppler_floor_hz: float = 2.0  # residual scatterer motion in a live city
    meas_noise_db: float = 0.2  # per-slot RSSI/SINR estimator noise
    mobility_tick_s: float = 0.1

    def validate(self):
        if self.bandwidth_hz <= 0:
            raise ConfigError("bandwidth must be positive")
        if not (1 <= self.subchannels <= self.slots_per_trace):
            raise ConfigError("need 1 <= subchannels <= slots_per_trace")
        if self.slot_duration_s <= 0 or self.mobility_tick_s <= 0:
            raise ConfigError("slot and tick durations must be positive")

    @property
    def noise_floor_dbm(self):
        return THERMAL_NOISE_DBM_PER_HZ + 10.0 * math.log10(self.bandwidth_hz) + self.noise_figure_db

    @property
    def carrier_freq_hz(self):
        return self.carrier_freq_ghz * 1e9

    def num_slots(self, sim_time_s):
        return int(round(sim_time_s / self.slot_duration_s))


def dbm_to_mw(dbm):
    return 10.0 ** (np.asarray(dbm) / 10.0)


def mw_to_dbm(mw):
    return 10.0 * np.log10(mw)


def pathloss_db(d3_m, los, constants: RadioConstants):
    """Distance- and condition-dependent pathloss; domain d3 >= 1 m."""
    if d3_m < 1.0:
        raise DomainError(f"pathloss defined for d3 >= 1 m, got {d3_m}")
    f_term = 20.0 * math.log10(constants.carrier_freq_ghz)
    if los:
        return 32.4 + 21.0 * math.log10(d3_m) + f_term
    return 32.4 + 31.9 * math.log10(d3_m) + f_term


def _segment_blocked_by(p0, p1, b):
    """True iff the open segment passes through the building's interior."""
    t0, t1 = 0.0, 1.0
    for lo, hi, o, d in (
        (b.x0, b.x1, p0[0], p1[0] - p0[0]),
        (b.y0, b.y1, p0[1], p1[1] - p0[1]),
        (0.0, b.height, p0[2], p1[2] - p0[2]),
    ):
        if abs(d) < 1e-12:
            if not (lo < o < hi):
                return False
            continue
        ta, tb = (lo - o) / d, (hi - o) / d
        if ta > tb:
            ta, tb = tb, ta
        t0, t1 = max(t0, ta), min(t1, tb)
        if t0 >= t1:
            return False
    return (t1 - t0) > 1e-9


def has_los(p_tx, p_rx, buildings):
    """Deterministic geometric ray test against every building volume."""
    return not any(_segment_blocked_by(p_tx, p_rx, b) for b in buildings)


def cdl_gain(phases, dopplers, los_phase, los_doppler, k_lin, t):
    """Reference single-subchannel complex gain at time t (test-facing).

    gain = sqrt(K/(K+1)) e^{j(psi + 2 pi f_D t)}
         + sqrt(1/((K+1) C)) sum_c e^{j(phi_c + 2 pi f_c t)}
    """
    c = len(phases)
    two_pi = 2.0 * math.pi
    los = math.sqrt(k_lin / (k_lin + 1.0)) * np.exp(1j * (los_phase + two_pi * los_doppler * t))
    scatter = np.exp(1j * (phases + two_pi * dopplers * t)).sum()
    return los + math.sqrt(1.0 / ((k_lin + 1.0) * c)) * scatter


@dataclass
class LinkState:
    """Per-transmitter state of the link into the UAV receiver."""

    tx: int
    rx: int
    los: bool
    pathloss_db: float
    rician_k: float  # linear ratio; 0 on NLOS links
    phases: np.ndarray  # [subchannels, clusters] radians
    cos_theta: np.ndarray  # [clusters] fixed cluster-angle cosines
    cluster_dopplers: np.ndarray  # [clusters] Hz, refreshed per mobility tick
    los_doppler: float
    los_phase: float


class LinkEnsemble:
    """Fading/pathloss state for every transmitter heard by the UAV.

    Per-trace private; slots are generated segment by segment so cluster
    phases stay continuous across mobility ticks.
    """

    def __init__(self, scenario: Scenario, constants: RadioConstants, rng):
        self.constants = constants
        uav = scenario.auth_uav()
        self.rx_id = uav.id
        self.links = []
        for node in scenario.nodes:
            if node.id == uav.id:
                continue
            phases = rng.uniform(0.0, 2.0 * math.pi, (constants.subchannels, NUM_CLUSTERS))
            cos_theta = np.cos(rng.uniform(0.0, 2.0 * math.pi, NUM_CLUSTERS))
            self.links.append(
                LinkState(
                    tx=node.id, rx=uav.id, los=True, pathloss_db=0.0, rician_k=0.0,
                    phases=phases, cos_theta=cos_theta,
                    cluster_dopplers=np.zeros(NUM_CLUSTERS), los_doppler=0.0,
                    los_phase=0.0,
                )
            )
        self.serving_index = None
        for idx, link in enumerate(self.links):
            if link.tx == scenario.cells()[uav.serving_cell].id:
                self.serving_index = idx
        self.refresh_geometry(scenario)

    def refresh_geometry(self, scenario: Scenario):
        uav = scenario.auth_uav()
        fc = self.constants.carrier_freq_hz
        k_los = 10.0 ** (RICIAN_K_LOS_DB / 10.0)
        for link in self.links:
            tx = scenario.nodes[link.tx]
            delta = uav.position - tx.position
            d3 = max(float(np.linalg.norm(delta)), 1.0)
            link.los = has_los(tx.position, uav.position, scenario.buildings)
            link.pathloss_db = pathloss_db(d3, link.los, self.constants)
            link.rician_k = k_los if link.los else 0.0
            v_rel = tx.velocity - uav.velocity
            speed = float(np.linalg.norm(v_rel))
            f_max = max(speed * fc / SPEED_OF_LIGHT, self.constants.doppler_floor_hz)
            link.cluster_dopplers = f_max * link.cos_theta
            link.los_doppler = float(v_rel @ delta) / d3 * fc / SPEED_OF_LIGHT

    def segment_powers(self, n_slots):
        """Mean |gain|^2 over subchannels for each link, [n_slots, n_links]."""
        out = np.empty((n_slots, len(self.links)))
        for idx, link in enumerate(self.links):
            powers, phases, los_phase = _kernels.fading_powers(
                link.phases, link.los_phase, link.cluster_dopplers,
                link.los_doppler, link.rician_k, self.constants.slot_duration_s,
                n_slots,
            )
            link.phases = np.asarray(phases)
            link.los_phase = float(los_phase)
            out[:, idx] = powers
        return out


def received_power_mw(tx_power_dbm, link: LinkState, t, constants: RadioConstants):
    """Link budget at time t, averaged across the subchannels (test-facing)."""
    gains = [
        cdl_gain(link.phases[s], link.cluster_dopplers, link.los_phase,
                 link.los_doppler, link.rician_k, t)
        for s in range(constants.subchannels)
    ]
    mean_pow = float(np.mean([abs(g) ** 2 for g in gains]))
    return 10.0 ** ((tx_power_dbm - link.pathloss_db) / 10.0) * mean_pow


def combine_measurements(p_serving_mw, p_interference_mw, noise_mw):
    """RSSI (total power) and SINR at the receiver, straight from linear sums."""
    p_serving_mw = np.asarray(p_serving_mw, dtype=float)
    p_interference_mw = np.asarray(p_interference_mw, dtype=float)
    rssi = 10.0 * np.log10(p_serving_mw + p_interference_mw + noise_mw)
    sinr = 10.0 * np.log10(p_serving_mw / (p_interference_mw + noise_mw))
    return rssi, sinr


def _tx_powers(scenario: Scenario):
    uav_id = scenario.auth_uav().id
    return np.array([n.tx_power_dbm for n in scenario.nodes if n.id != uav_id])


def _attacker_columns(scenario: Scenario):
    uav_id = scenario.auth_uav().id
    cols = []
    for idx, n in enumerate(nd for nd in scenario.nodes if nd.id != uav_id):
        if n.role is Role.ATTACKER:
            cols.append(idx)
    return cols


def slot_measurements(scenario: Scenario, constants: RadioConstants, t):
    """One-shot (rssi_dbm, sinr_db) at time t, noise-free by contract."""
    uav = scenario.auth_uav()
    if uav.serving_cell is None:
        raise ConfigError("authenticated UAV has no serving cell")
    ens = LinkEnsemble(scenario, constants, seeded_rng(scenario.seed, _TAG_FADING))
    budgets = dbm_to_mw(_tx_powers(scenario) - np.array([l.pathloss_db for l in ens.links]))
    p = np.array([
        float(np.mean([
            abs(cdl_gain(l.phases[s], l.cluster_dopplers, l.los_phase,
                         l.los_doppler, l.rician_k, t)) ** 2
            for s in range(constants.subchannels)
        ]))
        for l in ens.links
    ]) * budgets
    serving = p[ens.serving_index]
    interference = p.sum() - serving
    noise_mw = float(dbm_to_mw(constants.noise_floor_dbm))
    rssi, sinr = combine_measurements(serving, interference, noise_mw)
    return float(rssi), float(sinr)


def synthesize_measurements(config: ScenarioConfig, seed, constants: RadioConstants | None = None,
                            jammer_onset_slot=None):
    """Full per-slot RSSI/SINR series for one scenario.

    jammer_onset_slot: attackers transmit from that slot on (None = slot 0);
    pass a value >= the slot count to keep them silent (common-random-number
    comparisons reuse the exact same fading draws either way).
    """
    constants = constants or RadioConstants()
    constants.validate()
    scenario = generate_scenario(config, seed)
    eff_seed = scenario.seed

    n_total = constants.num_slots(config.sim_time_s)
    if n_total < 1:
        raise ConfigError("sim_time shorter than one slot")
    onset = 0 if jammer_onset_slot is None else int(jammer_onset_slot)

    ens = LinkEnsemble(scenario, constants, seeded_rng(eff_seed, _TAG_FADING))
    attacker_cols = _attacker_columns(scenario)
    noise_mw = float(dbm_to_mw(constants.noise_floor_dbm))
    tick_slots = max(1, int(round(constants.mobility_tick_s / constants.slot_duration_s)))
    anything_moves = (config.mobility_group.attackers_move and config.num_attackers > 0) \
        or (config.mobility_group.users_move and config.num_users > 0)

    rssi = np.empty(n_total)
    sinr = np.empty(n_total)
    s0 = 0
    while s0 < n_total:
        n_seg = min(tick_slots, n_total - s0)
        mean_pow = ens.segment_powers(n_seg)
        budgets = dbm_to_mw(_tx_powers(scenario) - np.array([l.pathloss_db for l in ens.links]))
        p_mw = mean_pow * budgets[None, :]
        if attacker_cols and onset > s0:
            gate = min(onset - s0, n_seg)
            p_mw[:gate, attacker_cols] = 0.0
        serving = p_mw[:, ens.serving_index]
        interference = p_mw.sum(axis=1) - serving
        rssi[s0:s0 + n_seg], sinr[s0:s0 + n_seg] = combine_measurements(
            serving, interference, noise_mw)
        s0 += n_seg
        if s0 < n_total and anything_moves:
            scenario = step_mobility(scenario, n_seg * constants.slot_duration_s)
            ens.refresh_geometry(scenario)

    if constants.meas_noise_db > 0:
        noise_rng = seeded_rng(eff_seed, _TAG_MEAS_NOISE)
        rssi = rssi + constants.meas_noise_db * noise_rng.standard_normal(n_total)
        sinr = sinr + constants.meas_noise_db * noise_rng.standard_normal(n_total)
    return rssi, sinr
