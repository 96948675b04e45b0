"""Link-level models: path loss, antenna patterns, RSRP/SINR, SINR-to-MCS.

The terrestrial model is a rural-macro style two-branch loss (breakpoint LOS
branch, power-law NLOS branch, NLOS >= LOS by construction) with lognormal
shadowing drawn once per UE-cell pair. The satellite link is free-space loss
only, always LOS, no fading. Interference is computed with every co-channel
transmitter always on (full-buffer interferers), so per-link SINR is static
for fixed geometry.
"""

import math

from .geometry import bearing_deg, elevation_and_slant, ground_distance_m

SPEED_OF_LIGHT = 299_792_458.0
SUBCARRIER_HZ = 15_000.0
SUBCARRIERS_PER_PRB = 12
SYMBOLS_PER_TTI = 14

# Rural-macro model internals (not scenario knobs).
_RMA_BUILDING_H = 5.0    # average building height, m
_RMA_STREET_W = 20.0     # street width, m


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


def linear_to_db(x):
    return 10.0 * math.log10(x)


def los_probability(d2d_m):
    """Rural-macro LOS probability: certain within 10 m, exponential beyond."""
    if d2d_m <= 10.0:
        return 1.0
    return math.exp(-(d2d_m - 10.0) / 1000.0)


def _rma_breakpoint_m(bs_height_m, ue_height_m, fc_ghz):
    return 2.0 * math.pi * bs_height_m * ue_height_m * (fc_ghz * 1e9) / SPEED_OF_LIGHT


def _rma_pl1_db(d3d_m, fc_ghz):
    h = _RMA_BUILDING_H
    a = min(0.03 * h ** 1.72, 10.0)
    b = min(0.044 * h ** 1.72, 14.77)
    return (20.0 * math.log10(40.0 * math.pi * d3d_m * fc_ghz / 3.0)
            + a * math.log10(d3d_m) - b + 0.002 * math.log10(h) * d3d_m)


def tn_pathloss_los_db(d2d_m, fc_ghz, bs_height_m, ue_height_m, min_distance_m=35.0):
    """LOS branch: free-space-like up to the breakpoint, 40 dB/decade beyond."""
    d2d = max(d2d_m, min_distance_m)
    dh = bs_height_m - ue_height_m
    d3d = math.sqrt(d2d * d2d + dh * dh)
    dbp = _rma_breakpoint_m(bs_height_m, ue_height_m, fc_ghz)
    if d3d <= dbp:
        return _rma_pl1_db(d3d, fc_ghz)
    return _rma_pl1_db(dbp, fc_ghz) + 40.0 * math.log10(d3d / dbp)


def tn_pathloss_nlos_db(d2d_m, fc_ghz, bs_height_m, ue_height_m, min_distance_m=35.0):
    """NLOS branch; never below the LOS branch at the same distance."""
    d2d = max(d2d_m, min_distance_m)
    dh = bs_height_m - ue_height_m
    d3d = math.sqrt(d2d * d2d + dh * dh)
    h = _RMA_BUILDING_H
    w = _RMA_STREET_W
    pl_nlos = (161.04 - 7.1 * math.log10(w) + 7.5 * math.log10(h)
               - (24.37 - 3.7 * (h / bs_height_m) ** 2) * math.log10(bs_height_m)
               + (43.42 - 3.1 * math.log10(bs_height_m)) * (math.log10(d3d) - 3.0)
               + 20.0 * math.log10(fc_ghz)
               - (3.2 * (math.log10(11.75 * ue_height_m)) ** 2 - 4.97))
    return max(pl_nlos, tn_pathloss_los_db(d2d, fc_ghz, bs_height_m, ue_height_m, min_distance_m))


def tn_pathloss_db(d2d_m, fc_ghz, los, bs_height_m, ue_height_m, min_distance_m=35.0):
    if los:
        return tn_pathloss_los_db(d2d_m, fc_ghz, bs_height_m, ue_height_m, min_distance_m)
    return tn_pathloss_nlos_db(d2d_m, fc_ghz, bs_height_m, ue_height_m, min_distance_m)


def ntn_fspl_db(slant_m, fc_ghz):
    """Free-space path loss, d in meters: 92.45 + 20 log10(d_km) + 20 log10(f_GHz)."""
    return 92.45 + 20.0 * math.log10(slant_m / 1000.0) + 20.0 * math.log10(fc_ghz)


def sector_pattern_db(offaxis_deg, beamwidth_deg=65.0, max_attenuation_db=30.0):
    """Horizontal tri-sector pattern: parabolic roll-off with a floor."""
    a = ((offaxis_deg + 180.0) % 360.0) - 180.0
    return -min(12.0 * (a / beamwidth_deg) ** 2, max_attenuation_db)


def beam_pattern_db(ground_offset_m, beam_radius_m, floor_db=30.0):
    """Satellite beam pattern: flat inside the 3 dB radius, floor outside."""
    return 0.0 if ground_offset_m <= beam_radius_m else -floor_db


def noise_per_re_dbm(noise_figure_db):
    return -174.0 + 10.0 * math.log10(SUBCARRIER_HZ) + noise_figure_db


# 32-step SINR-to-MCS ladder. Thresholds are 1.0 dB apart starting at -9.5 dB;
# spectral efficiencies (bits per resource element) follow the standard
# low-SE + 256QAM ladder, 0.0586 .. 7.4063.
DEFAULT_MCS_THRESHOLDS_DB = [-9.5 + 1.0 * i for i in range(32)]
DEFAULT_MCS_EFFICIENCIES = [
    0.0586, 0.0977, 0.1523, 0.1885, 0.2344, 0.3770, 0.6016, 0.8770,
    1.1758, 1.4766, 1.6953, 1.9141, 2.1602, 2.4063, 2.5703, 2.7305,
    3.0293, 3.3223, 3.6094, 3.9023, 4.2129, 4.5234, 4.8164, 5.1152,
    5.3320, 5.5547, 5.8906, 6.2266, 6.5703, 6.9141, 7.1602, 7.4063,
]


class McsTable:
    """Monotone SINR threshold table mapping link quality to an MCS index."""

    def __init__(self, thresholds_db, efficiencies):
        if len(thresholds_db) != len(efficiencies):
            raise ValueError("thresholds and efficiencies must have equal length")
        if any(b <= a for a, b in zip(thresholds_db, thresholds_db[1:])):
            raise ValueError("MCS thresholds must be strictly increasing")
        if any(b <= a for a, b in zip(efficiencies, efficiencies[1:])):
            raise ValueError("MCS efficiencies must be strictly increasing")
        self.thresholds_db = list(thresholds_db)
        self.efficiencies = list(efficiencies)

    def __len__(self):
        return len(self.thresholds_db)

    def mcs_for_sinr(self, sinr_db):
        """Highest index whose threshold is met; clamps at both ends."""
        idx = 0
        for i, th in enumerate(self.thresholds_db):
            if sinr_db >= th:
                idx = i
            else:
                break
        return idx

    def efficiency(self, mcs):
        return self.efficiencies[mcs]

    @classmethod
    def default(cls):
        return cls(DEFAULT_MCS_THRESHOLDS_DB, DEFAULT_MCS_EFFICIENCIES)


class TnChannel:
    """Static per-(UE, sector) terrestrial link state.

    LOS state and shadowing are drawn once per pair when a UE is attached and
    never redrawn (drop-time channel realization, no fast fading). RSRP and
    SINR are therefore precomputed constants.
    """

    def __init__(self, cfg, sectors, rng):
        self.cfg = cfg
        self.sectors = sectors
        self.rng = rng
        self.rsrp = {}      # (ue_id, sector_id) -> dBm per RE
        self.sinr = {}      # (ue_id, serving sector_id) -> dB
        self.los = {}       # (ue_id, sector_id) -> bool
        self._n_re_grid = cfg.n_prb * SUBCARRIERS_PER_PRB

    def attach_ue(self, ue_id, ue_pos):
        cfg = self.cfg
        per_re_tx = cfg.tn_tx_power_dbm - linear_to_db(self._n_re_grid)
        powers = []
        for sec in self.sectors:
            d = ground_distance_m(ue_pos, sec.position)
            los = self.rng.random() < los_probability(max(d, cfg.min_link_distance_m))
            sigma = cfg.shadow_sigma_los_db if los else cfg.shadow_sigma_nlos_db
            shadow = self.rng.gauss(0.0, sigma)
            pl = tn_pathloss_db(d, cfg.carrier_ghz, los,
                                cfg.tn_bs_height_m, cfg.ue_height_m,
                                cfg.min_link_distance_m)
            offaxis = bearing_deg(sec.position, ue_pos) - sec.boresight_deg
            gain = cfg.tn_sector_gain_dbi + sector_pattern_db(
                offaxis, cfg.tn_sector_beamwidth_deg, cfg.tn_sector_floor_db)
            rsrp = per_re_tx + gain - pl + shadow
            self.los[(ue_id, sec.sector_id)] = los
            self.rsrp[(ue_id, sec.sector_id)] = rsrp
            powers.append(db_to_linear(rsrp))

        noise = db_to_linear(noise_per_re_dbm(cfg.ue_noise_figure_db))
        total = sum(powers)
        for sec, p in zip(self.sectors, powers):
            self.sinr[(ue_id, sec.sector_id)] = linear_to_db(p / (total - p + noise))


class NtnChannel:
    """Satellite link state: serving center beam plus co-channel wrap-around beams.

    Beam centers are earth-fixed; only the satellite moves, so RSRP/SINR vary
    (slowly) with time through the slant range.
    """

    def __init__(self, cfg, track, beams, serving_color=0):
        self.cfg = cfg
        self.track = track
        # Interferers: same color as the serving beam, excluding beam 0 itself.
        self.serving_beam = beams[0]
        self.cochannel = [b for b in beams[1:] if b[3] == serving_color]
        self._n_re_grid = cfg.n_prb * SUBCARRIERS_PER_PRB
        self._eirp_dbm = (cfg.ntn_eirp_dbw_mhz + linear_to_db(cfg.bandwidth_mhz) + 30.0)
        self._noise = db_to_linear(noise_per_re_dbm(cfg.ue_noise_figure_db))

    def _per_re_rx_dbm(self, ue_pos, beam_pos, slant_m):
        offset = ground_distance_m(ue_pos, beam_pos)
        return (self._eirp_dbm - linear_to_db(self._n_re_grid)
                + beam_pattern_db(offset, self.cfg.ntn_beam_radius_m, self.cfg.ntn_beam_floor_db)
                - ntn_fspl_db(slant_m, self.cfg.carrier_ghz)
                + self.cfg.ue_ntn_gain_dbi)

    def link_state(self, ue_pos, t_ns):
        """(rsrp_dbm, sinr_db, one_way_delay_ns) or None if below horizon."""
        subpoint = self.track.subpoint_at(t_ns)
        es = elevation_and_slant(ue_pos, subpoint, self.track.altitude_m)
        if es is None:
            return None
        _, slant = es
        rsrp = self._per_re_rx_dbm(ue_pos, self.serving_beam[2], slant)
        interference = sum(
            db_to_linear(self._per_re_rx_dbm(ue_pos, b[2], slant))
            for b in self.cochannel)
        sinr = linear_to_db(db_to_linear(rsrp) / (interference + self._noise))
        # Transparent payload: gateway-satellite-UE, two slant hops.
        delay_ns = round(2.0 * slant / SPEED_OF_LIGHT * 1e9)
        return rsrp, sinr, delay_ns
