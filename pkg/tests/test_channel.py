import math
import random

import pytest

from ntnmc.channel import (DEFAULT_MCS_EFFICIENCIES, DEFAULT_MCS_THRESHOLDS_DB,
                           SPEED_OF_LIGHT, McsTable, NtnChannel, TnChannel,
                           los_probability, noise_per_re_dbm, ntn_fspl_db,
                           tn_pathloss_db, tn_pathloss_los_db,
                           tn_pathloss_nlos_db)
from ntnmc.config import ScenarioConfig
from ntnmc.geometry import (GroundPosition, SatelliteTrack, build_tn_layout,
                            ntn_beam_grid)


def test_fspl_anchor_600km_2ghz():
    got = ntn_fspl_db(600_000.0, 2.0)
    oracle = 20.0 * math.log10(4.0 * math.pi * 600_000.0 * 2.0e9 / SPEED_OF_LIGHT)
    # the 92.45 constant rounds the exact 4*pi*d*f/c form to 0.003 dB
    assert abs(got - oracle) < 0.005
    assert abs(got - 154.03) <= 0.01


def test_noise_per_re_matches_thermal_floor():
    oracle = -174.0 + 10.0 * math.log10(15_000.0) + 7.0
    assert abs(noise_per_re_dbm(7.0) - oracle) < 1e-9


def test_los_probability_shape():
    assert los_probability(5.0) == 1.0
    assert los_probability(10.0) == 1.0
    assert abs(los_probability(1010.0) - math.exp(-1.0)) < 1e-12
    assert los_probability(5000.0) < los_probability(500.0)


def test_mcs_table_defaults():
    table = McsTable.default()
    assert len(DEFAULT_MCS_THRESHOLDS_DB) == 32
    assert len(DEFAULT_MCS_EFFICIENCIES) == 32
    assert table.thresholds_db[0] == -9.5
    assert table.thresholds_db[22] == 12.5
    assert table.efficiency(21) == 4.5234
    assert table.efficiency(22) == 4.8164
    assert table.mcs_for_sinr(12.7) == 22
    assert table.mcs_for_sinr(-9.5) == 0
    assert table.mcs_for_sinr(-50.0) == 0
    assert table.mcs_for_sinr(200.0) == 31


def test_mcs_table_rejects_non_monotone_input():
    ths = list(DEFAULT_MCS_THRESHOLDS_DB)
    ths[5] = ths[4]
    with pytest.raises(ValueError):
        McsTable(ths, list(DEFAULT_MCS_EFFICIENCIES))
    effs = list(DEFAULT_MCS_EFFICIENCIES)
    effs[10] = effs[11]
    with pytest.raises(ValueError):
        McsTable(list(DEFAULT_MCS_THRESHOLDS_DB), effs)


def test_tn_pathloss_monotone_and_clamped():
    hb, hu = 35.0, 1.5
    assert tn_pathloss_los_db(100.0, 2.0, hb, hu) <= tn_pathloss_nlos_db(100.0, 2.0, hb, hu)
    assert tn_pathloss_los_db(100.0, 2.0, hb, hu) < tn_pathloss_los_db(1000.0, 2.0, hb, hu)
    assert tn_pathloss_nlos_db(100.0, 2.0, hb, hu) < tn_pathloss_nlos_db(1000.0, 2.0, hb, hu)
    # distances below the model floor all evaluate at the floor
    assert tn_pathloss_db(1.0, 2.0, True, hb, hu) == tn_pathloss_db(35.0, 2.0, True, hb, hu)


def test_tn_channel_populates_every_sector():
    cfg = ScenarioConfig()
    sectors = build_tn_layout(GroundPosition(cfg.center_lat_deg,
                                             cfg.center_lon_deg),
                              cfg.isd_m, cfg.n_sites)
    ch = TnChannel(cfg, sectors, random.Random(3))
    pos = GroundPosition(cfg.center_lat_deg + 0.01, cfg.center_lon_deg)
    ch.attach_ue(0, pos)
    for sec in sectors:
        assert (0, sec.sector_id) in ch.rsrp
        assert (0, sec.sector_id) in ch.sinr


def _default_ntn():
    cfg = ScenarioConfig()
    center = GroundPosition(cfg.center_lat_deg, cfg.center_lon_deg)
    track = SatelliteTrack(
        GroundPosition(cfg.sat_epoch_lat_deg, cfg.sat_epoch_lon_deg),
        cfg.sat_altitude_m, cfg.sat_speed_ms, cfg.sat_heading_deg)
    beams = ntn_beam_grid(center,
                          math.sqrt(3.0) * cfg.ntn_beam_radius_m, tiers=2)
    return cfg, center, NtnChannel(cfg, track, beams)


def test_ntn_link_budget_at_beam_center_epoch():
    cfg, center, ch = _default_ntn()
    rsrp, sinr, delay = ch.link_state(center, 0)

    # EIRP spread over the carrier, shared across the resource grid
    eirp_dbm = cfg.ntn_eirp_dbw_mhz + 10.0 * math.log10(cfg.bandwidth_mhz) + 30.0
    per_re = eirp_dbm - 10.0 * math.log10(cfg.n_prb * 12)
    fspl = ntn_fspl_db(cfg.sat_altitude_m, cfg.carrier_ghz)
    want_rsrp = per_re - fspl + cfg.ue_ntn_gain_dbi
    assert abs(rsrp - want_rsrp) < 0.05

    noise = noise_per_re_dbm(cfg.ue_noise_figure_db)
    i_over_s = 6.0 * 10.0 ** (-cfg.ntn_beam_floor_db / 10.0)
    n_over_s = 10.0 ** ((noise - want_rsrp) / 10.0)
    want_sinr = -10.0 * math.log10(i_over_s + n_over_s)
    assert abs(sinr - want_sinr) < 0.05
    assert abs(sinr - 12.70) < 0.05
    assert McsTable.default().mcs_for_sinr(sinr) == 22

    want_delay = round(2.0 * cfg.sat_altitude_m / SPEED_OF_LIGHT * 1e9)
    assert delay == want_delay == 4_002_769


def test_ntn_rsrp_qualifies_across_entire_layout():
    cfg, center, ch = _default_ntn()
    sectors = build_tn_layout(center, cfg.isd_m, cfg.n_sites)
    rng = random.Random(11)
    from ntnmc.geometry import drop_ues_in_sector
    for sec in sectors:
        for pos in drop_ues_in_sector(sec, rng, 10, cfg.ue_drop_min_m,
                                      cfg.ue_drop_max_m):
            rsrp, _sinr, _delay = ch.link_state(pos, 0)
            assert rsrp >= cfg.rsrp_min_dbm


def test_ntn_delay_tracks_slant_growth():
    cfg, center, ch = _default_ntn()
    _r0, _s0, d0 = ch.link_state(center, 0)
    # a minute later the subpoint has moved ~400 km, lengthening the path
    from ntnmc.engine import seconds
    _r1, _s1, d1 = ch.link_state(center, seconds(60.0))
    assert d1 > d0
