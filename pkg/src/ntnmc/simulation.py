"""One simulation run: builds the scenario, wires the control loops and data
plane onto the event queue, and collects per-UE results.

Layout: n_sites tri-sector sites around the scenario center, 10 UEs dropped
per sector and anchored to it, one earth-fixed satellite beam steered at the
center with two tiers of co-channel wrap-around beams as pure interference.
Terrestrial link state is drawn once per run (drop-time realization); the
satellite link is recomputed whenever a UE measures it.

Policy wiring: the MCS policy goes through the full candidate-side admission
(add gate, load headroom, preemptive release). The occupancy policy uses the
same admission without preemption, so it never releases. The RSRP policy is
plain coverage-triggered addition: the candidate accepts every first request
for a UE, which is what lets it reach the whole eligible population within a
short run. OFF disables evaluation and data requests entirely.
"""

from dataclasses import dataclass, field

from . import mc_control as mc
from . import traffic_split as ts
from .channel import McsTable, NtnChannel, TnChannel
from .config import ScenarioConfig
from .dataplane import (NTN_BEAM, PATH_MN, ROLE_MN, ROLE_SN, TN_SECTOR,
                        TTI_NS, CbrFlow, Node, PdcpPdu, PdcpReceiver,
                        UeCounters, buffer_occupancy, schedule_tti)
from .engine import NS_PER_MS, NS_PER_S, RngStreams, Simulator, millis, seconds
from .geometry import (GroundPosition, SatelliteTrack, build_tn_layout,
                       drop_ues_in_sector, ntn_beam_grid)

NTN_CELL_ID = 100
BEAM_PITCH_OVER_RADIUS = 3.0 ** 0.5  # adjacent-beam spacing / beam radius


class ConservationError(AssertionError):
    pass


@dataclass
class UeState:
    ue_id: int
    mn_node_id: int
    pos: object
    tn_sinr_db: float
    tn_mcs: object                      # int or None (below table floor)
    counters: UeCounters = field(default_factory=UeCounters)
    receiver: object = None
    next_sn: int = 0
    sn_bound: bool = False
    pending_reconfig: bool = False
    ntn_rsrp_dbm: float = 0.0
    ntn_sinr_db: float = 0.0
    ntn_delay_ns: int = 0
    best_ntn_rsrp_dbm: float = -999.0
    post_warmup_bits: int = 0


@dataclass
class RunResult:
    policy: str
    seed: int
    ue_ids: list
    throughput_kbps: list
    sn_adds: int
    sn_releases: int
    sn_rejects: int
    distinct_bound_ues: int
    eligible_ues: int
    events: list                        # (t_ns, kind, ue, mn, sn, cause)
    grant_windows: int
    grant_violations: int
    grant_max_used: float
    generated_bits: int
    delivered_bits: int
    dropped_bits: int
    stale_bits: int
    skipped_sns: int


def _mcs_or_none(table, sinr_db):
    if sinr_db < table.thresholds_db[0]:
        return None
    return table.mcs_for_sinr(sinr_db)


class Scenario:
    """A fully wired single run; `run_to_end` drives it and returns results."""

    def __init__(self, cfg: ScenarioConfig, seed: int):
        self.cfg = cfg
        self.seed = seed
        self.sim = Simulator()
        self.rngs = RngStreams(cfg.base_seed, seed)
        self.mcs_table = McsTable.default()
        self.end_ns = seconds(cfg.sim_duration_s)
        self.warmup_ns = seconds(cfg.warmup_s)
        self.events = []
        self.sn_adds = 0
        self.sn_releases = 0
        self.sn_rejects = 0
        self.bound_ever = set()
        self._build()

    # ---- construction -------------------------------------------------

    def _build(self):
        cfg = self.cfg
        center = GroundPosition(cfg.center_lat_deg, cfg.center_lon_deg)
        self.sectors = build_tn_layout(center, cfg.isd_m, cfg.n_sites)

        self.tn = TnChannel(cfg, self.sectors, self.rngs.stream("tn-channel"))
        track = SatelliteTrack(
            GroundPosition(cfg.sat_epoch_lat_deg, cfg.sat_epoch_lon_deg),
            cfg.sat_altitude_m, cfg.sat_speed_ms, cfg.sat_heading_deg)
        beams = ntn_beam_grid(center, BEAM_PITCH_OVER_RADIUS * cfg.ntn_beam_radius_m)
        self.ntn = NtnChannel(cfg, track, beams)

        window_ttis = max(1, round(cfg.load_window_ms))
        self.nodes = {}
        for sec in self.sectors:
            self.nodes[sec.sector_id] = Node(
                sec.sector_id, TN_SECTOR, cfg.n_prb, self.mcs_table, window_ttis)
        self.ntn_node = Node(NTN_CELL_ID, NTN_BEAM, cfg.n_prb, self.mcs_table,
                             window_ttis)
        self.nodes[NTN_CELL_ID] = self.ntn_node

        self.ctrls = {nid: mc.ControllerState(nid) for nid in self.nodes}
        self.book = ts.GrantBook()

        drop_rng = self.rngs.stream("ue-drop")
        self.ues = {}
        ue_id = 0
        for sec in self.sectors:
            for pos in drop_ues_in_sector(sec, drop_rng, cfg.n_ue_per_sector,
                                          cfg.ue_drop_min_m, cfg.ue_drop_max_m):
                self._add_ue(ue_id, sec.sector_id, pos)
                ue_id += 1

        self._schedule_traffic()
        self._schedule_ttis()
        self._schedule_measurements()
        if cfg.policy != "off":
            self._schedule_evaluations()
            self._schedule_data_requests()

    def _add_ue(self, ue_id, sector_id, pos):
        cfg = self.cfg
        self.tn.attach_ue(ue_id, pos)
        sinr = self.tn.sinr[(ue_id, sector_id)]
        ue = UeState(ue_id, sector_id, pos, sinr, _mcs_or_none(self.mcs_table, sinr))
        rsrp, ntn_sinr, delay = self.ntn.link_state(pos, 0)
        ue.ntn_rsrp_dbm, ue.ntn_sinr_db, ue.ntn_delay_ns = rsrp, ntn_sinr, delay
        ue.best_ntn_rsrp_dbm = rsrp
        ue.receiver = PdcpReceiver(
            ue_id, self.sim, millis(cfg.pdcp_reorder_timer_ms),
            cfg.pdcp_reorder_buffer_pdus, self._make_deliver_cb(ue))
        self.nodes[sector_id].add_ue(ue_id, ROLE_MN, ue.tn_mcs)
        self.ues[ue_id] = ue

    def _make_deliver_cb(self, ue):
        warmup = self.warmup_ns

        def deliver(pdu, t_ns):
            if t_ns >= warmup:
                ue.post_warmup_bits += pdu.bits
        return deliver

    # ---- traffic ------------------------------------------------------

    def _schedule_traffic(self):
        cfg = self.cfg
        for ue in self.ues.values():
            flow = CbrFlow(ue.ue_id, cfg.packet_bytes, cfg.cbr_rate_bps)
            self.sim.schedule_at(flow.start_ns, self._on_arrival, ue, flow)

    def _on_arrival(self, ue, flow):
        t = self.sim.now
        self._ingest_app_packet(ue, flow.packet_bits, t)
        if t + flow.interval_ns <= self.end_ns:
            self.sim.schedule_in(flow.interval_ns, self._on_arrival, ue, flow)

    def _ingest_app_packet(self, ue, bits, t_ns):
        """Admit one app packet at the anchor: free granted backlog first,
        drop if the anchor queue cannot take it (packets are only sequence
        numbered once admitted, so drops never punch holes at the receiver),
        then let the forwarding rule steer it."""
        cfg = self.cfg
        ue.counters.generated_bits += bits
        mn = self.nodes[ue.mn_node_id]
        sn = self.ntn_node if ue.sn_bound else None
        ts.drain_forward(mn, sn, self.book, ue.ue_id, t_ns)
        q = mn.queues[ue.ue_id]
        if q.queued_bits + bits > cfg.ue_queue_bytes * 8:
            ue.counters.dropped_bits += bits
            ue.counters.dropped_pdus += 1
            return
        pdu = PdcpPdu(ue.ue_id, ue.next_sn, bits, t_ns, PATH_MN)
        ue.next_sn += 1
        q.push(pdu)
        ts.drain_forward(mn, sn, self.book, ue.ue_id, t_ns)

    # ---- air interface ------------------------------------------------

    def _schedule_ttis(self):
        for node in self.nodes.values():
            self.sim.schedule_at(0, self._on_tti, node)

    def _on_tti(self, node):
        t = self.sim.now
        for ue_id, _res, _mcs, done in schedule_tti(node, t):
            if done:
                self._launch_tb(node, ue_id, done, t)
        if t + TTI_NS <= self.end_ns:
            self.sim.schedule_in(TTI_NS, self._on_tti, node)

    def _launch_tb(self, node, ue_id, pdus, t_ns):
        ue = self.ues[ue_id]
        if node.kind == TN_SECTOR:
            latency = millis(self.cfg.tn_latency_ms)
        else:
            latency = ue.ntn_delay_ns
        for pdu in pdus:
            ue.counters.in_flight_bits += pdu.bits
        self.sim.schedule_in(latency, self._deliver_tb, ue, pdus)

    def _deliver_tb(self, ue, pdus):
        t = self.sim.now
        for pdu in pdus:
            ue.counters.in_flight_bits -= pdu.bits
            ue.receiver.receive(pdu, t)

    # ---- measurements -------------------------------------------------

    def _schedule_measurements(self):
        period = millis(self.cfg.meas_period_ms)
        phase_rng = self.rngs.stream("meas-phase")
        self._meas_err = self.rngs.stream("meas-error")
        for ue in self.ues.values():
            phase = round(phase_rng.random() * period)
            self.sim.schedule_at(phase, self._on_measurement, ue, period)

    def _on_measurement(self, ue, period):
        t = self.sim.now
        cfg = self.cfg
        rsrp, sinr, delay = self.ntn.link_state(ue.pos, t)
        ue.ntn_rsrp_dbm, ue.ntn_sinr_db, ue.ntn_delay_ns = rsrp, sinr, delay
        if rsrp > ue.best_ntn_rsrp_dbm:
            ue.best_ntn_rsrp_dbm = rsrp

        # One channel-estimation error per report, applied coherently to the
        # quantities derived from it; schedulers keep using the true link.
        e_ntn = self._meas_err.gauss(0.0, cfg.meas_error_sigma_db)
        e_tn = self._meas_err.gauss(0.0, cfg.meas_error_sigma_db)
        meas = mc.Measurement(t, rsrp + e_ntn, sinr + e_ntn)

        mn_ctrl = self.ctrls[ue.mn_node_id]
        served = self.nodes[ue.mn_node_id].roles
        mc.on_measurement_report(mn_ctrl, served, ue.ue_id, NTN_CELL_ID, meas)
        self.ntn_node.ue_sinr_db[ue.ue_id] = sinr + e_ntn
        if ue.sn_bound:
            self.ntn_node.ue_mcs[ue.ue_id] = _mcs_or_none(self.mcs_table, sinr)

        reported = _mcs_or_none(self.mcs_table, ue.tn_sinr_db + e_tn)
        if mn_ctrl.reported_mcs.get(ue.ue_id, "unset") != reported:
            mn_ctrl.reported_mcs[ue.ue_id] = reported
            cand_ctrl = self.ctrls[NTN_CELL_ID]
            mc.update_mn_mcs(cand_ctrl, ue.ue_id, reported)

        if t + period <= self.end_ns:
            self.sim.schedule_in(period, self._on_measurement, ue, period)

    # ---- secondary-node control ----------------------------------------

    def _schedule_evaluations(self):
        cfg = self.cfg
        self._eval_rng = self.rngs.stream("eval-jitter")
        period = millis(cfg.eval_period_ms)
        jitter = millis(cfg.eval_jitter_ms)
        for sec in self.sectors:
            ctrl = self.ctrls[sec.sector_id]
            mc.init_eval_clock(ctrl, jitter, self._eval_rng)
            self.sim.schedule_at(ctrl.next_eval_ns, self._on_eval, ctrl,
                                 period, jitter)

    def _on_eval(self, ctrl, period, jitter):
        t = self.sim.now
        cfg = self.cfg
        node = self.nodes[ctrl.node_id]
        single = [u for u in node.roles
                  if u not in ctrl.bound_sn and not self.ues[u].pending_reconfig]
        if cfg.policy == "mcs":
            requests = mc.evaluate_mcs_based(ctrl, single, t, cfg)
        elif cfg.policy == "rsrp":
            requests = mc.evaluate_rsrp_based(ctrl, single, t, cfg)
        else:
            occupancy = lambda u: buffer_occupancy(node, u, cfg.ue_queue_bytes)
            requests = mc.evaluate_bo_based(ctrl, single, occupancy, t, cfg)
        for req in requests:
            self._dispatch_request(ctrl, req, t)
        mc.advance_eval_clock(ctrl, period, jitter, self._eval_rng)
        if ctrl.next_eval_ns <= self.end_ns:
            self.sim.schedule_at(ctrl.next_eval_ns, self._on_eval, ctrl,
                                 period, jitter)

    def _dispatch_request(self, mn_ctrl, req, t_ns):
        cfg = self.cfg
        cand_ctrl = self.ctrls[NTN_CELL_ID]
        if cfg.policy == "rsrp":
            # Coverage-triggered addition: the candidate admits every first
            # request for a UE without load or add-gate admission.
            if req.ue_id in cand_ctrl.bindings:
                decision = mc.Decision(mc.REJECT, "already-bound")
            else:
                decision = mc.Decision(mc.ACK, "coverage")
        else:
            decision = mc.handle_sn_addition_request(
                self.ntn_node, cand_ctrl, req, t_ns, cfg,
                allow_preemption=(cfg.policy == "mcs"),
                release_fn=lambda victim, cause: self._release(victim, cause))
        if decision.verdict == mc.ACK:
            self._start_reconfiguration(mn_ctrl, req, t_ns)
        else:
            self.sn_rejects += 1
            self._log(t_ns, mc.EV_REJECT, req.ue_id, req.mn_node_id,
                      req.candidate_cell, decision.cause)

    def _start_reconfiguration(self, mn_ctrl, req, t_ns):
        ue = self.ues[req.ue_id]
        ue.pending_reconfig = True
        cause = "coverage" if self.cfg.policy == "rsrp" else "admitted"

        def finalize():
            self._finalize_binding(mn_ctrl, req, cause)

        mc.complete_reconfiguration(
            self.sim, millis(self.cfg.ctrl_latency_ms), finalize)

    def _finalize_binding(self, mn_ctrl, req, cause):
        t = self.sim.now
        ue = self.ues[req.ue_id]
        ue.pending_reconfig = False
        cand_ctrl = self.ctrls[NTN_CELL_ID]
        if req.ue_id in cand_ctrl.bindings:
            cand_ctrl.aborted_reconfigs += 1
            return
        cand_ctrl.bindings[req.ue_id] = mc.SecondaryBinding(
            req.ue_id, req.mn_node_id, mn_ctrl.reported_mcs.get(req.ue_id), t)
        mn_ctrl.bound_sn[req.ue_id] = NTN_CELL_ID
        ntn_mcs = _mcs_or_none(self.mcs_table, ue.ntn_sinr_db)
        self.ntn_node.add_ue(req.ue_id, ROLE_SN, ntn_mcs)
        ue.sn_bound = True
        self.bound_ever.add(req.ue_id)
        self.sn_adds += 1
        self._log(t, mc.EV_ADD, req.ue_id, req.mn_node_id, NTN_CELL_ID, cause)

    def _release(self, ue_id, cause):
        t = self.sim.now
        ue = self.ues[ue_id]
        cand_ctrl = self.ctrls[NTN_CELL_ID]
        mn_node = self.nodes[ue.mn_node_id]
        requeued = mc.release_secondary(self.ntn_node, cand_ctrl, mn_node,
                                        ue_id, cause)
        if requeued is None:
            return
        self.ctrls[ue.mn_node_id].bound_sn.pop(ue_id, None)
        self.book.cancel(ue_id)
        ue.sn_bound = False
        self.sn_releases += 1
        self._log(t, mc.EV_RELEASE, ue_id, ue.mn_node_id, NTN_CELL_ID, cause)

    # ---- data requests -------------------------------------------------

    def _schedule_data_requests(self):
        self.sim.schedule_at(0, self._on_data_request_cycle,
                             millis(self.cfg.split_delta_ms))

    def _on_data_request_cycle(self, period):
        t = self.sim.now
        for req in ts.send_periodic_requests(self.ntn_node, t, self.cfg):
            self.book.replace(req)
            ue = self.ues[req.ue_id]
            ts.drain_forward(self.nodes[ue.mn_node_id], self.ntn_node,
                             self.book, req.ue_id, t)
        if t + period <= self.end_ns:
            self.sim.schedule_in(period, self._on_data_request_cycle, period)

    # ---- bookkeeping ----------------------------------------------------

    def _log(self, t_ns, kind, ue_id, mn_id, sn_id, cause):
        self.events.append((t_ns, kind, ue_id, mn_id, sn_id, cause))

    def conservation_defect_bits(self, ue_id):
        """generated - (accounted everywhere); zero when no bit is lost."""
        ue = self.ues[ue_id]
        mn_q = self.nodes[ue.mn_node_id].queued_bits(ue_id)
        sn_q = self.ntn_node.queued_bits(ue_id)
        rx = ue.receiver
        return (ue.counters.generated_bits
                - ue.counters.dropped_bits
                - rx.delivered_bits
                - rx.stale_bits
                - ue.counters.in_flight_bits
                - rx.buffered_bits
                - mn_q - sn_q)

    def check_conservation(self):
        for ue_id in self.ues:
            defect = self.conservation_defect_bits(ue_id)
            if defect != 0:
                raise ConservationError(
                    f"ue {ue_id}: {defect} bits unaccounted at t={self.sim.now}")

    def run_to_end(self):
        self.sim.run_until(self.end_ns)
        return self.finish()

    def finish(self):
        cfg = self.cfg
        for ue in self.ues.values():
            ue.receiver.flush(self.sim.now)
        self.book.close()
        self.check_conservation()

        window_s = cfg.sim_duration_s - cfg.warmup_s
        ue_ids = sorted(self.ues)
        throughput = [self.ues[u].post_warmup_bits / window_s / 1000.0
                      for u in ue_ids]
        eligible = sum(1 for u in ue_ids
                       if self.ues[u].best_ntn_rsrp_dbm >= cfg.rsrp_min_dbm)
        return RunResult(
            policy=cfg.policy,
            seed=self.seed,
            ue_ids=ue_ids,
            throughput_kbps=throughput,
            sn_adds=self.sn_adds,
            sn_releases=self.sn_releases,
            sn_rejects=self.sn_rejects,
            distinct_bound_ues=len(self.bound_ever),
            eligible_ues=eligible,
            events=sorted(self.events),
            grant_windows=self.book.windows_checked,
            grant_violations=self.book.violations,
            grant_max_used=self.book.max_used_fraction,
            generated_bits=sum(u.counters.generated_bits for u in self.ues.values()),
            delivered_bits=sum(u.receiver.delivered_bits for u in self.ues.values()),
            dropped_bits=sum(u.counters.dropped_bits for u in self.ues.values()),
            stale_bits=sum(u.receiver.stale_bits for u in self.ues.values()),
            skipped_sns=sum(u.receiver.skipped_sns for u in self.ues.values()),
        )


def run_single(cfg: ScenarioConfig, seed: int) -> RunResult:
    return Scenario(cfg, seed).run_to_end()
