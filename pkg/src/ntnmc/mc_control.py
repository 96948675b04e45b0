"""Secondary-node addition control: measurement store, the three addition
policies, candidate-side admission, reconfiguration and release.

Requester side (anchor gNB): stores measurement reports per (UE, cell),
evaluates its single-connectivity UEs on a jittered period and issues
addition requests, at most one per candidate cell per request-gate period.

Candidate side (the satellite beam): refuses anything within the add-gate of
its previous acknowledgement, admits freely while its load leaves headroom,
and above that may free a slot by releasing the served secondary whose
anchor-link MCS is highest, provided it strictly exceeds the requester's.
"""

from dataclasses import dataclass
from typing import Optional

from .dataplane import compute_load
from .engine import NS_PER_MS

ACK = "ACK"
REJECT = "REJECT"

# Event-log labels.
EV_ADD = "ADD"
EV_RELEASE = "RELEASE"
EV_REJECT = "REJECT"


def _ns(ms):
    return round(ms * NS_PER_MS)


def _mcs_key(mcs):
    # UEs whose anchor link is below the MCS table floor sort before MCS 0.
    return -1 if mcs is None else mcs


@dataclass(frozen=True)
class Measurement:
    t_ns: int
    rsrp_dbm: float
    sinr_db: float


@dataclass
class SnAdditionRequest:
    ue_id: int
    mn_node_id: int
    candidate_cell: int
    mn_mcs: Optional[int]
    sent_at_ns: int


@dataclass
class SecondaryBinding:
    ue_id: int
    mn_node_id: int
    last_known_mn_mcs: Optional[int]
    bound_at_ns: int


@dataclass
class Decision:
    verdict: str
    cause: str
    released_ue: Optional[int] = None


class ControllerState:
    """Per-gNB dual-connectivity control state (requester and candidate)."""

    def __init__(self, node_id):
        self.node_id = node_id
        # requester side
        self.reports = {}        # (ue_id, cell_id) -> Measurement
        self.reported_mcs = {}   # ue_id -> anchor-link MCS from the last report
        self.last_request = {}   # cell_id -> time the last addition request was sent
        self.bound_sn = {}       # ue_id -> cell_id of the active secondary
        self.next_eval_ns = 0
        self.t_prev_ns = 0
        self.unknown_ue_reports = 0
        # candidate side
        self.last_ack_ns = None
        self.bindings = {}       # ue_id -> SecondaryBinding
        self.aborted_reconfigs = 0
        self.noop_releases = 0


def on_measurement_report(ctrl, served_ues, ue_id, cell_id, meas):
    """Store a report, newest per (UE, cell) wins; reports for UEs this gNB
    does not serve are dropped and counted."""
    if ue_id not in served_ues:
        ctrl.unknown_ue_reports += 1
        return False
    ctrl.reports[(ue_id, cell_id)] = meas
    return True


def init_eval_clock(ctrl, jitter_ns, rng):
    t_del = round(rng.random() * jitter_ns)
    ctrl.next_eval_ns = t_del
    ctrl.t_prev_ns = t_del


def advance_eval_clock(ctrl, period_ns, jitter_ns, rng):
    """next = t + period - t_prev + t_del: the fresh jitter replaces the old
    one so evaluation k fires at k*period + t_del_k and jitter never drifts."""
    t_del = round(rng.random() * jitter_ns)
    ctrl.next_eval_ns += period_ns - ctrl.t_prev_ns + t_del
    ctrl.t_prev_ns = t_del


def _best_candidate(ctrl, ue_id, t_ns, cfg):
    """Freshest-known candidate cell with the highest RSRP among cells not
    asked within the request gate. Returns (cell_id, rsrp_dbm) or None."""
    stale_ns = _ns(cfg.meas_staleness_ms)
    gate_ns = _ns(cfg.request_gate_ms)
    best = None
    for (u, cell_id), meas in ctrl.reports.items():
        if u != ue_id:
            continue
        if t_ns - meas.t_ns > stale_ns:
            continue
        last = ctrl.last_request.get(cell_id)
        if last is not None and t_ns - last < gate_ns:
            continue
        if best is None or (meas.rsrp_dbm, -cell_id) > (best[1], -best[0]):
            best = (cell_id, meas.rsrp_dbm)
    return best


def _try_request(ctrl, ue_id, t_ns, cfg):
    best = _best_candidate(ctrl, ue_id, t_ns, cfg)
    if best is None:
        return None
    cell_id, rsrp = best
    if rsrp < cfg.rsrp_min_dbm:
        return None
    ctrl.last_request[cell_id] = t_ns
    return SnAdditionRequest(ue_id, ctrl.node_id, cell_id,
                             ctrl.reported_mcs.get(ue_id), t_ns)


def evaluate_mcs_based(ctrl, single_ues, t_ns, cfg):
    """Scan single-connectivity UEs in ascending anchor-MCS order (ties by
    UE id) and stop at the first whose MCS exceeds the threshold."""
    requests = []
    order = sorted(single_ues,
                   key=lambda u: (_mcs_key(ctrl.reported_mcs.get(u)), u))
    for ue_id in order:
        if _mcs_key(ctrl.reported_mcs.get(ue_id)) > cfg.mcs_threshold:
            break
        req = _try_request(ctrl, ue_id, t_ns, cfg)
        if req is not None:
            requests.append(req)
    return requests


def evaluate_rsrp_based(ctrl, single_ues, t_ns, cfg):
    """Request a secondary for every single-connectivity UE with a fresh
    candidate at or above the RSRP floor."""
    requests = []
    for ue_id in sorted(single_ues):
        req = _try_request(ctrl, ue_id, t_ns, cfg)
        if req is not None:
            requests.append(req)
    return requests


def evaluate_bo_based(ctrl, single_ues, occupancy, t_ns, cfg):
    """Like the RSRP policy but only for UEs whose anchor transmit queue has
    filled past the occupancy threshold, most backlogged first. `occupancy`
    maps ue_id -> fraction."""
    crossed = [u for u in single_ues if occupancy(u) >= cfg.bo_threshold_frac]
    requests = []
    for ue_id in sorted(crossed, key=lambda u: (-occupancy(u), u)):
        req = _try_request(ctrl, ue_id, t_ns, cfg)
        if req is not None:
            requests.append(req)
    return requests


def handle_sn_addition_request(cand_node, ctrl, req, t_ns, cfg,
                               allow_preemption=True, release_fn=None):
    """Candidate-side admission for one addition request.

    Order of checks: duplicate binding, recent-ack gate, load headroom,
    preemption. Only an ACK re-arms the add gate. With `allow_preemption`
    off (occupancy/RSRP baselines) an overloaded candidate simply refuses.
    """
    if req.ue_id in ctrl.bindings:
        return Decision(REJECT, "already-bound")
    if (ctrl.last_ack_ns is not None
            and t_ns - ctrl.last_ack_ns <= _ns(cfg.add_gate_ms)):
        return Decision(REJECT, "recent-ack")
    if compute_load(cand_node) <= cfg.load_ack_max:
        ctrl.last_ack_ns = t_ns
        return Decision(ACK, "headroom")
    if allow_preemption and ctrl.bindings:
        victim_id, victim = max(
            ctrl.bindings.items(),
            key=lambda kv: (_mcs_key(kv[1].last_known_mn_mcs), -kv[0]))
        if _mcs_key(victim.last_known_mn_mcs) > _mcs_key(req.mn_mcs):
            if release_fn is not None:
                release_fn(victim_id, "preempted")
            else:
                ctrl.bindings.pop(victim_id)
            ctrl.last_ack_ns = t_ns
            return Decision(ACK, "preempted-weakest", victim_id)
    return Decision(REJECT, "overloaded")


def complete_reconfiguration(sim, latency_ns, finalize):
    """Three-message reconfiguration (anchor->UE, UE->anchor,
    anchor->secondary); the binding activates with the last message.
    `finalize` must itself abort if the UE got a secondary in the meantime."""
    def msg3():
        finalize()

    def msg2():
        sim.schedule_in(latency_ns, msg3)

    def msg1():
        sim.schedule_in(latency_ns, msg2)

    sim.schedule_in(latency_ns, msg1)


def release_secondary(cand_node, ctrl, mn_node, ue_id, cause):
    """Tear down one binding; secondary-queued PDUs go back to the anchor.
    Releasing an unbound UE is a counted no-op. Returns the number of PDUs
    returned to the anchor, or None if there was nothing to release."""
    from .traffic_split import reroute_secondary_queue

    if ue_id not in ctrl.bindings:
        ctrl.noop_releases += 1
        return None
    ctrl.bindings.pop(ue_id)
    requeued = reroute_secondary_queue(cand_node, mn_node, ue_id)
    cand_node.remove_ue(ue_id)
    return requeued


def update_mn_mcs(ctrl, ue_id, mcs):
    """Anchor-link MCS refresh for a served secondary (sent by the anchor on
    change); feeds the preemption comparison."""
    binding = ctrl.bindings.get(ue_id)
    if binding is not None:
        binding.last_known_mn_mcs = mcs
