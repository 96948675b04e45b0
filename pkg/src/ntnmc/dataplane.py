"""RAN data plane: PDCP PDUs, per-UE transmit queues, the TTI scheduler,
trailing-window load tracking, receive-side reordering and CBR sources.

Time granularity is one 1 ms TTI (numerology 0). A 10 MHz carrier carries
52 PRBs, so one TTI holds 52 * 12 * 14 = 8736 resource elements. Transport
blocks are sized as floor(efficiency * REs) bytes; PDUs may be segmented
across TTIs and count as delivered when their last byte arrives.
"""

import math
from collections import deque
from dataclasses import dataclass

from .channel import SUBCARRIERS_PER_PRB, SYMBOLS_PER_TTI
from .engine import NS_PER_MS

TTI_NS = NS_PER_MS

# Node kinds.
TN_SECTOR = "tn_sector"
NTN_BEAM = "ntn_beam"

# Role of a node toward a UE (anchor leg vs secondary leg of the split bearer).
ROLE_MN = "mn"
ROLE_SN = "sn"

# Which leg carried a PDU.
PATH_MN = "mn_direct"
PATH_SN = "via_sn"


def res_per_tti(n_prb):
    return n_prb * SUBCARRIERS_PER_PRB * SYMBOLS_PER_TTI


def transport_block_bits(efficiency, n_res):
    """TB size for an allocation, floored to whole bytes."""
    return (int(efficiency * n_res) // 8) * 8


class PdcpPdu:
    __slots__ = ("ue_id", "sn", "bits", "created_ns", "path")

    def __init__(self, ue_id, sn, bits, created_ns, path=PATH_MN):
        self.ue_id = ue_id
        self.sn = sn
        self.bits = bits
        self.created_ns = created_ns
        self.path = path

    def __repr__(self):
        return f"PdcpPdu(ue={self.ue_id}, sn={self.sn}, bits={self.bits}, path={self.path})"


class UeTxQueue:
    """FIFO of whole PDUs plus the single PDU currently on the air.

    The head PDU being transmitted is held apart from `pending` so that
    forwarding to a secondary node can only take untouched whole PDUs.
    `queued_bits` counts every PDU still owned by the queue, including the
    partially sent one.
    """

    __slots__ = ("pending", "in_service", "served_bits", "queued_bits")

    def __init__(self):
        self.pending = deque()
        self.in_service = None
        self.served_bits = 0
        self.queued_bits = 0

    def push(self, pdu):
        self.pending.append(pdu)
        self.queued_bits += pdu.bits

    def push_front(self, pdu):
        self.pending.appendleft(pdu)
        self.queued_bits += pdu.bits

    def pop_pending(self):
        pdu = self.pending.popleft()
        self.queued_bits -= pdu.bits
        return pdu

    def remaining_bits(self):
        return self.queued_bits - self.served_bits

    def take(self, budget_bits):
        """Consume up to `budget_bits`; returns the PDUs completed."""
        done = []
        while budget_bits > 0:
            if self.in_service is None:
                if not self.pending:
                    break
                self.in_service = self.pending.popleft()
                self.served_bits = 0
            rest = self.in_service.bits - self.served_bits
            if budget_bits >= rest:
                budget_bits -= rest
                self.queued_bits -= self.in_service.bits
                done.append(self.in_service)
                self.in_service = None
                self.served_bits = 0
            else:
                self.served_bits += budget_bits
                budget_bits = 0
        return done

    def drain_all(self):
        """Remove every PDU (service slot first), e.g. on secondary release."""
        out = []
        if self.in_service is not None:
            out.append(self.in_service)
            self.queued_bits -= self.in_service.bits
            self.in_service = None
            self.served_bits = 0
        while self.pending:
            out.append(self.pop_pending())
        return out


class LoadTracker:
    """RE utilization over a trailing window of TTIs.

    `record` must be called once per TTI, including idle ones, so the window
    is always densely populated. Total and primary-only fractions are kept
    separately; the primary share feeds the data-request formula.
    """

    def __init__(self, window_ttis, res_per_tti_):
        self.window = window_ttis
        self.res_per_tti = res_per_tti_
        self._hist = deque()
        self._sum_total = 0
        self._sum_primary = 0

    def record(self, granted_total, granted_primary):
        self._hist.append((granted_total, granted_primary))
        self._sum_total += granted_total
        self._sum_primary += granted_primary
        if len(self._hist) > self.window:
            t, p = self._hist.popleft()
            self._sum_total -= t
            self._sum_primary -= p

    def _available(self):
        return len(self._hist) * self.res_per_tti

    def total_fraction(self):
        avail = self._available()
        return self._sum_total / avail if avail else 0.0

    def primary_fraction(self):
        avail = self._available()
        return self._sum_primary / avail if avail else 0.0


class Node:
    """One downlink transmitter: a terrestrial sector or the satellite beam.

    Holds per-UE transmit queues, each UE's role (anchor or secondary), the
    true link MCS used by the scheduler and the latest reported SINR used by
    the data-request formula.
    """

    def __init__(self, node_id, kind, n_prb, mcs_table, load_window_ttis):
        self.node_id = node_id
        self.kind = kind
        self.n_res = res_per_tti(n_prb)
        self.mcs_table = mcs_table
        self.queues = {}
        self.roles = {}
        self.ue_mcs = {}        # true link MCS, None = below the table floor
        self.ue_sinr_db = {}    # latest reported downlink SINR
        self.load = LoadTracker(load_window_ttis, self.n_res)
        self._rr = {ROLE_MN: 0, ROLE_SN: 0}

    def add_ue(self, ue_id, role, mcs):
        self.queues[ue_id] = UeTxQueue()
        self.roles[ue_id] = role
        self.ue_mcs[ue_id] = mcs

    def remove_ue(self, ue_id):
        self.queues.pop(ue_id, None)
        self.roles.pop(ue_id, None)
        self.ue_mcs.pop(ue_id, None)
        self.ue_sinr_db.pop(ue_id, None)

    def secondary_count(self):
        return sum(1 for r in self.roles.values() if r == ROLE_SN)

    def secondary_ues(self):
        return sorted(u for u, r in self.roles.items() if r == ROLE_SN)

    def queued_bits(self, ue_id):
        q = self.queues.get(ue_id)
        return q.queued_bits if q else 0


def compute_load(node):
    """Fraction of REs granted over the trailing load window."""
    return node.load.total_fraction()


def buffer_occupancy(node, ue_id, max_queue_bytes):
    """Transmit-queue fill of one UE at a node, as a fraction of the cap."""
    return (node.queued_bits(ue_id) / 8.0) / max_queue_bytes


def _equal_share(order, needs, total):
    """Split `total` REs equally over `order`, capped by per-UE need.

    The integer remainder goes to the earliest entries of `order`; callers
    rotate `order` across TTIs so the remainder circulates and any two
    backlogged UEs stay within one RE of each other over a 10 TTI window.
    """
    alloc = dict.fromkeys(order, 0)
    active = [u for u in order if needs[u] > 0]
    remaining = total
    while remaining > 0 and active:
        share, extra = divmod(remaining, len(active))
        if share == 0 and extra == 0:
            break
        still = []
        for i, ue in enumerate(active):
            give = min(needs[ue] - alloc[ue], share + (1 if i < extra else 0))
            alloc[ue] += give
            remaining -= give
            if alloc[ue] < needs[ue]:
                still.append(ue)
        if len(still) == len(active):
            break
        active = still
    return alloc


def schedule_tti(node, t_ns):
    """Run one TTI of round-robin scheduling at `node`.

    Anchor-role UEs are served strictly before secondary-role UEs. Within a
    role class, backlogged UEs split the remaining REs equally with the
    remainder rotating. Returns [(ue_id, n_res, mcs, completed_pdus)] and
    records this TTI in the node's load tracker.
    """
    remaining = node.n_res
    out = []
    granted = {ROLE_MN: 0, ROLE_SN: 0}
    for role in (ROLE_MN, ROLE_SN):
        if remaining <= 0:
            break
        hungry = []
        needs = {}
        for ue_id, r in node.roles.items():
            if r != role:
                continue
            mcs = node.ue_mcs.get(ue_id)
            if mcs is None:
                continue
            q = node.queues[ue_id]
            bits = q.remaining_bits()
            if bits <= 0:
                continue
            hungry.append(ue_id)
            needs[ue_id] = math.ceil(bits / node.mcs_table.efficiency(mcs))
        if not hungry:
            continue
        cur = node._rr[role] % len(hungry)
        node._rr[role] += 1
        order = hungry[cur:] + hungry[:cur]
        alloc = _equal_share(order, needs, remaining)
        for ue_id in hungry:
            n_res = alloc[ue_id]
            if n_res <= 0:
                continue
            remaining -= n_res
            granted[role] += n_res
            mcs = node.ue_mcs[ue_id]
            tb_bits = transport_block_bits(node.mcs_table.efficiency(mcs), n_res)
            done = node.queues[ue_id].take(tb_bits)
            out.append((ue_id, n_res, mcs, done))
    node.load.record(granted[ROLE_MN] + granted[ROLE_SN], granted[ROLE_MN])
    return out


class PdcpReceiver:
    """UE-side reordering entity with a t-Reordering style timer.

    PDUs older than the delivery edge are discarded as stale; everything else
    is buffered and released in sequence. When the timer fires, buffered PDUs
    below the reordering edge are released in order and the gaps are counted
    as skipped. The buffer is bounded; overflow forces delivery of the oldest
    buffered run.
    """

    def __init__(self, ue_id, sim, timer_ns, max_buffer_pdus, deliver_cb):
        self.ue_id = ue_id
        self.sim = sim
        self.timer_ns = timer_ns
        self.max_buffer = max_buffer_pdus
        self.deliver_cb = deliver_cb
        self.rx_deliv = 0
        self.rx_next = 0
        self.rx_reord = 0
        self.buffer = {}
        self.buffered_bits = 0
        self._timer_ev = None
        self.delivered_pdus = 0
        self.delivered_bits = 0
        self.stale_pdus = 0
        self.stale_bits = 0
        self.duplicate_pdus = 0
        self.skipped_sns = 0
        self.last_delivered_sn = -1

    def _deliver(self, pdu, t_ns):
        if pdu.sn <= self.last_delivered_sn:
            raise AssertionError(
                f"out-of-order delivery for ue {self.ue_id}: {pdu.sn} after {self.last_delivered_sn}")
        self.last_delivered_sn = pdu.sn
        self.delivered_pdus += 1
        self.delivered_bits += pdu.bits
        self.deliver_cb(pdu, t_ns)

    def _deliver_from_buffer(self, sn, t_ns):
        pdu = self.buffer.pop(sn)
        self.buffered_bits -= pdu.bits
        self._deliver(pdu, t_ns)

    def _drain_in_order(self, t_ns):
        while self.rx_deliv in self.buffer:
            self._deliver_from_buffer(self.rx_deliv, t_ns)
            self.rx_deliv += 1

    def _stop_timer(self):
        if self._timer_ev is not None:
            self._timer_ev.cancel()
            self._timer_ev = None

    def _update_timer(self):
        if self._timer_ev is not None and self.rx_deliv >= self.rx_reord:
            self._stop_timer()
        if self._timer_ev is None and self.rx_deliv < self.rx_next:
            self.rx_reord = self.rx_next
            self._timer_ev = self.sim.schedule_in(self.timer_ns, self._on_timer)

    def receive(self, pdu, t_ns):
        if pdu.sn < self.rx_deliv:
            self.stale_pdus += 1
            self.stale_bits += pdu.bits
            return
        if pdu.sn in self.buffer:
            self.duplicate_pdus += 1
            return
        self.buffer[pdu.sn] = pdu
        self.buffered_bits += pdu.bits
        if pdu.sn >= self.rx_next:
            self.rx_next = pdu.sn + 1
        if pdu.sn == self.rx_deliv:
            self._drain_in_order(t_ns)
        if len(self.buffer) > self.max_buffer:
            self._force_oldest_run(t_ns)
        self._update_timer()

    def _force_oldest_run(self, t_ns):
        while len(self.buffer) > self.max_buffer:
            first = min(self.buffer)
            self.skipped_sns += first - self.rx_deliv
            self.rx_deliv = first
            self._drain_in_order(t_ns)

    def _on_timer(self):
        self._timer_ev = None
        t_ns = self.sim.now
        below = sorted(sn for sn in self.buffer if sn < self.rx_reord)
        for sn in below:
            self._deliver_from_buffer(sn, t_ns)
        # Whatever was missing in [rx_deliv, rx_reord) is given up on.
        self.skipped_sns += (self.rx_reord - self.rx_deliv) - len(below)
        self.rx_deliv = self.rx_reord
        self._drain_in_order(t_ns)
        self._update_timer()

    def flush(self, t_ns):
        """End of run: release everything still buffered, in sequence order."""
        self._stop_timer()
        for sn in sorted(self.buffer):
            if sn > self.rx_deliv:
                self.skipped_sns += sn - self.rx_deliv
            self._deliver_from_buffer(sn, t_ns)
            self.rx_deliv = sn + 1


class CbrFlow:
    """Constant-bit-rate source: one fixed-size packet every packet_bits/rate.

    The interval is rounded to integer nanoseconds once (1500 B at 3.2 Mb/s
    gives exactly 3.75 ms) so arrivals never drift. The first packet arrives
    at `start_ns`.
    """

    def __init__(self, ue_id, packet_bytes, rate_bps, start_ns=0):
        self.ue_id = ue_id
        self.packet_bits = packet_bytes * 8
        self.interval_ns = round(self.packet_bits / rate_bps * 1_000_000_000)
        self.start_ns = start_ns


@dataclass
class UeCounters:
    """Per-UE bit conservation ledger, kept in exact integer bits."""
    generated_bits: int = 0
    dropped_bits: int = 0
    dropped_pdus: int = 0
    in_flight_bits: int = 0
