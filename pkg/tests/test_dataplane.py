import math

from ntnmc.channel import McsTable
from ntnmc.dataplane import (CbrFlow, LoadTracker, Node, PdcpPdu,
                             PdcpReceiver, ROLE_MN, ROLE_SN, UeTxQueue,
                             buffer_occupancy, compute_load, res_per_tti,
                             schedule_tti, transport_block_bits)
from ntnmc.engine import Simulator, millis

TABLE = McsTable.default()


def test_resource_grid_size():
    assert res_per_tti(52) == 8736


def test_transport_block_floors_to_whole_bytes():
    # int(4.5234 * 8736) = 39516, floored to a byte multiple
    assert transport_block_bits(4.5234, 8736) == 39512
    assert transport_block_bits(4.5234, 8736) % 8 == 0
    assert transport_block_bits(1.0, 7) == 0


def _node(node_id="tn0", n_prb=52, window=100):
    return Node(node_id, "tn_sector", n_prb, TABLE, window)


def _backlog(node, ue_id, n_pdus=20, bits=12000):
    for i in range(n_pdus):
        node.queues[ue_id].push(PdcpPdu(ue_id, i, bits, 0))


def test_two_backlogged_ues_split_the_grid_evenly():
    node = _node()
    node.add_ue(1, ROLE_MN, 10)
    node.add_ue(2, ROLE_MN, 10)
    _backlog(node, 1)
    _backlog(node, 2)
    grants = {ue: n_res for ue, n_res, _m, _d in schedule_tti(node, 0)}
    assert grants == {1: 4368, 2: 4368}


def test_equal_share_remainder_rotates():
    node = _node(n_prb=52)
    for ue in (1, 2, 3, 4, 5):
        node.add_ue(ue, ROLE_MN, 10)
        _backlog(node, ue, n_pdus=200)
    totals = {ue: 0 for ue in (1, 2, 3, 4, 5)}
    for t in range(5):
        for ue, n_res, _m, _d in schedule_tti(node, t):
            totals[ue] += n_res
    # 8736 = 5 * 1747 + 1; over 5 TTIs the +1 visits every UE once
    assert set(totals.values()) == {5 * 1747 + 1}


def test_anchor_role_served_before_secondary():
    node = _node()
    node.add_ue(1, ROLE_MN, 21)
    node.add_ue(2, ROLE_SN, 21)
    node.queues[1].push(PdcpPdu(1, 0, 12000, 0))
    _backlog(node, 2, n_pdus=50)
    grants = {ue: n_res for ue, n_res, _m, _d in schedule_tti(node, 0)}
    need_mn = math.ceil(12000 / TABLE.efficiency(21))
    assert grants[1] == need_mn
    assert grants[2] == 8736 - need_mn


def test_ue_without_mcs_is_never_scheduled():
    node = _node()
    node.add_ue(1, ROLE_MN, None)
    _backlog(node, 1)
    assert schedule_tti(node, 0) == []
    # the idle TTI still lands in the load window
    assert node.load.total_fraction() == 0.0
    assert compute_load(node) == 0.0


def test_empty_queues_leave_load_at_zero():
    node = _node()
    node.add_ue(1, ROLE_MN, 10)
    assert schedule_tti(node, 0) == []
    assert node.load.total_fraction() == 0.0


def test_load_tracker_fractions_and_eviction():
    lt = LoadTracker(100, 8736)
    assert lt.total_fraction() == 0.0
    assert lt.primary_fraction() == 0.0
    for _ in range(50):
        lt.record(8736, 4368)
    for _ in range(50):
        lt.record(0, 0)
    assert lt.total_fraction() == 0.5
    assert lt.primary_fraction() == 0.25

    small = LoadTracker(4, 8736)
    for _ in range(4):
        small.record(8736, 8736)
    assert small.total_fraction() == 1.0
    for _ in range(4):
        small.record(0, 0)
    assert small.total_fraction() == 0.0


def test_tx_queue_segmentation_and_accounting():
    q = UeTxQueue()
    a = PdcpPdu(1, 0, 12000, 0)
    b = PdcpPdu(1, 1, 12000, 0)
    q.push(a)
    q.push(b)
    assert q.remaining_bits() == 24000

    done = q.take(15000)
    assert done == [a]
    assert q.in_service is b
    assert q.remaining_bits() == 9000

    done = q.take(9000)
    assert done == [b]
    assert q.remaining_bits() == 0
    assert q.in_service is None


def test_tx_queue_drain_returns_service_slot_first():
    q = UeTxQueue()
    pdus = [PdcpPdu(1, i, 12000, 0) for i in range(3)]
    for p in pdus:
        q.push(p)
    q.take(3000)  # partially serve pdus[0]
    assert q.drain_all() == pdus
    assert q.remaining_bits() == 0


def test_tx_queue_push_front_orders_ahead():
    q = UeTxQueue()
    late = PdcpPdu(1, 5, 12000, 0)
    q.push(late)
    early = PdcpPdu(1, 2, 12000, 0)
    q.push_front(early)
    assert q.drain_all() == [early, late]


def test_buffer_occupancy_fraction():
    node = _node()
    node.add_ue(1, ROLE_MN, 10)
    node.queues[1].push(PdcpPdu(1, 0, 400_000 * 8, 0))
    assert buffer_occupancy(node, 1, 1_000_000) == 0.4
    assert buffer_occupancy(node, 2, 1_000_000) == 0.0


def _receiver(sim, timer_ms=100.0, max_buffer=1000):
    delivered = []
    rx = PdcpReceiver(1, sim, millis(timer_ms), max_buffer,
                      lambda pdu, t: delivered.append((pdu.sn, t)))
    return rx, delivered


def test_in_order_pdus_flow_straight_through():
    sim = Simulator()
    rx, delivered = _receiver(sim)
    for sn in range(3):
        rx.receive(PdcpPdu(1, sn, 12000, 0), sn)
    assert [sn for sn, _t in delivered] == [0, 1, 2]
    assert rx.delivered_pdus == 3
    assert rx.buffered_bits == 0


def test_gap_resolved_by_reordering_timer():
    sim = Simulator()
    rx, delivered = _receiver(sim)
    rx.receive(PdcpPdu(1, 0, 12000, 0), sim.now)
    rx.receive(PdcpPdu(1, 2, 12000, 0), sim.now)  # sn 1 missing, timer arms
    assert [sn for sn, _t in delivered] == [0]
    sim.run_until(millis(200.0))
    assert [sn for sn, _t in delivered] == [0, 2]
    assert rx.skipped_sns == 1
    assert rx.rx_deliv == 3
    # the straggler is now stale
    rx.receive(PdcpPdu(1, 1, 12000, 0), sim.now)
    assert rx.stale_pdus == 1
    assert rx.stale_bits == 12000
    assert [sn for sn, _t in delivered] == [0, 2]


def test_duplicate_while_gapped_is_counted_once():
    sim = Simulator()
    rx, delivered = _receiver(sim)
    rx.receive(PdcpPdu(1, 2, 12000, 0), 0)
    rx.receive(PdcpPdu(1, 2, 12000, 0), 0)
    assert rx.duplicate_pdus == 1
    assert delivered == []


def test_late_arrival_before_timer_drains_in_order():
    sim = Simulator()
    rx, delivered = _receiver(sim)
    rx.receive(PdcpPdu(1, 1, 12000, 0), sim.now)
    sim.run_until(millis(10.0))
    rx.receive(PdcpPdu(1, 0, 12000, 0), sim.now)
    assert [sn for sn, _t in delivered] == [0, 1]
    assert rx.skipped_sns == 0
    # timer must not fire later and skip anything
    sim.run_until(millis(300.0))
    assert rx.skipped_sns == 0


def test_buffer_overflow_forces_oldest_run_out():
    sim = Simulator()
    rx, delivered = _receiver(sim, max_buffer=3)
    for sn in (1, 2, 3, 4):  # sn 0 never arrives
        rx.receive(PdcpPdu(1, sn, 12000, 0), 0)
    assert [sn for sn, _t in delivered] == [1, 2, 3, 4]
    assert rx.skipped_sns == 1
    assert rx.delivered_pdus == 4


def test_flush_counts_every_gap():
    sim = Simulator()
    rx, delivered = _receiver(sim)
    rx.receive(PdcpPdu(1, 5, 12000, 0), 0)
    rx.receive(PdcpPdu(1, 7, 12000, 0), 0)
    rx.flush(0)
    assert [sn for sn, _t in delivered] == [5, 7]
    assert rx.skipped_sns == 6  # sns 0-4 and 6
    assert rx.buffered_bits == 0


def test_cbr_flow_packetization():
    flow = CbrFlow(1, 1500, 3.2e6)
    assert flow.packet_bits == 12000
    assert flow.interval_ns == 3_750_000
