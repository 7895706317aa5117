"""Redistribution planning and execution against a brute-force oracle."""

import random

import pytest

from conftest import (
    brute_force_copy,
    buffers_of,
    fill_sequential,
    make_descriptor,
    owner_changes_bytes,
    run_collective,
)
from meshlite.errors import ShapeMismatch
from meshlite.runtime import allocate, plan_redistribution, remote_bytes


def assign(dst, src, nprocs, seed=0):
    state = run_collective(nprocs, lambda c: c.assign_arrays(dst, src), seed=seed)
    return state


def oracle_result(src, dst_desc):
    fresh = allocate("oracle", dst_desc)
    brute_force_copy(fresh, src)
    return buffers_of(fresh)


# --- planning examples ---


def test_scatter_plan_is_one_segment_per_block():
    src = make_descriptor((4, 4), distribution=("on", 0), nprocs=4)
    dst = make_descriptor((4, 4), partition=("horizontal", 4),
                          distribution=("even",), nprocs=4)
    segments = plan_redistribution(src, dst)
    assert len(segments) == 4
    assert [s.dst_owner for s in segments] == [0, 1, 2, 3]
    assert all(s.src_owner == 0 for s in segments)
    assert [s.local for s in segments] == [True, False, False, False]


def test_gather_plan_collects_from_every_rank():
    src = make_descriptor((4, 4), partition=("horizontal", 4),
                          distribution=("even",), nprocs=4)
    dst = make_descriptor((4, 4), distribution=("on", 0), nprocs=4)
    segments = plan_redistribution(src, dst)
    assert len(segments) == 4
    assert sorted(s.src_owner for s in segments) == [0, 1, 2, 3]
    assert all(s.dst_owner == 0 for s in segments)


def test_identity_plan_is_all_local():
    desc = make_descriptor((4, 4), partition=("horizontal", 2),
                           distribution=("even",), nprocs=2)
    segments = plan_redistribution(desc, desc, same_storage=True)
    assert all(s.local and s.identity for s in segments)
    assert remote_bytes(segments) == 0


def test_shape_mismatch_rejected():
    a = make_descriptor((4, 4), distribution=("on", 0))
    b = make_descriptor((8, 8), distribution=("on", 0))
    with pytest.raises(ShapeMismatch):
        plan_redistribution(a, b)


def test_transpose_plan_bytes_match_owner_changes():
    src = make_descriptor((6, 6), ordering="row", partition=("horizontal", 3),
                          distribution=("even",), nprocs=3, elem="complex")
    dst = make_descriptor((6, 6), ordering="col", partition=("horizontal", 3),
                          distribution=("even",), nprocs=3, elem="complex")
    segments = plan_redistribution(src, dst)
    assert remote_bytes(segments) == owner_changes_bytes(src, dst, 16)


# --- execution vs oracle, full combination sweep ---


def layouts(n0, n1, p, nprocs, rng):
    out = []
    for ordering in ("row", "col"):
        for partition in (None, ("horizontal", p), ("vertical", p)):
            if partition is None:
                dists = [("on", rng.randrange(nprocs))]
            else:
                mapping = tuple(rng.randrange(nprocs) for _ in range(p))
                dists = [("even",), ("arraydist", mapping), ("on", rng.randrange(nprocs))]
            for dist in dists:
                out.append(make_descriptor((n0, n1), ordering=ordering,
                                           partition=partition,
                                           distribution=dist, nprocs=nprocs))
    return out


@pytest.mark.parametrize("n0,n1,p,nprocs", [
    (8, 8, 4, 4),
    (9, 7, 3, 2),
    (10, 6, 4, 4),   # uneven block sizes 3,3,2,2
    (16, 5, 4, 3),
])
def test_assign_matches_brute_force_copy(n0, n1, p, nprocs):
    rng = random.Random(n0 * 100 + n1 * 10 + p)
    descs = layouts(n0, n1, p, nprocs, rng)
    for src_desc in descs:
        src = fill_sequential(allocate("S", src_desc))
        for dst_desc in descs:
            dst = allocate("D", dst_desc)
            assign(dst, src, nprocs)
            assert buffers_of(dst) == oracle_result(src, dst_desc), (
                f"src={src_desc} dst={dst_desc}")


def test_more_blocks_than_processes_cyclic_wraparound():
    nprocs = 3
    src = make_descriptor((10, 4), partition=("horizontal", 8),
                          distribution=("even",), nprocs=nprocs)
    owners = [b.owner for b in allocate("t", src).blocks]
    assert owners == [0, 1, 2, 0, 1, 2, 0, 1]
    dst = make_descriptor((10, 4), ordering="col", partition=("vertical", 2),
                          distribution=("even",), nprocs=nprocs)
    src_arr = fill_sequential(allocate("S", src))
    dst_arr = allocate("D", dst)
    assign(dst_arr, src_arr, nprocs)
    assert buffers_of(dst_arr) == oracle_result(src_arr, dst)


def test_assign_traces_only_remote_segments():
    nprocs = 4
    src_desc = make_descriptor((8, 8), distribution=("on", 0), nprocs=nprocs)
    dst_desc = make_descriptor((8, 8), partition=("horizontal", 4),
                               distribution=("even",), nprocs=nprocs)
    src = fill_sequential(allocate("S", src_desc))
    dst = allocate("A", dst_desc)
    state = assign(dst, src, nprocs)
    events = [e for e in state.trace.events if e.kind == "block-transfer"]
    assert len(events) == 3  # block 0 stays on rank 0
    assert sum(e.bytes for e in events) == owner_changes_bytes(src_desc, dst_desc, 16)
    assert all(e.src != e.dst for e in events)


def test_self_assignment_is_a_quiet_no_op():
    nprocs = 2
    desc = make_descriptor((6, 6), partition=("horizontal", 3),
                           distribution=("even",), nprocs=nprocs)
    arr = fill_sequential(allocate("X", desc))
    before = buffers_of(arr)
    state = assign(arr, arr, nprocs)
    assert buffers_of(arr) == before
    assert state.trace.events == []


def test_replicated_destination_receives_everywhere():
    nprocs = 3
    src_desc = make_descriptor((4, 3), partition=("horizontal", 2),
                               distribution=("even",), nprocs=nprocs, elem="int")
    dst_desc = make_descriptor((4, 3), distribution=("multiple",), nprocs=nprocs,
                               elem="int")
    src = fill_sequential(allocate("S", src_desc))
    dst = allocate("M", dst_desc)
    assign(dst, src, nprocs)
    for rank in range(nprocs):
        assert dst.storage_for(rank) == list(range(12))


def test_replicated_source_is_read_locally():
    nprocs = 3
    src_desc = make_descriptor((4, 3), distribution=("multiple",), nprocs=nprocs,
                               elem="int")
    dst_desc = make_descriptor((4, 3), partition=("horizontal", 2),
                               distribution=("even",), nprocs=nprocs, elem="int")
    src = fill_sequential(allocate("M", src_desc))
    dst = allocate("D", dst_desc)
    state = assign(dst, src, nprocs)
    assert buffers_of(dst) == oracle_result(src, dst_desc)
    assert state.trace.events == []  # replicas satisfy every block locally


def test_gather_after_scatter_restores_exact_content():
    nprocs = 4
    home = make_descriptor((8, 8), distribution=("on", 0), nprocs=nprocs)
    spread = make_descriptor((8, 8), ordering="col", partition=("horizontal", 8),
                             distribution=("even",), nprocs=nprocs)
    original = fill_sequential(allocate("S", home))
    keep = buffers_of(original)
    mid = allocate("A", spread)
    assign(mid, original, nprocs)
    back = allocate("S2", home)
    assign(back, mid, nprocs)
    assert buffers_of(back) == keep


def test_execution_schedule_independent():
    nprocs = 4
    rng = random.Random(1)
    src_desc = make_descriptor((7, 5), ordering="row", partition=("horizontal", 3),
                               distribution=("arraydist", (2, 0, 1)), nprocs=nprocs)
    dst_desc = make_descriptor((7, 5), ordering="col", partition=("vertical", 4),
                               distribution=("even",), nprocs=nprocs)
    results = []
    for seed in (0, 1, 7):
        src = fill_sequential(allocate("S", src_desc))
        dst = allocate("D", dst_desc)
        assign(dst, src, nprocs, seed=seed)
        results.append(buffers_of(dst))
    assert results[0] == results[1] == results[2]
