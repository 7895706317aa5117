"""Shared helpers: corpus access, collective harness, brute-force oracles."""

import pytest

from meshlite import check_program, parse
from meshlite.fixtures import corpus_source
from meshlite.interp import ProcessContext, RunState
from meshlite.runtime import ArrayDescriptor, iter_indices, owner_of


def checked_corpus(name):
    return check_program(parse(corpus_source(name)))


def make_descriptor(shape, elem="complex", ordering="row", partition=None,
                    distribution=("on", 0), nprocs=2):
    d = ArrayDescriptor(shape=shape, elem=elem, ordering=ordering,
                        partition=partition, distribution=distribution,
                        nprocs=nprocs)
    d.validate()
    return d


def fill_sequential(array):
    """Deterministic distinct contents: value encodes the logical index."""
    counter = 0
    for idx in iter_indices(array.descriptor.shape):
        if array.descriptor.elem == "complex":
            array.logical_set(idx, complex(counter, -counter))
        else:
            array.logical_set(idx, counter)
        counter += 1
    return array


def brute_force_copy(dst, src):
    """Element-at-a-time logical copy; the redistribution oracle."""
    for idx in iter_indices(src.descriptor.shape):
        dst.logical_set(idx, src.logical_get(idx))


def owner_changes_bytes(src_desc, dst_desc, esize):
    """Bytes that must cross ranks: elements whose owner changes."""
    total = 0
    for idx in iter_indices(src_desc.shape):
        sk, _ = src_desc.locate(idx)
        dk, _ = dst_desc.locate(idx)
        so = owner_of(src_desc.distribution, sk, src_desc.nprocs)
        do = owner_of(dst_desc.distribution, dk, dst_desc.nprocs)
        if so != do:
            total += esize
    return total


def run_collective(nprocs, make_gen, seed=0):
    """Drive one collective generator per simulated process."""
    state = RunState(nprocs, seed=seed)
    contexts = [ProcessContext(r, state, None) for r in range(nprocs)]
    state.scheduler.run([make_gen(c) for c in contexts])
    return state


def buffers_of(array):
    if array.replicated:
        return [list(r) for r in array.replicas]
    return [list(b.buffer) for b in array.blocks]


@pytest.fixture
def fft_workdir(tmp_path):
    """Temp dir holding a 16x16 generated transform input."""
    from meshlite.fixtures import generate_image

    generate_image(16, 1, tmp_path / "image.dat")
    return tmp_path
