"""Simulated PGAS storage: blocks, ownership, redistribution and tracing.

Layout model
------------
A 2D array's ordering names its major dimension: `row` makes dimension 0
major, `col` makes dimension 1 major. `horizontal[p]` partitions the major
dimension into p slabs, `vertical[p]` partitions the minor one. Every
block stores whole *lines*: full cross-sections of the non-partitioned
dimension, concatenated in ascending partition index. Block slice t is the
line with global index low+t, contiguous in the buffer.

With that model the `col :: horizontal[p]` arrays hold whole columns
contiguously, so an assignment from a `row :: horizontal[p]` array is the
distributed transpose-and-shuffle, and a `row :: vertical[p]` view sharing
such an array's storage addresses the very same column lines block for
block.
"""

from dataclasses import dataclass
from typing import Optional

from .chains import ELEMENT_SIZES, AllocationPlan
from .errors import (
    BadDistribution,
    IndexOutOfBounds,
    InvalidPartition,
    ShapeMismatch,
    ShareFootprintMismatch,
)

ZEROES = {"int": 0, "char": 0, "real": 0.0, "complex": 0j}


def partition_bounds(n: int, p: int, k: int) -> tuple:
    """Inclusive (low, high) of block k when n indices split into p parts.

    The first n mod p blocks get ceil(n/p) indices, the rest floor(n/p).
    """
    if p <= 0 or p > n:
        raise InvalidPartition(f"cannot split {n} indices into {p} blocks")
    if not 0 <= k < p:
        raise InvalidPartition(f"block index {k} outside [0, {p})")
    q, r = divmod(n, p)
    if k < r:
        low = k * (q + 1)
        high = low + q
    else:
        low = r * (q + 1) + (k - r) * q
        high = low + q - 1
    return low, high


def owner_of(dist: tuple, block_id: int, nprocs: int) -> int:
    """Owning rank for one block under a distribution scheme."""
    kind = dist[0]
    if kind == "even":
        return block_id % nprocs
    if kind == "on":
        rank = dist[1]
        if not 0 <= rank < nprocs:
            raise BadDistribution(f"placement rank {rank} outside [0, {nprocs})")
        return rank
    if kind == "arraydist":
        mapping = dist[1]
        if block_id >= len(mapping):
            raise BadDistribution(f"distribution array has no entry for block {block_id}")
        rank = mapping[block_id]
        if not 0 <= rank < nprocs:
            raise BadDistribution(f"distribution array maps block {block_id} to rank {rank}, outside [0, {nprocs})")
        return rank
    raise BadDistribution(f"no single owner under {kind} distribution")


@dataclass(frozen=True)
class ArrayDescriptor:
    shape: tuple  # () scalar, (n,) or (d0, d1)
    elem: str
    ordering: str  # row | col
    partition: Optional[tuple]  # ("horizontal"|"vertical", p)
    distribution: tuple  # ("on", r) | ("even",) | ("arraydist", (ranks...)) | ("multiple",)
    nprocs: int

    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def replicated(self) -> bool:
        return self.distribution[0] == "multiple"

    @property
    def part_dim(self) -> int:
        """Dimension the blocks slice; the ordering's major dimension for
        horizontal (and unpartitioned) layouts, the minor one for vertical."""
        if self.ndim <= 1:
            return 0
        major = 0 if self.ordering == "row" else 1
        if self.partition is not None and self.partition[0] == "vertical":
            return 1 - major
        return major

    @property
    def part_extent(self) -> int:
        if self.ndim == 0:
            return 1
        return self.shape[self.part_dim]

    @property
    def line_len(self) -> int:
        if self.ndim <= 1:
            return 1
        return self.shape[1 - self.part_dim]

    @property
    def block_count(self) -> int:
        return self.partition[1] if self.partition is not None else 1

    def bounds(self, block_id: int) -> tuple:
        if self.partition is None:
            if block_id != 0:
                raise IndexOutOfBounds(f"block {block_id} of an unpartitioned array")
            return 0, self.part_extent - 1
        return partition_bounds(self.part_extent, self.partition[1], block_id)

    def element_count(self) -> int:
        total = 1
        for d in self.shape:
            total *= d
        return total

    def validate(self) -> None:
        if self.partition is not None:
            p = self.partition[1]
            if p > self.part_extent or p <= 0:
                raise InvalidPartition(
                    f"cannot split extent {self.part_extent} into {p} blocks")
            if self.replicated:
                raise BadDistribution("a partitioned array cannot be replicated")
        if not self.replicated:
            for k in range(self.block_count):
                owner_of(self.distribution, k, self.nprocs)

    def locate(self, index: tuple) -> tuple:
        """(block_id, offset) of a logical index within block storage."""
        if len(index) != self.ndim:
            raise IndexOutOfBounds(f"index {index} into shape {self.shape}")
        for i, d in zip(index, self.shape):
            if not 0 <= i < d:
                raise IndexOutOfBounds(f"index {index} outside shape {self.shape}")
        if self.ndim == 0:
            return 0, 0
        if self.ndim == 1:
            along = index[0]
            free = 0
        else:
            along = index[self.part_dim]
            free = index[1 - self.part_dim]
        if self.partition is None:
            return 0, along * self.line_len + free
        p = self.partition[1]
        q, r = divmod(self.part_extent, p)
        if along < r * (q + 1):
            k = along // (q + 1)
        else:
            k = r + (along - r * (q + 1)) // q
        low, _ = self.bounds(k)
        return k, (along - low) * self.line_len + free


@dataclass
class Block:
    block_id: int
    owner: int
    low: int
    high: int
    buffer: list

    def __len__(self):
        return len(self.buffer)


class DistributedArray:
    """Descriptor plus per-block buffers (or per-rank replicas)."""

    def __init__(self, name, descriptor, blocks=None, replicas=None, alias_of=None):
        self.name = name
        self.descriptor = descriptor
        self.blocks = blocks or []
        self.replicas = replicas or []
        self.alias_of = alias_of

    @property
    def replicated(self):
        return self.descriptor.replicated

    def block(self, block_id) -> Block:
        if not 0 <= block_id < len(self.blocks):
            raise IndexOutOfBounds(
                f"{self.name} has no block {block_id} (blocks: {len(self.blocks)})")
        return self.blocks[block_id]

    def storage_for(self, rank) -> list:
        """Replica buffer for one rank of a replicated array."""
        return self.replicas[rank]

    def local_blocks(self, rank) -> list:
        return [b for b in self.blocks if b.owner == rank]

    def logical_get(self, index, rank=0):
        if self.replicated:
            d = self.descriptor
            if d.ndim == 0:
                return self.replicas[rank][0]
            off = _dense_offset(d, index)
            return self.replicas[rank][off]
        k, off = self.descriptor.locate(index)
        return self.blocks[k].buffer[off]

    def logical_set(self, index, value, rank=None):
        if self.replicated:
            d = self.descriptor
            off = 0 if d.ndim == 0 else _dense_offset(d, index)
            targets = [self.replicas[rank]] if rank is not None else self.replicas
            for t in targets:
                t[off] = value
            return
        k, off = self.descriptor.locate(index)
        self.blocks[k].buffer[off] = value

    def logical_items(self):
        """Iterate (index, value) over the whole logical array."""
        for index in iter_indices(self.descriptor.shape):
            yield index, self.logical_get(index)

    def element_bytes(self):
        return ELEMENT_SIZES[self.descriptor.elem]


def iter_indices(shape):
    if len(shape) == 0:
        yield ()
    elif len(shape) == 1:
        for i in range(shape[0]):
            yield (i,)
    else:
        for i in range(shape[0]):
            for j in range(shape[1]):
                yield (i, j)


def _dense_offset(descriptor, index):
    """Offset into an unpartitioned/replicated buffer, ordering-major."""
    if descriptor.ndim == 1:
        return index[0]
    if descriptor.ordering == "row":
        return index[0] * descriptor.shape[1] + index[1]
    return index[1] * descriptor.shape[0] + index[0]


def descriptor_from_plan(plan: AllocationPlan, nprocs: int, dist_map=None) -> ArrayDescriptor:
    dist = plan.distribution
    if dist[0] == "arraydist":
        if dist_map is None:
            raise BadDistribution(f"no values for distribution array {dist[1]!r}")
        dist = ("arraydist", tuple(int(v) for v in dist_map))
    desc = ArrayDescriptor(
        shape=plan.shape,
        elem=plan.elem,
        ordering=plan.ordering,
        partition=plan.partition,
        distribution=dist,
        nprocs=nprocs,
    )
    desc.validate()
    if desc.partition is not None and dist[0] == "arraydist" and len(dist[1]) != desc.block_count:
        raise BadDistribution(
            f"distribution array has {len(dist[1])} entries for {desc.block_count} blocks")
    return desc


def allocate(name: str, descriptor: ArrayDescriptor, base: Optional[DistributedArray] = None) -> DistributedArray:
    """Create storage for a descriptor; with base, alias its blocks.

    Aliased views add no element storage: block k of the view IS block k
    of the base. Buffer lengths must match block for block.
    """
    descriptor.validate()
    zero = ZEROES[descriptor.elem]
    if descriptor.replicated:
        count = descriptor.element_count()
        replicas = [[zero] * count for _ in range(descriptor.nprocs)]
        return DistributedArray(name, descriptor, replicas=replicas)

    blocks = []
    for k in range(descriptor.block_count):
        low, high = descriptor.bounds(k)
        owner = owner_of(descriptor.distribution, k, descriptor.nprocs)
        length = (high - low + 1) * descriptor.line_len
        if base is not None:
            if base.replicated or len(base.blocks) != descriptor.block_count:
                raise ShareFootprintMismatch(
                    f"{name} and its base have different block structure")
            src = base.blocks[k]
            if len(src.buffer) != length:
                raise ShareFootprintMismatch(
                    f"block {k}: view needs {length} elements, base holds {len(src.buffer)}")
            if src.owner != owner:
                raise ShareFootprintMismatch(
                    f"block {k}: view owner {owner} differs from base owner {src.owner}")
            blocks.append(Block(k, owner, low, high, src.buffer))
        else:
            blocks.append(Block(k, owner, low, high, [zero] * length))
    return DistributedArray(name, descriptor, blocks=blocks,
                            alias_of=base.name if base is not None else None)


# --- trace ---


@dataclass(frozen=True)
class TraceEvent:
    kind: str  # onesided-get | onesided-put | channel-send | channel-recv | block-transfer
    src: int
    dst: int
    bytes: int
    seq: int  # per-process sequence on the initiating process
    tag: str
    local: bool = False

    @property
    def initiator(self) -> int:
        """Rank whose logical clock stamped this event."""
        if self.kind in ("onesided-get", "channel-recv"):
            return self.dst
        return self.src


class TraceLog:
    """Per-rank sequenced event log with a canonical rendering.

    Rendered lines are sorted by (initiating rank, sequence) so blocking
    programs produce byte-identical traces under any schedule. Field
    order: kind, src, dst, bytes, seq, tag, tab-separated.
    """

    def __init__(self, nprocs):
        self.events = []
        self._seq = [0] * nprocs

    def record(self, kind, src, dst, nbytes, tag, initiator=None, local=False):
        if initiator is None:
            initiator = dst if kind in ("onesided-get", "channel-recv") else src
        seq = self._seq[initiator]
        self._seq[initiator] += 1
        ev = TraceEvent(kind, src, dst, nbytes, seq, tag, local)
        self.events.append(ev)
        return ev

    def sorted_events(self):
        return sorted(self.events, key=lambda e: (e.initiator, e.seq))

    def render(self) -> str:
        lines = [
            f"{e.kind}\t{e.src}\t{e.dst}\t{e.bytes}\t{e.seq}\t{e.tag}"
            for e in self.sorted_events()
        ]
        return "\n".join(lines) + ("\n" if lines else "")

    def count(self, kind) -> int:
        return sum(1 for e in self.events if e.kind == kind)


# --- redistribution ---


@dataclass(frozen=True)
class Segment:
    """One contiguous copy: src block/offset to dst block/offset."""

    src_owner: int
    dst_owner: int
    src_block: int
    src_offset: int
    dst_block: int
    dst_offset: int
    count: int
    nbytes: int
    local: bool  # same owning rank
    identity: bool  # same block and offsets of the same storage
    dst_replica: Optional[int] = None  # set when dst is replicated


def plan_redistribution(src: ArrayDescriptor, dst: ArrayDescriptor, same_storage=False):
    """Contiguous segments that make dst logically equal to src.

    Runs are coalesced while both source and destination offsets advance
    by one inside the same pair of blocks. Segments whose endpoints share
    a rank are marked local; identical-and-local segments of the same
    storage are marked identity so executors can skip them.
    """
    if src.shape != dst.shape or src.elem != dst.elem:
        raise ShapeMismatch(
            f"cannot assign {src.elem}{src.shape} from {dst.elem}{dst.shape}")
    esize = ELEMENT_SIZES[src.elem]
    segments = []

    def emit(run, dst_block, dst_owner, dst_off, replica):
        sb, so, count = run
        s_owner = src_owner_of(sb, dst_owner)
        same_block = same_storage and sb == dst_block and so == dst_off
        segments.append(Segment(
            src_owner=s_owner, dst_owner=dst_owner,
            src_block=sb, src_offset=so,
            dst_block=dst_block, dst_offset=dst_off,
            count=count, nbytes=count * esize,
            local=s_owner == dst_owner,
            identity=same_block and s_owner == dst_owner,
            dst_replica=replica,
        ))

    def src_owner_of(block_id, dst_owner):
        if src.distribution[0] == "multiple":
            # every rank holds a replica: read the co-located one
            return dst_owner
        return owner_of(src.distribution, block_id, src.nprocs)

    def walk(dst_blocks):
        for dst_block, dst_owner, replica, indices in dst_blocks:
            run = None  # (src_block, src_offset_start, count)
            run_dst_off = 0
            next_dst_off = 0
            for index in indices:
                if src.distribution[0] == "multiple":
                    sb, so = 0, _dense_offset(src, index) if src.ndim else 0
                else:
                    sb, so = src.locate(index)
                if run is not None and sb == run[0] and so == run[1] + run[2]:
                    run = (run[0], run[1], run[2] + 1)
                else:
                    if run is not None:
                        emit(run, dst_block, dst_owner, run_dst_off, replica)
                    run = (sb, so, 1)
                    run_dst_off = next_dst_off
                next_dst_off += 1
            if run is not None:
                emit(run, dst_block, dst_owner, run_dst_off, replica)

    if dst.replicated:
        targets = []
        for rank in range(dst.nprocs):
            targets.append((0, rank, rank, _buffer_order(dst)))
        walk(targets)
    else:
        targets = []
        for k in range(dst.block_count):
            owner = owner_of(dst.distribution, k, dst.nprocs)
            targets.append((k, owner, None, _block_order(dst, k)))
        walk(targets)
    return segments


def _block_order(desc, block_id):
    """Logical indices of one block in buffer order."""
    low, high = desc.bounds(block_id)
    if desc.ndim == 0:
        yield ()
        return
    if desc.ndim == 1:
        for i in range(low, high + 1):
            yield (i,)
        return
    for along in range(low, high + 1):
        for free in range(desc.line_len):
            if desc.part_dim == 0:
                yield (along, free)
            else:
                yield (free, along)


def _buffer_order(desc):
    """Logical indices of a dense (replicated) buffer in storage order."""
    if desc.ndim == 0:
        yield ()
    elif desc.ndim == 1:
        for i in range(desc.shape[0]):
            yield (i,)
    elif desc.ordering == "row":
        for i in range(desc.shape[0]):
            for j in range(desc.shape[1]):
                yield (i, j)
    else:
        for j in range(desc.shape[1]):
            for i in range(desc.shape[0]):
                yield (i, j)


def remote_bytes(segments) -> int:
    return sum(s.nbytes for s in segments if not s.local)
