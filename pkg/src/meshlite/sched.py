"""Deterministic cooperative scheduler for the simulated processes.

Each logical process is a generator. It yields scheduling instructions:

    PAUSE               voluntary switch point
    ("wait", predicate) block until predicate() becomes true

The scheduler picks the next runnable process with a seeded RNG, so
different seeds explore different interleavings while a fixed seed
replays exactly. Pending asynchronous transfers make progress at seeded
switch points and are all drained by an explicit sync.
"""

import random

from .errors import DeadlockError, RuntimeFault

PAUSE = ("pause",)


class Barrier:
    """Generation-counting barrier for all simulated processes."""

    def __init__(self, n):
        self.n = n
        self.count = 0
        self.generation = 0

    def wait(self):
        gen = self.generation
        self.count += 1
        if self.count == self.n:
            self.count = 0
            self.generation += 1
            return
        yield ("wait", lambda: self.generation != gen)


class ChannelSlot:
    """Rendezvous cell for one point-to-point link."""

    def __init__(self):
        self.full = False
        self.value = None

    def send(self, value):
        yield ("wait", lambda: not self.full)
        self.value = value
        self.full = True

    def wait_consumed(self):
        yield ("wait", lambda: not self.full)

    def recv(self):
        yield ("wait", lambda: self.full)
        value = self.value
        self.value = None
        self.full = False
        return value


class PendingTransfer:
    """An asynchronous channel payload not yet visible at its target."""

    def __init__(self, tag, deliver):
        self.tag = tag
        self.deliver = deliver  # callable applying the write + recv event


class Scheduler:
    def __init__(self, seed=0, async_progress=0.25):
        self.rng = random.Random(seed)
        self.pending = []
        self.async_progress = async_progress

    def post_async(self, transfer: PendingTransfer):
        self.pending.append(transfer)

    def drain_async(self, tag=None):
        """Complete pending transfers; with tag, only those so tagged."""
        keep = []
        for t in self.pending:
            if tag is None or t.tag == tag:
                t.deliver()
            else:
                keep.append(t)
        self.pending = keep

    def run(self, generators):
        """Drive process generators to completion.

        Raises the first process failure as-is and reports a deadlock if
        every unfinished process is blocked with nothing left to deliver.
        """
        procs = [{"rank": r, "gen": g, "waiting": None, "done": False}
                 for r, g in enumerate(generators)]
        while True:
            live = [p for p in procs if not p["done"]]
            if not live:
                break
            runnable = [p for p in live if p["waiting"] is None or p["waiting"]()]
            if not runnable:
                if self.pending:
                    self.drain_async()
                    continue
                blocked = ", ".join(str(p["rank"]) for p in live)
                raise DeadlockError(f"all processes blocked (ranks {blocked})")
            proc = self.rng.choice(runnable)
            proc["waiting"] = None
            try:
                instr = next(proc["gen"])
            except StopIteration:
                proc["done"] = True
                continue
            except RuntimeFault:
                raise
            if instr is not None and instr[0] == "wait":
                proc["waiting"] = instr[1]
            if self.pending and self.rng.random() < self.async_progress:
                self.pending.pop(0).deliver()
