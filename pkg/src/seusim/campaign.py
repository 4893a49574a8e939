"""Fault-injection campaign: golden run plus every fault against every stimulus run.

Runs are packed 64 per machine word and split into chunks; each
``(fault, chunk)`` pair is an independent task producing integer mismatch
counts, and the tasks are summed into the :class:`ErrorMatrix`. Integer
summation makes the result independent of the number of workers.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels
from .elaborate import EvalGraph
from .errors import ConfigError, DimensionMismatch, SchemaError
from .faults import FaultUniverse
from .sim import NO_FAULT, pack_runs, simulate_packed, unpack_runs, valid_mask
from .stimuli import StimulusSet

THREADS_ENV = "SEUSIM_THREADS"
CHUNK_RUNS = 1024


def resolve_threads(threads="auto") -> int:
    """Worker count; the ``SEUSIM_THREADS`` environment variable wins."""
    env = os.environ.get(THREADS_ENV)
    if env:
        threads = env
    if threads in (None, "auto", "0", 0):
        return os.cpu_count() or 1
    try:
        n = int(threads)
    except (TypeError, ValueError):
        raise ConfigError(f"bad thread count {threads!r}") from None
    if n < 1:
        raise ConfigError(f"thread count must be positive, got {n}")
    return n


def check_weights(weights, labels) -> dict:
    """Validate a weight map over output bits; ``None`` means weight 1 everywhere."""
    if weights is None:
        return {b: Fraction(1) for b in labels}
    missing = [b for b in labels if b not in weights]
    extra = [b for b in weights if b not in labels]
    if missing or extra:
        raise ConfigError(f"weights must cover exactly the outputs; missing {missing}, unknown {extra}")
    out = {}
    for b in labels:
        try:
            w = Fraction(str(weights[b])) if isinstance(weights[b], float) else Fraction(weights[b])
        except (TypeError, ValueError):
            raise ConfigError(f"weight for {b} is not a number") from None
        if w < 0:
            raise ConfigError(f"weight for {b} is negative")
        out[b] = w
    if labels and not any(out.values()):
        raise ConfigError("at least one weight must be positive")
    return out


@dataclass
class CampaignConfig:
    stimulus: StimulusSet
    cycles: int | None = None
    weights: dict | None = None
    threads: int | str = "auto"
    chunk_runs: int = CHUNK_RUNS

    def __post_init__(self):
        if self.cycles is None:
            self.cycles = self.stimulus.cycles
        if self.chunk_runs < 1 or self.chunk_runs % 64:
            raise ConfigError("chunk_runs must be a positive multiple of 64")


@dataclass
class ErrorMatrix:
    """Mismatch counters of a campaign.

    ``counts[f, b, c]``: runs where output bit ``b`` differed from golden at
    cycle ``c`` under fault ``f``. ``any_error[f, b]``: runs where it differed
    in at least one cycle.
    """

    runs: int
    cycles: int
    faults: list
    outputs: list
    counts: np.ndarray
    any_error: np.ndarray
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64).reshape(
            len(self.faults), len(self.outputs), self.cycles)
        self.any_error = np.asarray(self.any_error, dtype=np.int64).reshape(
            len(self.faults), len(self.outputs))

    def __eq__(self, other):
        return (isinstance(other, ErrorMatrix) and self.runs == other.runs
                and self.cycles == other.cycles and self.faults == other.faults
                and self.outputs == other.outputs
                and np.array_equal(self.counts, other.counts)
                and np.array_equal(self.any_error, other.any_error))

    def to_dict(self) -> dict:
        doc = {
            "runs": self.runs,
            "cycles": self.cycles,
            "faults": list(self.faults),
            "outputs": list(self.outputs),
            "counts": self.counts.tolist(),
            "any_error": self.any_error.tolist(),
        }
        doc.update(self.extra)
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":")) + "\n"

    @classmethod
    def from_dict(cls, doc) -> ErrorMatrix:
        if not isinstance(doc, dict):
            raise SchemaError("", "results must be an object")
        for key, typ in (("runs", int), ("cycles", int), ("faults", list), ("outputs", list),
                         ("counts", list), ("any_error", list)):
            if not isinstance(doc.get(key), typ):
                raise SchemaError(key, f"missing or not a {typ.__name__}")
        try:
            counts = np.array(doc["counts"], dtype=np.int64)
            any_error = np.array(doc["any_error"], dtype=np.int64)
        except (TypeError, ValueError):
            raise SchemaError("counts", "counters must be integer arrays") from None
        nf, nb, nc = len(doc["faults"]), len(doc["outputs"]), doc["cycles"]
        if counts.size != nf * nb * nc or (counts.size and counts.shape != (nf, nb, nc)):
            raise SchemaError("counts", f"expected shape [{nf}][{nb}][{nc}]")
        if any_error.size != nf * nb or (any_error.size and any_error.shape != (nf, nb)):
            raise SchemaError("any_error", f"expected shape [{nf}][{nb}]")
        runs = doc["runs"]
        if (counts < 0).any() or (counts > runs).any() or (any_error < 0).any() or (any_error > runs).any():
            raise SchemaError("counts", "counters must lie in [0, runs]")
        extra = {k: v for k, v in doc.items()
                 if k not in ("runs", "cycles", "faults", "outputs", "counts", "any_error")}
        return cls(runs, nc, list(doc["faults"]), list(doc["outputs"]), counts, any_error, extra)

    @classmethod
    def from_json(cls, text) -> ErrorMatrix:
        if hasattr(text, "read"):
            text = text.read()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise SchemaError("", f"invalid JSON: {e}") from None
        return cls.from_dict(doc)


@dataclass(frozen=True)
class _Chunk:
    stim: np.ndarray    # uint64 [cycles, n_in, W]
    golden: np.ndarray  # uint64 [cycles, n_out, W]
    valid: np.ndarray   # uint64 [W]
    runs: int


@dataclass(frozen=True)
class GoldenCache:
    """Golden output traces, computed once per chunk of runs and shared by every fault."""

    chunks: tuple
    runs: int
    cycles: int
    num_outputs: int

    @property
    def nbits(self) -> int:
        return self.runs * self.cycles * self.num_outputs

    def traces(self) -> np.ndarray:
        """Unpacked golden traces, ``uint8[runs, cycles, n_out]``."""
        parts = [unpack_runs(c.golden, c.runs) for c in self.chunks]
        if not parts:
            return np.zeros((0, self.cycles, self.num_outputs), dtype=np.uint8)
        return np.concatenate(parts)


def _chunks(stim: StimulusSet, size: int):
    for lo in range(0, stim.runs, size):
        yield stim.bits[lo:lo + size]


def golden_trace_cache(g: EvalGraph, stim: StimulusSet, chunk_runs: int = CHUNK_RUNS) -> GoldenCache:
    chunks = []
    for bits in _chunks(stim, chunk_runs):
        packed = pack_runs(bits)
        chunks.append(_Chunk(packed, simulate_packed(g, packed, NO_FAULT), valid_mask(len(bits)), len(bits)))
    return GoldenCache(tuple(chunks), stim.runs, stim.cycles, g.num_outputs)


def run_campaign(g: EvalGraph, u: FaultUniverse, cfg: CampaignConfig,
                 use_cache: bool = True) -> ErrorMatrix:
    """Simulate every fault of ``u`` against every run of ``cfg.stimulus``.

    :param use_cache: When false the golden trace is re-simulated for every
        task instead of being shared; results are identical.
    """
    stim = cfg.stimulus
    if stim.num_inputs != g.num_inputs:
        raise DimensionMismatch(f"stimulus has {stim.num_inputs} inputs, design has {g.num_inputs}")
    if cfg.cycles != stim.cycles:
        raise DimensionMismatch(f"stimulus has {stim.cycles} cycles, config asks for {cfg.cycles}")
    labels = g.output_labels()
    check_weights(cfg.weights, labels)
    rows = [g.lut_index[f.lut] if f.lut in g.lut_index else None for f in u]
    if None in rows:
        raise DimensionMismatch("fault universe does not belong to this design")

    n_out, cycles = g.num_outputs, cfg.cycles
    counts = np.zeros((len(u), n_out, cycles), dtype=np.int64)
    any_error = np.zeros((len(u), n_out), dtype=np.int64)
    if len(u) == 0 or stim.runs == 0:
        return ErrorMatrix(stim.runs, cycles, u.ids, labels, counts, any_error)

    cache = golden_trace_cache(g, stim, cfg.chunk_runs) if use_cache else None
    packed = None if use_cache else [pack_runs(b) for b in _chunks(stim, cfg.chunk_runs)]
    n_chunks = len(cache.chunks) if use_cache else len(packed)

    def task(job):
        fi, ci = job
        if use_cache:
            ch = cache.chunks[ci]
            s, gold, valid = ch.stim, ch.golden, ch.valid
        else:
            s = packed[ci]
            gold = simulate_packed(g, s, NO_FAULT)
            valid = valid_mask(min(cfg.chunk_runs, stim.runs - ci * cfg.chunk_runs))
        c = np.zeros((n_out, cycles), dtype=np.int64)
        a = np.zeros(n_out, dtype=np.int64)
        _kernels.fault_counts(g.ops, g.fanin, g.tables, g.reg_table, g.reg_init, g.input_slots,
                              g.output_slots, g.num_slots, s, rows[fi], gold, valid, c, a)
        return fi, c, a

    jobs = [(fi, ci) for fi in range(len(u)) for ci in range(n_chunks)]
    workers = min(resolve_threads(cfg.threads), len(jobs))
    if workers <= 1:
        results = [task(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(task, jobs))
    for fi, c, a in results:
        counts[fi] += c
        any_error[fi] += a
    return ErrorMatrix(stim.runs, cycles, u.ids, labels, counts, any_error)
