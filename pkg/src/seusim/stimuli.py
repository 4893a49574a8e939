"""Stimulus generation: exhaustive enumeration and seeded pseudo-random runs.

A run is a ``[cycles, num_inputs]`` 0/1 matrix. The pseudo-random stream is
xoshiro256** seeded through splitmix64; each 64-bit output word is consumed
most-significant bit first, filling runs in order, cycles in order and
inputs in order. The stream is defined on integers only, so it is bit-exact
across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, TooLarge

ALGORITHM_ID = "xoshiro256starstar-splitmix64-msb/1"
EXHAUSTIVE_LIMIT = 24

_M64 = (1 << 64) - 1


def splitmix64(state: int):
    """Yield the splitmix64 sequence from ``state``."""
    while True:
        state = (state + 0x9E3779B97F4A7C15) & _M64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
        yield z ^ (z >> 31)


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & _M64


class Xoshiro256StarStar:
    def __init__(self, seed: int | None = None, state=None):
        if state is None:
            sm = splitmix64(seed & _M64)
            state = [next(sm) for _ in range(4)]
        self.s = [int(x) & _M64 for x in state]
        if not any(self.s):
            raise ValueError("xoshiro state must not be all zero")

    def next64(self) -> int:
        s = self.s
        result = (_rotl((s[1] * 5) & _M64, 7) * 9) & _M64
        t = (s[1] << 17) & _M64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def bits(self, n: int) -> np.ndarray:
        """``n`` uniform bits, each word read MSB first."""
        words = np.array([self.next64() for _ in range(-(-n // 64))], dtype=">u8")
        return np.unpackbits(words.view(np.uint8))[:n]


@dataclass(frozen=True)
class StimulusRun:
    bits: np.ndarray  # uint8 [cycles, num_inputs]

    @property
    def cycles(self) -> int:
        return self.bits.shape[0]

    def __eq__(self, other):
        return isinstance(other, StimulusRun) and np.array_equal(self.bits, other.bits)


@dataclass(frozen=True, eq=False)
class StimulusSet:
    """A batch of equally shaped runs, stored as ``uint8[runs, cycles, num_inputs]``."""

    bits: np.ndarray
    provenance: dict = field(default_factory=lambda: {"kind": "explicit"})

    def __post_init__(self):
        if self.bits.ndim != 3:
            raise ValueError("stimulus bits must be [runs, cycles, inputs]")

    @property
    def runs(self) -> int:
        return self.bits.shape[0]

    @property
    def cycles(self) -> int:
        return self.bits.shape[1]

    @property
    def num_inputs(self) -> int:
        return self.bits.shape[2]

    def __len__(self):
        return self.runs

    def __getitem__(self, r) -> StimulusRun:
        return StimulusRun(self.bits[r])

    def __iter__(self):
        return (StimulusRun(b) for b in self.bits)

    def __eq__(self, other):
        return (isinstance(other, StimulusSet) and self.bits.shape == other.bits.shape
                and np.array_equal(self.bits, other.bits))

    def head(self, runs: int) -> StimulusSet:
        return StimulusSet(self.bits[:runs], dict(self.provenance, runs=runs))


def exhaustive(num_inputs: int, cycles: int, hold: bool = False) -> StimulusSet:
    """Every input matrix, in lexicographic order of the flattened bits.

    With ``hold`` each run repeats one input vector for all cycles, so there
    are ``2**num_inputs`` runs instead of ``2**(num_inputs * cycles)``.
    """
    if cycles < 1:
        raise ConfigError("cycles must be positive")
    free = num_inputs if hold else num_inputs * cycles
    if free > EXHAUSTIVE_LIMIT:
        raise TooLarge(1 << free)
    runs = np.arange(1 << free, dtype=np.uint32)
    shifts = np.arange(free - 1, -1, -1, dtype=np.uint32)
    flat = ((runs[:, None] >> shifts) & 1).astype(np.uint8)
    if hold:
        bits = np.repeat(flat[:, None, :], cycles, axis=1)
    else:
        bits = flat.reshape(len(runs), cycles, num_inputs)
    return StimulusSet(bits, {"kind": "exhaustive", "hold": hold})


def pseudo_random(num_inputs: int, cycles: int, runs: int, seed: int, hold: bool = False) -> StimulusSet:
    """Uniform random runs drawn from the fixed xoshiro256** stream of ``seed``."""
    if runs < 1:
        raise ConfigError("runs must be at least 1")
    if cycles < 1:
        raise ConfigError("cycles must be positive")
    rng = Xoshiro256StarStar(seed)
    if hold:
        draw = rng.bits(runs * num_inputs).reshape(runs, 1, num_inputs)
        bits = np.repeat(draw, cycles, axis=1)
    else:
        bits = rng.bits(runs * cycles * num_inputs).reshape(runs, cycles, num_inputs)
    return StimulusSet(np.ascontiguousarray(bits, dtype=np.uint8),
                       {"kind": "random", "seed": seed & _M64, "algorithm": ALGORITHM_ID, "hold": hold})


def write_stimuli(stim: StimulusSet) -> str:
    """One run per line; cycles separated by ``;``, input 0 first within a cycle."""
    lines = []
    for run in stim.bits:
        lines.append(";".join("".join("01"[b] for b in cyc) for cyc in run))
    return "\n".join(lines) + ("\n" if lines else "")


def read_stimuli(text) -> StimulusSet:
    if hasattr(text, "read"):
        text = text.read()
    runs = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        cycles = line.split(";")
        if any(set(c) - {"0", "1"} for c in cycles):
            raise ConfigError(f"stimulus line {lineno}: only 0/1 allowed")
        row = [[int(ch) for ch in c] for c in cycles]
        if len({len(c) for c in row}) != 1:
            raise ConfigError(f"stimulus line {lineno}: cycles differ in width")
        if runs and (len(row), len(row[0])) != runs[0].shape:
            raise ConfigError(f"stimulus line {lineno}: shape differs from line 1")
        runs.append(np.array(row, dtype=np.uint8))
    if not runs:
        raise ConfigError("stimulus file holds no runs")
    return StimulusSet(np.stack(runs), {"kind": "file"})
