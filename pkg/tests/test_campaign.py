import itertools
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from seusim import circuits, reference
from seusim.campaign import (CampaignConfig, ErrorMatrix, golden_trace_cache, resolve_threads,
                             run_campaign)
from seusim.elaborate import elaborate
from seusim.errors import ConfigError, DimensionMismatch, SchemaError
from seusim.faults import FaultUniverse, enumerate_faults
from seusim.stimuli import StimulusSet, exhaustive, pseudo_random


def campaign(n, stim, **kw):
    return run_campaign(elaborate(n), enumerate_faults(n), CampaignConfig(stim, **kw))


def assert_matrix_invariants(m):
    assert (m.counts >= 0).all() and (m.counts <= m.runs).all()
    assert (m.any_error >= 0).all() and (m.any_error <= m.runs).all()
    if m.cycles:
        assert (m.any_error >= m.counts.max(axis=2)).all()


def test_zero_luts():
    m = campaign(circuits.pipeline(), exhaustive(1, 3))
    assert m.faults == [] and m.runs == 8
    assert m.counts.shape == (0, 1, 3)


def test_buffer_fault_always_observed():
    stim = exhaustive(1, 4)
    m = campaign(circuits.buffer_lut(), stim)
    assert m.counts[0, 0].tolist() == [stim.runs] * 4
    assert m.any_error[0, 0] == stim.runs


def _reconvergent_oracle(cycles):
    """Brute-force the reconvergent circuit from its Boolean equations."""
    def trace(run, fault):
        q, out = 0, []
        for a, b, c in run:
            fan = (a & b) ^ fault
            y = (1 - (fan ^ c)) ^ (1 - fan)
            out.append((y, q & a))
            q = y
        return out

    counts = np.zeros((2, cycles), dtype=np.int64)
    for flat in itertools.product((0, 1), repeat=3 * cycles):
        run = [flat[3 * t:3 * t + 3] for t in range(cycles)]
        for t, (good, bad) in enumerate(zip(trace(run, 0), trace(run, 1))):
            counts[:, t] += np.array(good) != np.array(bad)
    return counts


def test_reconvergent_fault_is_masked():
    m = campaign(circuits.reconvergent(), exhaustive(3, 3))
    oracle = _reconvergent_oracle(3)
    assert not oracle.any()
    assert np.array_equal(m.counts[m.faults.index("fan")], oracle)
    assert m.any_error[m.faults.index("fan")].tolist() == [0, 0]


def test_cache_is_a_semantic_no_op():
    n = circuits.random_netlist(17, n_luts=6)
    g, u = elaborate(n), enumerate_faults(n)
    cfg = CampaignConfig(pseudo_random(g.num_inputs, 6, 300, seed=1), chunk_runs=128)
    assert run_campaign(g, u, cfg, use_cache=True) == run_campaign(g, u, cfg, use_cache=False)


def test_cache_size_and_contents():
    g = elaborate(circuits.counter2())
    stim = StimulusSet(np.zeros((100, 5, 0), dtype=np.uint8))
    cache = golden_trace_cache(g, stim, chunk_runs=64)
    assert cache.nbits == 100 * 5 * 2
    assert cache.traces().shape == (100, 5, 2)
    assert cache.traces()[7, :, :].tolist() == [[0, 0], [0, 1], [1, 0], [1, 1], [0, 0]]


def test_empty_stimulus_gives_empty_cache():
    g = elaborate(circuits.xor2())
    cache = golden_trace_cache(g, StimulusSet(np.zeros((0, 3, 2), dtype=np.uint8)))
    assert cache.nbits == 0 and cache.chunks == ()
    assert cache.traces().shape == (0, 3, 1)


def test_empty_fault_universe_is_all_zero():
    n = circuits.random_netlist(4)
    g = elaborate(n)
    m = run_campaign(g, FaultUniverse(()), CampaignConfig(pseudo_random(g.num_inputs, 4, 50, 0)))
    assert m.counts.size == 0 and m.runs == 50


def test_dimension_mismatch():
    n = circuits.xor2()
    with pytest.raises(DimensionMismatch):
        campaign(n, exhaustive(3, 1))
    with pytest.raises(DimensionMismatch):
        campaign(n, exhaustive(2, 2), cycles=3)
    with pytest.raises(DimensionMismatch):
        run_campaign(elaborate(n), enumerate_faults(circuits.buffer_lut()),
                     CampaignConfig(exhaustive(2, 1)))


@pytest.mark.parametrize("weights", [{"y": -1}, {"y": 0}, {"z": 1}, {"y": "x"}])
def test_bad_weights(weights):
    with pytest.raises(ConfigError):
        campaign(circuits.xor2(), exhaustive(2, 1), weights=weights)


@given(st.integers(0, 10_000))
def test_matches_reference_counts(seed):
    n = circuits.random_netlist(seed)
    stim = pseudo_random(len(n.data_inputs), 5, 70, seed)
    m = campaign(n, stim, chunk_runs=64)
    counts, any_error = reference.reference_counts(n, enumerate_faults(n), stim.bits)
    assert np.array_equal(m.counts, counts)
    assert np.array_equal(m.any_error, any_error)
    assert_matrix_invariants(m)


@pytest.mark.parametrize("threads", [1, 2, 3, 8])
def test_thread_invariance(threads):
    n = circuits.synthetic(60, seed=3, n_inputs=6, n_outputs=6)
    stim = pseudo_random(6, 5, 700, seed=9)
    base = campaign(n, stim, threads=1, chunk_runs=128)
    assert campaign(n, stim, threads=threads, chunk_runs=128).to_json() == base.to_json()


def test_env_overrides_threads(monkeypatch):
    monkeypatch.setenv("SEUSIM_THREADS", "3")
    assert resolve_threads(1) == 3
    monkeypatch.setenv("SEUSIM_THREADS", "zero")
    with pytest.raises(ConfigError):
        resolve_threads()


@given(st.integers(0, 1000), st.integers(1, 60))
def test_adding_runs_never_decreases_counts(seed, extra):
    n = circuits.random_netlist(seed)
    stim = pseudo_random(len(n.data_inputs), 4, 80, seed)
    more = StimulusSet(np.concatenate([stim.bits, pseudo_random(stim.num_inputs, 4, extra, seed + 1).bits]))
    a, b = campaign(n, stim), campaign(n, more)
    assert (b.counts >= a.counts).all() and (b.any_error >= a.any_error).all()


def test_json_round_trip(b01):
    m = campaign(b01, exhaustive(2, 3))
    doc = json.loads(m.to_json())
    assert set(doc) == {"runs", "cycles", "faults", "outputs", "counts", "any_error"}
    assert ErrorMatrix.from_json(m.to_json()) == m
    assert ErrorMatrix.from_json(m.to_json()).to_json() == m.to_json()


@pytest.mark.parametrize("mutate", [
    lambda d: d.pop("counts"),
    lambda d: d.update(runs=-1),
    lambda d: d.update(counts=[[[1]]]),
    lambda d: d["any_error"][0].__setitem__(0, 99),
])
def test_results_schema_errors(b01, mutate):
    doc = json.loads(campaign(b01, exhaustive(2, 2)).to_json())
    mutate(doc)
    with pytest.raises(SchemaError):
        ErrorMatrix.from_dict(doc)
