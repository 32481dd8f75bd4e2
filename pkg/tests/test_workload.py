import numpy as np
import pytest

from lsmamp.errors import GeometryError, ModelError
from lsmamp.workload import WorkloadSpec, generate_keys


def test_sizes():
    spec = WorkloadSpec(num_pairs=16_000_000)
    assert spec.pair_bytes == 1082
    assert spec.dataset_bytes == 1082 * 16_000_000


@pytest.mark.parametrize("dist", ["uniform", "zipf", "sorted"])
def test_deterministic(dist):
    spec = WorkloadSpec(num_pairs=5000, distribution=dist, seed=42)
    a, b = generate_keys(spec), generate_keys(spec)
    assert a.dtype == np.int64 and len(a) == 5000
    assert np.array_equal(a, b)
    assert a.min() >= 0 and a.max() < spec.key_universe
    other = generate_keys(WorkloadSpec(num_pairs=5000, distribution=dist, seed=43))
    assert not np.array_equal(a, other)


def test_sorted_is_ascending_and_distinct():
    keys = generate_keys(WorkloadSpec(num_pairs=10_000, distribution="sorted"))
    assert np.all(np.diff(keys) > 0)


def test_sorted_stride_full_universe_chunks():
    universe = 1 << 24
    n, m = 1 << 16, 256
    keys = generate_keys(WorkloadSpec(num_pairs=n, distribution="sorted-stride",
                                      key_universe=universe, seed=3), keys_per_sst=m)
    assert len(np.unique(keys)) == n
    chunks = keys.reshape(-1, m)
    assert np.all(np.diff(chunks, axis=1) > 0)
    spans = chunks.max(axis=1) - chunks.min(axis=1)
    # each chunk reaches from the first to the last stride of the sorted key set
    assert spans.min() > 0.97 * universe


def test_sorted_stride_needs_alignment():
    with pytest.raises(GeometryError):
        generate_keys(WorkloadSpec(num_pairs=1000, distribution="sorted-stride"), keys_per_sst=64)
    with pytest.raises(ModelError):
        generate_keys(WorkloadSpec(num_pairs=1024, distribution="sorted-stride"))


def test_zipf_is_skewed():
    keys = generate_keys(WorkloadSpec(num_pairs=200_000, distribution="zipf",
                                      key_universe=1 << 20, seed=5))
    _, counts = np.unique(keys, return_counts=True)
    top = np.sort(counts)[::-1]
    assert top[0] > 100 * np.median(counts)
    uniform = generate_keys(WorkloadSpec(num_pairs=200_000, key_universe=1 << 20, seed=5))
    assert len(np.unique(keys)) < 0.8 * len(np.unique(uniform))


@pytest.mark.parametrize("kw", [
    {"num_pairs": 0}, {"num_pairs": 10, "key_bytes": 0}, {"num_pairs": 10, "distribution": "x"},
    {"num_pairs": 10, "zipf_theta": 1.0, "distribution": "zipf"},
])
def test_invalid_specs(kw):
    with pytest.raises(ModelError):
        WorkloadSpec(**kw)


def test_universe_too_small_for_distinct_keys():
    with pytest.raises(GeometryError):
        WorkloadSpec(num_pairs=100, key_universe=50, distribution="sorted")
    WorkloadSpec(num_pairs=100, key_universe=50, distribution="uniform")
