import json
import math

import numpy as np
import pytest

import specavg


def uniform(n, d, seed):
    return np.random.default_rng(seed).uniform(-1.0, 1.0, size=(n, d))


def test_basis_shapes():
    basis = specavg.build_basis(specavg.Manifold.torus(1), 2)
    assert basis.size == 3
    assert basis.cumulative_dims == [1, 3]
    assert basis.eigenvalues[1] == pytest.approx(math.pi**2)
    values = specavg.eval_basis(basis, np.array([0.0]))
    assert values[1] == pytest.approx(math.sqrt(2.0))


def test_out_of_chart_point_is_rejected():
    basis = specavg.build_basis(specavg.Manifold.torus(2), 5)
    with pytest.raises(ValueError):
        specavg.eval_basis(basis, np.array([1.0, 0.0]))


def test_groups_and_blocks():
    assert specavg.closure_size(specavg.Group.coordinate_permutations(4)) == 24
    assert specavg.Group.sign_flips(3).order == 8
    circle = specavg.Manifold.circle()
    z4 = specavg.Group.cyclic_rotation(4)
    basis = specavg.build_basis(circle, 3)
    block = specavg.representation_block(z4, 1, basis, 1)
    assert np.allclose(block, [[0.0, -1.0], [1.0, 0.0]]) or np.allclose(block, [[0.0, 1.0], [-1.0, 0.0]])
    projected, residual, rank = specavg.project(np.array([1.0, 0.0]), [block])
    assert np.allclose(projected, 0.0)
    assert rank == 2


def test_fit_is_invariant_and_round_trips():
    manifold = specavg.Manifold.torus(3)
    group = specavg.Group.sign_flips(3)
    x = uniform(200, 3, 1)
    y = (x**2).sum(axis=1) + 0.1 * np.random.default_rng(2).standard_normal(200)
    model = specavg.fit(x, y, manifold, group, cutoff=60)
    tests = uniform(50, 3, 3)
    value, sampled = specavg.invariance_discrepancy(model, manifold, tests, group)
    assert value <= 1e-9
    assert not sampled
    flipped = tests * np.array([-1.0, 1.0, -1.0])
    assert np.allclose(model.predict(tests), model.predict(flipped), atol=1e-12)

    again = specavg.SpectralModel.from_json(model.to_json())
    assert np.array_equal(again.coefficients, model.coefficients)
    assert json.loads(model.to_json())["cutoff"] == 60


def test_krr_baselines():
    manifold = specavg.Manifold.torus(3)
    group = specavg.Group.sign_flips(3)
    x = uniform(80, 3, 4)
    y = (x**2).sum(axis=1)
    tests = uniform(40, 3, 5)
    plain = specavg.krr_fit(x, y, manifold, bandwidth=1.0, ridge=0.01)
    averaged = specavg.krr_fit(x, y, manifold, bandwidth=1.0, ridge=0.01, average_over=group)
    assert specavg.invariance_discrepancy(plain, manifold, tests, group)[0] >= 1e-6
    assert specavg.invariance_discrepancy(averaged, manifold, tests, group)[0] <= 1e-10


def test_cutoff_dimension():
    assert specavg.cutoff_dimension(16, 3.0) == 2
    with pytest.raises(ValueError):
        specavg.cutoff_dimension(16, 1.0)


def test_experiment_is_reproducible(tmp_path):
    config = {
        "manifold": {"kind": "flat_torus", "dimension": 2},
        "group": {"kind": "sign_flips", "degree": 2},
        "target": {"kind": "weighted_squares"},
        "methods": [{"name": "spec_avg", "cutoffs": [5, 13]}],
        "n_train": [64],
        "n_test": 20,
        "noise_std": 0.1,
        "seeds": [1, 2],
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    rows = specavg.run_experiment(str(path), str(a), record_timing=False)
    specavg.run_experiment(str(path), str(b), record_timing=False)
    assert rows == 6
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0].startswith("method,hyperparam,n,seed")
