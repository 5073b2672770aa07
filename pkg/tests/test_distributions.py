import json
import math

import numpy as np
import pytest
from scipy import special

from tools.distributions import (
    DiscreteInputDistribution,
    average_power,
    build_fading_grid,
    constellation_from_json,
    dump_constellation,
    is_pi2_symmetric,
    load_constellation,
    psk,
    rotate,
    symmetrize,
    uniform_circle,
)
from utils.errors import ConstellationFormatError, ContractViolationError, DomainError


class TestDiscreteInputDistribution:
    def test_rejects_negative_probability(self):
        with pytest.raises(ContractViolationError):
            DiscreteInputDistribution(np.array([1 + 0j, -1 + 0j]), np.array([1.2, -0.2]))

    def test_rejects_length_mismatch(self):
        with pytest.raises(ContractViolationError):
            DiscreteInputDistribution(np.array([1 + 0j]), np.array([0.5, 0.5]))

    def test_from_points_merges_coincident_points(self):
        dist = DiscreteInputDistribution.from_points([1.0, 1.0 + 1e-12, -1.0], [0.25, 0.25, 0.5])
        assert dist.size == 2
        np.testing.assert_allclose(sorted(dist.probs), [0.5, 0.5])


class TestPsk:
    @pytest.mark.parametrize("order", [2, 4, 8, 64])
    def test_normalized_with_expected_power(self, order):
        dist = psk(order, math.sqrt(3.0))
        assert dist.is_normalized()
        assert average_power(dist) == pytest.approx(3.0, rel=1e-13)

    def test_zero_amplitude_collapses_to_origin(self):
        dist = psk(4, 0.0)
        assert dist.size == 1
        assert dist.points[0] == 0

    def test_domain(self):
        with pytest.raises(DomainError):
            psk(1, 1.0)
        with pytest.raises(DomainError):
            psk(4, -1.0)

    def test_uniform_circle_surrogate(self):
        dist = uniform_circle(2.0)
        assert dist.size == 64
        assert average_power(dist) == pytest.approx(2.0, rel=1e-13)


class TestSymmetry:
    @pytest.mark.parametrize("order,expected", [(2, False), (3, False), (4, True), (8, True), (12, True)])
    def test_psk_orders(self, order, expected):
        assert is_pi2_symmetric(psk(order, 1.0)) is expected

    def test_symmetrize_bpsk(self):
        sym = symmetrize(psk(2, 1.0))
        assert sym.size == 4
        np.testing.assert_allclose(sym.probs, 0.25, atol=1e-15)
        assert is_pi2_symmetric(sym)

    def test_symmetrize_is_idempotent_on_symmetric_input(self):
        qpsk = psk(4, 1.0)
        sym = symmetrize(qpsk)
        assert sym.size == 4
        assert is_pi2_symmetric(sym)

    def test_symmetrize_preserves_power(self, rng):
        points = rng.normal(size=5) + 1j * rng.normal(size=5)
        probs = rng.dirichlet(np.ones(5))
        dist = DiscreteInputDistribution(points, probs)
        assert average_power(symmetrize(dist)) == pytest.approx(average_power(dist), rel=1e-12)

    @pytest.mark.parametrize("turns", [1, 2, 3])
    def test_symmetrize_absorbs_quarter_turns(self, rng, turns):
        points = rng.normal(size=4) + 1j * rng.normal(size=4)
        dist = DiscreteInputDistribution(points, rng.dirichlet(np.ones(4)))
        expected, turned = symmetrize(dist), symmetrize(rotate(dist, turns))
        assert turned.size == expected.size
        np.testing.assert_allclose(turned.points, expected.points, atol=1e-12)
        np.testing.assert_allclose(turned.probs, expected.probs, atol=1e-15)

    def test_rotate_quarter_turns(self):
        bpsk = psk(2, 1.0)
        turned = rotate(bpsk, 1)
        np.testing.assert_allclose(np.sort_complex(turned.points), np.sort_complex(np.array([1j, -1j])), atol=1e-15)
        assert average_power(rotate(bpsk, np.exp(0.3j))) == pytest.approx(1.0, rel=1e-14)


class TestFadingGrid:
    def test_gamma_moments(self, grid):
        weights, nodes = grid.gamma_weights, grid.gamma_nodes
        assert math.fsum(weights) == pytest.approx(1.0, abs=1e-14)
        assert math.fsum(weights * nodes) == pytest.approx(1.0, rel=1e-9)
        assert math.fsum(weights * nodes**2) == pytest.approx(2.0, rel=1e-9)

    def test_theta_nodes_cover_quarter_circle(self, grid):
        assert np.all((grid.theta_nodes > 0) & (grid.theta_nodes < math.pi / 2))
        assert math.fsum(grid.theta_weights) == pytest.approx(1.0, abs=1e-14)

    def test_in_phase_moments(self, grid):
        gains, weights = grid.in_phase_gains()
        assert math.fsum(weights * gains) == pytest.approx(1.0, rel=1e-9)
        assert math.fsum(weights * gains**2) == pytest.approx(3.0, rel=1e-9)

    def test_in_phase_matches_polar_expectation(self, grid):
        # E[2 Gamma cos^2 Theta] and E[(2 Gamma cos^2 Theta)^2] through the 2-D grid
        gamma, theta, weights = grid.polar_nodes()
        v = 2.0 * gamma * np.cos(theta) ** 2
        assert math.fsum(np.ravel(weights * v)) == pytest.approx(1.0, rel=1e-9)
        assert math.fsum(np.ravel(weights * v**2)) == pytest.approx(3.0, rel=1e-9)

    def test_complex_gain_second_moment(self, grid):
        gains, weights = grid.channel_gains()
        assert math.fsum(weights * np.abs(gains) ** 2) == pytest.approx(1.0, rel=1e-9)

    def test_cached(self):
        assert build_fading_grid(32, 32) is build_fading_grid(32, 32)

    def test_minimum_size(self):
        with pytest.raises(DomainError):
            build_fading_grid(4, 64)


class TestCutoffQuadrature:
    @pytest.mark.parametrize("cutoff", [1e-40, 1e-3, 0.43, 2.5])
    def test_truncated_exponential_moments(self, grid, cutoff):
        nodes, weights = grid.cutoff_quadrature(math.log(cutoff))
        assert np.min(nodes) > cutoff
        assert math.fsum(weights) == pytest.approx(math.exp(-cutoff), rel=1e-10)
        assert math.fsum(weights * nodes) == pytest.approx((1.0 + cutoff) * math.exp(-cutoff), rel=1e-10)
        # 1/gamma growth near the cut-off, as in high-SNR policies
        assert math.fsum(weights / nodes) == pytest.approx(special.exp1(cutoff), rel=1e-8)

    def test_no_cutoff_is_the_plain_grid(self, grid):
        nodes, weights = grid.cutoff_quadrature(-math.inf)
        np.testing.assert_array_equal(nodes, grid.gamma_nodes)
        np.testing.assert_array_equal(weights, grid.gamma_weights)

    def test_infinite_cutoff_is_empty(self, grid):
        nodes, weights = grid.cutoff_quadrature(math.inf)
        assert nodes.size == 0 and weights.size == 0

    def test_panels_refine_with_the_grid(self, grid, fine_grid):
        assert fine_grid.panel_nodes.size > grid.panel_nodes.size


class TestConstellationJson:
    def test_load_and_dump(self, tmp_path):
        path = tmp_path / "qpsk.json"
        dump_constellation(psk(4, 1.0), path)
        loaded = load_constellation(path)
        assert loaded.size == 4
        assert average_power(loaded) == pytest.approx(1.0, rel=1e-14)

    @pytest.mark.parametrize(
        "document,field",
        [
            ({"points": [[1, 0]]}, "probs"),
            ({"probs": [1.0]}, "points"),
            ({"points": [[1, 0], [0, "a"]], "probs": [0.5, 0.5]}, "points[1]"),
            ({"points": [[1, 0], [0, 1]], "probs": [0.5, None]}, "probs[1]"),
            ({"points": [[1, 0], [0, 1]], "probs": [0.5]}, "probs"),
            ({"points": [[1, 0], [0, 1]], "probs": [0.6, 0.6]}, "probs"),
            ([1, 2], "<root>"),
        ],
    )
    def test_errors_name_the_field(self, document, field):
        with pytest.raises(ConstellationFormatError) as excinfo:
            constellation_from_json(document)
        assert excinfo.value.field == field

    def test_invalid_json_file(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConstellationFormatError):
            load_constellation(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConstellationFormatError):
            load_constellation(tmp_path / "missing.json")

    def test_document_shape(self):
        document = json.loads(json.dumps(psk(2, 1.0).to_json_dict()))
        assert set(document) == {"points", "probs"}
        assert document["points"][0] == [1.0, 0.0]
