"""
Information - CMI/SMI entropy integrals, CSIR capacities and the CSIT communication rate

All expectations are fixed quadrature sums over a FadingGrid, accumulated
with math.fsum so results do not depend on summation order.
"""

import math
from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING, Dict, Tuple

import numpy as np

from tools.distributions import DiscreteInputDistribution, FadingGrid
from tools.quantized_channel import ChannelParams, letter_probabilities, output_pmf_sense
from tools.scalar_math import entropy_hb_q, xi
from utils.errors import ContractViolationError, DomainError
from utils.logger import setup_logger

if TYPE_CHECKING:
    from tools.power_control import PowerControlPolicy

logger = setup_logger(__name__)

MAX_RATE = 2.0


@dataclass(frozen=True)
class MutualInformationResult:
    value: float
    h_output: float
    h_output_given_state: float

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class CapacityRecord:
    power: float
    sigma_c_sq: float
    sigma_s_sq: float
    c_comm: float
    c_sense: float

    @property
    def snr_db(self) -> float:
        if self.power == 0:
            return float("-inf")
        return 10.0 * math.log10(self.power / self.sigma_c_sq)

    def to_dict(self) -> Dict[str, float]:
        return {
            "P": self.power,
            "sigma_c_sq": self.sigma_c_sq,
            "sigma_s_sq": self.sigma_s_sq,
            "C_comm": self.c_comm,
            "C_sense": self.c_sense,
        }


def _weighted_sum(values: np.ndarray, weights: np.ndarray) -> float:
    return math.fsum(np.ravel(values * weights))


def _check_power(power: float) -> float:
    if not math.isfinite(power) or power < 0:
        raise DomainError(f"Power must be finite and non-negative, got {power}")
    return float(power)


def _letter_entropy(pmf: np.ndarray) -> np.ndarray:
    """sum_l xi(p_l) over the trailing letter axis"""
    return np.sum(xi(np.clip(pmf, 0.0, 1.0)), axis=-1)


def _conditional_entropies(
    input_dist: DiscreteInputDistribution, gains: np.ndarray, sigma_sq: float
) -> Tuple[np.ndarray, np.ndarray]:
    """Per channel state h: H(Y | h) and H(Y | h, X)"""
    letters = letter_probabilities(gains[:, None] * input_dist.points[None, :], sigma_sq)
    pmf = np.einsum("m,nml->nl", input_dist.probs, letters)
    h_output = _letter_entropy(pmf)
    h_given = _letter_entropy(letters) @ input_dist.probs
    return h_output, h_given


def _check_inputs(input_dist: DiscreteInputDistribution, grid: FadingGrid) -> None:
    if not isinstance(input_dist, DiscreteInputDistribution):
        raise ContractViolationError("Expected a DiscreteInputDistribution")
    input_dist.require_normalized()
    grid.require_valid()


def cmi_given_channel(input_dist: DiscreteInputDistribution, h: complex, sigma_sq: float) -> MutualInformationResult:
    """I(X; Y | H = h) for one channel state"""
    input_dist.require_normalized()
    h_output, h_given = _conditional_entropies(input_dist, np.array([complex(h)]), sigma_sq)
    return MutualInformationResult(
        value=float(h_output[0] - h_given[0]),
        h_output=float(h_output[0]),
        h_output_given_state=float(h_given[0]),
    )


def cmi(input_dist: DiscreteInputDistribution, grid: FadingGrid, sigma_c_sq: float) -> MutualInformationResult:
    """I(X; Y_c | H_c) = H(Y_c | H_c) - H(Y_c | H_c, X)"""
    _check_inputs(input_dist, grid)
    gains, weights = grid.channel_gains()
    h_output, h_given = _conditional_entropies(input_dist, gains, sigma_c_sq)

    first = _weighted_sum(h_output, weights)
    second = _weighted_sum(h_given, weights)
    logger.debug(f"CMI terms for {input_dist.size}-point input: {first:.10f} - {second:.10f}")
    return MutualInformationResult(value=first - second, h_output=first, h_output_given_state=second)


def smi(input_dist: DiscreteInputDistribution, grid: FadingGrid, sigma_s_sq: float) -> MutualInformationResult:
    """I(H_s; Y_s | X) = H(Y_s | X) - H(Y_s | H_s, X)"""
    _check_inputs(input_dist, grid)

    first = math.fsum(
        prob * float(_letter_entropy(output_pmf_sense(point, grid, sigma_s_sq).probs))
        for point, prob in zip(input_dist.points, input_dist.probs)
    )

    gains, weights = grid.channel_gains()
    _, h_given = _conditional_entropies(input_dist, gains, sigma_s_sq)
    second = _weighted_sum(h_given, weights)

    logger.debug(f"SMI terms for {input_dist.size}-point input: {first:.10f} - {second:.10f}")
    return MutualInformationResult(value=first - second, h_output=first, h_output_given_state=second)


def _pair_entropies(power, sigma_sq: float, grid: FadingGrid) -> np.ndarray:
    """H_b terms of the cos^2/sin^2 pair on the polar grid; power broadcasts on a leading axis"""
    gamma, theta, _ = grid.polar_nodes()
    k_cos = gamma * np.cos(theta) ** 2 / (sigma_sq / 2.0)
    k_sin = gamma * np.sin(theta) ** 2 / (sigma_sq / 2.0)
    power = np.asarray(power, dtype=float)[..., None, None]
    return np.asarray(entropy_hb_q(k_cos, power)) + np.asarray(entropy_hb_q(k_sin, power))


def _closed_form_capacity(power: float, sigma_sq: float, grid: FadingGrid) -> float:
    power = _check_power(power)
    if sigma_sq <= 0:
        raise DomainError(f"Noise power must be positive, got {sigma_sq}")
    grid.require_valid()
    if power == 0:
        return 0.0
    _, _, weights = grid.polar_nodes()
    return MAX_RATE - _weighted_sum(_pair_entropies(power, sigma_sq, grid), weights)


def c_comm_closed_form(power: float, sigma_c_sq: float, grid: FadingGrid) -> float:
    """C_comm(P) under CSIR"""
    return _closed_form_capacity(power, sigma_c_sq, grid)


def c_sense_closed_form(power: float, sigma_s_sq: float, grid: FadingGrid) -> float:
    """C_sense(P); the same expression with the sensing noise power"""
    return _closed_form_capacity(power, sigma_s_sq, grid)


def c_sense_reduced(power: float, sigma_s_sq: float, grid: FadingGrid) -> float:
    """C_sense(P) through the 1-D chi-square(1) reduction of the cos^2/sin^2 pair"""
    power = _check_power(power)
    if power == 0:
        return 0.0
    gains, weights = grid.in_phase_gains()
    entropies = np.asarray(entropy_hb_q(gains / sigma_s_sq, power))
    return MAX_RATE - 2.0 * _weighted_sum(entropies, weights)


def sense_rate_at_powers(powers: np.ndarray, sigma_s_sq: float, grid: FadingGrid) -> np.ndarray:
    """C_sense at each entry of `powers`, on the 1-D in-phase nodes the power control solver differentiates"""
    powers = np.asarray(powers, dtype=float)
    if np.any(~np.isfinite(powers)) or np.any(powers < 0):
        raise DomainError("Powers must be finite and non-negative")
    gains, weights = grid.in_phase_gains()
    entropies = np.asarray(entropy_hb_q(gains / sigma_s_sq, powers.reshape(-1, 1)))
    rates = np.array([MAX_RATE - 2.0 * _weighted_sum(row, weights) for row in entropies])
    return rates.reshape(powers.shape)


def capacity_region(power: float, params: ChannelParams, grid: FadingGrid) -> Tuple[float, float]:
    """Corner (C_comm, C_sense) of the rectangular capacity region"""
    c_comm = c_comm_closed_form(power, params.sigma_c_sq, grid)
    c_sense = c_sense_closed_form(power, params.sigma_s_sq, grid)
    return c_comm, c_sense


def capacity_record(power: float, params: ChannelParams, grid: FadingGrid) -> CapacityRecord:
    c_comm, c_sense = capacity_region(power, params, grid)
    return CapacityRecord(power, params.sigma_c_sq, params.sigma_s_sq, c_comm, c_sense)


def c_comm_csit(policy: "PowerControlPolicy", sigma_c_sq: float, grid: FadingGrid) -> float:
    """2 - 2 E_Gamma_c{H_b(Q(sqrt(Gamma_c P_Gamma_c / sigma_c^2)))}, with the phase pre-rotated away"""
    powers = np.asarray(policy.powers, dtype=float)
    nodes = np.asarray(policy.gamma_nodes, dtype=float)
    weights = np.asarray(policy.gamma_weights, dtype=float)
    if policy.grid.to_dict() != grid.to_dict():
        raise ContractViolationError("Policy was solved on a different fading grid")
    if powers.shape != nodes.shape or np.any(~np.isfinite(powers)) or np.any(powers < 0):
        raise ContractViolationError("Policy powers must be finite and non-negative at every node")

    # states below the cut-off carry no weight here and contribute rate 0
    rates = MAX_RATE - 2.0 * np.asarray(entropy_hb_q(nodes / sigma_c_sq, powers))
    return _weighted_sum(rates, weights)
