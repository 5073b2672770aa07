"""
Quantized Channel - 1-bit I/Q quantizer, per-letter channel law and output PMFs

Output letters are y_l = exp(j(pi/4 + pi l/2)), one per quadrant. Only the
quadrant signs of y_l enter the channel law, so W_{y_l}(z) is the product of
two Gaussian tail probabilities with signs (s_I, s_Q) of letter l.
"""

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Dict, Tuple, Union

import numpy as np
from scipy import stats

from tools.scalar_math import q_function
from utils.errors import ContractViolationError, DomainError
from utils.logger import setup_logger

if TYPE_CHECKING:
    from tools.distributions import DiscreteInputDistribution, FadingGrid

logger = setup_logger(__name__)

N_LETTERS = 4

# (sign Re y_l, sign Im y_l) for l = 0..3
LETTER_SIGNS = np.array([[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]])

# Monte-Carlo draws are tallied in chunks of this many samples
SIMULATION_CHUNK = 1_000_000


@dataclass(frozen=True)
class QuantizedSymbol:
    index: int

    def __post_init__(self):
        if self.index not in range(N_LETTERS):
            raise DomainError(f"Letter index must be in 0..3, got {self.index}")

    @property
    def point(self) -> complex:
        return complex(np.exp(1j * (math.pi / 4 + math.pi * self.index / 2)))

    @property
    def signs(self) -> Tuple[float, float]:
        sign_i, sign_q = LETTER_SIGNS[self.index]
        return float(sign_i), float(sign_q)

    def rotate(self, k: int) -> "QuantizedSymbol":
        """y_{l (+) k}, i.e. the letter rotated by k quarter turns"""
        return QuantizedSymbol((self.index + k) % N_LETTERS)


ALPHABET = tuple(QuantizedSymbol(l) for l in range(N_LETTERS))


@dataclass(frozen=True)
class ChannelParams:
    sigma_c_sq: float = 1.0
    sigma_s_sq: float = 1.0
    power_budget: float = 1.0

    def __post_init__(self):
        for name in ("sigma_c_sq", "sigma_s_sq", "power_budget"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.sigma_c_sq <= 0 or self.sigma_s_sq <= 0:
            raise DomainError("Noise powers must be strictly positive")
        if self.power_budget < 0:
            raise DomainError("power_budget must be non-negative")

    @classmethod
    def from_snr_db(cls, snr_db: float, sigma_c_sq: float = 1.0, sigma_s_sq: float = 1.0) -> "ChannelParams":
        """SNR is referenced to the communication noise power"""
        if math.isinf(snr_db) and snr_db < 0:
            return cls(sigma_c_sq, sigma_s_sq, 0.0)
        return cls(sigma_c_sq, sigma_s_sq, sigma_c_sq * 10.0 ** (snr_db / 10.0))

    @property
    def snr_db(self) -> float:
        if self.power_budget == 0:
            return float("-inf")
        return 10.0 * math.log10(self.power_budget / self.sigma_c_sq)

    def with_power(self, power_budget: float) -> "ChannelParams":
        return ChannelParams(self.sigma_c_sq, self.sigma_s_sq, power_budget)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sigma_c_sq": self.sigma_c_sq,
            "sigma_s_sq": self.sigma_s_sq,
            "power_budget": self.power_budget,
        }


@dataclass(frozen=True)
class OutputPmf:
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.shape != (N_LETTERS,):
            raise ContractViolationError(f"An output PMF has 4 letters, got shape {probs.shape}")
        if np.any(probs < -1e-15) or np.any(probs > 1 + 1e-15):
            raise ContractViolationError(f"PMF entries must lie in [0, 1]: {probs}")
        if abs(math.fsum(probs) - 1.0) > 1e-12:
            raise ContractViolationError(f"PMF must sum to 1, sums to {math.fsum(probs)!r}")
        object.__setattr__(self, "probs", probs)

    def __getitem__(self, index: int) -> float:
        return float(self.probs[index])


def _check_sigma(sigma_sq: float) -> float:
    if not np.isfinite(sigma_sq) or sigma_sq <= 0:
        raise DomainError(f"Noise power must be positive and finite, got {sigma_sq}")
    return float(sigma_sq)


def _letter_index(letter: Union[int, QuantizedSymbol]) -> int:
    if isinstance(letter, QuantizedSymbol):
        return letter.index
    return QuantizedSymbol(int(letter) % N_LETTERS).index


def quantize(v: complex) -> QuantizedSymbol:
    """Quadrant letter of v; zero components count as positive"""
    if not (np.isfinite(np.real(v)) and np.isfinite(np.imag(v))):
        raise DomainError(f"Cannot quantize non-finite value {v!r}")
    return QuantizedSymbol(int(quantize_indices(np.asarray([v]))[0]))


def quantize_indices(v: np.ndarray) -> np.ndarray:
    """Vectorized quantizer returning letter indices"""
    negative_i = np.real(v) < 0
    negative_q = np.imag(v) < 0
    # (+,+)->0, (-,+)->1, (-,-)->2, (+,-)->3
    return np.where(negative_q, np.where(negative_i, 2, 3), np.where(negative_i, 1, 0))


def channel_law_factors(letter: Union[int, QuantizedSymbol], z, sigma_sq: float) -> Tuple[Any, Any]:
    """P(Re Y = Re y_l | z) and P(Im Y = Im y_l | z), conditionally independent"""
    sigma_sq = _check_sigma(sigma_sq)
    sign_i, sign_q = LETTER_SIGNS[_letter_index(letter)]
    scale = math.sqrt(sigma_sq / 2.0)
    z = np.asarray(z, dtype=complex)
    in_phase = q_function(-sign_i * np.real(z) / scale)
    quadrature = q_function(-sign_q * np.imag(z) / scale)
    return in_phase, quadrature


def channel_law(letter: Union[int, QuantizedSymbol], z, sigma_sq: float):
    """W_{y_l}(z): probability of letter l when z is sent over AWGN of power sigma_sq"""
    in_phase, quadrature = channel_law_factors(letter, z, sigma_sq)
    result = np.asarray(in_phase) * np.asarray(quadrature)
    return float(result) if np.ndim(z) == 0 else result


def letter_probabilities(z, sigma_sq: float) -> np.ndarray:
    """All four W_{y_l}(z), stacked on a trailing axis of length 4"""
    sigma_sq = _check_sigma(sigma_sq)
    z = np.asarray(z, dtype=complex)
    scale = math.sqrt(sigma_sq / 2.0)

    # Q(-x) for the positive-sign letters, Q(x) for the negative ones
    in_phase_pos = np.asarray(q_function(-np.real(z) / scale))
    in_phase_neg = np.asarray(q_function(np.real(z) / scale))
    quad_pos = np.asarray(q_function(-np.imag(z) / scale))
    quad_neg = np.asarray(q_function(np.imag(z) / scale))

    return np.stack(
        [
            in_phase_pos * quad_pos,
            in_phase_neg * quad_pos,
            in_phase_neg * quad_neg,
            in_phase_pos * quad_neg,
        ],
        axis=-1,
    )


def output_pmf_comm(h_c: complex, input_dist: "DiscreteInputDistribution", sigma_c_sq: float) -> OutputPmf:
    """p_{Y_c|H_c}(. | h_c) for the given input law"""
    input_dist.require_normalized()
    letters = letter_probabilities(h_c * input_dist.points, sigma_c_sq)
    return OutputPmf(input_dist.probs @ letters)


def output_pmf_sense(x: complex, fading: "FadingGrid", sigma_s_sq: float) -> OutputPmf:
    """
    p_{Y_s|X}(. | x): the channel law averaged over CN(0,1) sensing fading.

    The grid only covers Theta in [0, pi/2), so every node is unfolded into
    its four quarter-turn rotations to represent the full uniform phase.
    """
    fading.require_valid()
    gains, weights = fading.quarter_turn_nodes()
    letters = letter_probabilities(gains * x, sigma_s_sq)
    probs = np.einsum("n,nl->l", weights, letters)
    return OutputPmf(probs / math.fsum(weights))


def simulate(x: complex, h: complex, sigma_sq: float, n: int, seed: int) -> np.ndarray:
    """Monte-Carlo letter counts for v = h x + z, z ~ CN(0, sigma_sq)"""
    sigma_sq = _check_sigma(sigma_sq)
    if n < 1:
        raise DomainError(f"simulate needs n >= 1, got {n}")

    rng = np.random.default_rng(seed)
    scale = math.sqrt(sigma_sq / 2.0)
    mean = complex(h) * complex(x)
    counts = np.zeros(N_LETTERS, dtype=np.int64)

    remaining = int(n)
    while remaining > 0:
        chunk = min(remaining, SIMULATION_CHUNK)
        noise = scale * (rng.standard_normal(chunk) + 1j * rng.standard_normal(chunk))
        counts += np.bincount(quantize_indices(mean + noise), minlength=N_LETTERS)
        remaining -= chunk

    logger.debug(f"Simulated {n} draws at h*x={mean:.4g}, sigma^2={sigma_sq:g}: {counts.tolist()}")
    return counts


def chi_square_check(counts: np.ndarray, probs: np.ndarray) -> Dict[str, Any]:
    """
    Goodness of fit of letter counts against the analytic channel law.

    Letters with zero expected probability are excluded from the chi-square
    statistic; any count landing on one of them is an immediate misfit.
    """
    counts = np.asarray(counts, dtype=float)
    probs = np.asarray(probs, dtype=float)
    n = counts.sum()

    expected = n * probs
    with np.errstate(divide="ignore", invalid="ignore"):
        z_scores = np.where(
            probs * (1 - probs) > 0,
            (counts - expected) / np.sqrt(n * probs * (1 - probs)),
            0.0,
        )

    support = expected > 0
    impossible_hits = int(counts[~support].sum())

    if support.sum() <= 1:
        p_value = 1.0 if impossible_hits == 0 else 0.0
        statistic = 0.0
    else:
        f_exp = expected[support] * (counts[support].sum() / expected[support].sum())
        result = stats.chisquare(counts[support], f_exp)
        statistic, p_value = float(result.statistic), float(result.pvalue)
        if impossible_hits:
            p_value = 0.0

    return {
        "statistic": statistic,
        "p_value": p_value,
        "z_scores": z_scores.tolist(),
        "max_abs_z": float(np.max(np.abs(z_scores))),
        "impossible_hits": impossible_hits,
    }
