"""
Distributions - discrete input constellations and CN(0,1) fading quadrature

Fading is represented in polar form H = sqrt(Gamma) e^{j Theta} with
Gamma ~ Exp(1) (Gauss-Laguerre nodes) and Theta uniform on [0, pi/2)
(Gauss-Legendre nodes). Every integrand used downstream depends on Theta only
through a cos^2/sin^2 pair or a permutation-invariant sum over letters, both
of which repeat every quarter turn.
"""

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import numpy as np
from numpy.polynomial import laguerre, legendre
from scipy import special

from utils.errors import ConstellationFormatError, ContractViolationError, DomainError
from utils.logger import setup_logger

logger = setup_logger(__name__)

NORMALIZATION_TOL = 1e-12
MERGE_TOL = 1e-9
MIN_GAMMA_NODES = 8
MIN_THETA_NODES = 8
DEFAULT_GRID_NODES = 64
UNIFORM_CIRCLE_ORDER = 64
MIN_PANEL_NODES = 8
# Width in log(gamma) of one Gauss-Legendre panel below gamma = 1
LOG_PANEL_WIDTH = 4.0
# Cut-offs below exp(MIN_LOG_CUTOFF) are integrated as if there were none
MIN_LOG_CUTOFF = -700.0

AXIS_FIELDS = (
    "gamma_nodes",
    "gamma_weights",
    "theta_nodes",
    "theta_weights",
    "in_phase_nodes",
    "in_phase_weights",
    "panel_nodes",
    "panel_weights",
)

QUARTER_TURNS = np.exp(0.5j * np.pi * np.arange(4))


@dataclass(frozen=True, eq=False)
class DiscreteInputDistribution:
    points: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        points = np.atleast_1d(np.asarray(self.points, dtype=complex))
        probs = np.atleast_1d(np.asarray(self.probs, dtype=float))
        if points.ndim != 1 or points.shape != probs.shape:
            raise ContractViolationError(
                f"points and probs must be 1-D of equal length, got {points.shape} and {probs.shape}"
            )
        if points.size == 0:
            raise ContractViolationError("An input distribution needs at least one point")
        if not np.all(np.isfinite(points)) or not np.all(np.isfinite(probs)):
            raise ContractViolationError("points and probs must be finite")
        if np.any(probs < 0):
            raise ContractViolationError("probs must be non-negative")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_points(cls, points, probs, tol: float = MERGE_TOL) -> "DiscreteInputDistribution":
        """Build a distribution, merging points closer than tol and dropping empty ones"""
        merged_points: List[complex] = []
        merged_probs: List[List[float]] = []
        for point, prob in zip(np.atleast_1d(points), np.atleast_1d(probs)):
            if prob == 0:
                continue
            for idx, existing in enumerate(merged_points):
                if abs(existing - point) <= tol:
                    merged_probs[idx].append(float(prob))
                    break
            else:
                merged_points.append(complex(point))
                merged_probs.append([float(prob)])

        order = sorted(range(len(merged_points)), key=lambda i: _canonical_key(merged_points[i]))
        return cls(
            np.array([merged_points[i] for i in order], dtype=complex),
            np.array([math.fsum(merged_probs[i]) for i in order]),
        )

    @property
    def size(self) -> int:
        return int(self.points.size)

    def is_normalized(self) -> bool:
        return abs(math.fsum(self.probs) - 1.0) <= NORMALIZATION_TOL

    def require_normalized(self) -> None:
        if not self.is_normalized():
            raise ContractViolationError(
                f"Input distribution is not normalized: probabilities sum to {math.fsum(self.probs)!r}"
            )

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "points": [[float(p.real), float(p.imag)] for p in self.points],
            "probs": [float(p) for p in self.probs],
        }


def _canonical_key(point: complex) -> Tuple[float, float]:
    # Rounded so that rotation round-off does not change the order
    return (round(point.real, 9), round(point.imag, 9))


@dataclass(frozen=True, eq=False)
class FadingGrid:
    gamma_nodes: np.ndarray
    gamma_weights: np.ndarray
    theta_nodes: np.ndarray
    theta_weights: np.ndarray
    # (Re H)^2 / (1/2) ~ chi-square(1), as u = v/2 with weight u^{-1/2} e^{-u}
    in_phase_nodes: np.ndarray
    in_phase_weights: np.ndarray
    # Gauss-Legendre rule on [-1, 1], weights summing to 1, for log-gamma panels
    panel_nodes: np.ndarray
    panel_weights: np.ndarray

    def __post_init__(self):
        for name in AXIS_FIELDS:
            values = np.array(getattr(self, name), dtype=float)
            values.setflags(write=False)
            object.__setattr__(self, name, values)

    @property
    def n_gamma(self) -> int:
        return int(self.gamma_nodes.size)

    @property
    def n_theta(self) -> int:
        return int(self.theta_nodes.size)

    def require_valid(self) -> None:
        for name in ("gamma", "theta", "in_phase", "panel"):
            nodes = getattr(self, f"{name}_nodes")
            weights = getattr(self, f"{name}_weights")
            if nodes.size == 0 or nodes.shape != weights.shape:
                raise ContractViolationError(f"Fading grid has an empty or mismatched {name} axis")
            if np.any(weights <= 0) or abs(math.fsum(weights) - 1.0) > 1e-10:
                raise ContractViolationError(f"Fading grid {name} weights must be positive and sum to 1")

    def polar_nodes(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Gamma and Theta broadcast to (n_gamma, n_theta) with the product weights"""
        gamma = self.gamma_nodes[:, None]
        theta = self.theta_nodes[None, :]
        weights = self.gamma_weights[:, None] * self.theta_weights[None, :]
        return gamma, theta, weights

    def channel_gains(self) -> Tuple[np.ndarray, np.ndarray]:
        """Complex h = sqrt(gamma) e^{j theta} on the product grid, flattened, with weights"""
        gamma, theta, weights = self.polar_nodes()
        gains = np.sqrt(gamma) * np.exp(1j * theta)
        return gains.ravel(), weights.ravel()

    def quarter_turn_nodes(self) -> Tuple[np.ndarray, np.ndarray]:
        """The product grid unfolded over the four quarter turns, covering the full circle"""
        gains, weights = self.channel_gains()
        unfolded = (gains[:, None] * QUARTER_TURNS[None, :]).ravel()
        return unfolded, np.repeat(weights / 4.0, 4)

    def in_phase_gains(self) -> Tuple[np.ndarray, np.ndarray]:
        """Nodes for E over Gamma cos^2(Theta) / (1/2), which is chi-square with 1 degree of freedom"""
        return 2.0 * self.in_phase_nodes, self.in_phase_weights

    def cutoff_quadrature(self, log_cutoff: float) -> Tuple[np.ndarray, np.ndarray]:
        """
        Nodes and weights for E[f(Gamma); Gamma > cutoff] with Gamma ~ Exp(1).

        The rule starts exactly at the cut-off, so an integrand that is only
        smooth above it keeps its kink on an endpoint. Below gamma = 1 it uses
        Gauss-Legendre panels in log(gamma), which also resolve the 1/gamma
        growth of high-SNR policies. The tail is Gauss-Laguerre shifted to
        max(cutoff, 1). A cut-off of -inf (or below exp(MIN_LOG_CUTOFF)) gives
        the plain grid; +inf gives an empty rule.
        """
        if math.isnan(log_cutoff):
            raise DomainError("log_cutoff must not be NaN")
        if log_cutoff == math.inf:
            return np.empty(0), np.empty(0)
        if log_cutoff < MIN_LOG_CUTOFF:
            return np.array(self.gamma_nodes), np.array(self.gamma_weights)

        tail_start = math.exp(max(log_cutoff, 0.0))
        tail_nodes = tail_start + self.gamma_nodes
        tail_weights = math.exp(-tail_start) * self.gamma_weights
        if log_cutoff >= 0.0:
            return tail_nodes, tail_weights

        n_panels = max(1, math.ceil(-log_cutoff / LOG_PANEL_WIDTH))
        edges = np.linspace(log_cutoff, 0.0, n_panels + 1)
        width = edges[1] - edges[0]
        u = edges[:-1, None] + 0.5 * width * (self.panel_nodes[None, :] + 1.0)
        gamma = np.exp(u)
        # d(gamma) e^{-gamma} = gamma e^{-gamma} du
        weights = width * self.panel_weights[None, :] * gamma * np.exp(-gamma)

        return np.concatenate([gamma.ravel(), tail_nodes]), np.concatenate([weights.ravel(), tail_weights])

    def to_dict(self) -> Dict[str, int]:
        return {"n_gamma": self.n_gamma, "n_theta": self.n_theta}


def _as_distribution(input_dist: DiscreteInputDistribution) -> DiscreteInputDistribution:
    if not isinstance(input_dist, DiscreteInputDistribution):
        raise ContractViolationError(f"Expected a DiscreteInputDistribution, got {type(input_dist).__name__}")
    return input_dist


def psk(order: int, amplitude: float, phase_offset: float = 0.0) -> DiscreteInputDistribution:
    """M equiprobable points amplitude * e^{j(2 pi m / M + offset)}"""
    if int(order) != order or order < 2:
        raise DomainError(f"PSK order must be an integer >= 2, got {order}")
    if not math.isfinite(amplitude) or amplitude < 0:
        raise DomainError(f"PSK amplitude must be finite and non-negative, got {amplitude}")
    order = int(order)
    angles = 2.0 * np.pi * np.arange(order) / order + phase_offset
    if amplitude == 0:
        return DiscreteInputDistribution(np.array([0j]), np.array([1.0]))
    return DiscreteInputDistribution(amplitude * np.exp(1j * angles), np.full(order, 1.0 / order))


def uniform_circle(power: float, order: int = UNIFORM_CIRCLE_ORDER) -> DiscreteInputDistribution:
    """M-point surrogate for the uniform law on the circle of radius sqrt(P)"""
    if power < 0:
        raise DomainError(f"power must be non-negative, got {power}")
    return psk(order, math.sqrt(power))


def rotate(input_dist: DiscreteInputDistribution, k: Union[int, complex]) -> DiscreteInputDistribution:
    """Rotate every point by k quarter turns (int) or by a given unit-modulus factor (complex)"""
    input_dist = _as_distribution(input_dist)
    factor = QUARTER_TURNS[int(k) % 4] if isinstance(k, (int, np.integer)) else complex(k)
    return DiscreteInputDistribution(input_dist.points * factor, input_dist.probs.copy())


def symmetrize(input_dist: DiscreteInputDistribution) -> DiscreteInputDistribution:
    """F^s(x) = (1/4) sum_k F(x e^{j pi k/2}), coincident points merged"""
    input_dist = _as_distribution(input_dist)
    input_dist.require_normalized()
    points = (input_dist.points[None, :] * QUARTER_TURNS[:, None]).ravel()
    probs = np.tile(input_dist.probs / 4.0, 4)
    return DiscreteInputDistribution.from_points(points, probs)


def is_pi2_symmetric(input_dist: DiscreteInputDistribution, tol: float = MERGE_TOL) -> bool:
    """True iff a quarter turn maps the weighted point set onto itself"""
    input_dist = _as_distribution(input_dist)
    input_dist.require_normalized()
    original = DiscreteInputDistribution.from_points(input_dist.points, input_dist.probs, tol)
    turned = DiscreteInputDistribution.from_points(original.points * 1j, original.probs, tol)

    if original.size != turned.size:
        return False
    for point, prob in zip(original.points, original.probs):
        distances = np.abs(turned.points - point)
        match = int(np.argmin(distances))
        if distances[match] > tol or abs(turned.probs[match] - prob) > tol:
            return False
    return True


def average_power(input_dist: DiscreteInputDistribution) -> float:
    input_dist = _as_distribution(input_dist)
    input_dist.require_normalized()
    return math.fsum(input_dist.probs * np.abs(input_dist.points) ** 2)


@lru_cache(maxsize=16)
def build_fading_grid(n_gamma: int = DEFAULT_GRID_NODES, n_theta: int = DEFAULT_GRID_NODES) -> FadingGrid:
    """Gauss-Laguerre over Gamma ~ Exp(1), Gauss-Legendre over uniform Theta on [0, pi/2)"""
    if n_gamma < MIN_GAMMA_NODES or n_theta < MIN_THETA_NODES:
        raise DomainError(
            f"Fading grid needs at least {MIN_GAMMA_NODES} x {MIN_THETA_NODES} nodes, got {n_gamma} x {n_theta}"
        )

    gamma_nodes, gamma_weights = laguerre.laggauss(n_gamma)
    # far-tail Laguerre weights can underflow; those nodes carry nothing
    keep = gamma_weights > 0
    if not np.all(keep):
        logger.debug(f"Dropping {int((~keep).sum())} Gauss-Laguerre nodes with underflowed weights")
    gamma_nodes, gamma_weights = gamma_nodes[keep], gamma_weights[keep]
    gamma_weights = gamma_weights / math.fsum(gamma_weights)

    unit_nodes, unit_weights = legendre.leggauss(n_theta)
    theta_nodes = 0.25 * np.pi * (unit_nodes + 1.0)
    theta_weights = unit_weights / 2.0

    in_phase_nodes, in_phase_weights = special.roots_genlaguerre(n_gamma, -0.5)
    keep = in_phase_weights > 0
    in_phase_nodes = in_phase_nodes[keep]
    in_phase_weights = in_phase_weights[keep] / math.fsum(in_phase_weights[keep])

    panel_nodes, panel_weights = legendre.leggauss(max(MIN_PANEL_NODES, n_gamma // 4))

    grid = FadingGrid(
        gamma_nodes=gamma_nodes,
        gamma_weights=gamma_weights,
        theta_nodes=theta_nodes,
        theta_weights=theta_weights,
        in_phase_nodes=in_phase_nodes,
        in_phase_weights=in_phase_weights,
        panel_nodes=panel_nodes,
        panel_weights=panel_weights / 2.0,
    )
    grid.require_valid()
    logger.debug(f"Built fading grid {grid.n_gamma} x {grid.n_theta}")
    return grid


def constellation_from_json(document: Any) -> DiscreteInputDistribution:
    """Parse {"points": [[re, im], ...], "probs": [p, ...]}"""
    if not isinstance(document, dict):
        raise ConstellationFormatError("Constellation document must be a JSON object", "<root>")

    for field in ("points", "probs"):
        if field not in document:
            raise ConstellationFormatError("Missing required field", field)
        if not isinstance(document[field], list):
            raise ConstellationFormatError("Expected a list", field)

    points = []
    for idx, entry in enumerate(document["points"]):
        if (
            not isinstance(entry, list)
            or len(entry) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in entry)
        ):
            raise ConstellationFormatError("Each point must be a [re, im] pair of numbers", f"points[{idx}]")
        points.append(complex(entry[0], entry[1]))

    probs = []
    for idx, value in enumerate(document["probs"]):
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConstellationFormatError("Each probability must be a number", f"probs[{idx}]")
        probs.append(float(value))

    if len(points) != len(probs):
        raise ConstellationFormatError(
            f"{len(points)} points but {len(probs)} probabilities", "probs"
        )
    if not points:
        raise ConstellationFormatError("At least one point is required", "points")
    if any(p < 0 for p in probs):
        raise ConstellationFormatError("Probabilities must be non-negative", "probs")
    if abs(math.fsum(probs) - 1.0) > NORMALIZATION_TOL:
        raise ConstellationFormatError(f"Probabilities sum to {math.fsum(probs)!r}, not 1", "probs")

    return DiscreteInputDistribution(np.array(points), np.array(probs))


def load_constellation(path: Union[str, Path]) -> DiscreteInputDistribution:
    logger.info(f"Loading constellation from {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            document = json.load(f)
    except json.JSONDecodeError as e:
        raise ConstellationFormatError(f"Invalid JSON at line {e.lineno}: {e.msg}", "<root>") from e
    except OSError as e:
        raise ConstellationFormatError(f"Cannot read {path}: {e.strerror or e}", "<file>") from e
    return constellation_from_json(document)


def dump_constellation(input_dist: DiscreteInputDistribution, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(input_dist.to_json_dict(), f, indent=2)
