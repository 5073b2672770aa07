"""
Power Control - weighted CMI/SMI power allocation under CSIT by nested bisection

g_function is the marginal gain of the weighted objective
    C_lambda = lambda * C_comm^CSIT + (1 - lambda) * C_sense
with respect to the power spent in one communication fading state. It equals
minus the D-sum of the stationarity condition, so it is positive and strictly
decreasing in the power alpha, and the optimal policy spends power in a state
exactly while g exceeds the multiplier mu.

The sensing expectation inside g uses the grid's 1-D chi-square(1) nodes,
an exact re-expression of the cos^2/sin^2 pair over (Gamma_s, Theta_s).

At high SNR both g and mu fall below the smallest double, so the solver
works with log g and log mu throughout. The policy integrals are taken on
FadingGrid.cutoff_quadrature, which starts at the analytic cut-off gain.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy import special

from tools.distributions import FadingGrid
from tools.information import c_comm_csit, sense_rate_at_powers
from tools.quantized_channel import ChannelParams
from tools.scalar_math import log_d_magnitude
from utils.errors import ContractViolationError, DomainError, SolverError
from utils.logger import setup_logger

logger = setup_logger(__name__)

INNER_TOL = 1e-10
OUTER_TOL = 1e-6
BRACKET_WIDTH_TOL = 1e-12
MAX_BISECTION_STEPS = 200
MAX_BRACKET_EXPANSIONS = 1000
# powers outside [MIN_POLICY_POWER, MAX_POLICY_POWER] are not representable targets
MIN_POLICY_POWER = 1e-300
MAX_POLICY_POWER = 1e300
# log(mu) moves by log(16) per step while bracketing the budget
LOG_MU_STEP = math.log(16.0)

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True, eq=False)
class PowerControlPolicy:
    lam: float
    log_mu: Optional[float]
    gamma_nodes: np.ndarray
    gamma_weights: np.ndarray
    powers: np.ndarray
    params: ChannelParams
    grid: FadingGrid
    log_base: float = 2.0
    label: str = "optimal"
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        powers = np.asarray(self.powers, dtype=float)
        nodes = np.asarray(self.gamma_nodes, dtype=float)
        weights = np.asarray(self.gamma_weights, dtype=float)
        if powers.shape != nodes.shape or weights.shape != nodes.shape:
            raise ContractViolationError("Policy needs one power and one weight per gamma_c node")
        if np.any(~np.isfinite(powers)) or np.any(powers < 0):
            raise ContractViolationError("Policy powers must be finite and non-negative")
        if np.any(weights < 0) or math.fsum(weights) > 1.0 + 1e-10:
            raise ContractViolationError("Policy weights must be non-negative with total mass at most 1")
        object.__setattr__(self, "powers", powers)
        object.__setattr__(self, "gamma_nodes", nodes)
        object.__setattr__(self, "gamma_weights", weights)

    @property
    def mu(self) -> Optional[float]:
        """The multiplier itself; 0.0 once it underflows, see log_mu"""
        return None if self.log_mu is None else math.exp(self.log_mu)

    def average_power(self) -> float:
        return math.fsum(self.gamma_weights * self.powers)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lambda": self.lam,
            "mu": self.mu,
            "log_mu": self.log_mu,
            "label": self.label,
            "snr_db": self.params.snr_db,
            "average_power": self.average_power(),
            "rows": [
                {"gamma_c": float(gamma), "power": float(power)}
                for gamma, power in zip(self.gamma_nodes, self.powers)
            ],
        }


@dataclass(frozen=True)
class WeightedObjectiveResult:
    c_lambda: float
    r_comm: float
    r_sense: float

    def to_dict(self) -> Dict[str, float]:
        return {"c_lambda": self.c_lambda, "r_comm": self.r_comm, "r_sense": self.r_sense}


def _check_lambda(lam: float) -> float:
    if not (0.0 <= lam <= 1.0):
        raise DomainError(f"lambda must lie in [0, 1], got {lam}")
    return float(lam)


def _as_output(values: np.ndarray, like: ArrayLike) -> ArrayLike:
    if np.ndim(like) == 0:
        return float(np.asarray(values).reshape(-1)[0])
    return values


def _resolve_log_mu(mu: Optional[float], log_mu: Optional[float]) -> float:
    if log_mu is not None:
        if math.isnan(log_mu) or log_mu == math.inf:
            raise DomainError(f"log_mu must be a number below +inf, got {log_mu}")
        return float(log_mu)
    if mu is None or not math.isfinite(mu) or mu < 0:
        raise DomainError(f"mu must be finite and non-negative, got {mu}")
    if mu == 0:
        raise DomainError("mu = 0 asks for unbounded power; pass log_mu for multipliers below double range")
    return math.log(mu)


def _zero_power_slopes(lam: float, params: ChannelParams, grid: FadingGrid, log_base: float) -> Tuple[float, float]:
    """g_at_zero(gamma_c) = slope * gamma_c + offset"""
    gains, weights = grid.in_phase_gains()
    mean_in_phase = math.fsum(gains * weights)
    scale = math.pi * math.log(log_base)
    slope = 2.0 * lam / params.sigma_c_sq / scale
    offset = 2.0 * (1.0 - lam) * mean_in_phase / params.sigma_s_sq / scale
    return slope, offset


def _log_g(
    lam: float,
    gamma_c: np.ndarray,
    alpha: np.ndarray,
    params: ChannelParams,
    grid: FadingGrid,
    log_base: float,
) -> np.ndarray:
    terms = []
    if lam > 0:
        live = gamma_c > 0
        k = np.where(live, gamma_c / params.sigma_c_sq, 1.0)
        comm = math.log(2.0 * lam) + np.asarray(log_d_magnitude(k, alpha, log_base))
        terms.append(np.where(live, comm, -np.inf))
    if lam < 1:
        gains, weights = grid.in_phase_gains()
        logs = np.asarray(log_d_magnitude(gains[None, :] / params.sigma_s_sq, alpha.reshape(-1, 1), log_base))
        sense = special.logsumexp(logs, b=weights[None, :], axis=-1).reshape(alpha.shape)
        terms.append(math.log(2.0 * (1.0 - lam)) + sense)
    if len(terms) == 1:
        return terms[0]
    return np.logaddexp(terms[0], terms[1])


def _log_g_at_zero(
    lam: float, gamma_c: np.ndarray, params: ChannelParams, grid: FadingGrid, log_base: float
) -> np.ndarray:
    slope, offset = _zero_power_slopes(lam, params, grid, log_base)
    with np.errstate(divide="ignore"):
        return np.log(slope * gamma_c + offset)


def _check_g_inputs(gamma_c: ArrayLike, alpha: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    gamma_values, alpha_values = np.broadcast_arrays(
        np.asarray(gamma_c, dtype=float), np.asarray(alpha, dtype=float)
    )
    if np.any(gamma_values < 0):
        raise DomainError("gamma_c must be non-negative")
    if np.any(~np.isfinite(alpha_values)) or np.any(alpha_values <= 0):
        raise DomainError("alpha must be positive and finite; use g_at_zero for the alpha -> 0+ limit")
    return np.atleast_1d(gamma_values), np.atleast_1d(alpha_values)


def log_g_function(
    lam: float,
    gamma_c: ArrayLike,
    alpha: ArrayLike,
    params: ChannelParams,
    grid: FadingGrid,
    log_base: float = 2.0,
) -> ArrayLike:
    """Natural log of g_function; -inf for a dead channel at lambda = 1"""
    lam = _check_lambda(lam)
    gamma_values, alpha_values = _check_g_inputs(gamma_c, alpha)
    result = _log_g(lam, gamma_values, alpha_values, params, grid, log_base)
    like = gamma_c if np.ndim(gamma_c) > 0 else alpha
    return _as_output(result, like)


def g_function(
    lam: float,
    gamma_c: ArrayLike,
    alpha: ArrayLike,
    params: ChannelParams,
    grid: FadingGrid,
    log_base: float = 2.0,
) -> ArrayLike:
    """Marginal gain of C_lambda at power alpha in state gamma_c; positive and decreasing in alpha"""
    log_values = log_g_function(lam, gamma_c, alpha, params, grid, log_base)
    if np.ndim(log_values) == 0:
        return math.exp(log_values)
    return np.exp(log_values)


def g_at_zero(
    lam: float,
    gamma_c: ArrayLike,
    params: ChannelParams,
    grid: FadingGrid,
    log_base: float = 2.0,
) -> ArrayLike:
    """Limit of g_function as alpha -> 0+: [2 lam gamma_c / sigma_c^2 + 2 (1 - lam) E[V] / sigma_s^2] / (pi ln b)"""
    lam = _check_lambda(lam)
    gamma_values = np.asarray(gamma_c, dtype=float)
    if np.any(gamma_values < 0):
        raise DomainError("gamma_c must be non-negative")
    slope, offset = _zero_power_slopes(lam, params, grid, log_base)
    return _as_output(slope * gamma_values + offset, gamma_c)


def log_cutoff_gain(lam: float, log_mu: float, params: ChannelParams, grid: FadingGrid, log_base: float = 2.0) -> float:
    """log of the gamma_c where g_at_zero = mu; -inf when every state gets power, +inf when none does"""
    slope, offset = _zero_power_slopes(_check_lambda(lam), params, grid, log_base)
    if offset > 0:
        log_offset = math.log(offset)
        if log_mu <= log_offset:
            return -math.inf
        if slope == 0:
            return math.inf
        # log((mu - offset) / slope) without forming mu
        return log_mu + math.log(-math.expm1(log_offset - log_mu)) - math.log(slope)
    return log_mu - math.log(slope)


def _solve_alpha(
    lam: float,
    gammas: np.ndarray,
    log_mu: float,
    params: ChannelParams,
    grid: FadingGrid,
    tol: float,
    log_base: float,
) -> np.ndarray:
    """alpha with log g(alpha) = log mu for states whose g_at_zero exceeds mu"""
    lo = np.zeros(gammas.size)
    hi = np.ones(gammas.size)

    def log_g_at(idx: np.ndarray, alpha: np.ndarray) -> np.ndarray:
        return _log_g(lam, gammas[idx], alpha, params, grid, log_base)

    # double alpha_hi until g(alpha_hi) < mu
    pending = np.arange(gammas.size)
    log_g_hi = log_g_at(pending, hi)
    for expansion in range(MAX_BRACKET_EXPANSIONS):
        expand = log_g_hi >= log_mu
        if not np.any(expand):
            break
        grow = pending[expand]
        lo[grow] = hi[grow]
        hi[grow] = 2.0 * hi[grow]
        if np.any(hi[grow] > MAX_POLICY_POWER):
            raise SolverError(
                "Could not bracket G^{-1}(mu) below the largest representable power",
                {"lambda": lam, "log_mu": log_mu, "gamma_c": gammas[grow].tolist()},
            )
        previous = log_g_hi[expand]
        log_g_hi[expand] = log_g_at(grow, hi[grow])
        rising = log_g_hi[expand] > previous
        if np.any(rising):
            logger.warning(
                f"g not monotone while expanding bracket at gamma_c={gammas[grow][rising].tolist()}, "
                f"alpha={hi[grow][rising].tolist()}; bisecting the sign change anyway"
            )
    else:
        raise SolverError("Could not bracket G^{-1}(mu)", {"lambda": lam, "log_mu": log_mu})

    solution = np.zeros(gammas.size)

    # halve alpha_lo away from zero for states that root below alpha = 1
    pending = np.flatnonzero(lo == 0)
    for shrink in range(MAX_BRACKET_EXPANSIONS):
        if pending.size == 0:
            break
        trial = 0.5 * hi[pending]
        above = log_g_at(pending, trial) >= log_mu
        lo[pending[above]] = trial[above]
        hi[pending[~above]] = trial[~above]
        # g(alpha) < mu all the way down: the state sits on the cut-off
        vanished = ~above & (trial < MIN_POLICY_POWER)
        pending = pending[~(above | vanished)]

    pending = np.flatnonzero(lo > 0)
    for step in range(MAX_BISECTION_STEPS):
        if pending.size == 0:
            break
        mid = np.sqrt(lo[pending] * hi[pending])
        log_g_mid = log_g_at(pending, mid)

        above = log_g_mid > log_mu
        lo[pending] = np.where(above, mid, lo[pending])
        hi[pending] = np.where(above, hi[pending], mid)

        done = (np.abs(log_g_mid - log_mu) <= tol) | (hi[pending] - lo[pending] <= BRACKET_WIDTH_TOL * hi[pending])
        solution[pending[done]] = mid[done]
        pending = pending[~done]
    else:
        if pending.size:
            raise SolverError(
                f"Inner bisection did not converge after {MAX_BISECTION_STEPS} steps",
                {
                    "lambda": lam,
                    "log_mu": log_mu,
                    "gamma_c": gammas[pending].tolist(),
                    "bracket": [lo[pending].tolist(), hi[pending].tolist()],
                },
            )

    return solution


def invert_g(
    lam: float,
    gamma_c: ArrayLike,
    mu: Optional[float],
    params: ChannelParams,
    grid: FadingGrid,
    tol: float = INNER_TOL,
    log_base: float = 2.0,
    log_mu: Optional[float] = None,
) -> ArrayLike:
    """
    [G^{-1}(mu)]^+ per gamma_c: zero where mu >= g_at_zero, otherwise the alpha
    with g(alpha) = mu, found by bisection on a doubling bracket. The match is
    made on log g against log mu, so `log_mu` may be given instead of a `mu`
    too small for a double.
    """
    lam = _check_lambda(lam)
    log_mu = _resolve_log_mu(mu, log_mu)

    gamma_values = np.atleast_1d(np.asarray(gamma_c, dtype=float))
    if np.any(gamma_values < 0) or np.any(~np.isfinite(gamma_values)):
        raise DomainError("gamma_c must be finite and non-negative")
    result = np.zeros(gamma_values.shape)

    active = np.flatnonzero(_log_g_at_zero(lam, gamma_values, params, grid, log_base) > log_mu)
    if active.size:
        result[active] = _solve_alpha(lam, gamma_values[active], log_mu, params, grid, tol, log_base)
    return _as_output(result, gamma_c)


def _policy_at(
    lam: float, log_mu: float, params: ChannelParams, grid: FadingGrid, log_base: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    log_cutoff = log_cutoff_gain(lam, log_mu, params, grid, log_base)
    nodes, weights = grid.cutoff_quadrature(log_cutoff)
    powers = np.atleast_1d(invert_g(lam, nodes, None, params, grid, log_base=log_base, log_mu=log_mu))
    return nodes, weights, powers


def power_spend(
    lam: float,
    mu: Optional[float],
    params: ChannelParams,
    grid: FadingGrid,
    log_base: float = 2.0,
    log_mu: Optional[float] = None,
) -> float:
    """E_Gamma_c{[G^{-1}(mu)]^+}, nonincreasing in mu"""
    lam = _check_lambda(lam)
    nodes, weights, powers = _policy_at(lam, _resolve_log_mu(mu, log_mu), params, grid, log_base)
    return math.fsum(weights * powers)


def solve_mu(
    lam: float,
    params: ChannelParams,
    grid: FadingGrid,
    tol: float = OUTER_TOL,
    log_base: float = 2.0,
) -> PowerControlPolicy:
    """Find mu so the policy meets the average power budget, and return that policy"""
    lam = _check_lambda(lam)
    budget = params.power_budget
    if not budget > 0:
        raise DomainError(f"solve_mu needs a positive power budget, got {budget}")

    history: List[Dict[str, float]] = []

    def spend_at(log_mu: float) -> Tuple[float, Tuple[np.ndarray, np.ndarray, np.ndarray]]:
        policy = _policy_at(lam, log_mu, params, grid, log_base)
        spend = math.fsum(policy[1] * policy[2])
        history.append({"log_mu": log_mu, "spend": spend})
        return spend, policy

    start = float(g_at_zero(lam, 1.0, params, grid, log_base))
    if not start > 0:
        raise SolverError("Power budget unreachable: every fading state has zero marginal gain", {"lambda": lam})

    # bracket the budget in log(mu): spend(log_hi) < budget <= spend(log_lo)
    log_hi = math.log(start)
    spend_hi, _ = spend_at(log_hi)
    for step in range(MAX_BRACKET_EXPANSIONS):
        if spend_hi < budget:
            break
        log_hi += LOG_MU_STEP
        spend_hi, _ = spend_at(log_hi)
    else:
        raise SolverError("Could not find a multiplier that underspends the budget", {"lambda": lam, "history": history[-5:]})

    log_lo = log_hi
    for step in range(MAX_BRACKET_EXPANSIONS):
        log_lo -= LOG_MU_STEP
        spend_lo, policy = spend_at(log_lo)
        if spend_lo >= budget:
            break
        log_hi, spend_hi = log_lo, spend_lo
    else:
        raise SolverError("Could not find a multiplier that spends the budget", {"lambda": lam, "history": history[-5:]})

    log_mu, spend = log_lo, spend_lo
    slack = tol * budget
    converged = abs(spend - budget) <= slack

    for step in range(MAX_BISECTION_STEPS):
        if converged:
            break
        log_mu = 0.5 * (log_lo + log_hi)
        spend, policy = spend_at(log_mu)
        logger.debug(f"lambda={lam}: log mu={log_mu:.12g} spends {spend:.10g} of {budget:.10g}")

        if spend > spend_lo + slack or spend < spend_hi - slack:
            raise SolverError(
                "Power spend is not monotone in mu",
                {"lambda": lam, "log_mu": log_mu, "spend": spend, "bracket_spend": [spend_lo, spend_hi]},
            )

        converged = abs(spend - budget) <= slack
        if spend > budget:
            log_lo, spend_lo = log_mu, spend
        else:
            log_hi, spend_hi = log_mu, spend
    else:
        if not converged:
            raise SolverError(
                f"Outer bisection did not converge after {MAX_BISECTION_STEPS} steps",
                {"lambda": lam, "log_mu_bracket": [log_lo, log_hi], "spend_bracket": [spend_lo, spend_hi]},
            )

    nodes, weights, powers = policy
    logger.info(f"Solved lambda={lam:g} at {params.snr_db:.3g} dB: log mu={log_mu:.6g}, average power {spend:.8g}")
    return PowerControlPolicy(
        lam=lam,
        log_mu=log_mu,
        gamma_nodes=nodes,
        gamma_weights=weights,
        powers=powers,
        params=params,
        grid=grid,
        log_base=log_base,
        diagnostics={"outer_steps": len(history), "spend": spend},
    )


def constant_policy(power: float, params: ChannelParams, grid: FadingGrid, lam: float = 0.0) -> PowerControlPolicy:
    """The same power in every fading state (no adaptation)"""
    if not math.isfinite(power) or power < 0:
        raise DomainError(f"power must be finite and non-negative, got {power}")
    return PowerControlPolicy(
        lam=_check_lambda(lam),
        log_mu=None,
        gamma_nodes=np.array(grid.gamma_nodes),
        gamma_weights=np.array(grid.gamma_weights),
        powers=np.full(grid.n_gamma, float(power)),
        params=params,
        grid=grid,
        label="constant",
    )


def sensing_rate_under_policy(policy: PowerControlPolicy) -> float:
    """E_Gamma_c{C_sense(P_Gamma_c)}; states below the cut-off have zero power and zero rate"""
    rates = sense_rate_at_powers(policy.powers, policy.params.sigma_s_sq, policy.grid)
    return math.fsum(policy.gamma_weights * rates)


def weighted_objective(policy: PowerControlPolicy, lam: Optional[float] = None) -> WeightedObjectiveResult:
    """C_lambda of the policy; `lam` overrides the policy's own weight for cross-comparisons"""
    lam = policy.lam if lam is None else _check_lambda(lam)
    r_comm = c_comm_csit(policy, policy.params.sigma_c_sq, policy.grid)
    r_sense = sensing_rate_under_policy(policy)
    return WeightedObjectiveResult(
        c_lambda=lam * r_comm + (1.0 - lam) * r_sense,
        r_comm=r_comm,
        r_sense=r_sense,
    )


def policy_curve(policy: PowerControlPolicy, gammas: np.ndarray) -> np.ndarray:
    """Policy power at arbitrary gamma_c values (reporting grid), via fresh inversions"""
    gammas = np.asarray(gammas, dtype=float)
    if policy.log_mu is None:
        return np.full(gammas.shape, float(policy.powers[0]))
    return np.atleast_1d(
        invert_g(policy.lam, gammas, None, policy.params, policy.grid, log_base=policy.log_base, log_mu=policy.log_mu)
    )


def cutoff_gain(policy: PowerControlPolicy) -> float:
    """Largest gamma_c that receives no power, from g_at_zero(gamma_c) = mu"""
    if policy.log_mu is None:
        return 0.0
    log_cutoff = log_cutoff_gain(policy.lam, policy.log_mu, policy.params, policy.grid, policy.log_base)
    if log_cutoff == -math.inf:
        return 0.0
    return math.exp(log_cutoff)


def kkt_residuals(policy: PowerControlPolicy) -> Dict[str, float]:
    """Relative stationarity, complementary slackness and budget residuals of a solved policy"""
    if policy.log_mu is None:
        raise ContractViolationError("KKT residuals need a solved policy with a multiplier")

    log_mu = policy.log_mu
    params, grid = policy.params, policy.grid
    spending = policy.powers > 0

    stationarity = 0.0
    if np.any(spending):
        log_gains = _log_g(
            policy.lam, policy.gamma_nodes[spending], policy.powers[spending], params, grid, policy.log_base
        )
        stationarity = float(np.max(np.abs(np.expm1(log_gains - log_mu))))

    # idle states: the policy's own zero-power nodes plus the grid nodes below the cut-off
    cutoff = cutoff_gain(policy)
    idle = np.concatenate([policy.gamma_nodes[~spending], grid.gamma_nodes[grid.gamma_nodes <= cutoff]])
    slackness = 0.0
    if idle.size:
        log_limits = _log_g_at_zero(policy.lam, idle, params, grid, policy.log_base)
        slackness = float(max(0.0, np.max(np.expm1(log_limits - log_mu))))

    budget = params.power_budget
    return {
        "stationarity": stationarity,
        "slackness": slackness,
        "budget": (policy.average_power() - budget) / budget,
    }


def verify_kkt(
    policy: PowerControlPolicy,
    stationarity_tol: float = 1e-6,
    budget_tol: float = 1e-4,
) -> bool:
    residuals = kkt_residuals(policy)
    ok = (
        residuals["stationarity"] <= stationarity_tol
        and residuals["slackness"] <= stationarity_tol
        and -budget_tol <= residuals["budget"] <= 1e-6
    )
    if not ok:
        logger.warning(f"KKT check failed for lambda={policy.lam}: {residuals}")
    return ok
