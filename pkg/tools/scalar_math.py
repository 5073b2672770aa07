"""
Scalar Math - Gaussian tail, entropies and the entropy derivative, all in log-stable form

Every function accepts a scalar or a numpy array and returns the same shape
(a Python float for scalar input). Entropies are in bits unless `log_base`
says otherwise.
"""

import math
from typing import Union

import numpy as np
from scipy import special

from utils.errors import DomainError

ArrayLike = Union[float, np.ndarray]

SQRT2 = math.sqrt(2.0)
LOG_HALF = math.log(0.5)

# Beyond this argument Q is evaluated through the scaled erfc to avoid underflow
SCALED_ERFC_THRESHOLD = 8.0


def _as_array(x: ArrayLike, name: str) -> np.ndarray:
    values = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(values)):
        raise DomainError(f"{name} must be finite, got {x!r}")
    return values


def _as_output(values: np.ndarray, like: ArrayLike) -> ArrayLike:
    if np.ndim(like) == 0:
        return float(np.asarray(values).reshape(-1)[0])
    return values


def _log_base(log_base: float) -> float:
    if not log_base > 0 or log_base == 1:
        raise DomainError(f"log_base must be positive and != 1, got {log_base}")
    return math.log(log_base)


def q_function(x: ArrayLike) -> ArrayLike:
    """P(N(0,1) > x)"""
    values = _as_array(x, "x")
    return _as_output(0.5 * special.erfc(values / SQRT2), x)


def log_q_function(x: ArrayLike) -> ArrayLike:
    """Natural log of Q(x), finite even where Q itself underflows"""
    values = np.atleast_1d(_as_array(x, "x"))
    result = np.empty_like(values)

    negative = values < 0
    tail = values > SCALED_ERFC_THRESHOLD
    middle = ~(negative | tail)

    # log(1 - Q(|x|)) for the left half
    result[negative] = np.log1p(-0.5 * special.erfc(-values[negative] / SQRT2))
    result[middle] = np.log(0.5 * special.erfc(values[middle] / SQRT2))

    scaled = values[tail] / SQRT2
    result[tail] = LOG_HALF + np.log(special.erfcx(scaled)) - scaled * scaled

    return _as_output(result.reshape(np.shape(x)), x)


def binary_entropy(p: ArrayLike, log_base: float = 2.0) -> ArrayLike:
    """H_b(p) with the 0 log 0 = 0 convention"""
    values = _as_array(p, "p")
    if np.any((values < 0) | (values > 1)):
        raise DomainError(f"binary_entropy needs p in [0, 1], got {p!r}")
    result = (special.entr(values) + special.entr(1.0 - values)) / _log_base(log_base)
    return _as_output(result, p)


def xi(x: ArrayLike, log_base: float = 2.0) -> ArrayLike:
    """-x log x with xi(0) = 0"""
    values = _as_array(x, "x")
    if np.any((values < 0) | (values > 1)):
        raise DomainError(f"xi needs x in [0, 1], got {x!r}")
    return _as_output(special.entr(values) / _log_base(log_base), x)


def entropy_hb_q(k: ArrayLike, beta: ArrayLike, log_base: float = 2.0) -> ArrayLike:
    """H_b(Q(sqrt(k * beta))) evaluated through log Q"""
    k_values = _as_array(k, "k")
    beta_values = _as_array(beta, "beta")
    if np.any(k_values < 0) or np.any(beta_values < 0):
        raise DomainError("entropy_hb_q needs k >= 0 and beta >= 0")

    argument = np.sqrt(k_values * beta_values)
    log_q = np.asarray(log_q_function(argument))
    q = np.exp(log_q)

    # 0 * log 0 terms vanish once q underflows
    entropy = -(q * log_q + (1.0 - q) * np.log1p(-q)) / _log_base(log_base)

    like = k if np.ndim(k) > 0 else beta
    return _as_output(np.broadcast_to(entropy, argument.shape).copy(), like)


def _log_odds(argument: np.ndarray) -> np.ndarray:
    """log((1 - Q(s)) / Q(s)) for s > 0 without cancellation at either end"""
    flat = np.atleast_1d(argument)
    result = np.empty_like(flat)
    small = flat <= SCALED_ERFC_THRESHOLD

    s = flat[small]
    result[small] = np.log1p(special.erf(s / SQRT2) / (0.5 * special.erfc(s / SQRT2)))

    log_q = np.asarray(log_q_function(flat[~small]))
    result[~small] = np.log1p(-np.exp(log_q)) - log_q
    return result.reshape(np.shape(argument))


def log_d_magnitude(k: ArrayLike, beta: ArrayLike, log_base: float = 2.0) -> ArrayLike:
    """
    Natural log of |D(k, beta)|.

    Finite for every k, beta > 0, including the range where D itself underflows.
    """
    k_values = _as_array(k, "k")
    beta_values = _as_array(beta, "beta")
    if np.any(k_values <= 0) or np.any(beta_values <= 0):
        raise DomainError("D needs k > 0 and beta > 0; use d_derivative_at_zero for the limit")

    k_values, beta_values = np.broadcast_arrays(k_values, beta_values)
    product = k_values * beta_values
    log_odds = _log_odds(np.sqrt(product))

    with np.errstate(divide="ignore"):
        log_magnitude = (
            0.5 * (np.log(k_values) - np.log(8.0 * math.pi) - np.log(beta_values))
            - 0.5 * product
            + np.log(log_odds)
            - math.log(abs(_log_base(log_base)))
        )

    like = k if np.ndim(k) > 0 else beta
    return _as_output(log_magnitude, like)


def d_derivative(k: ArrayLike, beta: ArrayLike, log_base: float = 2.0) -> ArrayLike:
    """
    D(k, beta), the beta-derivative of H_b(Q(sqrt(k beta))).

    Evaluated as -exp(log|D|); once k*beta passes roughly 1500 the magnitude
    underflows and the result is -0.0. Use log_d_magnitude past that point.
    """
    derivative = -math.copysign(1.0, _log_base(log_base)) * np.exp(np.asarray(log_d_magnitude(k, beta, log_base)))
    like = k if np.ndim(k) > 0 else beta
    return _as_output(derivative, like)


def d_derivative_at_zero(k: ArrayLike, log_base: float = 2.0) -> ArrayLike:
    """Limit of D(k, beta) as beta -> 0+, i.e. -k / (pi ln b)"""
    k_values = _as_array(k, "k")
    if np.any(k_values < 0):
        raise DomainError("d_derivative_at_zero needs k >= 0")
    return _as_output(-k_values / (math.pi * _log_base(log_base)), k)
