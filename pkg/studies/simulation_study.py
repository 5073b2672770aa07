"""
Simulation Study - Monte-Carlo letter counts against the analytic channel law
"""

import math
from typing import Any, Dict, List, Tuple

from studies.base_study import BaseStudy
from tools.quantized_channel import chi_square_check, letter_probabilities, simulate
from utils.pool import gather_bounded
from utils.logger import setup_logger

logger = setup_logger(__name__)

# (x, h, sigma^2); the last case is effectively noiseless and lands on one letter
BATTERY: List[Tuple[complex, complex, float]] = [
    (1.0 + 0.0j, 1.0 + 0.0j, 1.0),
    (1.0 + 1.0j, 1.0 + 0.0j, 1.0),
    (1j, 0.7 - 0.4j, 1.0),
    (-0.6 + 0.8j, 1.0 + 0.0j, 0.5),
    (2.0 + 0.0j, -1.2 + 0.5j, 4.0),
    (0.3 + 0.0j, 0.1j, 1.0),
    ((1.0 + 1.0j) / math.sqrt(2.0), 0.5 + 0.5j, 0.1),
    (-1.0 - 1.0j, 0.9 - 0.2j, 2.0),
    (0.0j, 1.0 + 0.0j, 1.0),
    (1.0 - 2.0j, 0.3 + 0.1j, 4.0),
    (3.0 + 0.0j, 1.0 + 0.0j, 0.01),
    (-0.2 + 0.1j, 1.5 - 1.5j, 0.25),
    (0.5 + 0.5j, -0.8 + 0.0j, 1.0),
    (1j, 1j, 0.2),
    (0.8 - 0.1j, 0.4 + 0.9j, 1.0),
    (-1.5 + 0.0j, 0.2 - 0.3j, 0.5),
    (1.0 + 0.0j, 0.05 + 0.0j, 1.0),
    (0.7 + 0.7j, 2.0 + 1.0j, 3.0),
    (-0.4 - 0.9j, -0.6 + 0.6j, 0.8),
    (1.0 + 0.0j, -1.0 - 1.0j, 1e-12),
]


class SimulationStudy(BaseStudy):
    name = "simulate"
    headers = ["case", "seed", "statistic", "p_value", "max_abs_z", "impossible_hits", "passed"]

    async def initialize(self):
        logger.info(f"Initializing {self.name} study")

    def _check_case(self, indexed: Tuple[int, Tuple[complex, complex, float]]) -> Dict[str, Any]:
        index, (x, h, sigma_sq) = indexed
        seed = self.config.seed + index
        counts = simulate(x, h, sigma_sq, self.config.samples, seed)
        probs = letter_probabilities(h * x, sigma_sq)
        check = chi_square_check(counts, probs)

        passed = (
            check["p_value"] >= self.config.alpha
            and check["max_abs_z"] <= self.config.z_max
            and check["impossible_hits"] == 0
        )
        if not passed:
            logger.warning(f"Case {index} (x={x}, h={h}, sigma^2={sigma_sq}) failed: p={check['p_value']:.3g}")

        return {
            "case": index,
            "seed": seed,
            "x": [x.real, x.imag],
            "h": [h.real, h.imag],
            "sigma_sq": sigma_sq,
            "counts": [int(c) for c in counts],
            "expected": [float(p) for p in probs],
            "statistic": check["statistic"],
            "p_value": check["p_value"],
            "z_scores": [float(z) for z in check["z_scores"]],
            "max_abs_z": check["max_abs_z"],
            "impossible_hits": check["impossible_hits"],
            "passed": passed,
        }

    async def execute(self) -> Dict[str, Any]:
        cases = [(i, (complex(x), complex(h), s)) for i, (x, h, s) in enumerate(BATTERY)]
        logger.info(f"Running {len(cases)} Monte-Carlo cases at n={self.config.samples}")
        rows = await gather_bounded(self._check_case, cases, self.config.threads)

        failed = [row["case"] for row in rows if not row["passed"]]
        result: Dict[str, Any] = {
            "rows": rows,
            "report": {
                "alpha": self.config.alpha,
                "z_max": self.config.z_max,
                "samples": self.config.samples,
                "passed": not failed,
                "failed_cases": failed,
                "cases": rows,
            },
        }
        if failed:
            result.update(
                success=False,
                error=f"{len(failed)} of {len(rows)} Monte-Carlo cases failed",
                error_type="acceptance_failure",
                exit_code=2,
            )
        return result
