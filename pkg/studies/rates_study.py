"""
Rates Study - CSIT rates of the optimal policy per (SNR, lambda) next to the CSIR capacities
"""

from typing import Any, Dict, List, Tuple

from studies.base_study import BaseStudy
from tools.information import capacity_region
from tools.power_control import solve_mu, weighted_objective
from utils.pool import gather_bounded
from utils.logger import setup_logger

logger = setup_logger(__name__)


class RatesStudy(BaseStudy):
    name = "rates"
    headers = ["snr_db", "lambda", "R_c_csit", "R_s", "C_comm_csir", "C_sense_csir"]

    def _rates_at(self, point: Tuple[float, float]) -> Dict[str, Any]:
        snr_db, lam = point
        params = self.base_params(self.config.power_for_snr(snr_db))
        policy = solve_mu(lam, params, self.grid)
        objective = weighted_objective(policy)
        c_comm, c_sense = capacity_region(params.power_budget, params, self.grid)
        return {
            "snr_db": snr_db,
            "lambda": lam,
            "R_c_csit": objective.r_comm,
            "R_s": objective.r_sense,
            "C_comm_csir": c_comm,
            "C_sense_csir": c_sense,
            "C_lambda": objective.c_lambda,
            "mu": policy.mu,
            "log_mu": policy.log_mu,
        }

    async def execute(self) -> Dict[str, Any]:
        points = [(snr, lam) for snr in self.config.snr_values() for lam in sorted(self.config.lambdas)]
        logger.info(f"Solving {len(points)} (SNR, lambda) points")
        rows: List[Dict[str, Any]] = await gather_bounded(self._rates_at, points, self.config.threads)
        return {"rows": rows}
