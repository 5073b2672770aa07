"""
Power Control Study - optimal CSIT policy curves per lambda, with mu, cut-off and KKT residuals
"""

from typing import Any, Dict, List

import numpy as np

from studies.base_study import BaseStudy
from tools.power_control import PowerControlPolicy, cutoff_gain, kkt_residuals, policy_curve, solve_mu, verify_kkt
from utils.pool import gather_bounded
from utils.logger import setup_logger

logger = setup_logger(__name__)


class PowerControlStudy(BaseStudy):
    name = "power-control"
    headers = ["lambda", "gamma_c", "power"]

    def _solve(self, lam: float) -> PowerControlPolicy:
        return solve_mu(lam, self.base_params(), self.grid)

    def _summarize(self, policy: PowerControlPolicy) -> Dict[str, Any]:
        residuals = kkt_residuals(policy)
        return {
            "lambda": policy.lam,
            "mu": policy.mu,
            "log_mu": policy.log_mu,
            "snr_db": policy.params.snr_db,
            "cutoff_gamma_c": cutoff_gain(policy),
            "average_power": policy.average_power(),
            "kkt": residuals,
            "kkt_ok": verify_kkt(policy),
        }

    async def execute(self) -> Dict[str, Any]:
        lambdas = list(self.config.lambdas)
        gammas = np.array(self.config.gamma_values())
        logger.info(f"Solving {len(lambdas)} policies at P={self.config.power:g} on {gammas.size} reporting points")

        policies = await gather_bounded(self._solve, lambdas, self.config.threads)

        rows: List[Dict[str, Any]] = []
        policy_records: List[Dict[str, Any]] = []
        for policy in policies:
            curve = policy_curve(policy, gammas)
            rows.extend(
                {"lambda": policy.lam, "gamma_c": float(gamma), "power": float(power)}
                for gamma, power in zip(gammas, curve)
            )
            record = self._summarize(policy)
            if not record["kkt_ok"]:
                logger.warning(f"lambda={policy.lam:g} policy does not meet the KKT tolerances: {record['kkt']}")
            policy_records.append(record)

        return {"rows": rows, "sidecar": {"config": self.config.to_dict(), "policies": policy_records}}
