"""
MI Study - CMI and SMI of a user constellation against the CSIR closed forms
"""

from typing import Any, Dict

from studies.base_study import BaseStudy
from tools.distributions import average_power, is_pi2_symmetric, load_constellation
from tools.information import c_comm_closed_form, c_sense_closed_form, cmi, smi
from utils.logger import setup_logger

logger = setup_logger(__name__)


class MutualInformationStudy(BaseStudy):
    name = "mi"
    headers = [
        "avg_power", "is_symmetric", "cmi", "smi",
        "C_comm", "C_sense", "cmi_gap", "smi_gap",
    ]

    async def execute(self) -> Dict[str, Any]:
        input_dist = load_constellation(self.config.constellation)
        power = average_power(input_dist)
        symmetric = is_pi2_symmetric(input_dist)
        logger.info(f"{input_dist.size}-point constellation, average power {power:.6g}, pi/2-symmetric: {symmetric}")

        comm = cmi(input_dist, self.grid, self.config.sigma_c_sq)
        sense = smi(input_dist, self.grid, self.config.sigma_s_sq)
        c_comm = c_comm_closed_form(power, self.config.sigma_c_sq, self.grid)
        c_sense = c_sense_closed_form(power, self.config.sigma_s_sq, self.grid)

        report = {
            "avg_power": power,
            "is_symmetric": symmetric,
            "cmi": comm.value,
            "smi": sense.value,
            "C_comm": c_comm,
            "C_sense": c_sense,
            "cmi_gap": c_comm - comm.value,
            "smi_gap": c_sense - sense.value,
            "cmi_terms": comm.to_dict(),
            "smi_terms": sense.to_dict(),
            "constellation": input_dist.to_json_dict(),
        }
        if not symmetric and report["cmi_gap"] > 1e-4:
            logger.info(f"Input is not pi/2-symmetric; CMI falls {report['cmi_gap']:.6g} bits short of capacity")

        return {"rows": [report], "report": report}
