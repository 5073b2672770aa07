"""
Capacity Study - CSIR capacity region corner (C_comm, C_sense) over an SNR sweep
"""

from typing import Any, Dict, List

from studies.base_study import BaseStudy
from tools.information import CapacityRecord, capacity_record
from utils.pool import gather_bounded
from utils.logger import setup_logger

logger = setup_logger(__name__)


class CapacityStudy(BaseStudy):
    name = "capacity"
    headers = ["snr_db", "C_comm", "C_sense"]

    def _record_at(self, power: float) -> CapacityRecord:
        return capacity_record(power, self.base_params(power), self.grid)

    async def execute(self) -> Dict[str, Any]:
        powers = [self.config.power_for_snr(snr) for snr in self.config.snr_values()]
        if self.config.include_zero_power:
            powers.insert(0, 0.0)
        logger.info(f"Sweeping {len(powers)} power levels")

        records = await gather_bounded(self._record_at, powers, self.config.threads)

        rows: List[Dict[str, Any]] = []
        for record in sorted(records, key=lambda r: r.power):
            row = {"snr_db": record.snr_db}
            row.update(record.to_dict())
            rows.append(row)

        return {"rows": rows}
