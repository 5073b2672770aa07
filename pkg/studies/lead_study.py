"""
Lead Study - dispatches a run configuration to the study for its subcommand
"""

from typing import Any, Dict, Type

from studies.base_study import BaseStudy
from studies.capacity_study import CapacityStudy
from studies.mi_study import MutualInformationStudy
from studies.power_control_study import PowerControlStudy
from studies.rates_study import RatesStudy
from studies.simulation_study import SimulationStudy
from utils.config import RunConfig
from utils.logger import setup_logger

logger = setup_logger(__name__)

STUDIES: Dict[str, Type[BaseStudy]] = {
    "capacity": CapacityStudy,
    "mi": MutualInformationStudy,
    "power-control": PowerControlStudy,
    "rates": RatesStudy,
    "simulate": SimulationStudy,
}


class LeadStudy:
    def __init__(self):
        self.active = None

    async def initialize(self):
        logger.info("Initializing lead study")

    async def process_request(self, config: RunConfig) -> Dict[str, Any]:
        study_cls = STUDIES[config.command]
        self.active = study_cls(config)
        await self.active.initialize()
        try:
            result = await self.active.run()
        finally:
            await self.active.cleanup()
            self.active = None
        result["command"] = config.command
        return result

    async def cleanup(self):
        if self.active:
            await self.active.cleanup()
