"""
Base Study - shared lifecycle for the per-subcommand orchestrators
"""

import time
from typing import Any, Dict, List, Optional

from tools.distributions import FadingGrid, build_fading_grid
from tools.quantized_channel import ChannelParams
from utils.config import RunConfig
from utils.errors import OneBitIsacError, classify_error
from utils.logger import setup_logger

logger = setup_logger(__name__)


class BaseStudy:
    """initialize -> run -> cleanup; run() never raises, it returns a result dict"""

    name = "study"
    headers: List[str] = []

    def __init__(self, config: RunConfig):
        self.config = config
        self.grid: Optional[FadingGrid] = None

    async def initialize(self):
        logger.info(f"Initializing {self.name} study")
        self.grid = build_fading_grid(self.config.n_gamma, self.config.n_theta)

    def base_params(self, power: Optional[float] = None) -> ChannelParams:
        return ChannelParams(
            sigma_c_sq=self.config.sigma_c_sq,
            sigma_s_sq=self.config.sigma_s_sq,
            power_budget=self.config.power if power is None else power,
        )

    async def execute(self) -> Dict[str, Any]:
        raise NotImplementedError

    async def run(self) -> Dict[str, Any]:
        started = time.perf_counter()
        try:
            result = await self.execute()
        except OneBitIsacError as e:
            logger.error(f"{self.name} study failed: {e}")
            return e.to_dict()
        except Exception as e:
            logger.error(f"{self.name} study crashed: {e}", exc_info=True)
            return {"success": False, "error": str(e), "error_type": classify_error(e), "exit_code": 1}

        result.setdefault("success", True)
        result.setdefault("headers", self.headers)
        logger.info(f"{self.name} study finished in {time.perf_counter() - started:.2f}s")
        return result

    async def cleanup(self):
        self.grid = None
