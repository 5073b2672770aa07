"""
Bounded worker pool for sweeps - asyncio semaphore around threads, results in input order
"""

import asyncio
from typing import Callable, Iterable, List, TypeVar

from utils.logger import setup_logger

logger = setup_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")


async def gather_bounded(func: Callable[[T], R], items: Iterable[T], max_workers: int) -> List[R]:
    """Run func over items on at most max_workers threads; output order matches input order"""
    items = list(items)
    semaphore = asyncio.Semaphore(max(1, max_workers))
    logger.debug(f"Dispatching {len(items)} sweep points on {max_workers} workers")

    async def run_one(item: T) -> R:
        async with semaphore:
            return await asyncio.to_thread(func, item)

    return list(await asyncio.gather(*(run_one(item) for item in items)))
