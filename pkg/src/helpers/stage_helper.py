from abc import ABC, abstractmethod
import csv
import logging
import os
import time
from typing import Any, Dict, List, Optional

from src.helpers.config_helpers import PipelineConfig
from src.helpers.enums import PipelineStage
from src.helpers.errors import ReportError

logger = logging.getLogger(__name__)


class TimedStage(ABC):
    """
    One command of the pipeline. Subclasses implement `execute`; `run` creates
    the output directory and records the stage wallclock in `self.wallclock`.
    """

    stage: PipelineStage

    def __init__(self, config: PipelineConfig, wallclock: Optional[Dict[str, float]] = None):
        self.config = config
        self.out_dir = config.out_dir
        self.wallclock = wallclock if wallclock is not None else {}

    def path(self, file_name: str) -> str:
        return os.path.join(self.out_dir, file_name)

    def save_results(self, file_name: str, header: List[str], rows: List[List[Any]]) -> str:
        temp_result = self.path(file_name)
        try:
            with open(temp_result, "w", newline="") as f:
                w = csv.writer(f, lineterminator="\n")
                w.writerow(header)
                w.writerows(rows)
        except OSError as err:
            raise ReportError(err.strerror or "write failed", temp_result) from err
        logger.info(f"Results written to {temp_result}")
        return temp_result

    @abstractmethod
    def execute(self):
        pass

    def run(self) -> Dict[str, float]:
        os.makedirs(self.out_dir, exist_ok=True)
        t0 = time.perf_counter()
        self.execute()
        self.wallclock[self.stage.value] = time.perf_counter() - t0
        logger.info(f"Stage {self.stage.value} finished in {self.wallclock[self.stage.value]:.3f} s")
        return self.wallclock
