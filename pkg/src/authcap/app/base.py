import json
import logging
import math
import sys
from abc import ABC, abstractmethod
from datetime import datetime
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from app.config import RunConfig
from app.errors import AuthcapError

SIGNIFICANT = 12


def rounded(value: Any) -> Any:
    """Payload with floats cut to 12 significant digits and exact values as strings."""
    if isinstance(value, dict):
        return {str(k): rounded(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [rounded(v) for v in value]
    if isinstance(value, np.ndarray):
        return rounded(value.tolist())
    if isinstance(value, np.generic):
        return rounded(value.item())
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            return str(value)
        return float(f"{value:.{SIGNIFICANT}g}")
    return value


def json_text(payload: Any) -> str:
    return json.dumps(rounded(payload), sort_keys=True, indent=2) + "\n"


def csv_text(rows: list[dict], columns: list[str]) -> str:
    frame = pd.DataFrame(rows, columns=columns)
    return frame.to_csv(float_format=f"%.{SIGNIFICANT}g", index=False, lineterminator="\n")


# ==============================================================================
# LAYER 1: BaseCommand - session bookkeeping for every subcommand
# ==============================================================================

class BaseCommand(ABC):
    """
    One subcommand run: compute a result, render it, write it out.

    Subclasses supply ``compute`` and the two renderers; ``run`` owns the
    session statistics and error tracking.
    """

    def __init__(self, command_id: str, config: RunConfig):
        self.command_id = command_id
        self.config = config
        self.logger = logging.getLogger(f"authcap.{command_id}")
        self.reset_stats()

    def _track_error(self, error_type: str, message: str, context: str = ""):
        error_record = {
            'type': error_type,
            'message': message,
            'context': context,
            'timestamp': datetime.now().isoformat(),
        }
        self.stats['errors'].append(error_record)
        self.logger.error(f"{error_type}: {message} {context}".rstrip())

    def start_session(self):
        self.stats['session_start'] = datetime.now()
        self.logger.info(f"Starting {self.command_id}", extra={"command": self.command_id, "seed": self.config.seed})

    def end_session(self):
        self.stats['session_end'] = datetime.now()
        elapsed = (self.stats['session_end'] - self.stats['session_start']).total_seconds()
        self.logger.info(f"{self.command_id} finished in {elapsed:.2f}s: {self.stats['items_computed']} items, "
                         f"{len(self.stats['errors'])} errors")

    def get_stats(self) -> dict[str, Any]:
        return {**self.stats}

    def reset_stats(self):
        self.stats = {
            'items_computed': 0,
            'bytes_written': 0,
            'errors': [],
            'session_start': None,
            'session_end': None,
        }

    # =========================================================================
    # Abstract methods - MUST be implemented by all commands
    # =========================================================================

    @abstractmethod
    def compute(self) -> Any:
        pass

    @abstractmethod
    def render_json(self, result: Any) -> dict:
        pass

    @abstractmethod
    def render_csv(self, result: Any) -> str:
        pass

    def after_write(self, result: Any) -> None:
        """Side outputs such as plots."""

    # =========================================================================
    # High-level workflow
    # =========================================================================

    def emit(self, text: str) -> None:
        if self.config.output:
            path = Path(self.config.output)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
            self.logger.info(f"Wrote {path}")
        else:
            sys.stdout.write(text)
        self.stats['bytes_written'] += len(text.encode())

    def run(self) -> Any:
        self.start_session()
        try:
            result = self.compute()
            if self.config.format == "csv":
                text = self.render_csv(result)
            else:
                text = json_text(self.render_json(result))
            self.emit(text)
            self.after_write(result)
            return result
        except AuthcapError as e:
            self._track_error(type(e).__name__, str(e), self.command_id)
            raise
        finally:
            self.end_session()
