import json
import logging
import math
from datetime import datetime, timezone
try:
    from typing import override
except ImportError:  # Python < 3.12
    from typing_extensions import override

# Attributes every LogRecord carries; anything else arrived through ``extra=``.
_RECORD_ATTRS = frozenset(vars(logging.LogRecord("", 0, "", 0, "", (), None))) | {"message", "asctime", "taskName"}


def _plain(value):
    """inf and nan are not JSON; log them as strings."""
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


class JsonLogFormatter(logging.Formatter):
    """
    One JSON object per record.

    ``fmt_keys`` maps output keys to record attributes; values passed through
    ``extra=`` (command name, seed, grid sizes) are appended under their own keys.
    """

    def __init__(self, *, fmt_keys: dict[str, str] | None = None):
        super().__init__()
        self.fmt_keys = fmt_keys if fmt_keys is not None else {}

    @override
    def format(self, record: logging.LogRecord) -> str:
        message = self._prepare_log_dict(record)
        return json.dumps(message, default=str, sort_keys=False)

    def _prepare_log_dict(self, record: logging.LogRecord) -> dict:
        base_fields = {
            "message": record.getMessage(),
            "timestamp": datetime.fromtimestamp(record.created, tz=timezone.utc).isoformat(),
        }
        if record.exc_info is not None:
            base_fields["exc_info"] = self.formatException(record.exc_info)
        if record.stack_info is not None:
            base_fields["stack_info"] = self.formatStack(record.stack_info)
        message = {
            key: msg_val
            if (msg_val := base_fields.pop(val, None)) is not None
            else getattr(record, val)
            for key, val in self.fmt_keys.items()
        }
        message.update(base_fields)

        for key, value in vars(record).items():
            if key not in _RECORD_ATTRS and key not in message:
                message[key] = _plain(value)
        return message
