import json
import logging
import math
import threading
import time

import pytest

from shared.utils.helper import THREADS_ENV, ordered_map, thread_count
from shared.utils.log_setup import setup_logging
from shared.utils.logging import JsonLogFormatter


def make_record(**extra) -> logging.LogRecord:
    record = logging.LogRecord("authcap.test", logging.INFO, __file__, 12, "value %s", (3,), None)
    for key, value in extra.items():
        setattr(record, key, value)
    return record


class TestJsonLogFormatter:

    def test_mapped_keys(self):
        formatter = JsonLogFormatter(fmt_keys={"level": "levelname", "logger": "name", "message": "message"})
        payload = json.loads(formatter.format(make_record()))
        assert payload["level"] == "INFO"
        assert payload["logger"] == "authcap.test"
        assert payload["message"] == "value 3"
        assert "timestamp" in payload

    def test_extras_are_appended(self):
        payload = json.loads(JsonLogFormatter().format(make_record(command="sweep", seed=7)))
        assert payload["command"] == "sweep"
        assert payload["seed"] == 7

    def test_non_finite_extras_stay_valid_json(self):
        text = JsonLogFormatter().format(make_record(value=math.inf))
        assert json.loads(text)["value"] == "inf"

    def test_standard_attributes_are_not_repeated(self):
        payload = json.loads(JsonLogFormatter().format(make_record()))
        assert "lineno" not in payload
        assert "args" not in payload


class TestSetupLogging:

    def test_writes_json_lines(self, tmp_path):
        logger = setup_logging("authcap.test")
        logger.info("hello", extra={"command": "region"})
        for handler in logging.getLogger().handlers:
            handler.flush()
        lines = (tmp_path / "logs" / "authcap.jsonl").read_text().splitlines()
        record = json.loads(lines[-1])
        assert record["message"] == "hello"
        assert record["command"] == "region"

    def test_missing_config(self):
        with pytest.raises(FileNotFoundError):
            setup_logging(config_name="absent.json")


class TestThreads:

    def test_explicit_request_wins(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "6")
        assert thread_count(2) == 2

    def test_environment_fallback(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "6")
        assert thread_count() == 6

    def test_default_is_one(self):
        assert thread_count() == 1

    def test_bad_environment_value(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "many")
        with pytest.raises(ValueError):
            thread_count()

    def test_ordered_map_keeps_input_order(self):
        def slow_square(x: int) -> tuple[int, str]:
            time.sleep(0.001 * (10 - x))
            return x * x, threading.current_thread().name

        results = ordered_map(slow_square, range(10), threads=4)
        assert [value for value, _ in results] == [x * x for x in range(10)]

    def test_ordered_map_empty(self):
        assert ordered_map(lambda x: x, [], threads=4) == []
