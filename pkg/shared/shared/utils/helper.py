import os
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path
from typing import TypeVar

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "AUTHCAP_THREADS"


def project_path(folders: list[str] | None = None) -> Path:
    """
    Path inside the authcap workspace root.

    The root is the first parent holding both ``shared/`` and ``pyproject.toml``;
    an installed copy without a checkout falls back to the working directory.

    :param folders: path components appended to the root
    :type folders: list[str] | None
    :rtype: Path
    """
    current_dir = Path(__file__).resolve()
    root_dir = next(
        (p for p in current_dir.parents
         if (p / "shared").is_dir() and (p / "pyproject.toml").is_file()),
        Path.cwd(),
    )

    if folders:
        root_dir = root_dir.joinpath(*folders)

    return root_dir


def utc_now():
    return datetime.now(timezone.utc).isoformat(timespec='seconds')


def thread_count(requested: int | None = None) -> int:
    """Worker count: the explicit request, else ``AUTHCAP_THREADS``, else 1."""
    if requested is None:
        raw = os.getenv(THREADS_ENV, "1")
        try:
            requested = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    return max(1, requested)


def ordered_map(fn: Callable[[T], R], items: Iterable[T],
                threads: int | None = None) -> list[R]:
    """
    Apply ``fn`` to every item, possibly on a thread pool.

    Results come back in input order whatever the completion order, so a
    reduction over them does not depend on the worker count.
    """
    items = list(items)
    workers = min(thread_count(threads), max(1, len(items)))
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


if __name__ == "__main__":
    print(utc_now())
