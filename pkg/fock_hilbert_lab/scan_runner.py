"""
Ordered execution of independent scan cells.

Each cell is a plain task dict handed to a module-level worker function. With
``jobs > 1`` the cells run in a spawn-context ProcessPoolExecutor; results are
always placed by task index, so the assembled report is identical for any
worker count.
"""

from __future__ import annotations

import logging
import multiprocessing
import pickle
import sys
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Any, Dict, List, Optional, Sequence

from tqdm import tqdm

from .interfaces import CellWorker

logger = logging.getLogger(__name__)

PACKAGE_LOGGER = "fock_hilbert_lab"


def _init_worker_process(log_file_str: Optional[str], level: int) -> None:
    """Recreate the package log handlers inside a spawned worker."""
    _wlogger = logging.getLogger(PACKAGE_LOGGER)
    _wlogger.propagate = False
    _wlogger.setLevel(logging.DEBUG)
    if not _wlogger.handlers:
        _sh = logging.StreamHandler()
        _sh.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
        _sh.setLevel(level)
        _wlogger.addHandler(_sh)
        if log_file_str:
            _fh = logging.FileHandler(log_file_str, encoding="utf-8")
            _fh.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
            _fh.setLevel(logging.DEBUG)
            _wlogger.addHandler(_fh)


def _picklable(obj: Any) -> bool:
    try:
        pickle.dumps(obj)
    except (pickle.PicklingError, AttributeError, TypeError):
        return False
    return True


def _console_level() -> int:
    for handler in logging.getLogger(PACKAGE_LOGGER).handlers:
        if isinstance(handler, logging.FileHandler):
            continue
        if isinstance(handler, logging.StreamHandler):
            return handler.level
    return logging.WARNING


def _log_file() -> Optional[str]:
    for handler in logging.getLogger(PACKAGE_LOGGER).handlers:
        if isinstance(handler, logging.FileHandler):
            return handler.baseFilename
    return None


def run_cells(
    worker: CellWorker,
    tasks: Sequence[Dict[str, Any]],
    jobs: int = 1,
    desc: str = "cells",
) -> List[Any]:
    """Evaluate ``worker(task)`` for every task and return the results in task order."""
    tasks = list(tasks)
    results: List[Any] = [None] * len(tasks)
    show_progress = sys.stderr.isatty()

    parallel = jobs > 1 and len(tasks) > 1
    if parallel and not (_picklable(worker) and all(_picklable(task) for task in tasks)):
        logger.warning("%s: tasks cannot be sent to worker processes; running serially", desc)
        parallel = False

    if not parallel:
        progress = tqdm(tasks, desc=desc, disable=not show_progress, file=sys.stderr)
        for index, task in enumerate(progress):
            results[index] = worker(task)
        return results

    worker_count = min(jobs, len(tasks))
    logger.debug("%s: %d cells on %d worker processes", desc, len(tasks), worker_count)
    _mp_ctx = multiprocessing.get_context("spawn")
    with ProcessPoolExecutor(
        max_workers=worker_count,
        mp_context=_mp_ctx,
        initializer=_init_worker_process,
        initargs=(_log_file(), _console_level()),
    ) as executor:
        future_to_index = {executor.submit(worker, task): index for index, task in enumerate(tasks)}
        with tqdm(total=len(tasks), desc=desc, disable=not show_progress, file=sys.stderr) as pbar:
            for future in as_completed(future_to_index):
                results[future_to_index[future]] = future.result()
                pbar.update(1)
    return results
