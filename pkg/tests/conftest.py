"""Shared pytest fixtures for scan and CLI tests."""

import logging
from concurrent.futures import ThreadPoolExecutor
from unittest.mock import patch

import pytest


class _InProcessExecutor(ThreadPoolExecutor):
    """Thread-based replacement for ProcessPoolExecutor used in scan tests.

    Runs cell workers in threads within the same process so that
    unittest.mock patches applied before a scan are visible to workers.
    Accepts ProcessPoolExecutor's keyword arguments; mp_context is ignored.
    """

    def __init__(self, max_workers=None, mp_context=None, initializer=None, initargs=()):
        super().__init__(max_workers=max_workers, initializer=initializer, initargs=initargs)


@pytest.fixture
def in_process_executor():
    """Replace ProcessPoolExecutor with a thread executor for the duration of a test."""
    with patch("fock_hilbert_lab.scan_runner.ProcessPoolExecutor", _InProcessExecutor):
        yield


@pytest.fixture(autouse=True)
def cleanup_fhl_logger():
    """Reset the 'fock_hilbert_lab' logger between tests."""
    yield
    pkg_logger = logging.getLogger("fock_hilbert_lab")
    for handler in pkg_logger.handlers:
        handler.close()
    pkg_logger.handlers.clear()
    pkg_logger.propagate = True
    pkg_logger.setLevel(logging.NOTSET)
