"""
Interfaces for densities and scan-cell workers.
"""

from __future__ import annotations

from typing import Any, Dict, Protocol

import numpy as np


class DensityFunction(Protocol):
    """Nonnegative density on [0, 1), evaluated elementwise on arrays.

    Implementations must be safe for concurrent evaluation; module-level
    classes (rather than lambdas) keep them picklable for worker processes.
    """

    def __call__(self, t: np.ndarray) -> np.ndarray: ...


class CellWorker(Protocol):
    """Evaluate one independent scan cell described by a plain task dict."""

    def __call__(self, task: Dict[str, Any]) -> Any: ...
