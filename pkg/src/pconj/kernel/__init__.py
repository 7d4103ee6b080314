"""Monte Carlo kernel with compiled and pure-Python backends.

The compiled backend is used when its extension module is importable;
otherwise the pure-Python twin takes over with identical, bit for bit,
results.  ``BACKEND`` names the one in use; both stay importable as
``_fast`` (when built) and ``_pure`` for the benchmark and the
equivalence tests.
"""
from __future__ import annotations

from . import _pure

try:
    from . import _fast  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - depends on build environment
    _fast = None

if _fast is not None:
    run_chunk = _fast.run_chunk
    BACKEND = "fast"
else:
    run_chunk = _pure.run_chunk
    BACKEND = "pure"

CODE_FISHER = _pure.CODE_FISHER
CODE_STOUFFER = _pure.CODE_STOUFFER
CODE_MINIMUM = _pure.CODE_MINIMUM
CODE_BONFERRONI = _pure.CODE_BONFERRONI
CODE_E_PRODUCT = _pure.CODE_E_PRODUCT
CODE_E_ARITHMETIC = _pure.CODE_E_ARITHMETIC
CODE_E_HARMONIC = _pure.CODE_E_HARMONIC

__all__ = ["run_chunk", "BACKEND", "available_backends"]


def available_backends() -> dict[str, object]:
    """Mapping of backend name to its run_chunk callable."""
    out = {"pure": _pure.run_chunk}
    if _fast is not None:
        out["fast"] = _fast.run_chunk
    return out
