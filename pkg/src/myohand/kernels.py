"""Backend selection for the window kernels.

The compiled extension is used when it imports; otherwise the numpy fallback.
Set ``MYOHAND_BACKEND`` to ``python`` or ``cython`` to force one.
"""
import logging
import os
from types import ModuleType

from . import _pykernels

log = logging.getLogger(__name__)

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def available_backends() -> dict[str, ModuleType]:
    out = {"python": _pykernels}
    if _ckernels is not None:
        out["cython"] = _ckernels
    return out


def get_backend(name: str | None = None) -> ModuleType:
    backends = available_backends()
    if name is None:
        return _ckernels if _ckernels is not None else _pykernels
    try:
        return backends[name]
    except KeyError:
        raise ValueError(
            f"kernel backend {name!r} unavailable; have {sorted(backends)}"
        ) from None


_requested = os.environ.get("MYOHAND_BACKEND") or None
if _requested is not None and _requested not in available_backends():
    log.warning("MYOHAND_BACKEND=%s unavailable, using default backend", _requested)
    _requested = None

backend = get_backend(_requested)
BACKEND = backend.NAME

fft_batch = backend.fft_batch
power_spectrum_batch = backend.power_spectrum_batch
window_stats_batch = backend.window_stats_batch
td_features_batch = backend.td_features_batch
