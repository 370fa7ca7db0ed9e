"""Binary model container.

Layout (all integers little-endian)::

    offset  size  field
    0       4     magic b"MYOH"
    4       2     format version (uint16), currently 1
    6       4     header length H (uint32)
    10      H     header: UTF-8 JSON, sorted keys, no whitespace
    10+H    8*P   float64 payload, arrays concatenated row-major in header["arrays"] order
    end-4   4     CRC-32 of every preceding byte (uint32)

The header holds the class table, feature path and order tags, layer dims,
and (frequency models only) the bin selection. See docs/model_format.md.
"""
from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from .classifier import Network
from .features_fd import BinSelection

MAGIC = b"MYOH"
FORMAT_VERSION = 1
ARRAY_ORDER = ("norm_mean", "norm_scale", "w1", "b1", "w2", "b2")
_PREFIX = struct.Struct("<4sHI")


class ModelFormatError(ValueError):
    pass


class VersionMismatchError(ModelFormatError):
    pass


class ChecksumError(ModelFormatError):
    pass


class TruncatedModelError(ModelFormatError):
    pass


def _array_shapes(header: dict) -> dict[str, tuple[int, ...]]:
    d, h, k = header["input_dim"], header["hidden_dim"], header["n_classes"]
    return {"norm_mean": (d,), "norm_scale": (d,), "w1": (h, d), "b1": (h,), "w2": (k, h), "b2": (k,)}


def dumps(net: Network) -> bytes:
    header = {
        "arrays": list(ARRAY_ORDER),
        "class_names": list(net.class_names),
        "feature_order": net.feature_order,
        "feature_path": net.feature_path,
        "hidden_dim": net.hidden_dim,
        "input_dim": net.input_dim,
        "n_classes": net.n_classes,
    }
    if net.bin_selection is not None:
        sel = net.bin_selection
        header["bin_selection"] = {
            "indices": [list(row) for row in sel.indices],
            "n_bins": sel.n_bins,
            "source": sel.source,
        }
    hbytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    payload = b"".join(
        np.ascontiguousarray(getattr(net, name), dtype="<f8").tobytes() for name in ARRAY_ORDER
    )
    body = _PREFIX.pack(MAGIC, FORMAT_VERSION, len(hbytes)) + hbytes + payload
    return body + struct.pack("<I", zlib.crc32(body))


def loads(data: bytes) -> Network:
    if len(data) < _PREFIX.size + 4:
        raise TruncatedModelError("model file truncated: shorter than the fixed header")
    magic, version, hlen = _PREFIX.unpack_from(data, 0)
    if magic != MAGIC:
        raise ModelFormatError(f"not a model file (bad magic {magic!r}, expected {MAGIC!r}; format version {FORMAT_VERSION})")
    if version != FORMAT_VERSION:
        raise VersionMismatchError(f"unsupported model format version {version}, expected {FORMAT_VERSION}")
    hstart = _PREFIX.size
    if len(data) < hstart + hlen + 4:
        raise TruncatedModelError("model file truncated inside the header")
    try:
        header = json.loads(data[hstart:hstart + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"corrupt model header: {exc}") from None

    try:
        shapes = _array_shapes(header)
    except KeyError as exc:
        raise ModelFormatError(f"model header missing field {exc}") from None
    need = sum(int(np.prod(s)) for s in shapes.values()) * 8
    pstart = hstart + hlen
    if len(data) < pstart + need + 4:
        raise TruncatedModelError(
            f"model file truncated: payload needs {need} bytes, found {max(len(data) - pstart - 4, 0)}"
        )
    if len(data) != pstart + need + 4:
        raise ModelFormatError("trailing bytes after model payload")
    (crc,) = struct.unpack_from("<I", data, pstart + need)
    if crc != zlib.crc32(data[: pstart + need]):
        raise ChecksumError("model checksum mismatch: file is corrupt")

    arrays = {}
    off = pstart
    for name in header.get("arrays", ARRAY_ORDER):
        shape = shapes[name]
        count = int(np.prod(shape))
        arrays[name] = np.frombuffer(data, dtype="<f8", count=count, offset=off).astype(np.float64).reshape(shape)
        off += 8 * count

    selection = None
    if header.get("feature_path") == "fd":
        if "bin_selection" not in header:
            raise ModelFormatError("missing bin selection")
        bs = header["bin_selection"]
        selection = BinSelection(tuple(tuple(int(i) for i in row) for row in bs["indices"]),
                                 n_bins=int(bs["n_bins"]), source=bs.get("source", ""))
    return Network(
        feature_path=header["feature_path"],
        feature_order=header["feature_order"],
        class_names=tuple(header["class_names"]),
        bin_selection=selection,
        **arrays,
    )


def save_model(net: Network, path: str | Path) -> None:
    Path(path).write_bytes(dumps(net))


def load_model(path: str | Path) -> Network:
    return loads(Path(path).read_bytes())
