"""File formats for waveforms, envelopes, bit streams and sync results.

Binary container: little-endian header ``b"PSSW"``, version (u16), sample
rate (f64), count (u64), then the payload. The payload is interleaved f64
(re, im) pairs for a waveform, ``count`` f64 values for an envelope, and for
a bit stream the bits packed 8 per byte LSB-first followed by ``count`` f64
comparator thresholds. Annotations and ground truth live in a JSON sidecar
next to the container (``<path>.json``).
"""

from __future__ import annotations

import csv
import json
import struct

import numpy as np

from .detectors import SyncResult
from .frontend import BitStream, Envelope
from .waveform import Annotation, IqWaveform

MAGIC = b"PSSW"
VERSION = 1
_HEADER = struct.Struct("<4sHdQ")
SYNC_COLUMNS = ("method", "nid2_true", "nid2_guess", "center", "error_us", "delay_us", "committed_at")


def _write_container(path, rate: float, count: int, payload: bytes, sidecar: dict) -> None:
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, float(rate), int(count)))
        fh.write(payload)
    with open(f"{path}.json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)


def _read_container(path, kind: str):
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, version, rate, count = _HEADER.unpack(head)
        if magic != MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        payload = fh.read()
    try:
        with open(f"{path}.json") as fh:
            sidecar = json.load(fh)
    except FileNotFoundError:
        sidecar = {}
    if sidecar.get("kind", kind) != kind:
        raise ValueError(f"{path}: holds a {sidecar['kind']}, not a {kind}")
    return rate, count, payload, sidecar


def _f64(payload: bytes, n: int, path) -> np.ndarray:
    if len(payload) < 8 * n:
        raise ValueError(f"{path}: payload shorter than header count")
    return np.frombuffer(payload[:8 * n], dtype="<f8").copy()


def write_waveform(path, wave: IqWaveform) -> None:
    iq = np.empty(2 * len(wave), dtype="<f8")
    iq[0::2] = wave.samples.real
    iq[1::2] = wave.samples.imag
    ann = [{"label": a.label, "start": a.start, "length": a.length} for a in wave.annotations]
    _write_container(path, wave.sample_rate_hz, len(wave), iq.tobytes(), {"kind": "waveform", "annotations": ann})


def read_waveform(path) -> IqWaveform:
    rate, count, payload, side = _read_container(path, "waveform")
    iq = _f64(payload, 2 * count, path)
    ann = tuple(Annotation(a["label"], int(a["start"]), int(a["length"])) for a in side.get("annotations", []))
    return IqWaveform(iq[0::2] + 1j * iq[1::2], rate, ann)


def write_envelope(path, env: Envelope) -> None:
    _write_container(path, env.sample_rate_hz, len(env), np.asarray(env.samples, "<f8").tobytes(),
                     {"kind": "envelope", "true_pss_centers": list(map(float, env.true_pss_centers))})


def read_envelope(path) -> Envelope:
    rate, count, payload, side = _read_container(path, "envelope")
    return Envelope(_f64(payload, count, path), rate, np.asarray(side.get("true_pss_centers", []), float))


def write_bits(path, bits: BitStream) -> None:
    packed = np.packbits(np.asarray(bits.bits, np.uint8), bitorder="little").tobytes()
    thr = np.asarray(bits.threshold_trace, "<f8").tobytes()
    _write_container(path, bits.sample_rate_hz, len(bits), packed + thr,
                     {"kind": "bits", "true_pss_centers": list(map(float, bits.true_pss_centers))})


def read_bits(path) -> BitStream:
    rate, count, payload, side = _read_container(path, "bits")
    nbytes = (count + 7) // 8
    if len(payload) < nbytes:
        raise ValueError(f"{path}: payload shorter than header count")
    b = np.unpackbits(np.frombuffer(payload[:nbytes], np.uint8), bitorder="little")[:count]
    thr = _f64(payload[nbytes:], count, path)
    return BitStream(b, rate, thr, np.asarray(side.get("true_pss_centers", []), float))


def write_csv_series(path, values) -> None:
    """``index,value`` text, one row per sample."""
    values = np.asarray(values)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("index", "value"))
        is_int = np.issubdtype(values.dtype, np.integer)
        for i, v in enumerate(values):
            w.writerow((i, int(v) if is_int else repr(float(v))))


def read_csv_series(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([float(r["value"]) for r in rows])


def sync_rows(res: SyncResult, nid2_true: int | None = None) -> list[dict]:
    errs, delays = res.errors_us, res.delays_us
    return [
        {"method": res.method, "nid2_true": nid2_true, "nid2_guess": d.nid2_guess, "center": d.center_index,
         "error_us": float(e), "delay_us": float(dl), "committed_at": d.commit_index}
        for d, e, dl in zip(res.detections, errs, delays)
    ]


def write_sync_results(path, results, nid2_true: int | None = None, fmt: str = "csv") -> None:
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    rows = [row for res in results for row in sync_rows(res, nid2_true)]
    with open(path, "w", newline="") as fh:
        if fmt == "json":
            json.dump(rows, fh, indent=2)
        else:
            w = csv.DictWriter(fh, fieldnames=SYNC_COLUMNS, lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
