"""Image loading, RR feature files and evaluation manifests."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .gsm import DIM, RRFeatureSet, SubbandFeatures, WeibullParams

FORMAT_VERSION = 1
LUMA_BT601 = np.array([0.299, 0.587, 0.114])
MANIFEST_COLUMNS = ("ref_path", "dist_path", "mos", "distortion_label")


class RRFormatError(ValueError):
    pass


class ManifestError(ValueError):
    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass(frozen=True)
class ManifestRow:
    ref_path: Path
    dist_path: Path
    mos: float
    distortion_label: str
    line: int = 0


def load_grayscale(path) -> np.ndarray:
    """Luminance plane in [0, 255] as float64; colour goes through BT.601 luma."""
    path = Path(path)
    try:
        with Image.open(path) as img:
            img.load()
            mode = img.mode
            if mode in ("L", "1"):
                return np.asarray(img.convert("L"), dtype=np.float64)
            if mode in ("I;16", "I;16B", "I;16L", "I"):
                arr = np.asarray(img, dtype=np.float64)
                peak = 65535.0 if mode.startswith("I;16") or arr.max() > 255 else 255.0
                return arr * (255.0 / peak)
            if mode == "F":
                return np.asarray(img, dtype=np.float64)
            rgb = np.asarray(img.convert("RGB"), dtype=np.float64)
    except (OSError, UnidentifiedImageError) as exc:
        raise OSError(f"cannot read image {path}: {exc}") from exc
    return rgb @ LUMA_BT601


def crop_to_transform_size(plane, levels: int = 2):
    """Center-crop to the largest size divisible by 4 * 2^(levels-1).

    Returns (cropped plane, (row_offset, col_offset)).
    """
    arr = np.asarray(plane)
    step = 4 * 2 ** (levels - 1)
    h, w = arr.shape[:2]
    if h < step or w < step:
        raise ValueError(f"image too small: {w}x{h}, need at least {step}x{step} for {levels} levels")
    nh, nw = h - h % step, w - w % step
    top, left = (h - nh) // 2, (w - nw) // 2
    return arr[top:top + nh, left:left + nw], (top, left)


def _num(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise RRFormatError(f"cannot serialize non-finite value {x}")
    return format(x, ".17g")


def dumps_rr(fs: RRFeatureSet) -> str:
    iu = np.triu_indices(DIM)
    blocks = []
    for f in fs.features:
        cov = ", ".join(_num(v) for v in np.asarray(f.cov)[iu])
        blocks.append(
            "    {\n"
            f'      "scale": {int(f.scale)},\n'
            f'      "orientation": {int(f.orientation)},\n'
            f'      "cov": [{cov}],\n'
            f'      "k": {_num(f.weibull.k)},\n'
            f'      "lambda": {_num(f.weibull.lam)},\n'
            f'      "dropped_zero_fraction": {_num(f.dropped_zero_fraction)}\n'
            "    }"
        )
    w, h = fs.image_dims
    return (
        "{\n"
        f'  "format_version": {int(fs.format_version)},\n'
        f'  "source_id": {json.dumps(fs.source_id)},\n'
        f'  "dims": {{"width": {int(w)}, "height": {int(h)}}},\n'
        f'  "levels": {int(fs.levels)},\n'
        '  "subbands": [\n' + ",\n".join(blocks) + "\n  ]\n}\n"
    )


def write_rr(fs: RRFeatureSet, path) -> None:
    Path(path).write_text(dumps_rr(fs), encoding="utf-8")


def _field(obj, name, where):
    if name not in obj:
        raise RRFormatError(f"{where}: missing field {name!r}")
    return obj[name]


def loads_rr(text: str) -> RRFeatureSet:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RRFormatError(f"malformed RR document: {exc}") from exc
    if not isinstance(doc, dict):
        raise RRFormatError("RR document must be a JSON object")
    version = _field(doc, "format_version", "document")
    if version != FORMAT_VERSION:
        raise RRFormatError(f"unsupported format_version {version!r}, expected {FORMAT_VERSION}")
    dims = _field(doc, "dims", "document")
    levels = int(doc.get("levels", 2))
    subbands = _field(doc, "subbands", "document")
    expected = [(s, o) for s in range(1, levels + 1) for o in (1, 2, 3)]
    try:
        got = [(int(sb["scale"]), int(sb["orientation"])) for sb in subbands]
    except (KeyError, TypeError, ValueError) as exc:
        raise RRFormatError(f"subband entry lacks a valid scale/orientation: {exc}") from exc
    missing = [key for key in expected if key not in got]
    if missing or len(got) != len(expected) or got != expected:
        detail = ", ".join(f"(scale={s}, orientation={o})" for s, o in missing)
        raise RRFormatError(
            f"expected {len(expected)} subbands in (scale, orientation) order; "
            + (f"missing {detail}" if missing else f"got {got}")
        )
    iu = np.triu_indices(DIM)
    features = []
    for sb, (scale, orient) in zip(subbands, expected):
        where = f"subband (scale={scale}, orientation={orient})"
        tri = np.asarray(_field(sb, "cov", where), dtype=np.float64)
        if tri.shape != (iu[0].size,):
            raise RRFormatError(f"{where}: cov needs {iu[0].size} upper-triangle values, got {tri.size}")
        cov = np.zeros((DIM, DIM))
        cov[iu] = tri
        cov.T[iu] = tri
        if not np.all(np.isfinite(cov)) or np.any(np.linalg.eigvalsh(cov) <= 0):
            raise RRFormatError(f"{where}: covariance is not positive definite")
        try:
            weib = WeibullParams(
                k=float(_field(sb, "k", where)), lam=float(_field(sb, "lambda", where))
            )
        except (TypeError, ValueError) as exc:
            raise RRFormatError(f"{where}: {exc}") from exc
        features.append(
            SubbandFeatures(
                scale=scale,
                orientation=orient,
                cov=cov,
                weibull=weib,
                dropped_zero_fraction=float(sb.get("dropped_zero_fraction", 0.0)),
            )
        )
    return RRFeatureSet(
        source_id=str(doc.get("source_id", "")),
        image_dims=(int(_field(dims, "width", "dims")), int(_field(dims, "height", "dims"))),
        features=features,
        levels=levels,
        format_version=version,
    )


def read_rr(path) -> RRFeatureSet:
    return loads_rr(Path(path).read_text(encoding="utf-8"))


def parse_manifest(path) -> list[ManifestRow]:
    """Rows of a ref_path,dist_path,mos,distortion_label CSV.

    Relative paths resolve against the manifest's directory; lines starting
    with '#' are skipped.
    """
    path = Path(path)
    base = path.parent
    with path.open(newline="", encoding="utf-8") as fh:
        lines = [(n, ln) for n, ln in enumerate(fh, start=1) if not ln.lstrip().startswith("#")]
    lines = [(n, ln) for n, ln in lines if ln.strip()]
    if not lines:
        raise ManifestError("manifest has no header")
    reader = csv.reader(ln for _, ln in lines)
    header = [h.strip() for h in next(reader)]
    absent = [c for c in MANIFEST_COLUMNS if c not in header]
    if absent:
        raise ManifestError(f"missing column(s): {', '.join(absent)}", line=lines[0][0])
    col = {name: header.index(name) for name in MANIFEST_COLUMNS}
    rows = []
    for (lineno, _), rec in zip(lines[1:], reader):
        rec = [v.strip() for v in rec]
        if len(rec) < len(header):
            raise ManifestError(f"expected {len(header)} fields, got {len(rec)}", line=lineno)
        try:
            mos = float(rec[col["mos"]])
        except ValueError:
            raise ManifestError(f"mos {rec[col['mos']]!r} is not numeric", line=lineno) from None
        if not math.isfinite(mos):
            raise ManifestError(f"mos {mos} is not finite", line=lineno)
        rows.append(
            ManifestRow(
                ref_path=base / rec[col["ref_path"]],
                dist_path=base / rec[col["dist_path"]],
                mos=mos,
                distortion_label=rec[col["distortion_label"]],
                line=lineno,
            )
        )
    return rows
