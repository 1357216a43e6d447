"""Objective quality assessment harness.

Maps objective scores onto subjective ones with a 5-parameter logistic
plus linear term, fitted by Nelder-Mead simplex descent, then reports
RMSE, Pearson correlation of the fitted predictions, and Spearman rank
correlation of the raw scores.  Severity doubles as a subjective proxy
when no real opinion scores are supplied.
"""

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.stats import rankdata

from .csf_map import CsfBand, ViewingGeometry, generate_map, resize_map, uniform_map
from .distort import read_manifest
from .errors import DegenerateData, DegenerateInput, FormatError, TooFew
from .features import load_weights, forward
from .losses import (
    CX_MAX_SIDE,
    LossConfig,
    LossKind,
    _center_crop,
    _crop_map,
    attentive_contextual_loss,
    attentive_perceptual_loss,
    contextual_loss,
    perceptual_loss,
)
from .tensor_core import load_image


@dataclass(frozen=True)
class OqaRecord:
    image_id: str
    objective: float
    subjective: float

    def __post_init__(self):
        if not (math.isfinite(self.objective) and math.isfinite(self.subjective)):
            raise DegenerateData(f"non-finite score for {self.image_id!r}")


@dataclass(frozen=True)
class FitModel:
    """beta1*(1/2 - 1/(1+exp(beta2*(x-beta3)))) + beta4*x + beta5"""

    params: tuple

    def predict(self, x):
        b1, b2, b3, b4, b5 = self.params
        x = np.asarray(x, dtype=np.float64)
        with np.errstate(over="ignore"):
            logistic = 1.0 / (1.0 + np.exp(b2 * (x - b3)))
        return b1 * (0.5 - logistic) + b4 * x + b5


def fit_curve(records) -> FitModel:
    """Least-squares fit of the logistic-plus-linear map, deterministic.

    Simplex descent runs until the simplex diameter drops below 1e-9 or
    10^4 iterations, from a data-driven start.
    """
    if len(records) < 6:
        raise TooFew(f"need at least 6 records to fit, got {len(records)}")
    obj = np.array([r.objective for r in records], dtype=np.float64)
    subj = np.array([r.subjective for r in records], dtype=np.float64)
    if np.all(obj == obj[0]):
        raise DegenerateData("objective scores are all equal; nothing to fit")
    x0 = np.array(
        [
            float(subj.max() - subj.min()),
            1.0 / float(obj.std()),
            float(obj.mean()),
            0.0,
            float(subj.mean()),
        ]
    )

    def sse(p):
        resid = FitModel(tuple(p)).predict(obj) - subj
        return float(resid @ resid)

    res = minimize(
        sse,
        x0,
        method="Nelder-Mead",
        options={"xatol": 1e-9, "fatol": np.inf, "maxiter": 10_000, "maxfev": 20_000},
    )
    return FitModel(tuple(float(v) for v in res.x))


def _scores(records):
    if len(records) < 2:
        raise TooFew(f"need at least 2 records, got {len(records)}")
    obj = np.array([r.objective for r in records], dtype=np.float64)
    subj = np.array([r.subjective for r in records], dtype=np.float64)
    return obj, subj


def rmse(model: FitModel, records) -> float:
    obj, subj = _scores(records)
    resid = model.predict(obj) - subj
    return float(np.sqrt(np.mean(resid * resid)))


def _pearson(a, b) -> float:
    da = a - a.mean()
    db = b - b.mean()
    denom = math.sqrt(float(da @ da)) * math.sqrt(float(db @ db))
    if denom == 0.0:
        return 0.0
    return float(np.clip(float(da @ db) / denom, -1.0, 1.0))


def lcc(model: FitModel, records) -> float:
    """Pearson correlation of fitted predictions vs subjective scores."""
    obj, subj = _scores(records)
    return _pearson(model.predict(obj), subj)


def srocc(records) -> float:
    """Spearman rank correlation with average-rank tie handling.

    Tie-free inputs use the rank-difference identity, which returns
    exactly +/-1.0 on perfectly ordered data.
    """
    obj, subj = _scores(records)
    n = len(obj)
    ra = rankdata(obj, method="average")
    rb = rankdata(subj, method="average")
    if len(np.unique(obj)) == n and len(np.unique(subj)) == n:
        d = ra - rb
        return float(np.clip(1.0 - 6.0 * float(d @ d) / (n * (n * n - 1)), -1.0, 1.0))
    return _pearson(ra, rb)


# ---------------------------------------------------------------------------
# corpus evaluation

_WORKER = {}


def _metric_value(ref_img, dist_img, bundle, layer, kind, cfg, band, geom, fold, cache=None):
    key = id(ref_img)
    if cache is not None and key in cache:
        fy, amap_full = cache[key]
    else:
        fy = forward(bundle, ref_img, layer)
        amap_full = None
        if cache is not None:
            cache[key] = (fy, amap_full)
    fx = forward(bundle, dist_img, layer)
    h, w = fy.tensor.shape[1:]
    if kind in (LossKind.P_ATT, LossKind.CX_ATT):
        if amap_full is None:
            try:
                amap_full = resize_map(generate_map(ref_img, band, geom, fold), h, w)
            except DegenerateInput:
                amap_full = uniform_map(h, w)
            if cache is not None:
                cache[key] = (fy, amap_full)
    if kind is LossKind.P:
        return perceptual_loss(fx, fy)
    if kind is LossKind.P_ATT:
        return attentive_perceptual_loss(fx, fy, amap_full)
    cx_x = _center_crop(fx, CX_MAX_SIDE)
    cx_y = _center_crop(fy, CX_MAX_SIDE)
    if kind is LossKind.CX:
        return contextual_loss(cx_x, cx_y, cfg)
    return attentive_contextual_loss(
        cx_x, cx_y, _crop_map(amap_full, h, w, CX_MAX_SIDE), cfg
    )


def _init_worker(bundle_path, layer, kind_name, cfg_fields, band_fields, geom_fields, fold):
    _WORKER["bundle"] = load_weights(bundle_path)
    _WORKER["layer"] = layer
    _WORKER["kind"] = LossKind[kind_name]
    _WORKER["cfg"] = LossConfig(*cfg_fields)
    _WORKER["band"] = CsfBand(*band_fields)
    _WORKER["geom"] = ViewingGeometry(*geom_fields)
    _WORKER["fold"] = fold
    _WORKER["images"] = {}


def _eval_row(task):
    ref_path, dist_path = task
    images = _WORKER["images"]
    if ref_path not in images:
        images[ref_path] = (load_image(ref_path), {})
    ref_img, cache = images[ref_path]
    dist_img = load_image(dist_path)
    return _metric_value(
        ref_img,
        dist_img,
        _WORKER["bundle"],
        _WORKER["layer"],
        _WORKER["kind"],
        _WORKER["cfg"],
        _WORKER["band"],
        _WORKER["geom"],
        _WORKER["fold"],
        cache,
    )


def load_subjective(path):
    """image_id -> score from a CSV with image_id and dmos columns."""
    with open(os.fspath(path), newline="") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames or "image_id" not in reader.fieldnames:
            raise FormatError(f"{path}: expected an image_id column")
        col = "dmos" if "dmos" in reader.fieldnames else "subjective"
        if col not in reader.fieldnames:
            raise FormatError(f"{path}: expected a dmos or subjective column")
        return {row["image_id"]: float(row[col]) for row in reader}


def evaluate_corpus(
    manifest_path,
    bundle_path,
    layer,
    kind: LossKind = LossKind.P,
    cfg: LossConfig = LossConfig(),
    subjective=None,
    band: CsfBand = CsfBand(),
    geom: ViewingGeometry = ViewingGeometry(),
    fold: bool = True,
    jobs: int = 1,
):
    """OqaRecords for every manifest row, in manifest order.

    subjective maps image_id to a score; severity is the proxy when it
    is None.  jobs > 1 fans rows out over worker processes; results are
    joined in manifest order either way.
    """
    manifest_path = os.fspath(manifest_path)
    rows = read_manifest(manifest_path)
    base = os.path.dirname(os.path.abspath(manifest_path))
    tasks = [
        (
            os.path.normpath(os.path.join(base, row["ref_path"])),
            os.path.normpath(os.path.join(base, row["dist_path"])),
        )
        for row in rows
    ]
    init_args = (
        os.fspath(bundle_path),
        layer,
        kind.name,
        (cfg.alpha, cfg.cx_bandwidth_h, cfg.cx_epsilon, cfg.distance_kind),
        (band.s_low_cpd, band.s_high_cpd),
        (geom.dot_pitch_mm, geom.distance_mm),
        fold,
    )
    if jobs <= 1:
        _init_worker(*init_args)
        values = [_eval_row(t) for t in tasks]
    else:
        with ProcessPoolExecutor(
            max_workers=jobs, initializer=_init_worker, initargs=init_args
        ) as pool:
            values = list(pool.map(_eval_row, tasks, chunksize=1))
    records = []
    for row, value in zip(rows, values):
        if subjective is None:
            subj = float(row["severity"])
        else:
            if row["image_id"] not in subjective:
                raise FormatError(f"no subjective score for {row['image_id']!r}")
            subj = float(subjective[row["image_id"]])
        records.append(OqaRecord(row["image_id"], float(value), subj))
    return records


def run_oqa(
    manifest_path,
    bundle_path,
    layer,
    kind: LossKind = LossKind.P,
    cfg: LossConfig = LossConfig(),
    subjective_csv=None,
    out_dir=".",
    band: CsfBand = CsfBand(),
    geom: ViewingGeometry = ViewingGeometry(),
    fold: bool = True,
    jobs: int = 1,
):
    """Evaluate a corpus, fit, and write oqa_scores.csv + oqa_summary.csv."""
    subjective = load_subjective(subjective_csv) if subjective_csv else None
    records = evaluate_corpus(
        manifest_path, bundle_path, layer, kind, cfg, subjective, band, geom, fold, jobs
    )
    model = fit_curve(records)
    predictions = model.predict(np.array([r.objective for r in records]))
    summary = {
        "metric": kind.value,
        "layer": layer,
        "n": len(records),
        "rmse": rmse(model, records),
        "lcc": lcc(model, records),
        "srocc": srocc(records),
    }
    os.makedirs(out_dir, exist_ok=True)
    scores_path = os.path.join(out_dir, "oqa_scores.csv")
    with open(scores_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id", "objective", "subjective", "predicted"])
        for rec, pred in zip(records, predictions):
            writer.writerow(
                [rec.image_id, repr(rec.objective), repr(rec.subjective), repr(float(pred))]
            )
    summary_path = os.path.join(out_dir, "oqa_summary.csv")
    with open(summary_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "layer", "n", "rmse", "lcc", "srocc"])
        writer.writerow(
            [
                summary["metric"],
                summary["layer"],
                str(summary["n"]),
                repr(summary["rmse"]),
                repr(summary["lcc"]),
                repr(summary["srocc"]),
            ]
        )
    return records, model, summary
