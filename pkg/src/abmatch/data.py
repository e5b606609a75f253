"""Datasets of matching instances: file formats, MOT ingestion, synthesis.

A matching instance couples an n x n x d feature tensor with a ground
truth permutation.  Tracking data is turned into instances by pairing
consecutive frames and doubling the node count: the extra "invisible"
nodes absorb objects entering or leaving, keeping every matching perfect.
"""

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, ParseError, SchemaError
from .matching import Permutation, max_weight_matching
from .rng import substream

FEATURE_DIM = 8
DEFAULT_FRAME_DIAG = 1000.0


@dataclass(eq=False)
class MatchingInstance:
    id: str
    features: np.ndarray  # (n, n, d): features of assigning left i to right j
    truth: Permutation
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        f = np.asarray(self.features, dtype=float)
        if f.ndim != 3 or f.shape[0] != f.shape[1]:
            raise InvalidInputError(f"features must be (n, n, d), got {f.shape}")
        if f.shape[0] < 1 or f.shape[2] < 1:
            raise InvalidInputError("need n >= 1 and d >= 1")
        if not np.all(np.isfinite(f)):
            raise InvalidInputError(f"instance {self.id!r} has non-finite features")
        if not isinstance(self.truth, Permutation):
            self.truth = Permutation(tuple(self.truth))
        if self.truth.n != f.shape[0]:
            raise InvalidInputError(
                f"instance {self.id!r}: truth length {self.truth.n} != n {f.shape[0]}")
        self.features = f

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def d(self):
        return self.features.shape[2]

    def __eq__(self, other):
        return (isinstance(other, MatchingInstance)
                and self.id == other.id
                and self.truth.assignment == other.truth.assignment
                and np.array_equal(self.features, other.features)
                and self.meta == other.meta)


@dataclass(eq=False)
class Dataset:
    instances: list
    name: str = ""
    meta: dict = field(default_factory=dict)  # in-memory extras, not persisted

    def __post_init__(self):
        if self.instances:
            d = self.instances[0].d
            for x in self.instances:
                if x.d != d:
                    raise SchemaError(
                        f"instance {x.id!r} has d={x.d}, dataset has d={d}")
        ids = [x.id for x in self.instances]
        if len(set(ids)) != len(ids):
            raise SchemaError("duplicate instance ids")

    @property
    def d(self):
        return self.instances[0].d if self.instances else 0

    def __len__(self):
        return len(self.instances)

    def __iter__(self):
        return iter(self.instances)

    def by_id(self, instance_id: str) -> MatchingInstance:
        for x in self.instances:
            if x.id == instance_id:
                return x
        raise KeyError(instance_id)

    def __eq__(self, other):
        return (isinstance(other, Dataset)
                and self.name == other.name
                and len(self) == len(other)
                and all(a == b for a, b in zip(self.instances, other.instances)))


# ---------------------------------------------------------------------------
# JSONL persistence

def save_dataset(ds: Dataset, path):
    with open(path, "w", encoding="utf-8") as fh:
        for x in ds.instances:
            record = {
                "id": x.id,
                "n": x.n,
                "d": x.d,
                "features": x.features.tolist(),
                "truth": list(x.truth.assignment),
                "meta": x.meta,
            }
            fh.write(json.dumps(record))
            fh.write("\n")


def load_dataset(path) -> Dataset:
    instances = []
    d = None
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                inst = MatchingInstance(
                    id=str(record["id"]),
                    features=np.asarray(record["features"], dtype=float),
                    truth=Permutation(tuple(record["truth"])),
                    meta=record.get("meta", {}),
                )
                if inst.n != record["n"] or inst.d != record["d"]:
                    raise InvalidInputError(
                        f"declared (n={record['n']}, d={record['d']}) disagrees with "
                        f"tensor shape {inst.features.shape}")
            except (KeyError, TypeError, ValueError, InvalidInputError) as exc:
                raise ParseError(f"line {line_no}: {exc}", line_no=line_no) from exc
            if d is None:
                d = inst.d
            elif inst.d != d:
                raise SchemaError(
                    f"line {line_no}: feature dimension {inst.d} != dataset's {d}")
            instances.append(inst)
    name = os.path.splitext(os.path.basename(str(path)))[0]
    return Dataset(instances, name=name)


# ---------------------------------------------------------------------------
# features

def _iou(a, b):
    ax1, ay1 = a[0], a[1]
    ax2, ay2 = a[0] + a[2], a[1] + a[3]
    bx1, by1 = b[0], b[1]
    bx2, by2 = b[0] + b[2], b[1] + b[3]
    iw = min(ax2, bx2) - max(ax1, bx1)
    ih = min(ay2, by2) - max(ay1, by1)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = a[2] * a[3] + b[2] * b[3] - inter
    return inter / union


def extract_features(boxes_t, boxes_t1, n_star: int,
                     frame_diag: float = DEFAULT_FRAME_DIAG) -> np.ndarray:
    """Pairwise features for the doubled-node construction (d = 8).

    Slots [0, len(boxes)) on each side are real detections; everything up
    to 2 * n_star is invisible.  Geometric features are zeroed whenever an
    endpoint is invisible; indicator features mark the pairing type.
    """
    if len(boxes_t) > n_star or len(boxes_t1) > n_star:
        raise InvalidInputError("more boxes than n_star slots")
    for box in list(boxes_t) + list(boxes_t1):
        if box[2] <= 0 or box[3] <= 0:
            raise InvalidInputError(f"box with nonpositive size: {box}")
    n = 2 * n_star
    out = np.zeros((n, n, FEATURE_DIM))
    out[:, :, 4] = 1.0  # bias
    for i in range(n):
        left = boxes_t[i] if i < len(boxes_t) else None
        for j in range(n):
            right = boxes_t1[j] if j < len(boxes_t1) else None
            if left is not None and right is not None:
                cx_l, cy_l = left[0] + left[2] / 2, left[1] + left[3] / 2
                cx_r, cy_r = right[0] + right[2] / 2, right[1] + right[3] / 2
                dist = np.hypot(cx_l - cx_r, cy_l - cy_r)
                area_l, area_r = left[2] * left[3], right[2] * right[3]
                aspect_l, aspect_r = left[2] / left[3], right[2] / right[3]
                out[i, j, 0] = _iou(left, right)
                out[i, j, 1] = np.exp(-dist / frame_diag)
                out[i, j, 2] = min(area_l, area_r) / max(area_l, area_r)
                out[i, j, 3] = np.exp(-abs(np.log(aspect_l / aspect_r)))
            elif left is not None:
                out[i, j, 5] = 1.0
            elif right is not None:
                out[i, j, 6] = 1.0
            else:
                out[i, j, 7] = 1.0
    return out


# ---------------------------------------------------------------------------
# MOT ingestion

def _parse_mot_rows(gt_path):
    frames = {}
    with open(gt_path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) < 6:
                raise ParseError(f"line {line_no}: expected >= 6 comma-separated "
                                 f"fields, got {len(parts)}", line_no=line_no)
            try:
                frame = int(float(parts[0]))
                obj = int(float(parts[1]))
                box = [float(parts[2]), float(parts[3]), float(parts[4]), float(parts[5])]
            except ValueError as exc:
                raise ParseError(f"line {line_no}: {exc}", line_no=line_no) from exc
            if box[2] <= 0 or box[3] <= 0:
                raise ParseError(f"line {line_no}: nonpositive box size",
                                 line_no=line_no)
            frames.setdefault(frame, {})[obj] = box
    return frames


def ingest_mot(gt_path, max_frames: int = None,
               frame_diag: float = DEFAULT_FRAME_DIAG) -> Dataset:
    """Build matching instances from a MOT ground-truth CSV.

    One instance per consecutive frame pair.  Every side holds n = 2 * N*
    nodes, N* being the largest per-frame object count over the ingested
    range; the upper half are invisible nodes so that objects can enter
    and leave while the matching stays perfect.
    """
    frames = _parse_mot_rows(gt_path)
    if not frames:
        raise ParseError("no rows parsed", line_no=0)
    frame_ids = sorted(frames)
    if max_frames is not None:
        frame_ids = frame_ids[:max_frames]
    n_star = max(len(frames[f]) for f in frame_ids)
    skipped = 0
    instances = []
    for t, t1 in zip(frame_ids, frame_ids[1:]):
        if t1 != t + 1:
            skipped += 1
            continue
        objs_t = sorted(frames[t].items())    # (object id, box), id-sorted
        objs_t1 = sorted(frames[t1].items())
        right_slot = {oid: j for j, (oid, _) in enumerate(objs_t1)}
        left_ids = {oid for oid, _ in objs_t}
        n = 2 * n_star
        truth = np.full(n, -1, dtype=int)
        for i, (oid, _) in enumerate(objs_t):
            if oid in right_slot:
                truth[i] = right_slot[oid]         # object persists
            else:
                truth[i] = n_star + i              # leaves: its invisible slot
        for j, (oid, _) in enumerate(objs_t1):
            if oid not in left_ids:
                truth[n_star + j] = j              # enters: from invisible slot
        free_right = sorted(set(range(n)) - set(truth[truth >= 0]))
        for i in np.flatnonzero(truth < 0):
            truth[i] = free_right.pop(0)           # remaining pairs by ascending index
        boxes_t = [box for _, box in objs_t]
        boxes_t1 = [box for _, box in objs_t1]
        instances.append(MatchingInstance(
            id=f"pair-{t:06d}",
            features=extract_features(boxes_t, boxes_t1, n_star, frame_diag),
            truth=Permutation(tuple(int(v) for v in truth)),
            meta={
                "frame_t": t,
                "frame_t1": t1,
                "boxes_t": boxes_t,
                "boxes_t1": boxes_t1,
                "n_star": n_star,
            },
        ))
    name = os.path.splitext(os.path.basename(str(gt_path)))[0]
    return Dataset(instances, name=name,
                   meta={"n_star": n_star, "skipped_pairs": skipped})


# ---------------------------------------------------------------------------
# synthetic benchmark

def gen_synthetic(n: int, d: int, count: int, seed: int, noise: float,
                  margin=1.0) -> Dataset:
    """Planted-model benchmark: truth is the argmax matching of a hidden
    linear potential, with the truth edges boosted so the optimum is well
    separated, then features perturbed at ``noise`` scale.

    ``margin`` is the boost size; a (lo, hi) pair draws it per instance,
    mixing easy, redundant examples with hard, informative ones the way
    real tracking pools do.
    """
    if n < 2 or d < 2:
        raise InvalidInputError("need n >= 2 and d >= 2")
    try:
        margin_lo, margin_hi = margin
    except TypeError:
        margin_lo = margin_hi = float(margin)
    if not (0 <= margin_lo <= margin_hi):
        raise InvalidInputError("margin bounds must satisfy 0 <= lo <= hi")
    theta_rng = substream(seed, "synthetic-theta")
    feat_rng = substream(seed, "synthetic-features")
    margin_rng = substream(seed, "synthetic-margin")
    noise_rng = substream(seed, "synthetic-noise")
    theta_star = theta_rng.normal(size=d)
    rows = np.arange(n)
    instances = []
    for k in range(count):
        feats = feat_rng.normal(size=(n, n, d))
        base = max_weight_matching(feats @ theta_star).to_array()
        boost = margin_lo if margin_lo == margin_hi \
            else float(margin_rng.uniform(margin_lo, margin_hi))
        feats[rows, base] += boost * theta_star / float(theta_star @ theta_star)
        truth = max_weight_matching(feats @ theta_star)
        if noise > 0:
            feats = feats + noise * noise_rng.normal(size=(n, n, d))
        instances.append(MatchingInstance(
            id=f"syn-{k:04d}", features=feats, truth=truth, meta={}))
    return Dataset(instances, name=f"synthetic-n{n}-d{d}",
                   meta={"theta_star": theta_star.tolist(), "noise": noise,
                         "margin": [margin_lo, margin_hi], "seed": seed})


def split(ds: Dataset, seed: int, fractions=(0.05, 0.70, 0.25)):
    """Seeded partition of instance ids into (initial labeled, pool, test)."""
    f_l, f_p, f_t = fractions
    if min(f_l, f_p, f_t) <= 0 or abs(f_l + f_p + f_t - 1.0) > 1e-9:
        raise InvalidInputError("fractions must be positive and sum to 1")
    total = len(ds)
    n_l = int(round(f_l * total))
    n_p = int(round(f_p * total))
    n_t = total - n_l - n_p
    if min(n_l, n_p, n_t) < 1:
        raise InvalidInputError(
            f"split of {total} instances leaves an empty part: {(n_l, n_p, n_t)}")
    ids = [x.id for x in ds.instances]
    order = substream(seed, "split").permutation(total)
    shuffled = [ids[int(i)] for i in order]
    return shuffled[:n_l], shuffled[n_l:n_l + n_p], shuffled[n_l + n_p:]
