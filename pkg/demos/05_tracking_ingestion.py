"""From tracking ground truth to matching instances.

Objects enter and leave between frames, so each side is padded with
invisible nodes up to twice the maximum per-frame count; leavers match
their designated invisible slot and entrants come from one.
"""

import os
import tempfile

import numpy as np

from abmatch import ingest_mot, save_dataset

rows = [
    # frame, object id, left, top, width, height (MOT csv layout)
    "1,1,100,50,20,60,1,-1,-1",
    "1,2,200,55,22,58,1,-1,-1",
    "1,3,300,60,18,62,1,-1,-1",
    "2,1,104,50,20,60,1,-1,-1",   # object 1 moves a little
    "2,2,206,54,22,58,1,-1,-1",   # object 2 moves a little
    "3,1,108,51,20,60,1,-1,-1",   # object 3 left after frame 1
    "3,2,212,53,22,58,1,-1,-1",
    "3,4,400,70,16,55,1,-1,-1",   # object 4 enters in frame 3
]

with tempfile.TemporaryDirectory() as tmp:
    gt = os.path.join(tmp, "gt.txt")
    with open(gt, "w") as fh:
        fh.write("\n".join(rows) + "\n")
    ds = ingest_mot(gt)

    print(f"ingested {len(ds)} frame pairs, n_star={ds.meta['n_star']}, "
          f"so each side has {ds.instances[0].n} nodes")
    for x in ds:
        print(f"\npair {x.meta['frame_t']} -> {x.meta['frame_t1']}")
        print(f"  real boxes: {len(x.meta['boxes_t'])} -> {len(x.meta['boxes_t1'])}")
        print(f"  truth permutation: {x.truth.assignment}")
        n_star = x.meta["n_star"]
        for i, j in enumerate(x.truth):
            left = "real" if i < len(x.meta["boxes_t"]) else "invisible"
            right = "real" if j < len(x.meta["boxes_t1"]) else "invisible"
            if left == "real" or right == "real":
                print(f"    left {i} ({left}) -> right {j} ({right})")
    out = os.path.join(tmp, "tracking.jsonl")
    save_dataset(ds, out)
    print(f"\nsaved to JSONL ({os.path.getsize(out)} bytes); "
          "features per edge: IoU, center distance, area ratio, aspect ratio, "
          "bias, and the three visibility indicators")
