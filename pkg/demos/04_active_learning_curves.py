"""A small active-learning comparison: information-guided vs random.

Full-scale runs (100 rounds, 30 splits) go through the CLI; this keeps
the same machinery at demo scale.
"""

import numpy as np

from abmatch import LoopConfig, gen_synthetic, run_curves, summarize_curves

ds = gen_synthetic(n=6, d=5, count=120, seed=11, noise=0.3, margin=0.3)
cfg = LoopConfig(initial_epochs=6, round_epochs=1)
rounds, splits = 25, 4

print(f"dataset: {len(ds)} instances, n={ds.instances[0].n}, d={ds.d}")
print(f"running {splits} splits x {rounds} rounds per strategy...")
records = run_curves(ds, ["abm-mi", "random"], rounds, splits,
                     master_seed=2, cfg=cfg)
summary, auc = summarize_curves(records)

print("\nround   abm-mi(se)        random(se)")
for r in range(0, rounds + 1, 5):
    m_a, se_a = summary["abm-mi"][r]
    m_r, se_r = summary["random"][r]
    print(f"{r:>5}   {m_a:.4f} ({se_a:.4f})   {m_r:.4f} ({se_r:.4f})")

print(f"\narea under mean curve: abm-mi {auc['abm-mi']:.4f}, "
      f"random {auc['random']:.4f}")
supports = [r.mean_support_size for r in records if r.strategy == "abm-mi"]
print(f"mean adversary support size across evaluations: {np.mean(supports):.2f}")
