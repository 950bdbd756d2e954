# %% [markdown]
# # Genuine and impostor scores
#
# For every probe we compare it with every model. Comparisons against the
# probe's own subject are genuine, all others impostor. Good separation means
# small genuine distances and, for the network, strongly negative impostor
# outputs.

# %%
import os
from pathlib import Path

import numpy as np

from eigennet import build_subspace, enroll, make_split, scan_orl_layout
from eigennet import mlp
from eigennet.evaluation import genuine_impostor_series, mlp_batch
from eigennet.synthetic import synthetic_faces

root = Path(os.environ.get("ORL_ROOT", "data/orl_faces"))
images = scan_orl_layout(root) if (root / "s1").is_dir() else synthetic_faces()

split = make_split(images, range(1, 6), range(6, 11))
subspace = build_subspace([v for v, _ in split.train], 80)
gallery = enroll(subspace, split.train)
net, _ = mlp.train_multistart((80, 40, 40), mlp_batch(subspace, split.train), mlp.TrainConfig())


# %%
def show(hist, width=40):
    # normalize each histogram to its own peak
    peak = max(hist.counts.max(), 1)
    print(f"{hist.label} ({hist.total} values)")
    for lo, n in zip(hist.edges[:-1], hist.counts):
        print(f"  {lo:10.3f} {'#' * round(width * n / peak)}")


hists = {h.label: h for h in genuine_impostor_series(gallery, subspace, split.test, net, bins=15)}
for label in ("genuine-nearest", "impostor"):
    show(hists[label])

# %% [markdown]
# Network outputs live in (-1, 1). Impostor outputs should pile up near -1.

# %%
for label in ("nnet-genuine", "nnet-impostor"):
    show(hists[label])

impostor = hists["nnet-impostor"]
centers = (impostor.edges[:-1] + impostor.edges[1:]) / 2
low = impostor.counts[centers < -1 / 3].sum() / impostor.total
print(f"impostor mass below -1/3 (by bin centre): {low:.1%}")
print(f"mean impostor output (from bins): {np.average(centers, weights=impostor.counts):.3f}")
