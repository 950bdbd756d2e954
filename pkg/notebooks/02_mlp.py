# %% [markdown]
# # A perceptron on eigenface coefficients
#
# The same 80 coefficients feed a 80x40x40 tanh network trained with momentum,
# an adaptive learning rate and the MSEREG weight penalty. Five random starts
# are trained and the one with the lowest objective is kept.

# %%
import os
import time
from pathlib import Path

from eigennet import build_subspace, enroll, make_split, scan_orl_layout
from eigennet import mlp
from eigennet.evaluation import evaluate, mlp_batch
from eigennet.nearest import NearestClassifier
from eigennet.synthetic import synthetic_faces

root = Path(os.environ.get("ORL_ROOT", "data/orl_faces"))
images = scan_orl_layout(root) if (root / "s1").is_dir() else synthetic_faces()

split = make_split(images, range(1, 6), range(6, 11))
subspace = build_subspace([v for v, _ in split.train], 80)
baseline = evaluate(NearestClassifier(enroll(subspace, split.train)), subspace, split.test)
print(f"nearest model, dim 80: {baseline.rate:.3f}")

# %%
batch = mlp_batch(subspace, split.train)
for layers in [(80, 40, 40), (80, 30, 40)]:
    start = time.perf_counter()
    net, report = mlp.train_multistart(layers, batch, mlp.TrainConfig())
    rate = evaluate(mlp.MlpClassifier(net), subspace, split.test).rate
    name = "x".join(map(str, layers))
    print(f"{name}: rate {rate:.3f}, start {report.selected_start} kept, "
          f"objective {report.final_objective:.4f}, {time.perf_counter() - start:.0f} s")

# %% [markdown]
# The learning-rate trace of the kept run: it grows while the objective keeps
# falling and is cut back whenever a step overshoots.

# %%
trace = report.learning_rate
for epoch in range(0, len(trace), 500):
    print(f"epoch {epoch:5d}  lr {trace[epoch]:.4g}  objective {report.objective[epoch]:.5f}")
print("rejected steps:", sum(report.rejected))

# %% [markdown]
# Early stopping instead of a fixed epoch count: hold out sample 5 of each
# subject, train on 1-4 and keep the weights with the lowest validation error.

# %%
split4 = make_split(images, range(1, 5), range(6, 11), [5])
subspace4 = build_subspace([v for v, _ in split4.train], 80)
config = mlp.TrainConfig(early_stopping=mlp.EarlyStopping(patience=100), multi_starts=1)
net, report = mlp.train_multistart(
    (80, 40, 40), mlp_batch(subspace4, split4.train), config, mlp_batch(subspace4, split4.validation)
)
rate = evaluate(mlp.MlpClassifier(net), subspace4, split4.test).rate
print(f"stopped at epoch {report.stop_epoch}, best epoch {report.best_epoch}, rate {rate:.3f}")
