"""Synthetic correlated-sensor data for integration tests.

Each correlated group of sensors reads one latent signal with its own gain,
offset and noise, and the class is a function of the latent signals. Any
half of a group therefore carries nearly the group's full information.
"""
import numpy as np

from secoe.dataset import Dataset, sensor_names

DRY_BEANS_LIKE_GROUPS = (6, 2, 6, 2)


def make_sensor_dataset(n=3000, group_sizes=DRY_BEANS_LIKE_GROUPS, n_classes=7, noise=0.25, seed=0,
                        shuffle_columns=True):
    rng = np.random.default_rng(seed)
    k = len(group_sizes)
    centers = rng.normal(scale=2.0, size=(n_classes, k))
    labels = rng.integers(0, n_classes, n)
    latent = centers[labels] + rng.normal(scale=0.6, size=(n, k))
    cols = []
    for g, size in enumerate(group_sizes):
        for _ in range(size):
            gain = rng.uniform(0.5, 3.0)
            offset = rng.uniform(-5.0, 5.0)
            cols.append(offset + gain * latent[:, g] + rng.normal(scale=noise * gain, size=n))
    X = np.column_stack(cols)
    if shuffle_columns:
        X = X[:, rng.permutation(X.shape[1])]
    return Dataset(X, labels.astype(np.int64), tuple(sensor_names(X.shape[1])),
                   tuple(f"class{c}" for c in range(n_classes)))


def separable(n=120, seed=0):
    # three blobs at (4, 0), (-4, 0), (0, 4) with unit box noise: each class is
    # linearly separable from the other two with margin >= 1
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 3, n)
    centers = np.array([[4.0, 0.0], [-4.0, 0.0], [0.0, 4.0]])
    X = np.column_stack([centers[y] + rng.uniform(-1, 1, size=(n, 2)), rng.uniform(-1, 1, size=(n, 2))])
    return X + 10.0, y


def xor(n=200, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1, 1, size=(n, 2))
    X = X + 0.3 * np.sign(X)
    y = ((X[:, 0] > 0) ^ (X[:, 1] > 0)).astype(np.int64)
    return X, y


def write_csv(ds, path, label="label", prefix="x"):
    lines = [",".join([f"{prefix}{i}" for i in range(ds.n_sensors)] + [label])]
    for row, lab in zip(ds.features, ds.labels):
        lines.append(",".join(repr(float(v)) for v in row) + f",{ds.class_names[lab]}")
    path.write_text("\n".join(lines) + "\n")
    return path
