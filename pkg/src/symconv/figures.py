"""Matplotlib figure rendering for the CLI report paths.

Figures are written next to the delimited reports they illustrate.  The Agg
backend is forced and PNG metadata pinned so that repeated runs with the same
inputs produce byte-identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SAVE_OPTS = {"dpi": 110, "metadata": {"Software": "symconv"}}


def save_heatmap(path, matrix, title="pair probabilities"):
    matrix = np.asarray(matrix, dtype=np.float64)
    fig, ax = plt.subplots(figsize=(4.4, 4.0))
    image = ax.imshow(matrix, origin="upper", cmap="viridis", interpolation="nearest")
    fig.colorbar(image, ax=ax, fraction=0.046)
    ax.set_title(title)
    ax.set_xlabel("position j")
    ax.set_ylabel("position i")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)


def save_loss_curve(path, losses, title="training loss"):
    fig, ax = plt.subplots(figsize=(4.8, 3.2))
    ax.plot(range(1, len(losses) + 1), losses, marker="o", markersize=3)
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean loss")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)


def save_comparison(path, cnn_mean, cnn_sd, scnn_mean, scnn_sd):
    names = ["ppv", "sen", "acc"]
    x = np.arange(len(names))
    width = 0.36
    fig, ax = plt.subplots(figsize=(4.8, 3.2))
    ax.bar(x - width / 2, [cnn_mean[k] for k in names], width,
           yerr=[cnn_sd[k] for k in names], capsize=3, label="CNN")
    ax.bar(x + width / 2, [scnn_mean[k] for k in names], width,
           yerr=[scnn_sd[k] for k in names], capsize=3, label="SCNN")
    ax.set_xticks(x, [n.upper() for n in names])
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("test metric")
    ax.set_title("CNN vs SCNN")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)
