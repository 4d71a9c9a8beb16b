"""Optional figures drawn from a written trajectory CSV (needs matplotlib)."""

import numpy as np

from .io import read_trajectory_csv


def plot_run(csv_path, out_dir, energy=None):
    """Write g.png, r.png and, when an energy table is given, energy.png."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    cols = read_trajectory_csv(csv_path)
    written = []
    for name, label in (("g", "g(t)"), ("r", "r(t)")):
        if name not in cols or np.all(np.isnan(cols[name])):
            continue
        fig, ax = plt.subplots(figsize=(6, 3.5))
        ax.plot(cols["t"], cols[name], lw=1)
        ax.set_xlabel("t")
        ax.set_ylabel(label)
        fig.tight_layout()
        path = f"{out_dir}/{name}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    if energy is not None:
        fig, ax = plt.subplots(figsize=(6, 3.5))
        for key in ("E_basic", "W_eta"):
            ax.semilogy(energy.t, np.maximum(getattr(energy, key), 1e-300), lw=1, label=key)
        ax.set_xlabel("t")
        ax.legend()
        fig.tight_layout()
        path = f"{out_dir}/energy.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written
