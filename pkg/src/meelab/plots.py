"""SVG charts for suite output. Imports matplotlib lazily with the Agg backend."""
from __future__ import annotations


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def loss_curves(results, path, title: str = "") -> None:
    """Raw training loss and test MAE against epoch, one line per run."""
    plt = _pyplot()
    fig, (ax_loss, ax_mae) = plt.subplots(1, 2, figsize=(9, 3.5))
    for res in results:
        epochs = [r.epoch for r in res.log.records]
        ax_loss.plot(epochs, [r.loss for r in res.log.records], label=res.config.loss)
        ax_mae.plot(epochs, [r.test_mae for r in res.log.records], label=res.config.loss)
    ax_loss.set(xlabel="epoch", ylabel="training loss", title=title)
    ax_mae.set(xlabel="epoch", ylabel="test MAE")
    ax_loss.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def med_bars(meds: dict, path) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(4, 3))
    ax.bar(list(meds), list(meds.values()))
    ax.set(ylabel="MED (normalized units)")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def timing_bars(report: dict, path) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(4, 3))
    ax.bar(["kernel", "matrix"], [report["kernel_seconds"], report["matrix_seconds"]])
    ax.set(ylabel=f"seconds for {report['epochs']} epochs")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
