"""Profile of the capped kernels and verification of the cap conditions.

Below the cap radius the interaction kernel is replaced by a quadratic
that joins it with matching value and slope; the capped kernel never
exceeds the original, never exceeds twice the junction value, and its
slope on the capped region is dominated by the junction slope.  The same
holds for the steep diagnostic kernel q^(-2-a) with its power-form cap.
"""

import numpy as np

from vortexlab import (
    auxiliary_kernel,
    check_regularization,
    kernel_for_order,
    regularize,
)


def condition_table():
    print(f"{'kernel':<12} {'eps':<8} {'conditions':<12} {'junction residual'}")
    for s in (0.1, 0.25, 0.5, 0.75, 1.0):
        for eps in (0.5, 0.1, 0.01):
            rep = check_regularization(regularize(kernel_for_order(s), eps))
            status = "all pass" if rep.all_passed else "FAILED"
            print(f"s={s:<10} {eps:<8} {status:<12} {rep.junction_residual:.2e}")
    for a in (0.5, 1.0):
        rep = check_regularization(auxiliary_kernel(a, 0.1))
        status = "all pass" if rep.all_passed else "FAILED"
        print(f"steep a={a:<4} {0.1:<8} {status:<12} {rep.junction_residual:.2e}")


def plot_profiles():
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("(matplotlib unavailable; skipping the profile figure)")
        return
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    q = np.linspace(1e-4, 0.5, 800)
    for s, color in ((0.5, "C0"), (1.0, "C1")):
        base = kernel_for_order(s)
        reg = regularize(base, 0.1)
        label = f"s = {s}"
        axes[0].plot(q, base.value(q), color + "--", alpha=0.5,
                     label=f"{label} original")
        axes[0].plot(q, reg.value(q), color, label=f"{label} capped")
        axes[1].plot(q, np.abs(reg.radial_derivative(q)), color, label=label)
    for ax in axes:
        ax.axvline(0.1, color="gray", lw=0.8, ls=":")
        ax.legend()
        ax.set_xlabel("q")
    axes[0].set_ylim(-0.5, 6.0)
    axes[0].set_title("kernel value and its cap")
    axes[1].set_yscale("log")
    axes[1].set_title("|slope| (capped)")
    fig.tight_layout()
    fig.savefig("kernel_regularization.png", dpi=130)
    print("\nwrote kernel_regularization.png")


if __name__ == "__main__":
    condition_table()
    plot_profiles()
