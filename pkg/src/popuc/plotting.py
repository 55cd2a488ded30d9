"""Line charts of tracked eigenvalue arguments, rendered to SVG."""

from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .monotone import EigenPath  # noqa: E402


def path_svg(path: EigenPath, title: str = "", shade=()) -> bytes:
    """Unwrapped angles vs t, one polyline per tracked id.

    ``shade`` is an optional sequence of (start, end) intervals drawn as light
    bands (e.g. intervals without a prediction).  Output is byte-stable for
    fixed input.
    """
    with plt.rc_context({"svg.hashsalt": "popuc", "svg.fonttype": "none", "font.size": 9}):
        fig, ax = plt.subplots(figsize=(7.0, 4.0))
        try:
            for lo, hi in shade:
                ax.axvspan(lo, hi, color="0.92", lw=0)
            for k, row in enumerate(path.angles):
                ax.plot(path.t, row, lw=1.0, label=f"theta_{k + 1}")
            ax.set_xlabel("t")
            ax.set_ylabel("unwrapped argument (rad)")
            if title:
                ax.set_title(title)
            ax.grid(True, lw=0.3)
            if len(path.angles) <= 10:
                ax.legend(loc="best", fontsize=7, frameon=False)
            fig.tight_layout()
            buf = io.BytesIO()
            fig.savefig(buf, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    return buf.getvalue()
