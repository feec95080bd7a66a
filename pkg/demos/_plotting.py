"""Headless plotting helper shared by the demo scripts.

Saves figures into demos/output/ when matplotlib is available and
quietly skips plotting otherwise (every demo prints its numbers
either way).
"""

from pathlib import Path

OUTPUT_DIR = Path(__file__).parent / "output"


def maybe_plot(filename, draw):
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print(f"(matplotlib not installed; skipping {filename})")
        return
    fig, ax = plt.subplots(figsize=(7, 4))
    draw(ax)
    OUTPUT_DIR.mkdir(exist_ok=True)
    fig.tight_layout()
    fig.savefig(OUTPUT_DIR / filename, dpi=120)
    plt.close(fig)
    print(f"saved {OUTPUT_DIR / filename}")
