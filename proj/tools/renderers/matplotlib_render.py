#!/usr/bin/env python3
"""Run a generated matplotlib script and save its figure.

Usage: matplotlib_render.py SOURCE OUTPUT [--dpi N]

Runs SOURCE with the Agg backend in the current directory, saves the
current figure to OUTPUT and writes regions.json next to it with the pixel
box of every non-empty text artist. structure.json, if the script writes
one, is left for the caller to pick up.
"""

import argparse
import json
import math
import os
import runpy
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def text_regions(fig, renderer):
    height = fig.bbox.height
    regions = []
    for artist in fig.findobj(matplotlib.text.Text):
        text = artist.get_text().strip()
        if not text or not artist.get_visible():
            continue
        box = artist.get_window_extent(renderer=renderer)
        patch = artist.get_bbox_patch()
        if patch is not None:
            box = patch.get_window_extent(renderer=renderer)
        x0, x1 = max(0.0, box.x0), min(fig.bbox.width, box.x1)
        y0, y1 = max(0.0, height - box.y1), min(height, height - box.y0)
        if x1 <= x0 or y1 <= y0:
            continue
        left, top = math.floor(x0), math.floor(y0)
        regions.append({"text": text, "bbox": [left, top, math.ceil(x1) - left, math.ceil(y1) - top]})
    return regions


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("source")
    ap.add_argument("output")
    ap.add_argument("--dpi", type=int, default=100)
    args = ap.parse_args()

    runpy.run_path(args.source, run_name="__main__")
    if not plt.get_fignums():
        print("script did not create a figure", file=sys.stderr)
        return 1
    fig = plt.gcf()
    fig.set_dpi(args.dpi)
    fig.canvas.draw()
    regions = text_regions(fig, fig.canvas.get_renderer())
    # No bbox_inches="tight": cropping would shift the recorded boxes.
    fig.savefig(args.output, dpi=args.dpi)
    with open(os.path.join(os.path.dirname(os.path.abspath(args.output)), "regions.json"), "w") as fh:
        json.dump(regions, fh)
    return 0


if __name__ == "__main__":
    sys.exit(main())
