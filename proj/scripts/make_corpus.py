#!/usr/bin/env python3
"""Builds the small training/validation corpus from images bundled with
scikit-image, scikit-learn and matplotlib.

Training images are cut into 256x256 tiles (at most 50, low-texture tiles
skipped). Validation images are whole pictures that contribute no tiles.

usage: make_corpus.py OUT_DIR
"""
import os
import sys

import matplotlib
import numpy as np
import skimage.data
from PIL import Image
from sklearn.datasets import load_sample_images

TILE = 256
MAX_TILES = 50
MIN_STD = 12.0

TRAIN = ["astronaut", "coffee", "rocket", "immunohistochemistry", "hubble_deep_field", "retina",
         "stereo_motorcycle", "china", "grace_hopper", "brick", "grass", "gravel", "moon", "text"]
VAL = ["chelsea", "flower", "camera", "clock"]


def rgb(a):
    a = np.asarray(a)
    if a.ndim == 2:
        a = np.stack([a] * 3, axis=-1)
    return np.ascontiguousarray(a[..., :3].astype(np.uint8))


def load(name):
    if name in ("china", "flower"):
        return rgb(load_sample_images().images[0 if name == "china" else 1])
    if name == "grace_hopper":
        path = os.path.join(matplotlib.get_data_path(), "sample_data", "grace_hopper.jpg")
        return rgb(Image.open(path).convert("RGB"))
    img = getattr(skimage.data, name)()
    if isinstance(img, tuple):
        img = img[0]
    return rgb(img)


def tiles(img):
    h, w = img.shape[:2]
    for y in range(0, h - TILE + 1, TILE):
        for x in range(0, w - TILE + 1, TILE):
            t = img[y:y + TILE, x:x + TILE]
            if t.std() >= MIN_STD:
                yield t


def main():
    if len(sys.argv) != 2:
        sys.exit(__doc__)
    out = sys.argv[1]
    train_dir, val_dir = os.path.join(out, "train"), os.path.join(out, "val")
    os.makedirs(train_dir, exist_ok=True)
    os.makedirs(val_dir, exist_ok=True)

    per_image = [list(tiles(load(n))) for n in TRAIN]
    # Round-robin over sources so no single large image dominates.
    chosen, depth = [], 0
    while len(chosen) < MAX_TILES and any(depth < len(p) for p in per_image):
        for name, p in zip(TRAIN, per_image):
            if depth < len(p) and len(chosen) < MAX_TILES:
                chosen.append((name, depth, p[depth]))
        depth += 1
    for name, i, t in chosen:
        Image.fromarray(t).save(os.path.join(train_dir, f"{name}_{i:02d}.png"))
    for name in VAL:
        Image.fromarray(load(name)).save(os.path.join(val_dir, f"{name}.png"))
    print(f"{len(chosen)} training tiles, {len(VAL)} validation images in {out}")


if __name__ == "__main__":
    main()
