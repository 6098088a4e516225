#!/usr/bin/env python3
"""Independent bicubic-baseline scorer.

For each image in DIR and each scale r: crop HR to a multiple of r, shrink by
1/r with antialiased cubic convolution (a = -0.5), enlarge back by r, quantize
to 8 bits, and score Y-PSNR with an r-pixel border. Prints
`scale,bicubic_psnr_y` rows with the mean over images.

usage: bicubic_baseline.py DIR SCALES
"""
import math
import os
import sys

import numpy as np
from PIL import Image


def cubic(x):
    x = np.abs(x)
    return np.where(x <= 1, 1.5 * x**3 - 2.5 * x**2 + 1,
                    np.where(x < 2, -0.5 * x**3 + 2.5 * x**2 - 4 * x + 2, 0.0))


def weights(n_in, n_out, scale):
    """Dense [n_out, n_in] resampling matrix with clamped borders."""
    stretch = min(scale, 1.0)
    support = 2.0 / stretch
    m = np.zeros((n_out, n_in))
    for i in range(n_out):
        centre = (i + 0.5) / scale - 0.5
        lo = math.floor(centre - support) - 1
        taps = np.arange(lo, lo + int(2 * support) + 4)
        w = stretch * cubic(stretch * (centre - taps))
        w /= w.sum()
        for t, wt in zip(taps, w):
            m[i, min(max(t, 0), n_in - 1)] += wt
    return m


def resize(img, scale):
    h, w = img.shape[:2]
    oh, ow = int(round(h * scale)), int(round(w * scale))
    rows, cols = weights(h, oh, scale), weights(w, ow, scale)
    return np.einsum("oh,hwc->owc", rows, np.einsum("pw,hwc->hpc", cols, img))


def quantize(x):
    v = x * 255.0
    v = np.where(v >= 0, np.floor(v + 0.5), np.ceil(v - 0.5))
    return np.clip(v, 0, 255)


def luma(rgb):
    return 16.0 + (65.481 * rgb[..., 0] + 128.553 * rgb[..., 1] + 24.966 * rgb[..., 2]) / 255.0


def psnr_y(a, b, border):
    ya, yb = luma(a), luma(b)
    if border:
        ya, yb = ya[border:-border, border:-border], yb[border:-border, border:-border]
    mse = np.mean((ya - yb) ** 2)
    return math.inf if mse == 0 else 10 * math.log10(255.0**2 / mse)


def main():
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    folder, scales = sys.argv[1], [int(s) for s in sys.argv[2].split(",")]
    files = sorted(f for f in os.listdir(folder) if f.lower().endswith((".png", ".ppm")))
    images = [np.asarray(Image.open(os.path.join(folder, f)).convert("RGB"), dtype=np.float64) for f in files]
    print("scale,bicubic_psnr_y")
    for r in scales:
        scores = []
        for img in images:
            h, w = img.shape[0] // r * r, img.shape[1] // r * r
            hr = img[:h, :w]
            lr = resize(hr / 255.0, 1.0 / r) if r > 1 else hr / 255.0
            up = quantize(resize(lr, float(r))) if r > 1 else quantize(lr)
            scores.append(psnr_y(up, hr, r))
        print(f"{r},{np.mean(scores):.10f}")


if __name__ == "__main__":
    main()
