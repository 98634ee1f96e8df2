"""Reference SSIM values for the pairs built by ssim_pair() in tests/support.hpp.

scikit-image is the independent implementation. Its mean drops a 5 px border
(half the 11-tap window), so the C++ side compares the same interior crop.
Usage: python3 ssim_reference.py  -> prints a C++ initializer list and the
flat-plus-noise value used in test_metrics.cpp.
"""
import math

import numpy as np
from skimage.metrics import structural_similarity

MASK = (1 << 64) - 1


def mix64(z):
    z = (z + 0x9E3779B97F4A7C15) & MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def hash_unit(pair, stream, x, y, c):
    key = ((pair << 48) ^ (stream << 40) ^ (y << 20) ^ (x << 4) ^ c) & MASK
    return (mix64(key) >> 11) * 2.0**-53


def ssim_pair(k):
    w, h, ch = 40, 32, 1 if k % 2 == 0 else 3
    fx = 0.15 + 0.05 * (k % 5)
    fy = 0.10 + 0.04 * (k % 4)
    mix = 0.04 * k
    gain = 1.0 - 0.02 * k
    offset = 0.01 * (k % 3)
    a = np.zeros((h, w, ch))
    b = np.zeros((h, w, ch))
    for y in range(h):
        for x in range(w):
            for c in range(ch):
                base = (0.5 + 0.3 * math.sin(fx * x + 0.7 * c + k) * math.cos(fy * y)
                        + 0.2 * (hash_unit(k, 0, x, y, c) - 0.5))
                a[y, x, c] = base
                b[y, x, c] = gain * ((1.0 - mix) * base + mix * hash_unit(k, 1, x, y, c)) + offset
    return a, b


def main():
    values = []
    kw = dict(gaussian_weights=True, sigma=1.5, use_sample_covariance=False, data_range=1.0)
    for k in range(20):
        a, b = ssim_pair(k)
        if a.shape[2] == 1:
            s = structural_similarity(a[:, :, 0], b[:, :, 0], **kw)
        else:
            s = structural_similarity(a, b, channel_axis=2, **kw)
        values.append(s)
    print("{" + ", ".join(f"{v:.12f}" for v in values) + "}")

    # Flat gray against flat gray plus uniform noise of sd 0.05.
    flat = np.full((32, 40), 0.5)
    noisy = np.array([[0.5 + 0.05 * math.sqrt(3.0) * (2.0 * hash_unit(99, 2, x, y, 0) - 1.0)
                       for x in range(40)] for y in range(32)])
    print(f"flat+noise: {structural_similarity(flat, noisy, **kw):.12f}")


if __name__ == "__main__":
    main()
