#!/usr/bin/env python3
# Copyright 2026 The TrojanScan Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes tests/golden/filters/<name>_{in,out}.png from docs/filters.md.

Standalone reference for the C++ filters: plain Python floats, same
evaluation order as the document. Requires Pillow.
"""

import argparse
import math
import pathlib

from PIL import Image

IDENTITY = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))

FILTERS = [
    ("Gotham", IDENTITY, (0.0, 0.0, 0.0), 0.0,
     ((0.0, 0.18, 0.5, 0.82, 1.0),
      (0.0, 0.18, 0.5, 0.82, 1.0),
      (0.0, 0.18, 0.5, 0.82, 1.0)), 0.2),
    ("Nashville", ((0.9, 0.05, 0.05), (0.05, 0.85, 0.1), (0.05, 0.1, 0.8)),
     (0.08, 0.03, 0.07), 0.8,
     ((0.1, 0.35, 0.62, 0.85, 1.0),
      (0.05, 0.28, 0.55, 0.8, 0.97),
      (0.12, 0.33, 0.55, 0.76, 0.92)), 0.0),
    ("Kelvin", ((0.393, 0.769, 0.189), (0.349, 0.686, 0.168),
                (0.272, 0.534, 0.131)),
     (0.0, 0.0, 0.0), 1.6,
     ((0.0, 0.3, 0.62, 0.88, 1.0),
      (0.0, 0.24, 0.5, 0.76, 0.95),
      (0.0, 0.16, 0.36, 0.6, 0.8)), 0.0),
    ("Lomo", IDENTITY, (0.0, 0.0, 0.0), 1.3,
     ((0.0, 0.15, 0.5, 0.85, 1.0),
      (0.0, 0.18, 0.52, 0.86, 1.0),
      (0.05, 0.2, 0.48, 0.8, 0.95)), 0.6),
    ("Toaster", ((1.0, 0.1, 0.0), (0.0, 0.9, 0.05), (0.0, 0.05, 0.8)),
     (0.1, 0.04, 0.0), 0.9,
     ((0.15, 0.42, 0.7, 0.9, 1.0),
      (0.05, 0.3, 0.56, 0.8, 0.95),
      (0.0, 0.2, 0.45, 0.7, 0.85)), 0.35),
]

SIZE = 8


def clamp01(v):
    return min(max(v, 0.0), 1.0)


def to_byte(v):
    s = math.floor(v * 255.0 + 0.5)
    return int(min(max(s, 0), 255))


def golden_input(k):
    px = {}
    for y in range(SIZE):
        for x in range(SIZE):
            px[(y, x)] = ((37 * x + 11 * y + 53 * k) % 256,
                          (13 * x + 59 * y + 29 * k + 7) % 256,
                          (7 * x * y + 23 * x + 17 * k + 91) % 256)
    return px


def apply(px, h, w, mix, bias, sat, curves, vignette):
    out = {}
    for y in range(h):
        dy = (y + 0.5) / h - 0.5
        for x in range(w):
            dx = (x + 0.5) / w - 0.5
            d2 = dx * dx + dy * dy
            gain = 1.0 - vignette * (d2 * 2.0)
            r, g, b = (c / 255.0 for c in px[(y, x)])
            m = [((mix[i][0] * r + mix[i][1] * g) + mix[i][2] * b) + bias[i]
                 for i in range(3)]
            lum = (0.299 * m[0] + 0.587 * m[1]) + 0.114 * m[2]
            res = []
            for i in range(3):
                s = clamp01(lum + sat * (m[i] - lum))
                t = s * 4.0
                j = min(int(math.floor(t)), 3)
                u = t - j
                knots = curves[i]
                c = knots[j] + (knots[j + 1] - knots[j]) * u
                res.append(to_byte(clamp01(c * gain)))
            out[(y, x)] = tuple(res)
    return out


def save(px, path):
    img = Image.new("RGB", (SIZE, SIZE))
    for (y, x), rgb in px.items():
        img.putpixel((x, y), rgb)
    img.save(path)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(pathlib.Path(__file__).resolve()
                                             .parent.parent / "tests" / "golden" /
                                             "filters"))
    args = parser.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for k, (name, mix, bias, sat, curves, vignette) in enumerate(FILTERS):
        src = golden_input(k)
        save(src, out / f"{name}_in.png")
        save(apply(src, SIZE, SIZE, mix, bias, sat, curves, vignette),
             out / f"{name}_out.png")
        print(f"wrote {name}")


if __name__ == "__main__":
    main()
