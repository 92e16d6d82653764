"""Regenerate src/holomux/data/coffee_512.pgm.

Source: the "coffee" photograph shipped with scikit-image (CC0, photo by
Rachel Michetti).  Central 400x400 crop, converted to grayscale and resampled
to 512x512.  Requires scikit-image, which the library itself does not need.
"""

from pathlib import Path

import numpy as np
from PIL import Image
from skimage import color, data, transform

OUT = Path(__file__).resolve().parents[1] / "src" / "holomux" / "data" / "coffee_512.pgm"


def main():
    rgb = data.coffee()
    h, w = rgb.shape[:2]
    s = min(h, w)
    crop = rgb[(h - s) // 2:(h - s) // 2 + s, (w - s) // 2:(w - s) // 2 + s]
    gray = transform.resize(color.rgb2gray(crop), (512, 512), anti_aliasing=True)
    Image.fromarray(np.round(gray * 255).astype(np.uint8), mode="L").save(OUT)
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
