#!/usr/bin/env python3
"""Fetch the grayscale test images used by the benchmark and acceptance suite.

The images are not redistributed with this repository. They are pulled from
source distributions published on PyPI that happen to bundle them, converted
to 8-bit binary PGM, and written to ``corpus/`` (or the directory given as the
first argument). A ``SOURCES.txt`` file records origin and SHA-256 of every
output file.

Targets:
  lena.pgm       512x512, scipy 0.16.1 sdist, scipy/misc/lena.dat (pickled array)
  cameraman.pgm  256x256, bm3d 4.0.3 sdist, examples/cameraman256.png
  barbara.pgm    512x512, pyunlocbox 0.6.1 sdist, doc/tutorials/barbara.png

Not obtainable from a package index, supply them yourself as 8-bit PGM/PNG:
  house.pgm (256x256), peppers.pgm (256x256), mandrill.pgm (512x512)
"""

import hashlib
import io
import pickle
import sys
import tarfile
import urllib.request
from pathlib import Path

import numpy as np
from PIL import Image

PYPI = "https://pypi.org/packages"

SOURCES = {
    "lena": (
        "7b/e1/ecc1820874c396a094e6df30d4d3aa8119d4987c5ff0b9caec73db362849/scipy-0.16.1.tar.gz",
        "scipy-0.16.1/scipy/misc/lena.dat",
    ),
    "cameraman": (
        "e6/3a/ef3cbc420270472e3b4302acfd259ed58f5508ac217cc23eb9d1c7c1b204/bm3d-4.0.3.tar.gz",
        "bm3d-4.0.3/examples/cameraman256.png",
    ),
    "barbara": (
        "ee/81/793da8ea48ade31e56d4eed505f54607eb71e4e776fbe96243e28573239c/pyunlocbox-0.6.1.tar.gz",
        "pyunlocbox-0.6.1/doc/tutorials/barbara.png",
    ),
}


def fetch_member(path, member):
    url = f"{PYPI}/{path}"
    print(f"fetching {url}", file=sys.stderr)
    with urllib.request.urlopen(url, timeout=600) as resp:
        blob = resp.read()
    with tarfile.open(fileobj=io.BytesIO(blob), mode="r:gz") as tar:
        return tar.extractfile(member).read()


def to_gray(name, raw):
    if name == "lena":
        arr = np.asarray(pickle.loads(raw, encoding="latin1"))
        return arr.astype(np.uint8)
    img = Image.open(io.BytesIO(raw))
    if img.mode == "L":
        return np.asarray(img, dtype=np.uint8)
    rgb = np.asarray(img.convert("RGB"), dtype=np.float64)
    y = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return np.clip(np.floor(y + 0.5), 0, 255).astype(np.uint8)


def write_pgm(path, arr):
    h, w = arr.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(arr.tobytes())


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "corpus")
    out.mkdir(parents=True, exist_ok=True)
    lines = []
    for name, (path, member) in SOURCES.items():
        target = out / f"{name}.pgm"
        if not target.exists():
            write_pgm(target, to_gray(name, fetch_member(path, member)))
        digest = hashlib.sha256(target.read_bytes()).hexdigest()
        lines.append(f"{target.name}\t{digest}\t{path.rsplit('/', 1)[-1]}:{member}")
        print(f"{target} {digest}")
    (out / "SOURCES.txt").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
