"""On-disk formats: PGM/PBM images and demonstration archives.

A demonstration archive is a directory holding ``manifest.json`` (per-frame
pose, timestamp, image filename) plus one 8-bit PGM per frame.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .demos import Demonstration, Frame


def write_pgm(path, img):
    """8-bit binary PGM from a [0, 1] image."""
    img = np.asarray(img, dtype=np.float64)
    data = np.clip(np.round(img * 255.0), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{data.shape[1]} {data.shape[0]}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def read_pgm(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    fields = []
    pos = 0
    while len(fields) < 4:
        # skip whitespace and comment lines between header tokens
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        fields.append(raw[start:pos])
    if fields[0] != b"P5":
        raise ValueError(f"unsupported PGM magic {fields[0]!r}")
    width, height, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    pos += 1
    data = np.frombuffer(raw[pos : pos + width * height], dtype=np.uint8)
    if data.size != width * height:
        raise ValueError("PGM payload truncated")
    return data.reshape(height, width).astype(np.float64) / float(maxval)


def write_pbm(path, mask):
    """Plain-text (P1) PBM from a boolean mask."""
    mask = np.asarray(mask).astype(int)
    lines = [f"P1\n{mask.shape[1]} {mask.shape[0]}\n"]
    for row in mask:
        lines.append(" ".join(str(int(v)) for v in row) + "\n")
    Path(path).write_text("".join(lines), encoding="ascii")


def read_pbm(path):
    text = Path(path).read_text(encoding="ascii")
    tokens = [t for t in text.replace("\n", " ").split(" ") if t and not t.startswith("#")]
    if tokens[0] != "P1":
        raise ValueError(f"unsupported PBM magic {tokens[0]!r}")
    width, height = int(tokens[1]), int(tokens[2])
    bits = np.array([int(t) for t in tokens[3 : 3 + width * height]], dtype=bool)
    return bits.reshape(height, width)


def save_demonstration(demo, dirpath):
    dirpath = Path(dirpath)
    dirpath.mkdir(parents=True, exist_ok=True)
    frames = []
    for i, frame in enumerate(demo.frames):
        name = f"frame_{i:04d}.pgm"
        write_pgm(dirpath / name, frame.image)
        frames.append(
            {
                "pose": [float(v) for v in frame.pose],
                "timestamp": float(frame.timestamp),
                "image": name,
            }
        )
    manifest = {
        "source_id": demo.source_id,
        "confidence": demo.confidence,
        "mahalanobis": demo.mahalanobis,
        "frame_count": len(frames),
        "frames": frames,
    }
    with open(dirpath / "manifest.json", "w") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=1)


def load_demonstration(dirpath):
    dirpath = Path(dirpath)
    with open(dirpath / "manifest.json") as fh:
        manifest = json.load(fh)
    frames = [
        Frame(
            image=read_pgm(dirpath / rec["image"]),
            pose=np.asarray(rec["pose"], dtype=np.float64),
            timestamp=rec["timestamp"],
        )
        for rec in manifest["frames"]
    ]
    return Demonstration(
        frames=frames,
        source_id=manifest.get("source_id", dirpath.name),
        confidence=manifest.get("confidence"),
        mahalanobis=manifest.get("mahalanobis"),
    )


def save_demo_set(demos, dirpath):
    dirpath = Path(dirpath)
    dirpath.mkdir(parents=True, exist_ok=True)
    names = []
    for i, demo in enumerate(demos):
        name = f"demo_{i:03d}"
        save_demonstration(demo, dirpath / name)
        names.append(name)
    with open(dirpath / "set.json", "w") as fh:
        json.dump({"demos": names}, fh, sort_keys=True, indent=1)


def load_demo_set(dirpath):
    dirpath = Path(dirpath)
    index = dirpath / "set.json"
    if index.exists():
        with open(index) as fh:
            names = json.load(fh)["demos"]
    else:
        names = sorted(p.name for p in dirpath.iterdir() if (p / "manifest.json").exists())
    if not names:
        raise FileNotFoundError(f"no demonstrations found under {dirpath}")
    return [load_demonstration(dirpath / name) for name in names]
