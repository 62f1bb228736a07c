"""Binary NetPBM (P5/P6) codec and bilinear resize.

Images are (H, W, 3) float arrays in [0, 1].  P5 grayscale replicates its
single channel to three.  Only maxval <= 255 (one byte per sample) is
supported; `#` comments are allowed anywhere in the header.
"""

from __future__ import annotations

import numpy as np

from .errors import FormatError, ShapeError


def _header_tokens(data: bytes, count: int):
    """Yield `count` whitespace-separated header tokens, skipping # comments.

    Returns (tokens, offset_of_payload).  The single whitespace byte after the
    last token is consumed.
    """
    tokens = []
    pos = 0
    while len(tokens) < count:
        if pos >= len(data):
            raise FormatError("truncated header", offset=pos)
        ch = data[pos:pos + 1]
        if ch == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif ch.isspace():
            pos += 1
        else:
            start = pos
            while pos < len(data) and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
                pos += 1
            tokens.append(data[start:pos])
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise FormatError("missing whitespace after maxval", offset=pos)
    return tokens, pos + 1


def load_netpbm(data: bytes) -> np.ndarray:
    """Decode P5/P6 bytes to an (H, W, 3) float32 image with values in [0, 1]."""
    if not isinstance(data, (bytes, bytearray)):
        raise FormatError("expected bytes")
    magic = bytes(data[:2])
    if magic not in (b"P5", b"P6"):
        raise FormatError(f"bad magic {magic!r}, expected P5 or P6", offset=0)
    tokens, payload_at = _header_tokens(data[2:], 3)
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise FormatError(f"non-integer header field in {tokens}", offset=2) from None
    if width <= 0 or height <= 0:
        raise FormatError(f"non-positive dimensions {width}x{height}", offset=2)
    if not 0 < maxval <= 255:
        raise FormatError(f"maxval {maxval} out of supported range 1..255", offset=2)

    channels = 1 if magic == b"P5" else 3
    payload = data[2 + payload_at:]
    expected = width * height * channels
    if len(payload) < expected:
        raise FormatError(
            f"truncated payload: expected {expected} bytes, got {len(payload)}",
            offset=2 + payload_at + len(payload),
        )
    pixels = np.frombuffer(payload[:expected], dtype=np.uint8)
    pixels = pixels.reshape(height, width, channels).astype(np.float32) / maxval
    if channels == 1:
        pixels = np.repeat(pixels, 3, axis=2)
    return pixels


def save_netpbm(image: np.ndarray, maxval: int = 255) -> bytes:
    """Encode an (H, W, 3) image in [0, 1] as binary P6."""
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ShapeError(f"expected an (H, W, 3) image, got shape {image.shape}")
    h, w = image.shape[:2]
    quantized = np.rint(np.clip(image, 0.0, 1.0) * maxval).astype(np.uint8)
    return b"P6\n%d %d\n%d\n" % (w, h, maxval) + quantized.tobytes()


def _axis_weights(src: int, dst: int):
    """Half-pixel-center sample positions for one axis: lo index, hi index, blend."""
    scale = src / dst
    pos = (np.arange(dst) + 0.5) * scale - 0.5
    pos = np.clip(pos, 0.0, src - 1.0)
    lo = np.floor(pos).astype(np.int64)
    hi = np.minimum(lo + 1, src - 1)
    return lo, hi, (pos - lo)


def resize_bilinear(image: np.ndarray, out_h: int = 64, out_w: int = 64) -> np.ndarray:
    """Bilinear resample with half-pixel centers (source = (i + 0.5)*scale - 0.5)."""
    image = np.asarray(image)
    if image.ndim != 3:
        raise ShapeError(f"expected an (H, W, C) image, got shape {image.shape}")
    if out_h < 1 or out_w < 1:
        raise ShapeError(f"target dims must be positive, got {out_h}x{out_w}")
    y0, y1, wy = _axis_weights(image.shape[0], out_h)
    x0, x1, wx = _axis_weights(image.shape[1], out_w)
    wy = wy[:, None, None].astype(image.dtype)
    wx = wx[None, :, None].astype(image.dtype)
    top = image[y0][:, x0] * (1 - wx) + image[y0][:, x1] * wx
    bottom = image[y1][:, x0] * (1 - wx) + image[y1][:, x1] * wx
    return top * (1 - wy) + bottom * wy
