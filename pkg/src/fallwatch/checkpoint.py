"""Bit-exact model serialization.

Wire format (all integers little-endian):

    magic  "FNET"            4 bytes
    version u32              currently 1
    layer count u32
    per layer:
        kind    u8           1=conv2d 2=relu 3=maxpool2d 4=flatten 5=dense 6=sigmoid
        rank    u8           rank of the weight tensor (0 for layers without one)
        dims    u32 * rank
        payload f32 * prod(dims)   weights, row-major
        payload f32 * bias_len     biases (conv: dims[3], dense: dims[1])

No padding between records.  Loading a saved model reproduces bit-identical
predictions.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import FormatError
from .layers import Conv2D, Dense, Flatten, MaxPool2D, ReLU, Sigmoid
from .model import FallNet

MAGIC = b"FNET"
VERSION = 1

KIND_TAGS = {"conv2d": 1, "relu": 2, "maxpool2d": 3, "flatten": 4, "dense": 5, "sigmoid": 6}
TAG_KINDS = {v: k for k, v in KIND_TAGS.items()}
_PARAMLESS = {"relu": ReLU, "maxpool2d": MaxPool2D, "flatten": Flatten, "sigmoid": Sigmoid}


def serialize_model(model: FallNet) -> bytes:
    out = [MAGIC, struct.pack("<I", VERSION), struct.pack("<I", len(model.layers))]
    for layer in model.layers:
        tag = KIND_TAGS[layer.kind]
        if layer.kind == "conv2d":
            weights, bias = layer.kernels, layer.bias
        elif layer.kind == "dense":
            weights, bias = layer.weights, layer.bias
        else:
            out.append(struct.pack("<BB", tag, 0))
            continue
        out.append(struct.pack("<BB", tag, weights.ndim))
        out.append(struct.pack(f"<{weights.ndim}I", *weights.shape))
        out.append(np.ascontiguousarray(weights, dtype="<f4").tobytes())
        out.append(np.ascontiguousarray(bias, dtype="<f4").tobytes())
    return b"".join(out)


def save_checkpoint(model: FallNet, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_model(model))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError(f"truncated checkpoint while reading {what}", offset=self.pos)
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]

    def floats(self, count: int, what: str) -> np.ndarray:
        raw = self.take(4 * count, what)
        return np.frombuffer(raw, dtype="<f4").astype(np.float32)


def deserialize_model(data: bytes) -> FallNet:
    r = _Reader(data)
    if r.take(4, "magic") != MAGIC:
        raise FormatError("bad magic bytes, not a checkpoint", offset=0)
    version = r.u32("version")
    if version != VERSION:
        raise FormatError(f"unsupported checkpoint version {version}", offset=4)
    count = r.u32("layer count")

    layers = []
    for i in range(count):
        tag, rank = struct.unpack("<BB", r.take(2, f"layer {i} header"))
        kind = TAG_KINDS.get(tag)
        if kind is None:
            raise FormatError(f"unknown layer kind tag {tag}", offset=r.pos - 2)
        dims = [r.u32(f"layer {i} dim") for _ in range(rank)]
        if kind == "conv2d":
            if rank != 4:
                raise FormatError(f"conv2d layer {i} must have rank 4, got {rank}", offset=r.pos)
            weights = r.floats(int(np.prod(dims)), f"layer {i} kernels").reshape(dims)
            bias = r.floats(dims[3], f"layer {i} bias")
            layers.append(Conv2D(weights, bias))
        elif kind == "dense":
            if rank != 2:
                raise FormatError(f"dense layer {i} must have rank 2, got {rank}", offset=r.pos)
            weights = r.floats(dims[0] * dims[1], f"layer {i} weights").reshape(dims)
            bias = r.floats(dims[1], f"layer {i} bias")
            layers.append(Dense(weights, bias))
        else:
            if rank != 0:
                raise FormatError(f"{kind} layer {i} must have rank 0, got {rank}", offset=r.pos)
            layers.append(_PARAMLESS[kind]())
    if r.pos != len(data):
        raise FormatError(f"{len(data) - r.pos} trailing bytes after last layer", offset=r.pos)
    # the wire format does not carry the input size; forward still validates
    # channel count and the flatten/dense interface at run time
    return FallNet(layers, input_size=None)


def load_checkpoint(path) -> FallNet:
    with open(path, "rb") as fh:
        return deserialize_model(fh.read())
