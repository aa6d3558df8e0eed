#!/usr/bin/env python3
"""Train the desk-scale reference CNN and export it as assets/digits16_cnn_v1.spm.

Architecture (5 edge layers, matching the engine's dataflow exactly):
  conv 1->8  3x3 s1 p1, relu, maxpool2   (16x16 -> 8x8)
  conv 8->16 3x3 s1 p1, relu, maxpool2   (8x8 -> 4x4)
  conv 16->16 3x3 s1 p1, relu            (4x4)
  fc 256->64, relu
  fc 64->10
Inputs are pixel/255.  The exported file is the versioned binary model
format documented in README.md (little-endian, float32 weights).
"""

import struct
from pathlib import Path

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "assets" / "digits16"
OUT = ROOT / "assets" / "digits16_cnn_v1.spm"
SEED = 7


def read_idx_images(path):
    raw = path.read_bytes()
    magic, n, rows, cols = struct.unpack(">iiii", raw[:16])
    assert magic == 0x00000803
    return np.frombuffer(raw[16:], dtype=np.uint8).reshape(n, rows, cols)


def read_idx_labels(path):
    raw = path.read_bytes()
    magic, n = struct.unpack(">ii", raw[:8])
    assert magic == 0x00000801
    return np.frombuffer(raw[8:], dtype=np.uint8)


class Net(nn.Module):
    def __init__(self):
        super().__init__()
        self.c1 = nn.Conv2d(1, 8, 3, padding=1)
        self.c2 = nn.Conv2d(8, 16, 3, padding=1)
        self.c3 = nn.Conv2d(16, 16, 3, padding=1)
        self.f1 = nn.Linear(256, 64)
        self.f2 = nn.Linear(64, 10)

    def forward(self, x):
        x = F.max_pool2d(F.relu(self.c1(x)), 2)
        x = F.max_pool2d(F.relu(self.c2(x)), 2)
        x = F.relu(self.c3(x))
        x = x.flatten(1)
        x = F.relu(self.f1(x))
        return self.f2(x)


CONV, FC = 0, 1
# kind, c_in, c_out, kernel, stride, pad, feat, relu, pool
LAYOUT = [
    (CONV, 1, 8, 3, 1, 1, 16, 1, 2),
    (CONV, 8, 16, 3, 1, 1, 8, 1, 2),
    (CONV, 16, 16, 3, 1, 1, 4, 1, 1),
    (FC, 256, 64, 1, 1, 0, 1, 1, 1),
    (FC, 64, 10, 1, 1, 0, 1, 0, 1),
]


def export(net, path):
    mods = [net.c1, net.c2, net.c3, net.f1, net.f2]
    with open(path, "wb") as f:
        f.write(b"SPMODEL1")
        f.write(struct.pack("<III", 1, 10, len(LAYOUT)))
        for geom, mod in zip(LAYOUT, mods):
            w = mod.weight.detach().numpy().astype("<f4").ravel()
            b = mod.bias.detach().numpy().astype("<f4").ravel()
            f.write(struct.pack("<9I", *geom))
            f.write(struct.pack("<QQ", w.size, b.size))
            f.write(w.tobytes())
            f.write(b.tobytes())


def accuracy(net, x, y):
    with torch.no_grad():
        pred = net(x).argmax(1)
        return (pred == y).float().mean().item()


def quantized_accuracy(net, x, y, m=8):
    """Fixed-point round trip with a global clamp (max |w| over the model)."""
    ws = [p.detach().clone() for p in (net.c1.weight, net.c2.weight, net.c3.weight,
                                       net.f1.weight, net.f2.weight)]
    c = max(w.abs().max().item() for w in ws)
    s = c / (2 ** (m - 1) - 1)
    with torch.no_grad():
        for w in (net.c1.weight, net.c2.weight, net.c3.weight, net.f1.weight, net.f2.weight):
            q = torch.round(w.abs() / s).clamp(max=2 ** (m - 1) - 1)
            w.copy_(torch.sign(w) * q * s)
    acc = accuracy(net, x, y)
    with torch.no_grad():
        for w, orig in zip((net.c1.weight, net.c2.weight, net.c3.weight,
                            net.f1.weight, net.f2.weight), ws):
            w.copy_(orig)
    return acc, c


def main():
    torch.manual_seed(SEED)
    torch.set_num_threads(1)
    np.random.seed(SEED)

    xtr = torch.from_numpy(read_idx_images(DATA / "train-images-idx3-ubyte").copy()).float().unsqueeze(1) / 255.0
    ytr = torch.from_numpy(read_idx_labels(DATA / "train-labels-idx1-ubyte").copy()).long()
    xte = torch.from_numpy(read_idx_images(DATA / "test-images-idx3-ubyte").copy()).float().unsqueeze(1) / 255.0
    yte = torch.from_numpy(read_idx_labels(DATA / "test-labels-idx1-ubyte").copy()).long()

    net = Net()
    opt = torch.optim.Adam(net.parameters(), lr=1e-3, weight_decay=1e-4)
    sched = torch.optim.lr_scheduler.MultiStepLR(opt, milestones=[14, 20], gamma=0.3)
    batch = 128
    for epoch in range(24):
        perm = torch.randperm(len(xtr))
        net.train()
        for i in range(0, len(xtr), batch):
            idx = perm[i:i + batch]
            opt.zero_grad()
            loss = F.cross_entropy(net(xtr[idx]), ytr[idx])
            loss.backward()
            opt.step()
        sched.step()
        net.eval()
        print(f"epoch {epoch}: test acc {accuracy(net, xte, yte):.4f}")

    net.eval()
    acc = accuracy(net, xte, yte)
    qacc, c = quantized_accuracy(net, xte, yte)
    print(f"final test acc {acc:.4f}, fixed8 (c={c:.4f}) acc {qacc:.4f}")
    assert acc >= 0.97, "reference model below target accuracy"

    export(net, OUT)
    print(f"wrote {OUT} ({OUT.stat().st_size} bytes)")


if __name__ == "__main__":
    main()
