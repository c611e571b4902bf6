#!/usr/bin/env python3
"""Prints the derived constants frozen into the C++ unit tests.

Each value is computed here from the documented algorithm (SplitMix64 +
Fisher-Yates, FNV-1a 64, token F1 / bigram Dice), independently of the C++
implementation.
"""
import math

M64 = (1 << 64) - 1


def splitmix64(seed):
    state = seed & M64
    while True:
        state = (state + 0x9E3779B97F4A7C15) & M64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
        yield z ^ (z >> 31)


def split(ids, ratio, seed):
    order = list(range(len(ids)))
    rng = splitmix64(seed)
    for i in range(len(ids) - 1, 0, -1):
        j = next(rng) % (i + 1)
        order[i], order[j] = order[j], order[i]
    n_train = math.floor(ratio * len(ids))
    train = set(order[:n_train])
    return ([ids[i] for i in range(len(ids)) if i in train],
            [ids[i] for i in range(len(ids)) if i not in train])


def fnv1a64(data, h=0xCBF29CE484222325):
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & M64
    return h


def main():
    gen = splitmix64(42)
    print("splitmix64(42) first 3:", [hex(next(gen)) for _ in range(3)])

    ids10 = [f"e{i}" for i in range(10)]
    tr, va = split(ids10, 0.8, 42)
    print("10 ids seed 42 validation:", va)

    ids = [f"flute-{i:05d}" for i in range(7534)]
    tr, va = split(ids, 0.8, 42)
    digest = fnv1a64("\n".join(va).encode())
    print("7534 ids: train", len(tr), "validation", len(va))
    print("validation digest: %016x" % digest)
    print("first 5 validation:", va[:5])

    s = "We laid in fields of gold."
    for dim in ["consequence", "emotion", "motivation", "social norm"]:
        h = fnv1a64(s.encode() + b"\x1f" + dim.encode())
        print("stub", dim, "%016x" % h)
    print("sentence key: %016x" % fnv1a64(s.encode()))

    # "the cat sat" vs "the cat ran": tokens P = R = 2/3.
    f1 = 100 * 2 * (2 / 3) * (2 / 3) / (4 / 3)
    a = b"the cat sat"
    b = b"the cat ran"
    ba = [a[i:i + 2] for i in range(len(a) - 1)]
    bb = [b[i:i + 2] for i in range(len(b) - 1)]
    from collections import Counter
    ca, cb = Counter(ba), Counter(bb)
    ov = sum(min(n, cb[k]) for k, n in ca.items())
    dice = 100 * 2 * ov / (len(ba) + len(bb))
    print("cat: f1 %.17g dice %.17g final %.17g" % (f1, dice, (f1 + dice) / 2))


if __name__ == "__main__":
    main()
