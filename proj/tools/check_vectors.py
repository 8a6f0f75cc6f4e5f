#!/usr/bin/env python3
# Copyright 2026 The MPSI Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Independent re-derivation of tests/data/crypto_vectors.txt.

Uses hashlib (SHAKE256) and the `cryptography` package (AES) rather than the
C++ code paths. Exit status is nonzero on any mismatch.
"""
import hashlib
import sys

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes


def shake(tag, *parts, n):
    h = hashlib.shake_256(bytes([tag]))
    for p in parts:
        h.update(p)
    return h.digest(n)


def clear_pad(b, bits):
    b = bytearray(b)
    if bits % 8 and b:
        b[-1] &= (1 << (bits % 8)) - 1
    return bytes(b)


def aes_block(key, block):
    enc = Cipher(algorithms.AES(key), modes.ECB()).encryptor()
    return enc.update(block) + enc.finalize()


def h1(x, ell1):
    return clear_pad(shake(1, x, n=(ell1 + 7) // 8), ell1)


def h2(w, bits, ell2):
    return clear_pad(shake(2, w.to_bytes(4, "little"), bits, n=(ell2 + 7) // 8), ell2)


def prf(key, m, w, digest):
    keys = shake(3, key, n=64)
    tweak = bytes(16)
    for off in range(0, len(digest), 16):
        chunk = digest[off:off + 16].ljust(16, b"\0")
        tweak = aes_block(keys[:32], bytes(a ^ b for a, b in zip(tweak, chunk)))
    out = []
    for b in range((w + 1) // 2):
        ctr = bytes(a ^ c for a, c in zip(tweak, b.to_bytes(8, "little") + bytes(8)))
        blk = aes_block(keys[32:], ctr)
        out += [int.from_bytes(blk[0:8], "little") % m, int.from_bytes(blk[8:16], "little") % m]
    return out[:w]


def prg(seed, bits):
    key = shake(4, seed, n=32)
    n = (bits + 7) // 8
    enc = Cipher(algorithms.AES(key), modes.CTR(bytes(16))).encryptor()
    return clear_pad(enc.update(bytes(n)) + enc.finalize(), bits)


def unhex(s):
    return b"" if s == "-" else bytes.fromhex(s)


def main(path):
    bad = 0
    count = 0
    for line in open(path):
        if line.startswith("#") or not line.strip():
            continue
        f = line.split()
        count += 1
        if f[0] == "h1":
            ok = h1(unhex(f[1]), int(f[2])).hex() == f[3]
        elif f[0] == "h2":
            ok = h2(int(f[1]), bytes.fromhex(f[2]), int(f[3])).hex() == f[4]
        elif f[0] == "prf":
            got = prf(bytes.fromhex(f[1]), int(f[2]), int(f[3]), bytes.fromhex(f[4]))
            ok = ",".join(map(str, got)) == f[5]
        elif f[0] == "prg":
            ok = prg(bytes.fromhex(f[1]), int(f[2])).hex() == f[3]
        else:
            ok = False
        if not ok:
            bad += 1
            print("MISMATCH", line.strip()[:80])
    print(f"{count} vectors, {bad} mismatches")
    return 1 if bad or count == 0 else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1] if len(sys.argv) > 1 else "tests/data/crypto_vectors.txt"))
