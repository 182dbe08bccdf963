"""Shared bits for the reference plugins: line I/O and a port of the host's
seeded generator (std::mt19937_64 plus the same conversions)."""

import json
import sys

MASK64 = (1 << 64) - 1


class MT19937_64:
    N, M = 312, 156
    MATRIX_A = 0xB5026F5AA96619E9
    UPPER, LOWER = 0xFFFFFFFF80000000, 0x7FFFFFFF

    def __init__(self, seed=5489):
        self.seed(seed)

    def seed(self, seed):
        mt = [0] * self.N
        mt[0] = seed & MASK64
        for i in range(1, self.N):
            mt[i] = (6364136223846793005 * (mt[i - 1] ^ (mt[i - 1] >> 62)) + i) & MASK64
        self.mt, self.index = mt, self.N

    def _twist(self):
        mt = self.mt
        for i in range(self.N):
            x = (mt[i] & self.UPPER) | (mt[(i + 1) % self.N] & self.LOWER)
            xa = x >> 1
            if x & 1:
                xa ^= self.MATRIX_A
            mt[i] = mt[(i + self.M) % self.N] ^ xa
        self.index = 0

    def next_u64(self):
        if self.index >= self.N:
            self._twist()
        y = self.mt[self.index]
        self.index += 1
        y ^= (y >> 29) & 0x5555555555555555
        y ^= (y << 17) & 0x71D67FFFEDA60000
        y ^= (y << 37) & 0xFFF7EEE000000000
        y ^= y >> 43
        return y & MASK64


class Rng:
    def __init__(self, seed=0):
        self.engine = MT19937_64(seed)

    def reseed(self, seed):
        self.engine.seed(seed)

    def uniform(self, lo=0.0, hi=1.0):
        u = float(self.engine.next_u64() >> 11) * 2.0 ** -53
        return lo + (hi - lo) * u

    def uniform_int(self, n):
        limit = MASK64 - (MASK64 % n)
        draw = self.engine.next_u64()
        while draw >= limit:
            draw = self.engine.next_u64()
        return draw % n


def send(msg):
    sys.stdout.write(json.dumps(msg) + "\n")
    sys.stdout.flush()


def requests():
    for line in sys.stdin:
        line = line.strip()
        if line:
            yield json.loads(line)


def handshake(descriptor, protocol=1):
    hello = json.loads(sys.stdin.readline())
    if hello.get("type") != "hello":
        send({"type": "error", "message": "expected hello"})
        sys.exit(2)
    send({"type": "hello_ok", "protocol": protocol, "descriptor": descriptor})
    return hello
