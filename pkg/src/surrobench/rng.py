"""Counter-based random number generation.

Every stochastic block in the workbench draws from this generator instead of
a platform RNG so that identical seeds give identical streams on every
platform and under any internal parallelisation.  The core is the splitmix64
output function applied to ``key + counter * GOLDEN``: the i-th raw value is a
pure function of (key, i), which makes independent derived streams cheap
(``derive``) and keeps vectorised and scalar paths bit-identical.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# 2**-53, the spacing of doubles in [0.5, 1); 53-bit uniforms avoid rounding bias
_INV53 = 1.0 / (1 << 53)


def _mix(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def _mix_array(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= np.uint64(_MIX1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_MIX2)
    z ^= z >> np.uint64(31)
    return z


class CounterRng:
    """Deterministic counter-based RNG with derivable sub-streams."""

    def __init__(self, seed: int, stream: int = 0):
        key = _mix((int(seed) & _MASK64) ^ _mix(int(stream) & _MASK64))
        self._key = key
        self._counter = 0

    @classmethod
    def _from_key(cls, key: int) -> "CounterRng":
        rng = cls.__new__(cls)
        rng._key = key & _MASK64
        rng._counter = 0
        return rng

    def derive(self, *indices: int) -> "CounterRng":
        """Independent stream addressed by integer indices (order matters)."""
        key = self._key
        for ix in indices:
            key = _mix((key + (int(ix) + 1) * _GOLDEN) & _MASK64)
        return CounterRng._from_key(key)

    def _next_u64(self) -> int:
        self._counter += 1
        return _mix((self._key + self._counter * _GOLDEN) & _MASK64)

    def _raw_block(self, n: int) -> np.ndarray:
        start = self._counter + 1
        self._counter += n
        counters = np.arange(start, start + n, dtype=np.uint64)
        return _mix_array(np.uint64(self._key) + counters * np.uint64(_GOLDEN))

    def uniforms(self, n: int) -> np.ndarray:
        """n doubles uniform on [0, 1)."""
        return (self._raw_block(n) >> np.uint64(11)).astype(np.float64) * _INV53

    def uniform(self) -> float:
        return float(self._next_u64() >> 11) * _INV53

    def normals(self, n: int) -> np.ndarray:
        """n standard normals via Box-Muller on open-interval uniforms."""
        half = (n + 1) // 2
        # u1 in (0, 1] so log(u1) is finite
        u1 = ((self._raw_block(half) >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * _INV53
        u2 = self.uniforms(half)
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        out = np.empty(2 * half)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:n]

    def normal(self) -> float:
        u1 = (float(self._next_u64() >> 11) + 1.0) * _INV53
        u2 = self.uniform()
        return float(np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2))

    def integers(self, n: int, bound: int) -> np.ndarray:
        """n integers uniform on {0, ..., bound-1}."""
        if bound < 1:
            raise ValueError("bound must be >= 1")
        out = np.floor(self.uniforms(n) * bound).astype(np.int64)
        # uniforms() < 1.0 strictly, but guard the product rounding edge anyway
        return np.minimum(out, bound - 1)

    def permutation(self, n: int) -> np.ndarray:
        """Deterministic permutation of range(n) (argsort of one uniform block)."""
        return np.argsort(self.uniforms(n), kind="stable")

    def categorical(self, n: int, probabilities: np.ndarray) -> np.ndarray:
        """n draws from a finite distribution, returned as category indices."""
        cdf = np.cumsum(np.asarray(probabilities, dtype=np.float64))
        cdf[-1] = 1.0  # absorb accumulated rounding so the last bin is reachable
        return np.searchsorted(cdf, self.uniforms(n), side="right").astype(np.int64)

    def _gamma(self, shape: float) -> float:
        """One Gamma(shape, 1) draw, Marsaglia-Tsang with the a<1 boost."""
        if shape < 1.0:
            # Gamma(a) = Gamma(a+1) * U^(1/a)
            u = self.uniform()
            while u <= 0.0:
                u = self.uniform()
            return self._gamma(shape + 1.0) * u ** (1.0 / shape)
        d = shape - 1.0 / 3.0
        c = 1.0 / np.sqrt(9.0 * d)
        while True:
            x = self.normal()
            v = 1.0 + c * x
            if v <= 0.0:
                continue
            v = v * v * v
            u = self.uniform()
            if u < 1.0 - 0.0331 * x * x * x * x:
                return d * v
            if u > 0.0 and np.log(u) < 0.5 * x * x + d * (1.0 - v + np.log(v)):
                return d * v

    def beta(self, alpha: float) -> float:
        """One Beta(alpha, alpha) draw.

        Johnk's rejection method for alpha <= 1 (where it is efficient),
        gamma-ratio X/(X+Y) above.
        """
        if alpha <= 0:
            raise ValueError("alpha must be > 0")
        if alpha <= 1.0:
            while True:
                u = self.uniform()
                v = self.uniform()
                if u <= 0.0 or v <= 0.0:
                    continue
                x = u ** (1.0 / alpha)
                y = v ** (1.0 / alpha)
                if x + y <= 1.0:
                    if x + y > 0.0:
                        return x / (x + y)
        x = self._gamma(alpha)
        y = self._gamma(alpha)
        if x + y == 0.0:
            return 0.5
        return x / (x + y)

    def betas(self, n: int, alpha: float) -> np.ndarray:
        return np.array([self.beta(alpha) for _ in range(n)])
