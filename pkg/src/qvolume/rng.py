"""Seedable random-number streams for reproducible Monte Carlo runs.

Each :class:`RngStream` is identified by a 64-bit seed and a stream id.
Distinct stream ids spawn statistically independent PCG64 generators from
the same seed, so concurrent chains can share one user-facing seed.

A stream keeps two independent substreams, one for standard-normal and one
for uniform variates.  Consumers may therefore interleave normal and
uniform draws in any order without perturbing each other's sequences,
which lets a vectorised consumer reproduce a scalar consumer bit for bit.
"""

import numpy as np

BLOCK_SIZE = 1 << 16


class RngStream:
    """Reproducible (seed, stream_id)-addressed random stream."""

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        root = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        child_normal, child_uniform = root.spawn(2)
        self._gen_normal = np.random.Generator(np.random.PCG64(child_normal))
        self._gen_uniform = np.random.Generator(np.random.PCG64(child_uniform))
        self._nbuf = np.empty(0)
        self._ncur = 0
        self._ubuf = np.empty(0)
        self._ucur = 0

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"

    def normal_block(self, size: int = BLOCK_SIZE) -> np.ndarray:
        """Next block of standard-normal variates (advances the substream)."""
        return self._gen_normal.standard_normal(size)

    def uniform_block(self, size: int = BLOCK_SIZE) -> np.ndarray:
        """Next block of uniforms on [0, 1) (advances the substream)."""
        return self._gen_uniform.random(size)

    def take_normals(self, k: int) -> np.ndarray:
        """Buffered draw of ``k`` standard normals."""
        out = np.empty(k)
        filled = 0
        while filled < k:
            if self._ncur >= self._nbuf.size:
                self._nbuf = self.normal_block()
                self._ncur = 0
            take = min(k - filled, self._nbuf.size - self._ncur)
            out[filled:filled + take] = self._nbuf[self._ncur:self._ncur + take]
            self._ncur += take
            filled += take
        return out

    def take_uniform(self) -> float:
        """Buffered draw of a single uniform on [0, 1)."""
        if self._ucur >= self._ubuf.size:
            self._ubuf = self.uniform_block()
            self._ucur = 0
        u = self._ubuf[self._ucur]
        self._ucur += 1
        return float(u)

    def take_uniforms(self, k: int) -> np.ndarray:
        """Buffered draw of ``k`` uniforms (same sequence as take_uniform)."""
        out = np.empty(k)
        filled = 0
        while filled < k:
            if self._ucur >= self._ubuf.size:
                self._ubuf = self.uniform_block()
                self._ucur = 0
            take = min(k - filled, self._ubuf.size - self._ucur)
            out[filled:filled + take] = self._ubuf[self._ucur:self._ucur + take]
            self._ucur += take
            filled += take
        return out
