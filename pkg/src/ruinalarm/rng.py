"""Counter-based Philox4x32-10 generator, vectorised over numpy arrays.

Every random word is a pure function of ``(key, counter)``, so a draw can be
addressed directly by ``(master_seed, path_index, draw_index)`` without any
sequential state.  That is what makes path simulation independent of how the
work is split between workers.
"""

import numpy as np

_MASK32 = np.uint64(0xFFFFFFFF)
_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_SHIFT32 = np.uint64(32)

ROUNDS = 10


def philox4x32(counter, key, rounds=ROUNDS):
    """Apply the Philox4x32 bijection.

    Args:
        counter: four arrays (broadcastable) of 32-bit counter words.
        key: two 32-bit key words (scalars or arrays).
        rounds: number of rounds; 10 is the standard strength.

    Returns:
        Tuple of four ``uint64`` arrays, each holding a 32-bit output word.
    """
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint64) & _MASK32 for c in counter)
    k0, k1 = (np.asarray(k, dtype=np.uint64) & _MASK32 for k in key)
    c0, c1, c2, c3 = np.broadcast_arrays(c0, c1, c2, c3)
    for r in range(rounds):
        if r:
            k0 = (k0 + _W0) & _MASK32
            k1 = (k1 + _W1) & _MASK32
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0, lo0 = p0 >> _SHIFT32, p0 & _MASK32
        hi1, lo1 = p1 >> _SHIFT32, p1 & _MASK32
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


def _split64(x):
    x = np.asarray(x, dtype=np.uint64)
    return x & _MASK32, x >> _SHIFT32


def _to_unit(hi, lo):
    # 53-bit mantissa from two words, offset by half a step so 0 and 1 never occur.
    v = (hi >> np.uint64(5)).astype(np.float64) * 67108864.0 + (lo >> np.uint64(6)).astype(np.float64)
    return (v + 0.5) * (1.0 / 9007199254740992.0)


def uniform_pair(master_seed, path_index, draw_index):
    """Two independent U(0,1) variates per ``(path_index, draw_index)``.

    ``path_index`` and ``draw_index`` broadcast against each other; the
    result arrays have the broadcast shape.  The first variate drives the
    inter-arrival time, the second the claim severity.
    """
    seed = int(master_seed) & 0xFFFFFFFFFFFFFFFF
    key = (np.uint64(seed & 0xFFFFFFFF), np.uint64(seed >> 32))
    d_lo, d_hi = _split64(draw_index)
    p_lo, p_hi = _split64(path_index)
    w0, w1, w2, w3 = philox4x32((d_lo, d_hi, p_lo, p_hi), key)
    return _to_unit(w0, w1), _to_unit(w2, w3)
