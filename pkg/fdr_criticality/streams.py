'''
Counter-based random substreams.

Every replicate of every experiment draws from its own
:class:`numpy.random.Philox` stream, keyed by the experiment seed and the
replicate coordinates.  Streams depend only on ``(seed, *keys)``, so results
do not depend on how replicates are scheduled across workers.
'''
import numpy as np

SEED_MASK = 2 ** 64 - 1


def substream(seed, *keys):
    '''
    Return an independent generator for the given seed and keys.

    Parameters
    ----------
    seed : int
        Experiment seed.  Any 64-bit value; negative seeds are taken modulo
        ``2**64``.
    *keys : int
        Non-negative integer coordinates of the substream, e.g., replicate
        index, or ``(m, replicate)``.

    Returns
    -------
    numpy.random.Generator

    Raises
    ------
    ValueError
        If a key is negative.
    '''
    seed = int(seed) & SEED_MASK
    keys = tuple(int(k) for k in keys)
    if any(k < 0 for k in keys):
        raise ValueError('Stream keys must be non-negative, got %s' %
                         (keys, ))
    sequence = np.random.SeedSequence(seed, spawn_key=keys)
    return np.random.Generator(np.random.Philox(sequence))


def rate_key(rate):
    '''
    Integer stream key for a resampling rate (micro-units).
    '''
    return int(round(float(rate) * 10 ** 6))
