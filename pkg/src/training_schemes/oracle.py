import numpy as np

from ..channel import ChannelVector
from ..codebooks import CodewordId, PolarCodebook
from .training_scheme import argmax_lowest


def oracle_best_codeword(channel: ChannelVector, polar_codebook: PolarCodebook) -> CodewordId:
    """Noiseless argmax over F of |h^H f|; ties go to the lowest (n, s)."""

    gains = np.abs(polar_codebook.codewords @ channel.row) ** 2
    return polar_codebook.codeword_id(argmax_lowest(gains))
