from .base import RNG_ALGORITHM, TestProblem, add_noise, load_problem, save_problem
from .deblur import BlurOperator, gen_deblur2d, make_psf
from .images import shepp_logan
from .onedim import gen_blur1d, gen_heat, sparse_haar_signal
from .registry import GENERATORS, generate
from .tomo import gen_tomo, tomo_matrix

gen_shepp_logan = shepp_logan

__all__ = [
    "RNG_ALGORITHM", "TestProblem", "add_noise", "load_problem", "save_problem",
    "BlurOperator", "gen_deblur2d", "make_psf", "shepp_logan", "gen_shepp_logan",
    "gen_blur1d", "gen_heat", "sparse_haar_signal", "GENERATORS", "generate",
    "gen_tomo", "tomo_matrix",
]
