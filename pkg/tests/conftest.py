import numpy as np
import pytest

from mcsvortex import GridSpec, ScalarField


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def smooth_field(grid: GridSpec, rng, kmax: int = 4, amp: float = 1.0) -> ScalarField:
    """Random real field band-limited to |k_x|, |k_y| <= kmax, sup-scaled to amp."""
    noise = rng.standard_normal((grid.N, grid.N))
    fh = np.fft.fft2(noise)
    k = np.fft.fftfreq(grid.N, d=grid.h)
    kx, ky = np.meshgrid(k, k, indexing="ij")
    fh[(np.abs(kx) > kmax) | (np.abs(ky) > kmax)] = 0.0
    vals = np.real(np.fft.ifft2(fh))
    scale = np.abs(vals).max()
    if scale > 0.0:
        vals = vals * (amp / scale)
    return ScalarField(grid, vals)
