# Core module
from .errors import ToolkitError
from .spectral import GaussianFamily, SpectralPath, sample_family, sample_path
from .norms import NormSpec, evaluate_norm
