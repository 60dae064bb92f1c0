"""Split-step ensembles for the weakly forced Ito-Schrodinger equation,
kinetic references and limit-law statistics.

The heavy lifting lives in the _speckle extension; this package re-exports
its surface.  The extension sits inside the package when installed and on
the path when running against a plain CMake build tree.
"""

try:
    from . import _speckle as _ext
except ImportError:  # build-tree layout
    import _speckle as _ext

CorrelationModel = _ext.CorrelationModel
GridSpec = _ext.GridSpec
SpeckleConfigError = _ext.SpeckleConfigError
ProbeError = _ext.ProbeError
TailError = _ext.TailError
__version__ = _ext.__version__
default_config_text = _ext.default_config_text
diffusion_matrix = _ext.diffusion_matrix
intensity_exponential_pass = _ext.intensity_exponential_pass
ks_pvalue = _ext.ks_pvalue
mode_weights = _ext.mode_weights
normal_quantile = _ext.normal_quantile
run_command = _ext.run_command
run_trajectory = _ext.run_trajectory
sample_ou_paths = _ext.sample_ou_paths
sigma_sq = _ext.sigma_sq
wtilde_grid = _ext.wtilde_grid
wtilde_mc = _ext.wtilde_mc
wtilde_series = _ext.wtilde_series

__all__ = [
    "CorrelationModel",
    "GridSpec",
    "ProbeError",
    "SpeckleConfigError",
    "TailError",
    "__version__",
    "default_config_text",
    "diffusion_matrix",
    "intensity_exponential_pass",
    "ks_pvalue",
    "mode_weights",
    "normal_quantile",
    "run_command",
    "run_trajectory",
    "sample_ou_paths",
    "sigma_sq",
    "wtilde_grid",
    "wtilde_mc",
    "wtilde_series",
]
