"""
Toolkit Configuration Settings

All numerical constants and defaults live here. Time-side integrals use the
normalized Haar measure dt/(2π) on the torus, so Plancherel carries no 2π
factors. Complex Gaussians have Var(g) = 2 (real and imaginary parts are
independent standard normals).
"""

# =============================================================================
# VERSIONING
# =============================================================================
ARTIFACT_VERSION = "1.0.0"
FORMAT_VERSION = 1

# =============================================================================
# SPECTRAL SETTINGS
# =============================================================================
SPECTRAL_SETTINGS = {
    "default_alpha": 1.0,           # Brownian loop
    "oversampling": 8,              # M >= 8 * max retained frequency
    "block_size": 4096,             # lattice indices per Philox block
    "family_domain": 0,             # key domain for g_n draws
    "bridge_domain": 1,             # key domain for bridge increments
    "wick_domain": 2,               # key domain for standalone Gaussian draws
}

# =============================================================================
# NORM SETTINGS
# =============================================================================
NORM_SETTINGS = {
    "default_weight": "bracket",    # <n>^s; "dyadic" uses 2^{js}
    "partition_mode": "sharp",
    "unity_atol": 1e-12,
    "space_aliases": {
        "fl": "FourierLebesgue",
        "fourierlebesgue": "FourierLebesgue",
        "mod": "Modulation",
        "modulation": "Modulation",
        "wam": "WienerAmalgam",
        "amalgam": "WienerAmalgam",
        "wieneramalgam": "WienerAmalgam",
        "fbesov": "FourierBesov",
        "fourierbesov": "FourierBesov",
        "besov": "Besov",
    },
}

# =============================================================================
# MONTE CARLO SETTINGS
# =============================================================================
MONTE_CARLO_SETTINGS = {
    "default_seed": 20100101,
    "default_workers": 1,
    "chunk_size": 256,
    "band_se": 5.0,                 # default acceptance band in standard errors
    "min_hyper_samples": 10_000,
    "min_chaos_tail_samples": 100_000,
    "min_covariance_samples": 1_000,
    "batch_count": 20,              # batch means for ratio standard errors
}

# =============================================================================
# DEVIATION SETTINGS
# =============================================================================
DEVIATION_SETTINGS = {
    "min_tail_samples": 10_000,
    "quantile_range": (0.90, 0.999),
    "k_grid_size": 12,
    "min_bin_exceedances": 50,
    "min_fit_bins": 4,
    "confidence": 0.95,
    "cramer_tolerance": 1e-7,
    "probe_extension": 4,           # N = probe_extension * M0
}

# =============================================================================
# BRIDGE SETTINGS
# =============================================================================
BRIDGE_SETTINGS = {
    "default_grid_size": 4096,
    "default_modes": 16,
    "levy_grid_size": 2 ** 16,
}

# =============================================================================
# REGIME SCAN SETTINGS
# =============================================================================
SCAN_SETTINGS = {
    "slope_threshold": 0.2,         # |kappa| above this is converge/diverge
    "converge_change": 0.05,        # q = inf: relative median change
    "diverge_change": 0.25,
}

# =============================================================================
# OUTPUT SETTINGS
# =============================================================================
OUTPUT_SETTINGS = {
    "default_out": "runs",
    "default_format": "csv",
    "formats": ("csv", "json"),
    "float_format": "%.17g",
    "manifest_name": "manifest.json",
    "summary_name": "summary.json",
}

EXIT_CODES = {
    "ok": 0,
    "config_error": 2,
    "runtime_error": 3,
    "check_failed": 4,
}

# =============================================================================
# ENVIRONMENT OVERRIDES (flag > env > file > defaults)
# =============================================================================
ENV_OVERRIDES = {
    "seed": "BRT_SEED",
    "workers": "BRT_WORKERS",
    "out": "BRT_OUT",
    "format": "BRT_FORMAT",
}

# =============================================================================
# LOGGING SETTINGS
# =============================================================================
LOGGING_SETTINGS = {
    "log_level": "INFO",
    "log_level_env": "BRT_LOG_LEVEL",
    "log_to_file": False,
    "log_file": "toolkit.log",
}

# =============================================================================
# EXPERIMENT DEFAULTS (per subcommand; config files override)
# =============================================================================
SUBCOMMANDS = (
    "sample", "norm", "stats", "scan", "tail", "chaos", "wick",
    "probe", "bridge", "levy", "accept",
)

EXPERIMENT_DEFAULTS = {
    "sample": {"N": [16], "samples": 1, "params": {"dim": 1}},
    "norm": {"N": [1024], "samples": 1, "specs": ["fl:0.3:·:2"], "params": {"dim": 1}},
    "stats": {"N": [2 ** 10], "samples": 10,
              "params": {"j": [4, 6, 8, 10], "p": [1, 2, 4], "q": [1, 2], "delta": 0.4}},
    "scan": {"N": [2 ** 8, 2 ** 10, 2 ** 12], "samples": 200,
             "specs": ["fl:0.3:·:2", "fl:0.5:·:2", "fl:0.7:·:2"], "params": {"dim": 1}},
    "tail": {"N": [2 ** 10], "samples": 10_000, "specs": ["fl:0.3:·:2"],
             "params": {"quantile_range": [0.90, 0.999], "dim": 1}},
    "chaos": {"N": [], "samples": 10_000,
              "params": {"j": [1, 2, 3, 4, 5, 6], "k3_max_j": 4, "hyper_q": 4.0, "hyper_j": 4}},
    "wick": {"N": [], "samples": 100_000,
             "params": {"x_min": -3.0, "x_max": 3.0, "x_points": 61, "max_degree": 8}},
    "probe": {"N": [], "samples": 1_000, "specs": ["fbesov:0.25:2:2"],
              "params": {"M0": [16, 64, 256], "eps": [0.5]}},
    "bridge": {"N": [16], "samples": 1_000,
               "params": {"M": 4096, "n_list": [1, 2, 5, 10]}},
    "levy": {"N": [], "samples": 100,
             "params": {"M": 2 ** 16, "eps": [2 ** -6, 2 ** -8, 2 ** -10]}},
    "accept": {"N": [], "samples": 0, "params": {"scale": "desk"}},
}

# =============================================================================
# ACCEPTANCE SUITE (sample counts per scale)
# =============================================================================
ACCEPTANCE_SETTINGS = {
    "full": {
        "identity_seeds": 100,
        "identity_jmax": 8,
        "l2k_jmax": 5,
        "moment_samples": 10_000_000,
        "norm_paths": 50,
        "regime_seeds": 200,
        "tail_samples": 100_000,
        "chernoff_samples": 1_000_000,
        "wick_samples": 1_000_000,
        "chaos_families": 10_000,
        "hyper_samples": 10_000,
        "probe_samples": 10_000,
        "bridge_samples": 10_000,
        "bridge_norm_seeds": 1_000,
    },
    "desk": {
        "identity_seeds": 10,
        "identity_jmax": 6,
        "l2k_jmax": 4,
        "moment_samples": 1_000_000,
        "norm_paths": 10,
        "regime_seeds": 40,
        "tail_samples": 10_000,
        "chernoff_samples": 50_000,
        "wick_samples": 200_000,
        "chaos_families": 2_000,
        "hyper_samples": 10_000,
        "probe_samples": 500,
        "bridge_samples": 10_000,
        "bridge_norm_seeds": 1_000,
    },
}
