"""
Experiment Runner

One handler per subcommand. Each handler computes its tables, hands them to
the ResultWriter, and returns a JSON-able summary; run() adds the manifest.
"""

from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Dict, List

import numpy as np

import sys
sys.path.append('..')
from config.settings import BRIDGE_SETTINGS, EXIT_CODES, MONTE_CARLO_SETTINGS, OUTPUT_SETTINGS
from core.bridge import (
    covariance_report, fourth_moment_ratio, levy_experiment, sample_bridge_spectra,
    to_gaussian_scale
)
from core.chaos import (
    chaos_project_F, hermite, hypercontractivity_check, l2k_block_decomposition,
    l4_block_decomposition, pair_free_fast, shell_moment, wick_abs2n, wick_orthogonality
)
from core.deviations import (
    besov4_endpoint_pieces, chaos_tail_check, measurability_probe, tail_estimate
)
from core.errors import ConfigError
from core.lattice import lattice_points, shell_size
from core.montecarlo import mean_and_se, run_samples, sample_seeds
from core.norms import NormSpec, evaluate_norm
from core.regimes import scan_cell
from core.spectral import (
    SpectralPath, build_path, gaussian_stream, sample_family, sample_path
)
from core.stats import (
    c_p_exact, decay_ratio, x_statistic, y_statistic, z_statistic
)
from experiments.acceptance import run_suite
from experiments.config_loader import ExperimentConfig
from experiments.manifest import RunManifest
from experiments.writers import ResultWriter
from utils.logger import get_logger, log_check, log_run

logger = get_logger(__name__)

COLUMNS = {
    "norm": ["spec", "seed", "N", "alpha", "value"],
    "stats": ["statistic", "j", "p_or_q", "seed", "value"],
    "scan": ["space", "s", "p", "q", "alpha", "N", "median", "mean", "n_seeds"],
    "scan_verdicts": ["space", "s", "p", "q", "alpha", "predicted", "empirical", "statistic"],
    "tail": ["K", "count", "prob", "lo", "hi"],
    "chaos": ["j", "k", "lhs", "I", "II", "error_i", "error_ii", "III", "rel_residual"],
    "hyper": ["functional", "order", "q", "ratio", "bound", "rel_se", "passed"],
    "wick_orthogonality": ["m", "n", "mean", "se"],
    "probe": ["M0", "eps", "prob", "lo", "hi", "samples"],
    "bridge": ["seed", "n", "re", "im"],
    "bridge_covariance": ["m", "n", "re", "im", "se", "expected"],
    "levy": ["seed", "eps", "ratio"],
    "accept": ["check", "passed", "statistic", "bound"],
}


@dataclass
class RunOutcome:
    """Exit status and products of one run."""
    exit_code: int
    files: List[str] = field(default_factory=list)
    summary: Dict = field(default_factory=dict)
    failed_checks: List[str] = field(default_factory=list)


# =============================================================================
# PER-SAMPLE FUNCTIONS (module level so worker processes can pickle them)
# =============================================================================

def _norm_values(specs: List[str], alpha: float, Ns: List[int], dim: int, seed: int) -> np.ndarray:
    parsed = [NormSpec.parse(text, dim) for text in specs]
    family = sample_family(seed, dim, max(Ns))
    out = np.empty((len(Ns), len(parsed)))
    for i, N in enumerate(Ns):
        path = build_path(family.restrict(N), alpha)
        for k, spec in enumerate(parsed):
            out[i, k] = evaluate_norm(spec, path)
    return out


def _wick_functional(seed: int) -> float:
    return wick_abs2n(sample_family(seed, 1, 1).draws[0], 1)


def _pair_free_functional(j: int, seed: int) -> float:
    return pair_free_fast(sample_family(seed, 1, 2 ** j), j)


def _chaos_components(j: int, seed: int) -> np.ndarray:
    family = sample_family(seed, 1, 2 ** j)
    first = chaos_project_F(family, j, 1)[1][1]
    second = chaos_project_F(family, j, 2)[2][1]
    return np.array([first, second, shell_moment(family, j, 2)])


class ExperimentRunner:
    """
    Runs one subcommand for a resolved ExperimentConfig.

    Handlers append failed acceptance-style checks to ``self.failed``; only
    `scan` in verdict mode and `accept` turn those into exit code 4.
    """

    def __init__(self, config: ExperimentConfig, verdict_mode: bool = False):
        self.config = config
        self.verdict_mode = verdict_mode
        self.failed: List[str] = []
        self.handlers: Dict[str, Callable[[ResultWriter], Dict]] = {
            "sample": self._run_sample,
            "norm": self._run_norm,
            "stats": self._run_stats,
            "scan": self._run_scan,
            "tail": self._run_tail,
            "chaos": self._run_chaos,
            "wick": self._run_wick,
            "probe": self._run_probe,
            "bridge": self._run_bridge,
            "levy": self._run_levy,
            "accept": self._run_accept,
        }

    @property
    def params(self) -> Dict:
        return self.config.params

    def _require(self, condition: bool, message: str):
        if not condition:
            raise ConfigError(message)

    def run(self) -> RunOutcome:
        cfg = self.config
        log_run(logger, cfg.subcommand, seed=cfg.seed, samples=cfg.samples,
                workers=cfg.workers, out=cfg.out)
        writer = ResultWriter(cfg.out, cfg.format)
        manifest = RunManifest(subcommand=cfg.subcommand, config_hash=cfg.config_hash())

        payload = self.handlers[cfg.subcommand](writer)
        exit_code = EXIT_CODES['ok']
        if self.failed and (cfg.subcommand == "accept" or self.verdict_mode):
            exit_code = EXIT_CODES['check_failed']

        writer.summary({
            "subcommand": cfg.subcommand,
            "config": cfg.to_dict(),
            "config_hash": manifest.config_hash,
            "failed_checks": self.failed,
            "results": payload,
        })
        for path in writer.files:
            manifest.add_file(path, cfg.out)
        manifest.finish(exit_code)
        manifest.write(f"{cfg.out}/{OUTPUT_SETTINGS['manifest_name']}")
        logger.info(f"{cfg.subcommand} finished with exit code {exit_code} "
                    f"({len(writer.files)} files in {cfg.out})")
        return RunOutcome(exit_code, list(writer.files), payload, list(self.failed))

    # -------------------------------------------------------------------------
    # sample / norm / stats
    # -------------------------------------------------------------------------

    def _run_sample(self, writer: ResultWriter) -> Dict:
        cfg = self.config
        self._require(len(cfg.N) >= 1, "sample needs one truncation N")
        path = sample_path(cfg.seed, cfg.N[0], cfg.alpha, cfg.dim)
        columns = [f"n_{i}" for i in range(cfg.dim)] + ["re", "im"]
        rows = [dict(zip(columns, [*map(int, p), float(c.real), float(c.imag)]))
                for p, c in zip(path.points.tolist(), path.coeffs)]
        writer.table("sample", rows, columns)
        writer.document("path", path.to_dict())
        return {"dim": path.dim, "N": path.truncation, "alpha": path.alpha,
                "seed": path.seed, "energy": path.energy()}

    def _stub_path(self, N: int) -> SpectralPath:
        stub = self.params["stub"]
        coeffs = {}
        for key, value in stub.items():
            index = tuple(int(c) for c in str(key).split(","))
            index = index[0] if len(index) == 1 else index
            re, im = (value, 0.0) if isinstance(value, (int, float)) else value
            coeffs[index] = complex(re, im)
        return SpectralPath.from_mapping(coeffs, dim=self.config.dim, truncation=N,
                                         alpha=self.config.alpha)

    def _run_norm(self, writer: ResultWriter) -> Dict:
        cfg = self.config
        self._require(cfg.specs and cfg.N, "norm needs at least one spec and one N")
        specs = cfg.norm_specs()
        rows = []
        if "stub" in self.params:
            for N in cfg.N:
                path = self._stub_path(N)
                for spec in specs:
                    rows.append({"spec": str(spec), "seed": None, "N": N,
                                 "alpha": cfg.alpha, "value": evaluate_norm(spec, path)})
        else:
            fn = partial(_norm_values, cfg.specs, cfg.alpha, cfg.N, cfg.dim)
            values = run_samples(fn, cfg.seed, cfg.samples, cfg.workers)
            seeds = sample_seeds(cfg.seed, cfg.samples)
            for i, seed in enumerate(seeds):
                for a, N in enumerate(cfg.N):
                    for k, spec in enumerate(specs):
                        rows.append({"spec": str(spec), "seed": seed, "N": N,
                                     "alpha": cfg.alpha, "value": float(values[i][a, k])})
        writer.table("norm", rows, COLUMNS["norm"])
        return {"rows": len(rows)}

    def _run_stats(self, writer: ResultWriter) -> Dict:
        cfg = self.config
        self._require(len(cfg.N) >= 1, "stats needs a truncation N")
        js, ps, qs = self.params["j"], self.params["p"], self.params["q"]
        delta = float(self.params["delta"])
        rows = []
        for seed in sample_seeds(cfg.seed, cfg.samples):
            family = sample_family(seed, 1, cfg.N[0])
            for j in js:
                for p in ps:
                    rows.append(x_statistic(family, j, p).to_row("X"))
                    rows.append({"statistic": "Y", "j": j, "p_or_q": p, "seed": seed,
                                 "value": y_statistic(family, j, p)})
                for q in qs:
                    rows.append({"statistic": "Z", "j": j, "p_or_q": q, "seed": seed,
                                 "value": z_statistic(family, j, q)})
                rows.append({"statistic": "decay", "j": j, "p_or_q": delta, "seed": seed,
                             "value": decay_ratio(family, j, delta)})
        writer.table("stats", rows, COLUMNS["stats"])
        return {"c_p": {str(p): c_p_exact(p) for p in ps}, "rows": len(rows)}

    # -------------------------------------------------------------------------
    # scan / tail / probe
    # -------------------------------------------------------------------------

    def _run_scan(self, writer: ResultWriter) -> Dict:
        cfg = self.config
        self._require(len(cfg.N) >= 2, "scan needs at least two truncations")
        rows, verdicts = [], []
        for spec in cfg.norm_specs():
            cell = scan_cell(spec, cfg.alpha, cfg.N, cfg.samples, cfg.seed, cfg.workers)
            rows.extend(cell.rows())
            verdicts.append(cell.verdict_row())
            log_check(logger, f"scan {spec}", cell.agrees, predicted=cell.predicted.value,
                      empirical=cell.empirical.verdict.value)
            if not cell.agrees:
                self.failed.append(f"scan {spec}")
        writer.table("scan", rows, COLUMNS["scan"])
        writer.table("scan_verdicts", verdicts, COLUMNS["scan_verdicts"])
        if cfg.gnuplot:
            writer.gnuplot("scan", "scan", "N", ["median"], COLUMNS["scan"], logscale="x",
                           title="median norm against N")
        return {"verdicts": verdicts}

    def _run_tail(self, writer: ResultWriter) -> Dict:
        cfg = self.config
        self._require(cfg.specs and cfg.N, "tail needs a spec and a truncation N")
        quantiles = tuple(self.params.get("quantile_range", (0.90, 0.999)))
        summaries = []
        for index, spec in enumerate(cfg.norm_specs()):
            estimate = tail_estimate(spec, cfg.alpha, cfg.N[0], cfg.samples, quantiles,
                                     cfg.seed, cfg.workers,
                                     min_samples=self.params.get("min_samples"))
            name = "tail" if len(cfg.specs) == 1 else f"tail_{index}"
            writer.table(name, estimate.rows(), COLUMNS["tail"])
            if cfg.gnuplot:
                writer.gnuplot(name, name, "K", ["prob"], COLUMNS["tail"], logscale="y",
                               title=f"P(norm > K), {spec}")
            estimate.print_summary()
            summaries.append({**estimate.summary(), "table": name})
        return {"tails": summaries}

    def _probe_eps(self, value, spec) -> float:
        if value == "half_cp":
            return c_p_exact(spec.p) ** (1.0 / spec.p) / 2.0
        return float(value)

    def _run_probe(self, writer: ResultWriter) -> Dict:
        cfg = self.config
        rows = []
        for spec in cfg.norm_specs():
            for M0 in self.params["M0"]:
                for eps in self.params["eps"]:
                    result = measurability_probe(spec, cfg.alpha, int(M0),
                                                 self._probe_eps(eps, spec), cfg.samples,
                                                 cfg.seed, cfg.workers)
                    rows.append(result.to_row())
        writer.table("probe", rows, COLUMNS["probe"])
        return {"specs": cfg.specs, "points": len(rows)}

    # -------------------------------------------------------------------------
    # chaos / wick
    # -------------------------------------------------------------------------

    def _run_chaos(self, writer: ResultWriter) -> Dict:
        cfg = self.config
        js = [int(j) for j in self.params["j"]]
        k3_max_j = int(self.params.get("k3_max_j", 4))
        family = sample_family(cfg.seed, 1, 2 ** max(js))

        rows = []
        for j in js:
            decompositions = [l4_block_decomposition(family, j)]
            if j <= k3_max_j:
                decompositions.append(l2k_block_decomposition(family, j, 3))
            for d in decompositions:
                rows.append({**d.to_dict(), "rel_residual": d.rel_residual})
        writer.table("chaos", rows, COLUMNS["chaos"])

        q = float(self.params.get("hyper_q", 4.0))
        hj = int(self.params.get("hyper_j", 4))
        min_samples = self.params.get("min_samples")
        functionals = [
            (":|g|^2:", 2, _wick_functional),
            (f"II_{hj}", 4, partial(_pair_free_functional, hj)),
        ]
        hyper_rows = []
        for name, order, fn in functionals:
            samples = run_samples(fn, cfg.seed, cfg.samples, cfg.workers)
            report = hypercontractivity_check(samples, order, q, min_samples=min_samples)
            log_check(logger, f"hypercontractivity {name}", report.passed,
                      ratio=f"{report.ratio:.4f}", bound=report.bound)
            if not report.passed:
                self.failed.append(f"hypercontractivity {name}")
            hyper_rows.append({"functional": name, "order": order, "q": q,
                               "ratio": report.ratio, "bound": report.bound,
                               "rel_se": report.rel_se, "passed": report.passed})
        writer.table("hyper", hyper_rows, COLUMNS["hyper"])

        components = run_samples(partial(_chaos_components, hj), cfg.seed, cfg.samples,
                                 cfg.workers).reshape(cfg.samples, 3)
        mean_F, se_F = mean_and_se(components[:, 2])
        payload = {"mean_F": mean_F, "se_F": se_F,
                   "expected_F": 8.0 * shell_size(1, hj) / 2.0 ** hj}
        if cfg.samples >= MONTE_CARLO_SETTINGS['min_chaos_tail_samples']:
            payload["tails"] = [chaos_tail_check(components[:, 0], 1, hj).to_dict(),
                                chaos_tail_check(components[:, 1], 2, hj).to_dict()]
        if "pieces_K" in self.params:
            payload["pieces"] = besov4_endpoint_pieces(
                int(self.params.get("pieces_jmax", max(js))), float(self.params["pieces_K"]),
                int(self.params.get("pieces_samples", 1000)), cfg.seed, cfg.workers)
        return payload

    def _run_wick(self, writer: ResultWriter) -> Dict:
        cfg = self.config
        degree = int(self.params["max_degree"])
        x = np.linspace(float(self.params["x_min"]), float(self.params["x_max"]),
                        int(self.params["x_points"]))
        columns = ["x"] + [f"H_{n}" for n in range(degree + 1)]
        table = np.column_stack([x] + [hermite(n, x) for n in range(degree + 1)])
        writer.table("wick", [dict(zip(columns, row)) for row in table.tolist()], columns)
        if cfg.gnuplot:
            writer.gnuplot("wick", "wick", "x", columns[1:6], columns, title="Hermite polynomials")

        moments = wick_orthogonality(gaussian_stream(cfg.seed, cfg.samples))
        rows = [{"m": m, "n": n, "mean": mean, "se": se}
                for (m, n), (mean, se) in sorted(moments.items())]
        for row in rows:
            if abs(row["mean"]) > MONTE_CARLO_SETTINGS['band_se'] * row["se"]:
                self.failed.append(f"wick orthogonality ({row['m']}, {row['n']})")
        writer.table("wick_orthogonality", rows, COLUMNS["wick_orthogonality"])
        return {"degree": degree, "samples": cfg.samples}

    # -------------------------------------------------------------------------
    # bridge / levy / accept
    # -------------------------------------------------------------------------

    def _run_bridge(self, writer: ResultWriter) -> Dict:
        cfg = self.config
        M = int(self.params["M"])
        N = cfg.N[0] if cfg.N else BRIDGE_SETTINGS['default_modes']
        n_list = [int(n) for n in self.params["n_list"]]
        spectra = sample_bridge_spectra(cfg.samples, M, N, cfg.seed, cfg.workers)
        frequencies = lattice_points(1, N)[:, 0]

        rows = [{"seed": seed, "n": int(n), "re": float(c.real), "im": float(c.imag)}
                for seed, spectrum in zip(sample_seeds(cfg.seed, cfg.samples), spectra)
                for n, c in zip(frequencies, spectrum)]
        writer.table("bridge", rows, COLUMNS["bridge"])

        entries = covariance_report(spectra, frequencies, n_list,
                                    min_samples=self.params.get("min_samples"))
        writer.table("bridge_covariance", [e.to_row() for e in entries],
                     COLUMNS["bridge_covariance"])

        column = {int(f): i for i, f in enumerate(frequencies)}
        picked = spectra[:, [column[n] for n in n_list]]
        gaussians = to_gaussian_scale(np.array(n_list), picked).ravel()
        return {
            "fourth_moment_ratio": fourth_moment_ratio(gaussians),
            "diagonal_deviation_se": {str(e.n): e.deviation_in_se for e in entries if e.m == e.n},
        }

    def _run_levy(self, writer: ResultWriter) -> Dict:
        cfg = self.config
        eps_list = [float(e) for e in self.params["eps"]]
        ratios = levy_experiment(eps_list, cfg.samples, int(self.params["M"]), cfg.seed,
                                 cfg.workers)
        rows = [{"seed": seed, "eps": eps, "ratio": float(ratios[i, k])}
                for i, seed in enumerate(sample_seeds(cfg.seed, cfg.samples))
                for k, eps in enumerate(eps_list)]
        writer.table("levy", rows, COLUMNS["levy"])
        if cfg.gnuplot:
            writer.gnuplot("levy", "levy", "eps", ["ratio"], COLUMNS["levy"], logscale="x",
                           title="Levy ratio against eps")
        inside = {str(eps): float(np.mean((ratios[:, k] >= 0.6) & (ratios[:, k] <= 1.4)))
                  for k, eps in enumerate(eps_list)}
        return {"fraction_in_band": inside,
                "median": {str(eps): float(np.median(ratios[:, k])) for k, eps in enumerate(eps_list)}}

    def _run_accept(self, writer: ResultWriter) -> Dict:
        cfg = self.config
        checks = run_suite(str(self.params.get("scale", "desk")), cfg.seed, cfg.workers,
                           only=self.params.get("only"))
        writer.table("accept", [c.to_row() for c in checks], COLUMNS["accept"])
        self.failed.extend(c.name for c in checks if not c.passed)
        return {"checks": [c.to_dict() for c in checks]}


def run_experiment(config: ExperimentConfig, verdict_mode: bool = False) -> RunOutcome:
    """Convenience wrapper used by main.py and the tests."""
    return ExperimentRunner(config, verdict_mode).run()
