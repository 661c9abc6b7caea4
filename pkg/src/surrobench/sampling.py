"""Local neighbourhood samplers: Gaussian perturbation and mixup.

Sampling happens in the original feature domain; interpretable encoding is
applied afterwards by the pipeline.  All randomness flows through the
counter-based rng module with one derived sub-stream per role (feature
columns, partner choice, mixing coefficients), so rows are reproducible
bit-for-bit for a given seed regardless of evaluation order.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .data import TabularDataset
from .errors import ConfigError
from .rng import CounterRng

# derived-stream indices
_STREAM_FEATURE = 10
_STREAM_PARTNER = 1
_STREAM_LAMBDA = 2
_STREAM_CATEGORY = 3


class GaussianSampler(BaseEstimator):
    """Per-feature Gaussian perturbation around the anchor or the global mean.

    Numeric feature j draws Normal(center_j, (scale * std_j)^2); categorical
    features draw from the dataset's empirical category frequencies.  Constant
    features (std 0) replicate the center exactly.
    """

    def __init__(self, scale=1.0, center="anchor"):
        self.scale = scale
        self.center = center

    def sample(self, dataset: TabularDataset, anchor_values, n_samples: int,
               rng: CounterRng) -> np.ndarray:
        if self.scale <= 0:
            raise ConfigError(["sampler.scale must be > 0"])
        if self.center not in ("anchor", "global_mean"):
            raise ConfigError(["sampler.center must be anchor or global_mean"])
        anchor_values = np.asarray(anchor_values, dtype=np.float64)
        rows = np.empty((n_samples, dataset.n_features))
        for j, spec in enumerate(dataset.schema):
            stream = rng.derive(_STREAM_FEATURE, j)
            if spec.is_numeric:
                stats = dataset.stats[spec.name]
                center = anchor_values[j] if self.center == "anchor" \
                    else stats["mean"]
                rows[:, j] = center + self.scale * stats["std"] \
                    * stream.normals(n_samples)
            else:
                freqs = dataset.stats[spec.name]["frequencies"]
                probabilities = np.array([freqs[c] for c in spec.categories])
                rows[:, j] = stream.categorical(n_samples, probabilities)
        return rows


class MixupSampler(BaseEstimator):
    """Convex combinations of the anchor with uniformly drawn dataset rows.

    Each sampled row pairs the anchor with one dataset row and mixes with a
    single lambda ~ Beta(alpha, alpha) shared by all features: numeric cells
    interpolate, categorical cells take the anchor's category with
    probability lambda.  lambda_override is a degenerate test hook that pins
    lambda (1 reproduces the anchor, 0 the partner row).
    """

    def __init__(self, alpha=1.0, lambda_override=None):
        self.alpha = alpha
        self.lambda_override = lambda_override

    def sample(self, dataset: TabularDataset, anchor_values, n_samples: int,
               rng: CounterRng) -> np.ndarray:
        if self.alpha <= 0:
            raise ConfigError(["sampler.alpha must be > 0"])
        anchor_values = np.asarray(anchor_values, dtype=np.float64)
        partners = rng.derive(_STREAM_PARTNER).integers(n_samples, dataset.n_rows)
        if self.lambda_override is not None:
            lam = np.full(n_samples, float(self.lambda_override))
        else:
            lam = rng.derive(_STREAM_LAMBDA).betas(n_samples, self.alpha)

        partner_rows = dataset.values[partners]
        rows = np.empty((n_samples, dataset.n_features))
        for j, spec in enumerate(dataset.schema):
            if spec.is_numeric:
                mixed = lam * anchor_values[j] + (1.0 - lam) * partner_rows[:, j]
                lo = np.minimum(anchor_values[j], partner_rows[:, j])
                hi = np.maximum(anchor_values[j], partner_rows[:, j])
                rows[:, j] = np.clip(mixed, lo, hi)  # guard float spill at the box edge
            else:
                u = rng.derive(_STREAM_CATEGORY, j).uniforms(n_samples)
                rows[:, j] = np.where(u < lam, anchor_values[j],
                                      partner_rows[:, j])
        return rows


def build_sampler(sampler_config: dict):
    """SamplerConfig section of a validated ExplainerConfig -> sampler object."""
    kind = sampler_config["kind"]
    if kind == "gaussian":
        return GaussianSampler(scale=sampler_config["scale"],
                               center=sampler_config["center"])
    if kind == "mixup":
        return MixupSampler(alpha=sampler_config["alpha"])
    raise ConfigError([f"sampler.kind '{kind}' is not supported"])


def sample_gaussian(config: dict, anchor_values, dataset: TabularDataset) -> np.ndarray:
    """Standalone op: config carries kind/n_samples/scale/center/seed."""
    if config.get("kind", "gaussian") != "gaussian":
        raise ConfigError(["sample_gaussian requires sampler.kind = gaussian"])
    sampler = GaussianSampler(scale=config.get("scale", 1.0),
                              center=config.get("center", "anchor"))
    rng = CounterRng(config.get("seed", 0))
    return sampler.sample(dataset, anchor_values, config["n_samples"], rng)


def sample_mixup(config: dict, anchor_values, dataset: TabularDataset,
                 lambda_override=None) -> np.ndarray:
    if config.get("kind", "mixup") != "mixup":
        raise ConfigError(["sample_mixup requires sampler.kind = mixup"])
    sampler = MixupSampler(alpha=config.get("alpha", 1.0),
                           lambda_override=lambda_override)
    rng = CounterRng(config.get("seed", 0))
    return sampler.sample(dataset, anchor_values, config["n_samples"], rng)
