"""surrobench: a composable local surrogate explainer workbench.

Local explainers for tabular black boxes are assembled from interchangeable
blocks: an interpretable representation (quartile bins or a tree partition),
a neighbourhood sampler (Gaussian or mixup), distance-kernel weighting,
interpretable feature selection and a surrogate model (weighted ridge or a
multi-output regression tree).  Each block and the composed pipeline can be
evaluated (fidelity, stability, representation diagnostics), and the whole
loop is reachable from Python, the CLI and an HTTP service.
"""

__version__ = "0.1.0"

from .data import ExplainedInstance, FeatureSpec, TabularDataset, \
    load_dataset, summarize
from .pipeline import SurrogateExplainer, run_explain

__all__ = [
    "ExplainedInstance",
    "FeatureSpec",
    "SurrogateExplainer",
    "TabularDataset",
    "load_dataset",
    "run_explain",
    "summarize",
    "__version__",
]
