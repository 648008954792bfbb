"""Graph classification from multi-filtration persistence-image tensors and
tensor-view graph convolutions, with low-rank tensor-network layers."""

from .autodiff import Parameter, Tensor
from .filtrations import (DEFAULT_FILTRATIONS, FilteredComplex, FiltrationKind,
                          VertexFiltration, build_lower_star_complex,
                          compute_vertex_filtration)
from .graphs import (Dataset, Graph, NormalizedAdjacency, adjacency_power,
                     load_tu_dataset, normalized_adjacency, write_tu_dataset)
from .harness import (RunConfig, run_ablation, run_cross_validation,
                      run_decomposition_sweep, run_synthetic_lowrank_experiment)
from .imaging import ImageParams, assemble_image_tensor, diagram_to_image
from .model import GraphClassifier, ModelConfig, load_model, save_model
from .persistence import (PersistenceDiagram, cap_essential, persistence_0d,
                          persistence_reduction)
from .tensornet import Factorization, TensorNetwork
from .tensors import (CPFactors, TTFactors, TuckerFactors, cp_decompose, fold,
                      inner_product, mode_product, tt_decompose,
                      tucker_decompose, unfold)

__version__ = "0.1.0"

__all__ = [
    "Parameter", "Tensor",
    "DEFAULT_FILTRATIONS", "FilteredComplex", "FiltrationKind",
    "VertexFiltration", "build_lower_star_complex", "compute_vertex_filtration",
    "Dataset", "Graph", "NormalizedAdjacency", "adjacency_power",
    "load_tu_dataset", "normalized_adjacency", "write_tu_dataset",
    "RunConfig", "run_ablation", "run_cross_validation",
    "run_decomposition_sweep", "run_synthetic_lowrank_experiment",
    "ImageParams", "assemble_image_tensor", "diagram_to_image",
    "GraphClassifier", "ModelConfig", "load_model", "save_model",
    "PersistenceDiagram", "cap_essential", "persistence_0d", "persistence_reduction",
    "Factorization", "TensorNetwork",
    "CPFactors", "TTFactors", "TuckerFactors", "cp_decompose", "fold",
    "inner_product", "mode_product", "tt_decompose", "tucker_decompose", "unfold",
    "__version__",
]
