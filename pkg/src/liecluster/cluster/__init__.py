"""Equivariant cluster expansion: embeddings, pooled and symmetrized bases,
message-passing layers and linear fits."""
from .basis import (
    FeatureField, InMemoryCouplings, TraceBasis, ace_flatten, mix_channels, pool_atomic_basis,
    product_basis, symmetrize_basis,
)
from .embedding import (
    Embedding, Layout, PointCloud, RadialHarmonic, RepCoordinates, lorentz_vectors, o3_vectors,
    su2_spinors, sun_vectors,
)
from .linear import FitReport, LinearConfig, LinearModel, fit_linear, ridge_solve
from .mace import Mace, MaceConfig, ModelParams, readout
