"""Shaping and distribution-matching codes for noiseless costly channels."""

from .errors import (CorruptStream, DimensionError, InfeasibleRate, ShapingError, SupportError,
                     TreeMismatch, ZeroMinCost)
from .gsf import GsfCode, gsf_build, gsf_total_cost
from .lz78 import lz78_compress, lz78_decompress
from .metrics import (MetricsReport, asymptotic_occurrence, evaluate, gef, i_divergence,
                      i_divergence_from_gef, kl_gap, normalized_i_divergence,
                      normalized_i_divergence_closed_form, serial_kl)
from .model import CodeBook, CostVector, Pmf, SourceSpec, entropy, kl_divergence
from .optimizer import (ShapingSolution, di_min_df, di_min_dmu, dm_design, df_dmu, dtotal_dmu,
                        equivalent_cost_vector, i_min_of_f, min_avg_cost, min_kl_under_cost,
                        optimal_expansion, self_information_costs, solve_mu_capacity,
                        total_cost_at, total_cost_curve)
from .pipeline import (PipelineReport, ShapedStream, decode_bytes, encode_bytes,
                       pipeline_report, shape_decode, shape_encode)
from .rng import make_rng
from .varn import (CodeTree, decode_stream, modified_varn_build, savari_bounds,
                   tree_to_codebook, varn_build)

__version__ = "0.1.0"
