"""Condensers, seeded extractors and adversary constructions for block
sources with a mix of honest and adversarial blocks, all auditable at desk
scale by exhaustive enumeration and exact rational arithmetic."""

__version__ = "0.1.0"

from .dist import (Dist, SmoothEntropyResult, heavy_set, min_entropy,
                   smooth_min_entropy, tv_distance, tv_entropy_bound_check)
from .gf2 import (FieldElem, FieldParams, gf_inv, gf_mul, ip_extractor,
                  ip_extractor_error, vec_inner_product)
from .covering import (BipartiteGraph, ColoredCompleteBipartite, CoverResult,
                       greedy_color_cover, greedy_cover)
from .sources import (Adaptive, BlockFunctionTable, FiShelaDesc, Fixed, GoodsTable,
                      NosfDesc, ShelaDesc, check_almost_cg, decompose_shela,
                      exact_output_dist, sample)
from .seeded import (KeyedMixExtractor, OutputLightReport, SeededExtSpec,
                     TableRandomExtractor, ToeplitzExtractor, audit_output_light,
                     ext_eval, keyed_mix_ext, toeplitz_ext)
from .adversaries import (CondenseCertificate, ExtractionAdversary, Nosf23Constants,
                          build_1l_adversary, build_nosf23_adversary,
                          build_shela23_extraction_adversary, delta_1l,
                          scale_up_reduction, split_blocks_reduction,
                          verify_certificate)
from .condensers import (ExplicitCfg, RandomProcessParams, SampledCondenser,
                         audit_sampled, derive_params, explicit_ext, fiber_count,
                         sample_output_light, scaled_params, validate_constraints,
                         wrap_condenser)
