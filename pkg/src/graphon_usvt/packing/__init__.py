"""Lower-bound machinery: codes, frame packings and Fano ingredients."""

from .codes import (Codebook, entropy_hN, hamming_ball_volume, hamming_distance,
                    hamming_entropy_bound, vg_greedy_codebook)
from .frames import (PackingSet, SinTheta, block_stack_frames, check_centered_frame,
                     greedy_frame_packing, pairwise_projection_distances, projection_distance_sq,
                     random_centered_frame, sin_theta_metrics, von_neumann_gap)
from .lowerbound import (FanoReport, build_lower_bound_graphon, fano_diagnostics,
                         kl_bernoulli, kl_bound_check, lower_bound_dimensions, max_valid_L,
                         subspace_distance_ratio)
