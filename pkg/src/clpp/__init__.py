"""Constrained last-passage percolation: sampling, exact solvers,
closed-form volumes and bounds, and Monte Carlo experiment drivers."""

__version__ = "0.1.0"

from .model import (Box, Disk, DirectedPoint, HeavyTail, PlanarPoint,
                    PointCloud, Poisson, Strip, Uniform, WeightedPoint,
                    WeightedWindow, sample_heavy_tail_field,
                    sample_poisson_strip, sample_uniform_box,
                    sample_uniform_disk, scale_entropy, scale_holder)
from .constraints import (Chain, ConstraintSpec, DegenerateChainError,
                          Entropy, Holder, NonDirEntropy, NonDirHolder,
                          SLACK, entropy_ab, holder_norm, is_compatible,
                          nondir_entropy, nondir_holder, optimal_subdivision)
from .solvers import (AnnealConfig, LppSolution, SizeCapError,
                      VariationalSolution, brute_force_heavy,
                      brute_force_oracle, brute_force_polymer,
                      greedy_box_lower_bound, solve_entropy_exact,
                      solve_heavy_tail_anneal, solve_holder_exact,
                      solve_nondir_anneal, solve_nondir_heldkarp,
                      solve_polymer_directed)
