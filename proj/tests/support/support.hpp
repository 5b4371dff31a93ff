#pragma once

#include "rar/affinity.hpp"
#include "rar/dataset.hpp"
#include "rar/partition.hpp"

#include <Eigen/Dense>

#include <random>
#include <string>
#include <vector>

namespace rar::testing {

using Rng = std::mt19937_64;

/// Gaussian data y = Z b + N(0, noise^2), exposure and covariates N(0, 1).
Dataset random_gaussian_dataset(Rng& rng, Index s, Index q, double noise = 1.0);

/// Poisson counts with offsets in [50, 500] and modest log-rate slopes.
Dataset random_poisson_dataset(Rng& rng, Index s, Index q);

/// rows x cols rook lattice cut to `s` cells in row-major order, plus
/// random diagonal links until `target_edges` is reached.
AdjacencyMatrix county_like_adjacency(Index s, Index cols, Index target_edges, std::uint64_t seed);

/// Poisson county-style data on the county_like_adjacency layout with
/// `blocks` x `blocks` square zones of distinct exposure slopes.
Dataset county_like_dataset(Index s, Index cols, int blocks, std::uint64_t seed);

/// Planted K-block graph: consecutive blocks, weight `within` inside a block
/// (complete), `between` on a sparse set of cross links.
Eigen::SparseMatrix<double> planted_block_weights(const std::vector<Index>& block_sizes,
                                                  double within, double between, Rng& rng);

/// Random two-block graph on n >= 4 nodes in shuffled order: each block
/// (at least two nodes) is connected with strong weights, and a few weak
/// links with weights in [0.01, max_between] join the blocks. `truth`
/// receives the block of every node.
Eigen::SparseMatrix<double> random_planted_graph(Rng& rng, Index n, std::vector<int>& truth,
                                                 double max_between = 0.1);

/// CSV text of a dataset in the load_dataset layout.
std::string dataset_csv(const Dataset& data);

std::vector<std::string> index_ids(Index n, const std::string& prefix = "u");

}  // namespace rar::testing
