#pragma once

// Synthetic datasets with known answers, used by tests, benchmarks and the
// `synth` subcommand.
//
// Each case draws two random class centers, spreads |S| source and |T|
// target attributes around them, and places the source image and texts near
// the matching centers. The hyperplane is fitted with the configured fitter,
// and edits are built around its ideal point:
//   ground_truth   = normalize(ideal + eps)
//   over_preserved = normalize(i_src + eps)
//   over_modified  = random unit vector with f > 0 and cos(., i_src) < 0.2
// with eps ~ N(0, sigma^2 I). 2AFC cases pair ground_truth with one of the
// other two and vote for ground_truth, flipping the vote with probability
// vote_flip.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>

#include "augclip/embedding_store.hpp"
#include "augclip/hyperplane.hpp"
#include "augclip/linalg.hpp"
#include "augclip/manifest.hpp"
#include "augclip/weighting.hpp"

namespace augclip {

struct SyntheticConfig {
  std::size_t triplets = 20;
  std::size_t two_afc = 0;
  std::size_t dim = 512;
  std::size_t source_attributes = 8;
  std::size_t target_attributes = 8;
  // Per-coordinate spread of attributes around their class center.
  double attribute_spread = 0.02;
  // Per-coordinate edit noise.
  double sigma = 0.02;
  double vote_flip = 0.1;
  std::uint64_t seed = 7;
  Fitter fitter = Fitter::svm;
  bool weighting = true;
  WeightingConfig weighting_cfg;
  FitConfig fit;
};

struct SyntheticDataset {
  Manifest manifest;
  EmbeddingStore store;
};

SyntheticDataset make_synthetic_dataset(const SyntheticConfig& cfg);

// Writes manifest.json, descriptions.json and store.tsv into `dir`.
void write_dataset(const SyntheticDataset& data, const std::filesystem::path& dir);

Vector random_unit(std::size_t dim, std::mt19937_64& rng);

// Haar-distributed orthogonal matrix (Gram-Schmidt on a Gaussian matrix with
// sign correction).
linalg::Matrix random_orthogonal(std::size_t dim, std::mt19937_64& rng);

// Applies q to every raw vector; ids, kinds and order are kept.
EmbeddingStore rotate_store(const EmbeddingStore& store, const linalg::Matrix& q);

}  // namespace augclip
