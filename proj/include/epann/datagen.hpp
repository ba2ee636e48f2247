#pragma once

// Seeded synthetic datasets for benchmarks and tests.

#include <cstddef>
#include <cstdint>
#include <json.hpp>

#include "epann/vectors.hpp"

namespace epann {

/// Isotropic Gaussian mixture: component centers ~ N(0, center_scale^2 I),
/// points = center + N(0, spread^2 I), components chosen uniformly.
struct MixtureSpec {
  std::size_t n = 100000;
  std::size_t dim = 128;
  std::size_t components = 10;
  double center_scale = 1.0;
  double spread = 1.0;
  std::uint64_t seed = 0;
};

/// Base and query sets drawn from the same mixture (queries use an
/// independent stream).
struct Dataset {
  VectorSet base;
  VectorSet queries;
};

Dataset gaussian_mixture(const MixtureSpec& spec, std::size_t n_queries);

/// Stand-in for unit-normalized CNN descriptors: a mixture of `clusters`
/// anisotropic Gaussians whose per-axis scale decays as (j + 1)^-decay, every
/// vector rescaled to unit L2 norm.
struct DeepLikeSpec {
  std::size_t n = 100000;
  std::size_t dim = 96;
  std::size_t clusters = 256;
  double decay = 0.5;
  double within = 0.8;  // within-cluster scale relative to between-cluster scale
  std::uint64_t seed = 0;
};

Dataset deep_like(const DeepLikeSpec& spec, std::size_t n_queries);

/// n points with coordinates iid N(0, 1).
VectorSet standard_normal(std::size_t n, std::size_t dim, std::uint64_t seed);

nlohmann::json to_json(const MixtureSpec& s);
nlohmann::json to_json(const DeepLikeSpec& s);

}  // namespace epann
