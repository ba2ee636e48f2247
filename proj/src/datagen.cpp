#include "epann/datagen.hpp"

#include <cmath>
#include <random>

#include "epann/errors.hpp"

namespace epann {

namespace {

std::vector<float> draw_mixture(std::size_t n, std::size_t dim, const std::vector<double>& centers,
                                std::size_t components, double spread, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> comp(0, components - 1);
  std::vector<float> out(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = comp(rng);
    for (std::size_t j = 0; j < dim; ++j)
      out[i * dim + j] = static_cast<float>(centers[c * dim + j] + spread * normal(rng));
  }
  return out;
}

}  // namespace

Dataset gaussian_mixture(const MixtureSpec& spec, std::size_t n_queries) {
  if (spec.dim == 0 || spec.components == 0) throw UsageError("mixture: dim and components must be positive");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> centers(spec.components * spec.dim);
  for (auto& c : centers) c = spec.center_scale * normal(rng);
  Dataset ds;
  ds.base = VectorSet(spec.dim, draw_mixture(spec.n, spec.dim, centers, spec.components, spec.spread, rng));
  std::mt19937_64 qrng(spec.seed ^ 0x7175657279ULL);
  ds.queries = VectorSet(spec.dim, draw_mixture(n_queries, spec.dim, centers, spec.components, spec.spread, qrng));
  return ds;
}

Dataset deep_like(const DeepLikeSpec& spec, std::size_t n_queries) {
  if (spec.dim == 0 || spec.clusters == 0) throw UsageError("deep_like: dim and clusters must be positive");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> scale(spec.dim);
  for (std::size_t j = 0; j < spec.dim; ++j) scale[j] = std::pow(static_cast<double>(j + 1), -spec.decay);
  std::vector<double> centers(spec.clusters * spec.dim);
  for (std::size_t c = 0; c < spec.clusters; ++c)
    for (std::size_t j = 0; j < spec.dim; ++j) centers[c * spec.dim + j] = scale[j] * normal(rng);

  auto draw = [&](std::size_t n, std::mt19937_64& g) {
    std::uniform_int_distribution<std::size_t> comp(0, spec.clusters - 1);
    std::vector<float> out(n * spec.dim);
    std::vector<double> v(spec.dim);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = comp(g);
      double norm2 = 0.0;
      for (std::size_t j = 0; j < spec.dim; ++j) {
        v[j] = centers[c * spec.dim + j] + spec.within * scale[j] * normal(g);
        norm2 += v[j] * v[j];
      }
      const double inv = 1.0 / std::sqrt(norm2);
      for (std::size_t j = 0; j < spec.dim; ++j) out[i * spec.dim + j] = static_cast<float>(v[j] * inv);
    }
    return out;
  };

  Dataset ds;
  ds.base = VectorSet(spec.dim, draw(spec.n, rng));
  std::mt19937_64 qrng(spec.seed ^ 0x7175657279ULL);
  ds.queries = VectorSet(spec.dim, draw(n_queries, qrng));
  return ds;
}

VectorSet standard_normal(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  std::vector<float> data(n * dim);
  for (auto& x : data) x = normal(rng);
  return VectorSet(dim, std::move(data));
}

nlohmann::json to_json(const MixtureSpec& s) {
  return {{"generator", "gaussian_mixture"}, {"n", s.n},           {"dim", s.dim},   {"components", s.components},
          {"center_scale", s.center_scale},  {"spread", s.spread}, {"seed", s.seed}};
}

nlohmann::json to_json(const DeepLikeSpec& s) {
  return {{"generator", "deep_like"}, {"n", s.n},           {"dim", s.dim},   {"clusters", s.clusters},
          {"decay", s.decay},         {"within", s.within}, {"seed", s.seed}};
}

}  // namespace epann
