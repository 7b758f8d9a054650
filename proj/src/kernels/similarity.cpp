#include "cloudvision/kernels.hpp"

namespace cloudvision::kernels {

namespace {

double dot(const float* a, const float* b, std::size_t dim) {
  double acc = 0.0;
  for (std::size_t i = 0; i < dim; ++i) acc += static_cast<double>(a[i]) * b[i];
  return acc;
}

}  // namespace

void dot_products(std::span<const float> db, std::span<const float> query, std::size_t dim,
                  std::span<double> sims) {
  const auto m = static_cast<std::ptrdiff_t>(sims.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < m; ++i) sims[i] = dot(db.data() + i * dim, query.data(), dim);
}

namespace serial {

void dot_products(std::span<const float> db, std::span<const float> query, std::size_t dim,
                  std::span<double> sims) {
  for (std::size_t i = 0; i < sims.size(); ++i) sims[i] = dot(db.data() + i * dim, query.data(), dim);
}

}  // namespace serial
}  // namespace cloudvision::kernels
