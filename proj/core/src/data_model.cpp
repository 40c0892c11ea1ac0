#include "ecobounds/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ecobounds/error.hpp"
#include "ecobounds/rng.hpp"

namespace ecobounds {

WSupport::WSupport(std::vector<WLevel> levels) : levels_(std::move(levels)) {
  std::sort(levels_.begin(), levels_.end());
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (levels_[i].size() != levels_.front().size()) throw DataError("W levels have unequal length");
    if (i > 0 && levels_[i] == levels_[i - 1]) throw DataError("duplicate W level in support");
  }
  build_encoding();
}

WSupport WSupport::from_observed(std::vector<WLevel> levels) {
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return WSupport(std::move(levels));
}

std::optional<std::size_t> WSupport::find(const WLevel& level) const {
  auto it = std::lower_bound(levels_.begin(), levels_.end(), level);
  if (it == levels_.end() || *it != level) return std::nullopt;
  return static_cast<std::size_t>(it - levels_.begin());
}

void WSupport::build_encoding() {
  const std::size_t d = dim();
  coord_values_.assign(d, {});
  for (const auto& lv : levels_) {
    for (std::size_t j = 0; j < d; ++j) coord_values_[j].push_back(lv[j]);
  }
  encoded_dim_ = 0;
  for (auto& vals : coord_values_) {
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    encoded_dim_ += vals.size() <= 1 ? 0 : vals.size() - 1;
  }
}

void WSupport::encode_into(std::size_t index, double* out) const {
  const WLevel& lv = levels_.at(index);
  std::size_t k = 0;
  for (std::size_t j = 0; j < coord_values_.size(); ++j) {
    const auto& vals = coord_values_[j];
    if (vals.size() <= 1) continue;
    const auto pos = static_cast<std::size_t>(std::lower_bound(vals.begin(), vals.end(), lv[j]) - vals.begin());
    for (std::size_t t = 1; t < vals.size(); ++t) out[k++] = pos == t ? 1.0 : 0.0;
  }
}

Vector WSupport::encode(std::size_t index) const {
  Vector out(static_cast<Eigen::Index>(encoded_dim_));
  encode_into(index, out.data());
  return out;
}

std::size_t Dataset::count_target() const {
  return static_cast<std::size_t>(std::count_if(samples.begin(), samples.end(), [](const auto& s) { return !s.e; }));
}

std::size_t Dataset::count_study() const { return samples.size() - count_target(); }

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset out;
  out.bounds = bounds;
  out.w_support = w_support;
  out.columns = columns;
  out.samples.reserve(indices.size());
  for (std::size_t i : indices) out.samples.push_back(samples.at(i));
  return out;
}

std::vector<Violation> validate(const Dataset& d) {
  std::vector<Violation> out;
  if (!(d.bounds.a < d.bounds.b)) out.push_back({std::nullopt, "outcome bounds require a < b"});
  if (d.columns.v_discrete.size() != d.columns.v_names.size()) {
    out.push_back({std::nullopt, "column metadata flags do not match V columns"});
  }
  if (d.columns.w_names.size() != d.w_support.dim() && d.w_support.size() > 0) {
    out.push_back({std::nullopt, "W names do not match W support dimension"});
  }
  for (std::size_t i = 0; i < d.samples.size(); ++i) {
    const auto& s = d.samples[i];
    if (static_cast<std::size_t>(s.v.size()) != d.dim_v()) out.push_back({i, "V has wrong dimension"});
    if (!s.v.allFinite()) out.push_back({i, "V not finite"});
    if (s.e) {
      if (s.w) out.push_back({i, "W present under E=1"});
      if (!s.a) out.push_back({i, "A missing under E=1"});
      if (!s.y) out.push_back({i, "Y missing under E=1"});
      if (s.a && *s.a != 0 && *s.a != 1) out.push_back({i, "A not binary"});
      if (s.y) {
        if (!std::isfinite(*s.y)) {
          out.push_back({i, "Y not finite"});
        } else if (*s.y < d.bounds.a || *s.y > d.bounds.b) {
          out.push_back({i, "Y outside [a,b]"});
        }
      }
    } else {
      if (!s.w) out.push_back({i, "W missing under E=0"});
      if (s.w && *s.w >= d.w_support.size()) out.push_back({i, "W not in support"});
      if (s.a) out.push_back({i, "A present under E=0"});
      if (s.y) out.push_back({i, "Y present under E=0"});
    }
  }
  return out;
}

void require_valid(const Dataset& dataset) {
  const auto v = validate(dataset);
  if (v.empty()) return;
  std::ostringstream msg;
  msg << v.size() << " dataset violation(s); first: ";
  if (v.front().sample) msg << "sample " << *v.front().sample << ": ";
  msg << v.front().rule;
  throw DataError(msg.str());
}

void require_both_populations(const Dataset& dataset) {
  const std::size_t t = dataset.count_target();
  if (t == 0 || t == dataset.size()) throw DataError("population overlap violation");
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("split fraction must lie in (0,1)");
  const std::size_t n = dataset.size();
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.index(i)]);
  const auto n1 = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  std::vector<std::size_t> first(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n1));
  std::vector<std::size_t> second(perm.begin() + static_cast<std::ptrdiff_t>(n1), perm.end());
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  std::pair<Dataset, Dataset> out{dataset.subset(first), dataset.subset(second)};
  for (const Dataset* half : {&out.first, &out.second}) {
    const std::size_t t = half->count_target();
    if (t == 0 || t == half->size()) throw DataError("degenerate split");
  }
  return out;
}

CovariateEncoder::CovariateEncoder(const WSupport& support, std::size_t dim_v, bool intercept)
    : support_(support), dim_v_(dim_v), intercept_(intercept) {}

void CovariateEncoder::encode_into(const Vector& v, std::size_t w_index, double* out) const {
  for (std::size_t j = 0; j < dim_v_; ++j) out[j] = v[static_cast<Eigen::Index>(j)];
  support_.encode_into(w_index, out + dim_v_);
  if (intercept_) out[dim_v_ + support_.encoded_dim()] = 1.0;
}

CovariateProfile CovariateEncoder::profile(const Vector& v, std::size_t w_index) const {
  CovariateProfile p;
  p.v = v;
  p.w_index = w_index;
  p.x.resize(static_cast<Eigen::Index>(dim()));
  encode_into(v, w_index, p.x.data());
  return p;
}

}  // namespace ecobounds
