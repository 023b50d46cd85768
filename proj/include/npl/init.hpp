#pragma once

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "npl/error.hpp"
#include "npl/model.hpp"
#include "npl/random.hpp"

namespace npl {

struct UniformInit {
  double lower = 0.0;
  double upper = 1.0;
};
struct NormalInit {
  double mean = 0.0;
  double variance = 1.0;
};
struct GammaInit {
  double shape = 1.0;
  double rate = 1.0;
};
/// 1 / Gamma(shape, rate = scale).
struct InverseGammaInit {
  double shape = 1.0;
  double scale = 1.0;
};
struct LogNormalInit {
  double mu = 0.0;
  double sigma2 = 1.0;
};
/// Symmetric Dirichlet over the whole block.
struct DirichletInit {
  double concentration = 1.0;
};

using InitDistribution =
    std::variant<UniformInit, NormalInit, GammaInit, InverseGammaInit, LogNormalInit, DirichletInit>;

inline void validate_distribution(const std::string& block, const InitDistribution& dist) {
  auto fail = [&](const char* what) { throw ConfigError("init." + block + ": " + what); };
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, UniformInit>) {
          if (!(d.lower < d.upper) || !std::isfinite(d.lower) || !std::isfinite(d.upper)) fail("uniform needs finite lower < upper");
        } else if constexpr (std::is_same_v<T, NormalInit>) {
          if (!(d.variance > 0.0) || !std::isfinite(d.mean)) fail("normal needs finite mean and variance > 0");
        } else if constexpr (std::is_same_v<T, GammaInit>) {
          if (!(d.shape > 0.0) || !(d.rate > 0.0)) fail("gamma needs shape > 0 and rate > 0");
        } else if constexpr (std::is_same_v<T, InverseGammaInit>) {
          if (!(d.shape > 0.0) || !(d.scale > 0.0)) fail("inverse gamma needs shape > 0 and scale > 0");
        } else if constexpr (std::is_same_v<T, LogNormalInit>) {
          if (!(d.sigma2 > 0.0) || !std::isfinite(d.mu)) fail("lognormal needs finite mu and sigma2 > 0");
        } else {
          if (!(d.concentration > 0.0)) fail("dirichlet needs concentration > 0");
        }
      },
      dist);
}

inline std::string describe(const InitDistribution& dist) {
  return std::visit(
      [](const auto& d) -> std::string {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, UniformInit>) {
          return "uniform(" + std::to_string(d.lower) + "," + std::to_string(d.upper) + ")";
        } else if constexpr (std::is_same_v<T, NormalInit>) {
          return "normal(" + std::to_string(d.mean) + "," + std::to_string(d.variance) + ")";
        } else if constexpr (std::is_same_v<T, GammaInit>) {
          return "gamma(" + std::to_string(d.shape) + "," + std::to_string(d.rate) + ")";
        } else if constexpr (std::is_same_v<T, InverseGammaInit>) {
          return "inv_gamma(" + std::to_string(d.shape) + "," + std::to_string(d.scale) + ")";
        } else if constexpr (std::is_same_v<T, LogNormalInit>) {
          return "lognormal(" + std::to_string(d.mu) + "," + std::to_string(d.sigma2) + ")";
        } else {
          return "dirichlet(" + std::to_string(d.concentration) + ")";
        }
      },
      dist);
}

/// Per-block initialisation distributions for random restarts.
class InitSampler {
 public:
  InitSampler() = default;
  InitSampler(std::initializer_list<std::pair<const std::string, InitDistribution>> blocks) : blocks_(blocks) {}

  InitSampler& set(const std::string& block, InitDistribution dist) {
    blocks_[block] = dist;
    return *this;
  }

  const std::map<std::string, InitDistribution>& blocks() const { return blocks_; }

  /// Every model block must have exactly one distribution and nothing else
  /// may be specified.
  void validate(const std::vector<ParameterBlock>& layout) const {
    for (const auto& b : layout) {
      if (!blocks_.contains(b.name)) throw ConfigError("init sampler is missing parameter block '" + b.name + "'");
    }
    for (const auto& [name, dist] : blocks_) {
      bool known = false;
      for (const auto& b : layout) known = known || b.name == name;
      if (!known) throw ConfigError("init sampler names unknown parameter block '" + name + "'");
      validate_distribution(name, dist);
    }
  }

  std::vector<double> sample(const std::vector<ParameterBlock>& layout, Rng& rng) const {
    std::vector<double> theta;
    for (const auto& b : layout) {
      const auto it = blocks_.find(b.name);
      if (it == blocks_.end()) throw ConfigError("init sampler is missing parameter block '" + b.name + "'");
      if (const auto* dir = std::get_if<DirichletInit>(&it->second)) {
        const std::vector<double> conc(b.size, dir->concentration);
        const auto w = dirichlet(conc, rng);
        theta.insert(theta.end(), w.begin(), w.end());
        continue;
      }
      for (std::size_t i = 0; i < b.size; ++i) theta.push_back(draw_scalar(it->second, rng));
    }
    return theta;
  }

 private:
  static double draw_scalar(const InitDistribution& dist, Rng& rng) {
    return std::visit(
        [&](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, UniformInit>) {
            return d.lower + (d.upper - d.lower) * uniform01(rng);
          } else if constexpr (std::is_same_v<T, NormalInit>) {
            return d.mean + std::sqrt(d.variance) * standard_normal(rng);
          } else if constexpr (std::is_same_v<T, GammaInit>) {
            return standard_gamma(d.shape, rng) / d.rate;
          } else if constexpr (std::is_same_v<T, InverseGammaInit>) {
            return d.scale / standard_gamma(d.shape, rng);
          } else if constexpr (std::is_same_v<T, LogNormalInit>) {
            return std::exp(d.mu + std::sqrt(d.sigma2) * standard_normal(rng));
          } else {
            throw ConfigError("dirichlet init applies to whole blocks only");
          }
        },
        dist);
  }

  std::map<std::string, InitDistribution> blocks_;
};

}  // namespace npl
